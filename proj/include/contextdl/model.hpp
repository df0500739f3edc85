#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "contextdl/degree.hpp"
#include "contextdl/diagnostics.hpp"

namespace contextdl {

// ---------------------------------------------------------------------------
// Terms, atoms, facts
// ---------------------------------------------------------------------------

enum class TermKind : std::uint8_t { Constant = 0, Null = 1, Variable = 2 };

/// A constant, labeled null, or variable. The kind is fixed at construction;
/// a constant and a variable with the same spelling are distinct terms.
class Term {
public:
    Term() : kind_(TermKind::Constant) {}

    static Term constant(std::string symbol) { return Term(TermKind::Constant, std::move(symbol)); }
    static Term null(std::string label) { return Term(TermKind::Null, std::move(label)); }
    static Term variable(std::string name) { return Term(TermKind::Variable, std::move(name)); }

    TermKind kind() const { return kind_; }
    const std::string& text() const { return text_; }

    bool is_constant() const { return kind_ == TermKind::Constant; }
    bool is_null() const { return kind_ == TermKind::Null; }
    bool is_variable() const { return kind_ == TermKind::Variable; }

    friend bool operator==(const Term&, const Term&) = default;
    friend auto operator<=>(const Term&, const Term&) = default;

private:
    Term(TermKind kind, std::string text) : kind_(kind), text_(std::move(text)) {}

    TermKind kind_;
    std::string text_;
};

struct Atom {
    std::string predicate;
    std::vector<Term> terms;

    int arity() const { return static_cast<int>(terms.size()); }
    bool is_ground() const;
    bool has_variables() const;
    std::set<Term> variables() const;
    std::set<Term> nulls() const;

    friend bool operator==(const Atom&, const Atom&) = default;
    friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// An atom whose terms are all constants. Groundness is enforced at
/// construction.
class Fact {
public:
    explicit Fact(Atom atom);
    Fact(std::string predicate, std::vector<Term> terms);

    const Atom& atom() const { return atom_; }
    const std::string& predicate() const { return atom_.predicate; }
    const std::vector<Term>& terms() const { return atom_.terms; }

    friend bool operator==(const Fact& a, const Fact& b) { return a.atom_ == b.atom_; }
    friend auto operator<=>(const Fact& a, const Fact& b) { return a.atom_ <=> b.atom_; }

private:
    Atom atom_;
};

/// Comparison formula X = a or X = Y; the left side is always a variable.
class ComparisonAtom {
public:
    ComparisonAtom(Term left, Term right);

    const Term& left() const { return left_; }
    const Term& right() const { return right_; }

    friend bool operator==(const ComparisonAtom&, const ComparisonAtom&) = default;
    friend auto operator<=>(const ComparisonAtom&, const ComparisonAtom&) = default;

private:
    Term left_;
    Term right_;
};

// ---------------------------------------------------------------------------
// Homomorphisms
// ---------------------------------------------------------------------------

/// A finite term mapping that is the identity on constants. Nulls may map
/// only to constants or nulls; variables may map to anything.
class Homomorphism {
public:
    // Returns false when the binding would break the kind rules or conflict
    // with an existing entry.
    bool bind(const Term& from, const Term& to);

    const Term& apply(const Term& t) const;
    Atom apply(const Atom& a) const;
    std::vector<Atom> apply(const std::vector<Atom>& atoms) const;

    std::optional<Term> lookup(const Term& t) const;
    const std::map<Term, Term>& mapping() const { return mapping_; }
    bool empty() const { return mapping_.empty(); }

    friend bool operator==(const Homomorphism&, const Homomorphism&) = default;

private:
    std::map<Term, Term> mapping_;
};

/// Union-find closure of comparison formulas. Merging two distinct constants
/// marks the closure unsatisfiable.
class EqualityClosure {
public:
    bool merge(const Term& a, const Term& b);
    bool add(const ComparisonAtom& c) { return merge(c.left(), c.right()); }
    Term representative(const Term& t) const;
    bool satisfiable() const { return satisfiable_; }

private:
    mutable std::map<Term, Term> parent_;
    std::map<Term, int> size_;
    bool satisfiable_ = true;

    Term find(const Term& t) const;
};

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

struct ConjunctiveQuery {
    std::string head_predicate;
    std::vector<Term> head;
    std::vector<Atom> body;
    std::vector<ComparisonAtom> comparisons;
    Degree tau_in;

    friend bool operator==(const ConjunctiveQuery&, const ConjunctiveQuery&) = default;
};

/// Checks range restriction, comparison scoping and satisfiability. Returns
/// the problems found; position information is left for the caller to fill.
std::vector<Diagnostic> check_query(const ConjunctiveQuery& q);

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

struct PositiveConstraint {
    std::string id;
    Atom body;
    Atom head;

    // Variables shared between body and head (universally quantified).
    std::set<Term> frontier() const;
    // Head variables absent from the body (existentially quantified).
    std::set<Term> existentials() const;

    friend bool operator==(const PositiveConstraint&, const PositiveConstraint&) = default;
};

struct NegativeConstraint {
    std::string id;
    std::vector<Atom> atoms;  // one or two
    std::vector<ComparisonAtom> comparisons;

    friend bool operator==(const NegativeConstraint&, const NegativeConstraint&) = default;
};

struct EgdConstraint {
    std::string id;
    Atom atom1;
    Atom atom2;
    // Each pair draws its first member from var(atom1) and its second from
    // var(atom2).
    std::vector<std::pair<Term, Term>> equalities;

    friend bool operator==(const EgdConstraint&, const EgdConstraint&) = default;
};

struct Context {
    std::vector<PositiveConstraint> positives;       // C_P, in file order
    std::vector<NegativeConstraint> negatives1;      // C_N1 (single atom)
    std::vector<NegativeConstraint> negatives2;      // C_N2 (two atoms)
    std::vector<EgdConstraint> egds;                 // C_K

    bool empty() const {
        return positives.empty() && negatives1.empty() && negatives2.empty() && egds.empty();
    }

    friend bool operator==(const Context&, const Context&) = default;
};

/// Shape checks for the constraint classes (atom counts, variable sharing,
/// EGD equality orientation). Weak acyclicity lives in chase.hpp.
std::vector<Diagnostic> check_constraint(const PositiveConstraint& c);
std::vector<Diagnostic> check_constraint(const NegativeConstraint& c);
std::vector<Diagnostic> check_constraint(const EgdConstraint& c);

// ---------------------------------------------------------------------------
// Sources and the federated store
// ---------------------------------------------------------------------------

class SourceDatabase {
public:
    SourceDatabase() = default;
    SourceDatabase(std::string id, Degree tau);

    const std::string& id() const { return id_; }
    Degree tau() const { return tau_; }

    void add(Fact fact);  // duplicate-free
    bool contains(const Fact& fact) const;
    const std::vector<Fact>& facts() const { return facts_; }  // canonical order

    friend bool operator==(const SourceDatabase&, const SourceDatabase&) = default;

private:
    std::string id_;
    Degree tau_;
    std::vector<Fact> facts_;  // kept sorted
};

/// Predicate arities, locked at first use.
class Schema {
public:
    // False when pred is already declared with a different arity.
    bool declare(const std::string& predicate, int arity);
    std::optional<int> arity(const std::string& predicate) const;
    bool knows(const std::string& predicate) const;
    const std::map<std::string, int>& predicates() const { return arities_; }

private:
    std::map<std::string, int> arities_;
};

class TrustedView;

using TrustCond = std::function<bool(Degree tau_in, Degree tau)>;

class FederatedStore {
public:
    // Declares the source's predicates as a side effect; arity clashes are
    // kept (first wins) and surface through validate_program.
    void add_source(SourceDatabase source);
    bool declare(const std::string& predicate, int arity) { return schema_.declare(predicate, arity); }

    const std::vector<SourceDatabase>& sources() const { return sources_; }
    const Schema& schema() const { return schema_; }

    // Every stored fact reports the ids of all sources containing it.
    std::vector<std::string> sources_of(const Fact& fact) const;

    TrustedView trusted(Degree tau_in) const;
    TrustedView trusted(Degree tau_in, const TrustCond& cond) const;

private:
    std::vector<SourceDatabase> sources_;
    Schema schema_;
};

/// Immutable snapshot of the facts from sources accepted by the trust
/// condition, indexed per predicate and argument position. A fact present in
/// several trusted sources carries all their ids and its best degree.
class TrustedView {
public:
    struct StoredFact {
        Fact fact;
        std::vector<std::string> source_ids;  // sorted
        Degree degree;                        // max over the trusted sources
    };

    TrustedView(const FederatedStore& store, Degree tau_in, const TrustCond& cond);

    Degree tau_in() const { return tau_in_; }
    const Schema& schema() const { return schema_; }

    const std::vector<StoredFact>& facts(const std::string& predicate) const;
    const StoredFact* find(const Atom& ground_atom) const;
    // Indices (into facts(predicate)) of facts whose argument at `position`
    // equals `value`; canonical order.
    const std::vector<int>& candidates(const std::string& predicate, int position,
                                       const Term& value) const;

    std::size_t fact_count() const;
    std::vector<StoredFact> all_facts() const;  // canonical order

private:
    Degree tau_in_;
    Schema schema_;
    std::map<std::string, std::vector<StoredFact>> by_predicate_;
    // (predicate, position, constant text) -> fact indices
    std::map<std::string, std::vector<std::map<Term, std::vector<int>>>> index_;
    static const std::vector<StoredFact> kNoFacts;
    static const std::vector<int> kNoIndices;
};

// ---------------------------------------------------------------------------
// Scored answers
// ---------------------------------------------------------------------------

/// One fact consumed by an answer, with its provenance.
struct UsedFact {
    Fact fact;
    std::vector<std::string> source_ids;
    Degree degree;

    friend bool operator==(const UsedFact&, const UsedFact&) = default;
    friend auto operator<=>(const UsedFact&, const UsedFact&) = default;
};

struct CheckRecord {
    char condition = ' ';  // 'a'..'d'
    std::string constraint_id;
    Atom subject;
    bool passed = false;

    friend bool operator==(const CheckRecord&, const CheckRecord&) = default;
};

struct AnswerWitness {
    Homomorphism h_t;                    // body homomorphism
    Homomorphism mu;                     // chase-witness grounding (nulls -> constants)
    std::vector<UsedFact> body_facts;    // h_t(body(q)) with provenance
    std::vector<UsedFact> entailed_facts;  // mu-grounded chase atoms beyond the body
    std::vector<CheckRecord> checks;

    std::vector<Degree> degrees() const;
};

struct ScoredAnswer {
    std::vector<Term> tuple;  // constants
    Degree tau_out;
    AnswerWitness witness;
};

}  // namespace contextdl
