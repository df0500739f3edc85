#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "contextdl/model.hpp"

namespace contextdl {

// ---------------------------------------------------------------------------
// Weak acyclicity
// ---------------------------------------------------------------------------

/// A predicate argument position, written `pred.i` (1-based) in diagnostics.
struct PredicatePosition {
    std::string predicate;
    int index = 0;

    std::string to_string() const { return predicate + "." + std::to_string(index + 1); }

    friend bool operator==(const PredicatePosition&, const PredicatePosition&) = default;
    friend auto operator<=>(const PredicatePosition&, const PredicatePosition&) = default;
};

struct DependencyEdge {
    PredicatePosition from;
    PredicatePosition to;
    bool special = false;  // frontier position feeding an existential position
    std::string constraint_id;

    friend bool operator==(const DependencyEdge&, const DependencyEdge&) = default;
    friend auto operator<=>(const DependencyEdge&, const DependencyEdge&) = default;
};

/// The position dependency graph of a set of TGDs: for every frontier
/// variable, normal edges from each of its body positions to each of its
/// head positions, and special edges from each of its body positions to
/// every existential head position.
struct DependencyGraph {
    std::vector<PredicatePosition> nodes;
    std::vector<DependencyEdge> edges;

    static DependencyGraph build(const std::vector<PositiveConstraint>& positives);
};

struct AcyclicityResult {
    bool ok = true;
    std::vector<DependencyEdge> cycle;  // a cycle through a special edge, when !ok
};

/// True iff no cycle of the dependency graph passes through a special edge.
AcyclicityResult is_weakly_acyclic(const std::vector<PositiveConstraint>& positives);

std::string describe_cycle(const std::vector<DependencyEdge>& cycle);

// ---------------------------------------------------------------------------
// Chase
// ---------------------------------------------------------------------------

/// Mints globally unique labeled nulls (_:n1, _:n2, ...) for one engine run.
class NullMinter {
public:
    Term fresh() { return Term::null("n" + std::to_string(next_++)); }

    // Moves the counter past any `nK` labels already present, so replayed
    // instances never collide with fresh nulls.
    void bump_past(const std::vector<Atom>& atoms);

    int next_index() const { return next_; }

private:
    int next_ = 1;
};

struct ChaseStep {
    std::string constraint_id;
    Atom trigger;
    Homomorphism binding;  // frontier and existential assignments
    Atom produced;
    std::vector<Term> fresh_nulls;
};

struct NullOrigin {
    std::string constraint_id;
    Atom trigger;
};

struct ChaseResult {
    std::vector<Atom> input;          // canonical order
    std::set<Atom> atoms;             // input plus produced, as a set
    std::vector<ChaseStep> trace;     // firing order
    std::map<Term, NullOrigin> null_registry;

    /// Input atoms (canonical order) followed by productions in firing order.
    std::vector<Atom> atoms_in_creation_order() const;
};

/// Restricted chase to fixpoint: a constraint fires on an atom its body maps
/// into only when no extension of the trigger already satisfies the head;
/// firing adds the head image with fresh nulls for the existential
/// variables. Deterministic: constraints in file order, triggers in
/// canonical atom order. Refuses non-weakly-acyclic constraint sets.
ChaseResult chase(const std::vector<PositiveConstraint>& positives, std::vector<Atom> instance,
                  NullMinter& minter);
ChaseResult chase(const std::vector<PositiveConstraint>& positives, std::vector<Atom> instance);

namespace detail {
/// Chase without the acyclicity precheck; callers must have verified it.
ChaseResult chase_unchecked(const std::vector<PositiveConstraint>& positives,
                            std::vector<Atom> instance, NullMinter& minter);
/// Single-atom trigger match: body variables may bind to constants or nulls
/// of the candidate atom, body constants match only themselves.
std::optional<Homomorphism> match_rule_atom(const Atom& pattern, const Atom& candidate);
}  // namespace detail

}  // namespace contextdl
