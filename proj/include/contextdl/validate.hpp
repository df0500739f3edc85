#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "contextdl/chase.hpp"
#include "contextdl/match.hpp"
#include "contextdl/model.hpp"

namespace contextdl {

// ---------------------------------------------------------------------------
// Trust policy and confidence aggregation
// ---------------------------------------------------------------------------

/// User-tunable trust handling: cond decides which sources take part at a
/// given tau_in, aggregate folds the degrees of the facts an answer uses.
/// Defaults are the paper's: cond is tau >= tau_in, aggregate is min.
struct TrustPolicy {
    TrustCond cond;
    std::function<Degree(const std::vector<Degree>&)> aggregate;

    static TrustPolicy defaults();
};

/// Minimum of a non-empty degree multiset.
Degree aggregate_confidence(const std::vector<Degree>& degrees);

enum class EgdMode { Lenient, Strict };

struct ValidatorOptions {
    EgdMode egd_mode = EgdMode::Lenient;
    TrustPolicy policy = TrustPolicy::defaults();
};

// ---------------------------------------------------------------------------
// Constraint checks on a single ground atom
// ---------------------------------------------------------------------------

struct Violation {
    char condition = ' ';  // 'b' (two-atom negative), 'c' (single negative), 'd' (EGD)
    std::string constraint_id;
    Atom subject;      // the ground atom that triggered the constraint
    Homomorphism nu;   // the constraint-atom match witnessing the trigger
    std::string detail;
};

/// Conditions (b) and (c): every way a negative constraint is witnessed at L
/// over the trusted facts.
std::vector<Violation> check_negative(const Atom& l, const Context& ctx, const TrustedView& view);

/// Condition (d): for every EGD atom matching L, the projection sub-query
/// must agree with the matched values. Lenient mode passes on an empty
/// answer; strict mode demands exactly the expected singleton.
std::vector<Violation> check_egd(const Atom& l, const Context& ctx, const TrustedView& view,
                                 EgdMode mode);

// ---------------------------------------------------------------------------
// Candidate and valid answers
// ---------------------------------------------------------------------------

struct Rejection {
    std::vector<Term> tuple;
    char condition = ' ';  // 'a'..'d', or 't' when only the tau_in filter failed
    std::string constraint_id;
    Atom offending;
    std::string detail;
};

struct ValidationReport {
    std::vector<ScoredAnswer> valid;   // sorted by tuple
    std::vector<Rejection> rejected;   // sorted by tuple
};

/// Answers over the trusted facts with provisional degrees: per tuple the
/// best (under aggregate) over its body matches.
std::vector<ScoredAnswer> candidate_answers(const ConjunctiveQuery& q, Degree tau_in,
                                            const FederatedStore& store,
                                            const ValidatorOptions& options = {});

/// Reference validator: direct implementation of the valid-answer
/// conditions (a)-(d) by chasing each body image and checking every global
/// witness of the chase against the trusted facts.
ValidationReport valid_answers(const ConjunctiveQuery& q, Degree tau_in, const Context& ctx,
                               const FederatedStore& store, const ValidatorOptions& options = {});

// ---------------------------------------------------------------------------
// Compiled validator
// ---------------------------------------------------------------------------

namespace detail {
struct CanonicalNegative;
}  // namespace detail

/// Precompiles, once per (query, context): the symbolic chase of the query
/// body (guarded, since constraint bodies are single atoms) and the
/// per-chase-atom constraint templates. Candidates then stream through the
/// precompiled structure. Results are identical to valid_answers.
class CompiledValidator {
public:
    CompiledValidator(ConjunctiveQuery query, Context ctx);
    ~CompiledValidator();
    CompiledValidator(CompiledValidator&&) noexcept;
    CompiledValidator& operator=(CompiledValidator&&) noexcept;

    ValidationReport run(const FederatedStore& store, Degree tau_in,
                         const ValidatorOptions& options = {}) const;

    /// Guarded chase atom over query variables, constants and nulls.
    struct SymbolicAtom {
        Atom atom;
        std::vector<std::pair<Term, Term>> guard;  // equalities on query vars
        std::string origin_constraint;             // empty for body atoms
        std::vector<int> neg1_templates;
        std::vector<std::pair<int, int>> neg2_templates;  // (constraint index, side)
        std::vector<std::pair<int, int>> egd_templates;   // (constraint index, side)
    };

    const std::vector<SymbolicAtom>& symbolic_atoms() const { return atoms_; }

private:
    ConjunctiveQuery query_;
    Context context_;
    std::vector<SymbolicAtom> atoms_;
    std::vector<detail::CanonicalNegative> neg1_, neg2_;
};

ValidationReport compiled_valid_answers(const ConjunctiveQuery& q, Degree tau_in,
                                        const Context& ctx, const FederatedStore& store,
                                        const ValidatorOptions& options = {});

}  // namespace contextdl
