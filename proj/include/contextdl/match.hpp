#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "contextdl/model.hpp"

namespace contextdl {

/// One way a pattern maps into the trusted facts. Applying h to the pattern
/// atoms yields exactly facts_used, in pattern order.
struct MatchResult {
    Homomorphism h;
    std::vector<UsedFact> facts_used;
};

/// Enumerates every homomorphism from the pattern into the view: constants
/// are fixed, variables and nulls bind to constants (nulls act as variables
/// scoped to the whole pattern). Enumeration is deterministic: atoms
/// left-to-right, candidate facts in canonical order. The callback returns
/// false to stop early.
///
/// Throws EngineError(UnknownPredicate) when a pattern predicate is not
/// declared in the view's schema.
void for_each_homomorphism(const std::vector<Atom>& pattern,
                           const std::vector<ComparisonAtom>& comparisons,
                           const TrustedView& view,
                           const std::function<bool(const MatchResult&)>& visit);

std::vector<MatchResult> homomorphisms(const std::vector<Atom>& pattern,
                                       const std::vector<ComparisonAtom>& comparisons,
                                       const TrustedView& view);

bool has_homomorphism(const std::vector<Atom>& pattern,
                      const std::vector<ComparisonAtom>& comparisons, const TrustedView& view);

/// A query answer: the head tuple together with every body match producing it.
struct EvalAnswer {
    std::vector<Term> tuple;
    std::vector<MatchResult> matches;
};

/// Evaluates q over the facts of sources trusted at tau_in, grouping matches
/// by head tuple. Answers are duplicate-free and sorted by tuple.
std::vector<EvalAnswer> evaluate(const ConjunctiveQuery& q, const TrustedView& view);
std::vector<EvalAnswer> evaluate(const ConjunctiveQuery& q, const FederatedStore& store,
                                 Degree tau_in);

/// Most general unifier of two atoms, or nullopt. Deterministic: on
/// variable-variable pairs the lexicographically smaller name is bound,
/// classes keep established representatives (union by size). The result is
/// idempotent and every unifier of the two atoms factors through it.
std::optional<Homomorphism> unify(const Atom& a, const Atom& b);

}  // namespace contextdl
