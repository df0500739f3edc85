#pragma once

// Internals shared by the naive and compiled validators. Not part of the
// public surface.

#include <optional>
#include <set>
#include <vector>

#include "contextdl/validate.hpp"

namespace contextdl::detail {

bool pattern_matchable(const std::vector<Atom>& pattern, const TrustedView& view);
std::vector<MatchResult> safe_homomorphisms(const std::vector<Atom>& pattern,
                                            const TrustedView& view);
bool safe_exists(const std::vector<Atom>& pattern, const TrustedView& view);
void safe_for_each(const std::vector<Atom>& pattern, const TrustedView& view,
                   const std::function<bool(const MatchResult&)>& visit);

/// Most-constrained-first join order: repeatedly picks the atom with the
/// fewest slots still unbound. Witness streams stay deterministic while
/// avoiding unindexed scans over all-null atoms.
std::vector<Atom> order_for_matching(const std::vector<Atom>& atoms);

/// Negative constraint with its comparisons folded into the atoms.
struct CanonicalNegative {
    std::string id;
    std::vector<Atom> atoms;
    bool satisfiable = true;
};

CanonicalNegative canonicalize_negative(const NegativeConstraint& c);

std::optional<Homomorphism> match_constraint_atom(const Atom& pattern, const Atom& candidate);

std::optional<Violation> check_negative1_at(const CanonicalNegative& c, const Atom& l,
                                            const TrustedView& view,
                                            std::vector<CheckRecord>* passes);
std::optional<Violation> check_negative2_at(const CanonicalNegative& c, int side, const Atom& l,
                                            const TrustedView& view,
                                            std::vector<CheckRecord>* passes);
std::optional<Violation> check_egd_at(const EgdConstraint& c, int side, const Atom& l,
                                      const TrustedView& view, EgdMode mode,
                                      std::vector<CheckRecord>* passes);

std::vector<UsedFact> collect_used(const std::set<Atom>& grounds, const TrustedView& view);
Degree tau_of(const std::vector<UsedFact>& used, const TrustPolicy& policy);

/// Chase atom in creation order with the id of the constraint that produced
/// it (empty for instance atoms).
struct CreationAtom {
    Atom atom;
    std::string origin;
};

Rejection blame_condition_a(const std::vector<Term>& tuple,
                            const std::vector<CreationAtom>& creation, const TrustedView& view);

}  // namespace contextdl::detail
