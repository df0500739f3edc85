#include "contextdl/validate.hpp"

#include <algorithm>

#include "contextdl/render.hpp"
#include "contextdl/validate_detail.hpp"

namespace contextdl {

TrustPolicy TrustPolicy::defaults() {
    TrustPolicy p;
    p.cond = [](Degree tau_in, Degree tau) { return tau >= tau_in; };
    p.aggregate = [](const std::vector<Degree>& degrees) { return aggregate_confidence(degrees); };
    return p;
}

Degree aggregate_confidence(const std::vector<Degree>& degrees) {
    if (degrees.empty())
        throw EngineError(Errc::EmptyDegreeSet, "cannot aggregate an empty degree multiset");
    return *std::min_element(degrees.begin(), degrees.end());
}

namespace detail {

// ---------------------------------------------------------------------------
// Tolerant matching: a predicate the trusted view has never heard of simply
// has no facts, which must read as "no witness", not as an engine error.
// ---------------------------------------------------------------------------

bool pattern_matchable(const std::vector<Atom>& pattern, const TrustedView& view) {
    for (const Atom& a : pattern) {
        auto arity = view.schema().arity(a.predicate);
        if (!arity || *arity != a.arity()) return false;
    }
    return true;
}

std::vector<MatchResult> safe_homomorphisms(const std::vector<Atom>& pattern,
                                            const TrustedView& view) {
    if (!pattern_matchable(pattern, view)) return {};
    return homomorphisms(pattern, {}, view);
}

bool safe_exists(const std::vector<Atom>& pattern, const TrustedView& view) {
    if (!pattern_matchable(pattern, view)) return false;
    return has_homomorphism(order_for_matching(pattern), {}, view);
}

void safe_for_each(const std::vector<Atom>& pattern, const TrustedView& view,
                   const std::function<bool(const MatchResult&)>& visit) {
    if (!pattern_matchable(pattern, view)) return;
    for_each_homomorphism(pattern, {}, view, visit);
}

std::vector<Atom> order_for_matching(const std::vector<Atom>& atoms) {
    std::vector<Atom> remaining = atoms;
    std::vector<Atom> out;
    out.reserve(atoms.size());
    std::set<Term> bound;
    while (!remaining.empty()) {
        std::size_t best = 0;
        int best_unbound = -1;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            std::set<Term> unbound;
            for (const Term& t : remaining[i].terms)
                if (!t.is_constant() && !bound.count(t)) unbound.insert(t);
            int n = static_cast<int>(unbound.size());
            if (best_unbound < 0 || n < best_unbound) {
                best_unbound = n;
                best = i;
            }
        }
        for (const Term& t : remaining[best].terms)
            if (!t.is_constant()) bound.insert(t);
        out.push_back(std::move(remaining[best]));
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical negative constraints: comparisons folded into the atoms
// ---------------------------------------------------------------------------

CanonicalNegative canonicalize_negative(const NegativeConstraint& c) {
    CanonicalNegative out;
    out.id = c.id;
    EqualityClosure closure;
    for (const ComparisonAtom& cmp : c.comparisons) closure.add(cmp);
    out.satisfiable = closure.satisfiable();
    if (!out.satisfiable) return out;
    for (const Atom& a : c.atoms) {
        Atom rewritten{a.predicate, {}};
        for (const Term& t : a.terms)
            rewritten.terms.push_back(t.is_variable() ? closure.representative(t) : t);
        out.atoms.push_back(std::move(rewritten));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-constraint checks against one ground atom
// ---------------------------------------------------------------------------

std::optional<Violation> check_negative1_at(const CanonicalNegative& c, const Atom& l,
                                            const TrustedView& view,
                                            std::vector<CheckRecord>* passes) {
    (void)view;
    if (!c.satisfiable) return std::nullopt;
    auto nu = detail::match_constraint_atom(c.atoms[0], l);
    if (!nu) return std::nullopt;
    Violation v;
    v.condition = 'c';
    v.constraint_id = c.id;
    v.subject = l;
    v.nu = *nu;
    v.detail = "atom matches forbidden pattern " + render_atom(c.atoms[0], TermStyle::Ground);
    (void)passes;  // a match here is always a violation, never a pass
    return v;
}

std::optional<Violation> check_negative2_at(const CanonicalNegative& c, int side, const Atom& l,
                                            const TrustedView& view,
                                            std::vector<CheckRecord>* passes) {
    if (!c.satisfiable) return std::nullopt;
    auto nu = detail::match_constraint_atom(c.atoms[side], l);
    if (!nu) return std::nullopt;
    Atom residual = nu->apply(c.atoms[1 - side]);
    if (safe_exists({residual}, view)) {
        Violation v;
        v.condition = 'b';
        v.constraint_id = c.id;
        v.subject = l;
        v.nu = *nu;
        v.detail = "companion atom " + render_atom(residual, TermStyle::Ground) +
                   " holds over the trusted facts";
        return v;
    }
    if (passes) passes->push_back({'b', c.id, l, true});
    return std::nullopt;
}

std::optional<Violation> check_egd_at(const EgdConstraint& c, int side, const Atom& l,
                                      const TrustedView& view, EgdMode mode,
                                      std::vector<CheckRecord>* passes) {
    const Atom& own = side == 0 ? c.atom1 : c.atom2;
    const Atom& other = side == 0 ? c.atom2 : c.atom1;
    auto nu = detail::match_constraint_atom(own, l);
    if (!nu) return std::nullopt;

    std::vector<Term> expected;
    std::vector<Term> projection;  // other-side equality variables
    for (const auto& [x, y] : c.equalities) {
        expected.push_back(nu->apply(side == 0 ? x : y));
        projection.push_back(nu->apply(side == 0 ? y : x));
    }

    Atom residual = nu->apply(other);
    std::set<std::vector<Term>> answers;
    if (pattern_matchable({residual}, view)) {
        for_each_homomorphism({residual}, {}, view, [&](const MatchResult& m) {
            std::vector<Term> tuple;
            tuple.reserve(projection.size());
            for (const Term& t : projection) tuple.push_back(m.h.apply(t));
            answers.insert(std::move(tuple));
            return true;
        });
    }

    bool violated;
    std::string why;
    if (answers.empty()) {
        violated = mode == EgdMode::Strict;
        why = "sub-query over " + render_atom(residual, TermStyle::Ground) + " has no answer";
    } else if (answers.size() == 1 && *answers.begin() == expected) {
        violated = false;
    } else {
        violated = true;
        std::string got;
        for (const auto& t : answers) {
            if (!got.empty()) got += " ";
            got += render_tuple(t);
        }
        why = "sub-query over " + render_atom(residual, TermStyle::Ground) + " yields " + got +
              ", expected " + render_tuple(expected);
    }
    if (!violated) {
        if (passes) passes->push_back({'d', c.id, l, true});
        return std::nullopt;
    }
    Violation v;
    v.condition = 'd';
    v.constraint_id = c.id;
    v.subject = l;
    v.nu = *nu;
    v.detail = why;
    return v;
}

std::optional<Homomorphism> match_constraint_atom(const Atom& pattern, const Atom& candidate) {
    return contextdl::detail::match_rule_atom(pattern, candidate);
}

// ---------------------------------------------------------------------------
// Witness bookkeeping
// ---------------------------------------------------------------------------

std::vector<UsedFact> collect_used(const std::set<Atom>& grounds, const TrustedView& view) {
    std::vector<UsedFact> out;
    for (const Atom& a : grounds) {
        const TrustedView::StoredFact* sf = view.find(a);
        if (sf) out.push_back({sf->fact, sf->source_ids, sf->degree});
    }
    return out;
}

Degree tau_of(const std::vector<UsedFact>& used, const TrustPolicy& policy) {
    if (used.empty()) return Degree::one();
    std::vector<Degree> degrees;
    degrees.reserve(used.size());
    for (const UsedFact& f : used) degrees.push_back(f.degree);
    return policy.aggregate(degrees);
}

Rejection blame_condition_a(const std::vector<Term>& tuple,
                            const std::vector<CreationAtom>& creation, const TrustedView& view) {
    std::vector<Atom> prefix;
    for (const CreationAtom& ca : creation) {
        prefix.push_back(ca.atom);
        if (!safe_exists(prefix, view)) {
            Rejection r;
            r.tuple = tuple;
            r.condition = 'a';
            r.constraint_id = ca.origin;
            r.offending = ca.atom;
            r.detail = "no trusted match for " + render_atom(ca.atom, TermStyle::Ground);
            return r;
        }
    }
    // Unreachable: the caller only blames when the full set has no witness,
    // and the full set is the last prefix.
    Rejection r;
    r.tuple = tuple;
    r.condition = 'a';
    r.detail = "no global witness";
    return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public checks
// ---------------------------------------------------------------------------

std::vector<Violation> check_negative(const Atom& l, const Context& ctx, const TrustedView& view) {
    std::vector<Violation> out;
    for (const NegativeConstraint& c : ctx.negatives2) {
        detail::CanonicalNegative canon = detail::canonicalize_negative(c);
        for (int side = 0; side < 2; ++side)
            if (auto v = detail::check_negative2_at(canon, side, l, view, nullptr))
                out.push_back(std::move(*v));
    }
    for (const NegativeConstraint& c : ctx.negatives1) {
        detail::CanonicalNegative canon = detail::canonicalize_negative(c);
        if (auto v = detail::check_negative1_at(canon, l, view, nullptr)) out.push_back(std::move(*v));
    }
    return out;
}

std::vector<Violation> check_egd(const Atom& l, const Context& ctx, const TrustedView& view,
                                 EgdMode mode) {
    std::vector<Violation> out;
    for (const EgdConstraint& c : ctx.egds)
        for (int side = 0; side < 2; ++side)
            if (auto v = detail::check_egd_at(c, side, l, view, mode, nullptr))
                out.push_back(std::move(*v));
    return out;
}

// ---------------------------------------------------------------------------
// Candidate answers
// ---------------------------------------------------------------------------

std::vector<ScoredAnswer> candidate_answers(const ConjunctiveQuery& q, Degree tau_in,
                                            const FederatedStore& store,
                                            const ValidatorOptions& options) {
    TrustedView view = store.trusted(tau_in, options.policy.cond);
    std::vector<ScoredAnswer> out;
    for (const EvalAnswer& answer : evaluate(q, view)) {
        std::optional<ScoredAnswer> best;
        for (const MatchResult& m : answer.matches) {
            std::set<Atom> grounds;
            for (const UsedFact& f : m.facts_used) grounds.insert(f.fact.atom());
            std::vector<UsedFact> used = detail::collect_used(grounds, view);
            Degree tau = detail::tau_of(used, options.policy);
            if (best && best->tau_out >= tau) continue;
            ScoredAnswer a;
            a.tuple = answer.tuple;
            a.tau_out = tau;
            a.witness.h_t = m.h;
            a.witness.body_facts = used;
            best = std::move(a);
        }
        if (best && tau_in <= best->tau_out) out.push_back(std::move(*best));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Naive validator
// ---------------------------------------------------------------------------

ValidationReport valid_answers(const ConjunctiveQuery& q, Degree tau_in, const Context& ctx,
                               const FederatedStore& store, const ValidatorOptions& options) {
    AcyclicityResult acyclicity = is_weakly_acyclic(ctx.positives);
    if (!acyclicity.ok)
        throw EngineError(Errc::NotWeaklyAcyclic,
                          "context is not weakly acyclic; cycle: " + describe_cycle(acyclicity.cycle));

    TrustedView view = store.trusted(tau_in, options.policy.cond);

    std::vector<detail::CanonicalNegative> neg1, neg2;
    for (const NegativeConstraint& c : ctx.negatives1) neg1.push_back(detail::canonicalize_negative(c));
    for (const NegativeConstraint& c : ctx.negatives2) neg2.push_back(detail::canonicalize_negative(c));

    ValidationReport report;
    for (const EvalAnswer& answer : evaluate(q, view)) {
        std::optional<ScoredAnswer> best;
        std::optional<Rejection> first_failure;

        for (const MatchResult& m : answer.matches) {
            // J := h_t(body(q))
            std::vector<Atom> instance;
            for (const UsedFact& f : m.facts_used) instance.push_back(f.fact.atom());

            NullMinter minter;  // per-candidate labels, reproducible reports
            ChaseResult ch = detail::chase_unchecked(ctx.positives, std::move(instance), minter);

            std::vector<detail::CreationAtom> creation;
            for (const Atom& a : ch.input) creation.push_back({a, ""});
            for (const ChaseStep& step : ch.trace) creation.push_back({step.produced, step.constraint_id});

            std::vector<Atom> pattern;
            pattern.reserve(creation.size());
            for (const auto& ca : creation) pattern.push_back(ca.atom);

            // Witnesses are streamed; distinct null bindings with the same
            // ground image carry identical facts and checks, so only the
            // first of each image is processed.
            bool any_witness = false;
            std::set<std::set<Atom>> seen_images;
            detail::safe_for_each(detail::order_for_matching(pattern), view, [&](const MatchResult& mu) {
                any_witness = true;
                std::set<Atom> grounds;
                for (const Atom& a : ch.atoms) grounds.insert(mu.h.apply(a));
                if (!seen_images.insert(grounds).second) return true;

                std::optional<Violation> violation;
                std::vector<CheckRecord> passes;
                for (const Atom& l : grounds) {
                    for (const detail::CanonicalNegative& c : neg2) {
                        for (int side = 0; side < 2 && !violation; ++side)
                            violation = detail::check_negative2_at(c, side, l, view, &passes);
                        if (violation) break;
                    }
                    if (!violation)
                        for (const detail::CanonicalNegative& c : neg1) {
                            violation = detail::check_negative1_at(c, l, view, &passes);
                            if (violation) break;
                        }
                    if (!violation)
                        for (const EgdConstraint& c : ctx.egds) {
                            for (int side = 0; side < 2 && !violation; ++side)
                                violation =
                                    detail::check_egd_at(c, side, l, view, options.egd_mode, &passes);
                            if (violation) break;
                        }
                    if (violation) break;
                }

                if (violation) {
                    if (!first_failure) {
                        Rejection r;
                        r.tuple = answer.tuple;
                        r.condition = violation->condition;
                        r.constraint_id = violation->constraint_id;
                        r.offending = violation->subject;
                        r.detail = violation->detail;
                        first_failure = std::move(r);
                    }
                    return true;
                }

                std::vector<UsedFact> used = detail::collect_used(grounds, view);
                Degree tau = detail::tau_of(used, options.policy);
                if (tau_in > tau) {
                    if (!first_failure) {
                        Rejection r;
                        r.tuple = answer.tuple;
                        r.condition = 't';
                        r.detail = "tau_out " + tau.to_string() + " below tau_in " + tau_in.to_string();
                        first_failure = std::move(r);
                    }
                    return true;
                }
                if (best && best->tau_out >= tau) return true;

                ScoredAnswer a;
                a.tuple = answer.tuple;
                a.tau_out = tau;
                a.witness.h_t = m.h;
                a.witness.mu = mu.h;
                std::set<Atom> body_atoms;
                for (const UsedFact& f : m.facts_used) body_atoms.insert(f.fact.atom());
                for (const UsedFact& f : used) {
                    if (body_atoms.count(f.fact.atom()))
                        a.witness.body_facts.push_back(f);
                    else
                        a.witness.entailed_facts.push_back(f);
                }
                a.witness.checks = std::move(passes);
                best = std::move(a);
                return true;
            });

            if (!any_witness && !first_failure)
                first_failure = detail::blame_condition_a(answer.tuple, creation, view);
        }

        if (best)
            report.valid.push_back(std::move(*best));
        else if (first_failure)
            report.rejected.push_back(std::move(*first_failure));
    }
    return report;
}

}  // namespace contextdl
