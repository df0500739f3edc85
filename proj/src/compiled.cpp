#include <algorithm>
#include <map>

#include "contextdl/render.hpp"
#include "contextdl/validate.hpp"
#include "contextdl/validate_detail.hpp"

namespace contextdl {

namespace {

using Guard = std::vector<std::pair<Term, Term>>;

// Normalizes a guard to a canonical satisfiable form, or nullopt when it
// equates two distinct constants (the firing can never apply) or touches a
// null (candidate bindings never change nulls).
std::optional<Guard> normalize_guard(const Guard& guard) {
    EqualityClosure closure;
    for (const auto& [a, b] : guard) {
        if (a.is_null() || b.is_null()) {
            if (a != b) return std::nullopt;
            continue;
        }
        if (!closure.merge(a, b)) return std::nullopt;
    }
    Guard out;
    std::set<Term> seen;
    for (const auto& [a, b] : guard) {
        for (const Term& t : {a, b}) {
            if (!t.is_variable() || !seen.insert(t).second) continue;
            Term rep = closure.representative(t);
            if (rep != t) out.emplace_back(t, rep);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct SymbolicMatch {
    Homomorphism binding;  // constraint body variables -> symbolic terms
    Guard guard_adds;
};

// Matches a constraint body atom against a symbolic chase atom. Constraint
// constants meeting a query variable become a guard; meeting a null they
// fail (an h_t never grounds a null). Repeated body variables add equality
// guards between the symbolic terms they span.
std::optional<SymbolicMatch> symbolic_trigger(const Atom& body, const Atom& symbolic) {
    if (body.predicate != symbolic.predicate || body.arity() != symbolic.arity())
        return std::nullopt;
    SymbolicMatch m;
    auto merge_terms = [&](const Term& a, const Term& b) -> bool {
        if (a == b) return true;
        if (a.is_null() || b.is_null()) return false;
        if (a.is_constant() && b.is_constant()) return false;
        m.guard_adds.emplace_back(a, b);
        return true;
    };
    for (int i = 0; i < body.arity(); ++i) {
        const Term& b = body.terms[i];
        const Term& s = symbolic.terms[i];
        if (b.is_variable()) {
            if (auto prev = m.binding.lookup(b)) {
                if (!merge_terms(*prev, s)) return std::nullopt;
            } else {
                m.binding.bind(b, s);
            }
        } else {  // constraint constant
            if (s.is_constant()) {
                if (s != b) return std::nullopt;
            } else if (s.is_variable()) {
                m.guard_adds.emplace_back(s, b);
            } else {
                return std::nullopt;  // constant never matches a null
            }
        }
    }
    return m;
}

bool guard_satisfied(const Guard& guard, const Homomorphism& h_t) {
    return std::all_of(guard.begin(), guard.end(), [&](const std::pair<Term, Term>& eq) {
        return h_t.apply(eq.first) == h_t.apply(eq.second);
    });
}

// Could this constraint atom ever match a grounding of the symbolic atom?
// Constant positions survive instantiation, so a constant clash rules the
// pair out for every candidate and witness.
bool may_match(const Atom& constraint_atom, const Atom& symbolic) {
    if (constraint_atom.predicate != symbolic.predicate ||
        constraint_atom.arity() != symbolic.arity())
        return false;
    for (int i = 0; i < constraint_atom.arity(); ++i) {
        const Term& c = constraint_atom.terms[i];
        const Term& s = symbolic.terms[i];
        if (c.is_constant() && s.is_constant() && c != s) return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

CompiledValidator::~CompiledValidator() = default;
CompiledValidator::CompiledValidator(CompiledValidator&&) noexcept = default;
CompiledValidator& CompiledValidator::operator=(CompiledValidator&&) noexcept = default;

CompiledValidator::CompiledValidator(ConjunctiveQuery query, Context ctx)
    : query_(std::move(query)), context_(std::move(ctx)) {
    AcyclicityResult acyclicity = is_weakly_acyclic(context_.positives);
    if (!acyclicity.ok)
        throw EngineError(Errc::NotWeaklyAcyclic,
                          "context is not weakly acyclic; cycle: " + describe_cycle(acyclicity.cycle));

    // Fold the query's own comparisons into the body atoms so guards and
    // instantiation see the same shape the matcher evaluates.
    EqualityClosure closure;
    for (const ComparisonAtom& c : query_.comparisons) closure.add(c);
    NullMinter minter;
    for (const Atom& a : query_.body) {
        Atom folded{a.predicate, {}};
        for (const Term& t : a.terms)
            folded.terms.push_back(t.is_variable() ? closure.representative(t) : t);
        bool duplicate = std::any_of(atoms_.begin(), atoms_.end(), [&](const SymbolicAtom& s) {
            return s.atom == folded && s.guard.empty() && s.origin_constraint.empty();
        });
        if (!duplicate) atoms_.push_back({std::move(folded), {}, "", {}, {}, {}});
    }

    // Guarded chase of the symbolic body with skolem-style firing identity:
    // a rule fires once per (frontier image, guard). Fresh nulls per firing
    // without that key would loop on rules like p(X) -> p(Y), which are
    // weakly acyclic but have no frontier.
    std::set<std::tuple<const PositiveConstraint*, Atom, Guard>> fired;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        for (const PositiveConstraint& c : context_.positives) {
            auto m = symbolic_trigger(c.body, atoms_[i].atom);
            if (!m) continue;
            Guard combined = atoms_[i].guard;
            combined.insert(combined.end(), m->guard_adds.begin(), m->guard_adds.end());
            auto guard = normalize_guard(combined);
            if (!guard) continue;

            Homomorphism binding = m->binding;
            Atom skolem_form{c.head.predicate, {}};
            for (const Term& t : c.head.terms) {
                if (t.is_variable() && !binding.lookup(t))
                    skolem_form.terms.push_back(Term::null("$" + t.text()));
                else
                    skolem_form.terms.push_back(binding.apply(t));
            }
            if (!fired.insert({&c, skolem_form, *guard}).second) continue;

            bool has_existentials = false;
            for (const Term& z : c.head.variables())
                if (!binding.lookup(z)) has_existentials = true;
            if (has_existentials)
                for (const Term& z : c.head.variables())
                    if (!binding.lookup(z)) binding.bind(z, minter.fresh());
            atoms_.push_back({binding.apply(c.head), std::move(*guard), c.id, {}, {}, {}});
        }
    }

    for (const NegativeConstraint& c : context_.negatives1)
        neg1_.push_back(detail::canonicalize_negative(c));
    for (const NegativeConstraint& c : context_.negatives2)
        neg2_.push_back(detail::canonicalize_negative(c));

    // Constraint templates per symbolic atom: only pairs a grounding could
    // ever trigger.
    for (SymbolicAtom& s : atoms_) {
        for (int i = 0; i < static_cast<int>(context_.negatives1.size()); ++i)
            if (may_match(context_.negatives1[i].atoms[0], s.atom)) s.neg1_templates.push_back(i);
        for (int i = 0; i < static_cast<int>(context_.negatives2.size()); ++i)
            for (int side = 0; side < 2; ++side)
                if (may_match(context_.negatives2[i].atoms[side], s.atom))
                    s.neg2_templates.emplace_back(i, side);
        for (int i = 0; i < static_cast<int>(context_.egds.size()); ++i) {
            if (may_match(context_.egds[i].atom1, s.atom)) s.egd_templates.emplace_back(i, 0);
            if (may_match(context_.egds[i].atom2, s.atom)) s.egd_templates.emplace_back(i, 1);
        }
    }
}

// ---------------------------------------------------------------------------
// Streaming candidates through the compiled structure
// ---------------------------------------------------------------------------

ValidationReport CompiledValidator::run(const FederatedStore& store, Degree tau_in,
                                        const ValidatorOptions& options) const {
    TrustedView view = store.trusted(tau_in, options.policy.cond);
    const std::vector<detail::CanonicalNegative>& neg1 = neg1_;
    const std::vector<detail::CanonicalNegative>& neg2 = neg2_;

    ValidationReport report;
    for (const EvalAnswer& answer : evaluate(query_, view)) {
        std::optional<ScoredAnswer> best;
        std::optional<Rejection> first_failure;

        for (const MatchResult& m : answer.matches) {
            // Instantiate the active symbolic atoms under h_t.
            std::vector<const SymbolicAtom*> active;
            std::vector<Atom> instantiated;
            std::map<Atom, std::vector<const SymbolicAtom*>> by_atom;
            for (const SymbolicAtom& s : atoms_) {
                if (!guard_satisfied(s.guard, m.h)) continue;
                Atom inst = m.h.apply(s.atom);
                auto [it, inserted] = by_atom.emplace(inst, std::vector<const SymbolicAtom*>{});
                it->second.push_back(&s);
                if (inserted) {
                    active.push_back(&s);
                    instantiated.push_back(std::move(inst));
                }
            }

            bool any_witness = false;
            std::set<std::set<Atom>> seen_images;
            detail::safe_for_each(detail::order_for_matching(instantiated), view, [&](const MatchResult& mu) {
                any_witness = true;
                // Ground atoms with the union of their templates; repeated
                // ground images are skipped, they repeat the same checks.
                std::map<Atom, std::pair<std::set<int>, std::set<std::pair<int, int>>>> neg_by_l;
                std::map<Atom, std::set<std::pair<int, int>>> egd_by_l;
                for (const auto& [inst, sources] : by_atom) {
                    Atom l = mu.h.apply(inst);
                    auto& [n1, n2] = neg_by_l[l];
                    auto& ed = egd_by_l[l];
                    for (const SymbolicAtom* s : sources) {
                        n1.insert(s->neg1_templates.begin(), s->neg1_templates.end());
                        n2.insert(s->neg2_templates.begin(), s->neg2_templates.end());
                        ed.insert(s->egd_templates.begin(), s->egd_templates.end());
                    }
                }
                {
                    std::set<Atom> image;
                    for (const auto& [l, templates] : neg_by_l) image.insert(l);
                    if (!seen_images.insert(std::move(image)).second) return true;
                }

                std::optional<Violation> violation;
                std::vector<CheckRecord> passes;
                for (const auto& [l, templates] : neg_by_l) {
                    const auto& [n1, n2] = templates;
                    for (const auto& [idx, side] : n2) {
                        violation = detail::check_negative2_at(neg2[idx], side, l, view, &passes);
                        if (violation) break;
                    }
                    if (!violation)
                        for (int idx : n1) {
                            violation = detail::check_negative1_at(neg1[idx], l, view, &passes);
                            if (violation) break;
                        }
                    if (!violation)
                        for (const auto& [idx, side] : egd_by_l[l]) {
                            violation = detail::check_egd_at(context_.egds[idx], side, l, view,
                                                             options.egd_mode, &passes);
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

                std::set<Atom> grounds;
                for (const auto& [l, templates] : neg_by_l) grounds.insert(l);
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

            if (!any_witness && !first_failure) {
                std::vector<detail::CreationAtom> creation;
                for (std::size_t i = 0; i < instantiated.size(); ++i)
                    creation.push_back({instantiated[i], active[i]->origin_constraint});
                first_failure = detail::blame_condition_a(answer.tuple, creation, view);
            }
        }

        if (best)
            report.valid.push_back(std::move(*best));
        else if (first_failure)
            report.rejected.push_back(std::move(*first_failure));
    }
    return report;
}

ValidationReport compiled_valid_answers(const ConjunctiveQuery& q, Degree tau_in,
                                        const Context& ctx, const FederatedStore& store,
                                        const ValidatorOptions& options) {
    CompiledValidator compiled(q, ctx);
    return compiled.run(store, tau_in, options);
}

}  // namespace contextdl
