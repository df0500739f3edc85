#include "contextdl/match.hpp"

#include <algorithm>
#include <map>

namespace contextdl {

namespace {

// Compiled pattern: every position is either a literal constant or a slot.
// Slots cover variable classes (after comparison closure) and nulls.
struct CompiledPattern {
    struct Position {
        bool literal;
        Term constant;  // when literal
        int slot;       // when !literal
    };
    struct CompiledAtom {
        const Atom* source;
        std::vector<Position> positions;
    };

    bool satisfiable = true;
    std::vector<CompiledAtom> atoms;
    int slot_count = 0;
    // original variable/null -> slot, for rebuilding the homomorphism
    std::map<Term, int> term_slot;
    // terms eliminated by comparisons that bound them to a constant
    std::map<Term, Term> fixed;
};

CompiledPattern compile_pattern(const std::vector<Atom>& pattern,
                                const std::vector<ComparisonAtom>& comparisons) {
    CompiledPattern cp;
    EqualityClosure closure;
    for (const ComparisonAtom& c : comparisons) closure.add(c);
    if (!closure.satisfiable()) {
        cp.satisfiable = false;
        return cp;
    }

    std::map<Term, int> rep_slot;
    auto slot_for = [&](const Term& t) {
        Term rep = t.is_variable() ? closure.representative(t) : t;
        if (rep.is_constant()) {
            cp.fixed.emplace(t, rep);
            return -1;
        }
        auto [it, inserted] = rep_slot.emplace(rep, cp.slot_count);
        if (inserted) ++cp.slot_count;
        cp.term_slot.emplace(t, it->second);
        return it->second;
    };

    for (const Atom& a : pattern) {
        CompiledPattern::CompiledAtom ca;
        ca.source = &a;
        for (const Term& t : a.terms) {
            if (t.is_constant()) {
                ca.positions.push_back({true, t, -1});
            } else {
                int slot = slot_for(t);
                if (slot < 0)
                    ca.positions.push_back({true, cp.fixed.at(t), -1});
                else
                    ca.positions.push_back({false, {}, slot});
            }
        }
        cp.atoms.push_back(std::move(ca));
    }
    return cp;
}

struct Matcher {
    const CompiledPattern& cp;
    const TrustedView& view;
    const std::function<bool(const MatchResult&)>& visit;
    std::vector<std::optional<Term>> bindings;
    std::vector<const TrustedView::StoredFact*> used;
    bool stopped = false;

    bool admits(const CompiledPattern::CompiledAtom& ca, const TrustedView::StoredFact& sf,
                std::vector<int>& bound_here) {
        const auto& terms = sf.fact.terms();
        for (std::size_t i = 0; i < ca.positions.size(); ++i) {
            const auto& pos = ca.positions[i];
            if (pos.literal) {
                if (terms[i] != pos.constant) return false;
            } else if (bindings[pos.slot]) {
                if (*bindings[pos.slot] != terms[i]) return false;
            } else {
                bindings[pos.slot] = terms[i];
                bound_here.push_back(pos.slot);
            }
        }
        return true;
    }

    void undo(const std::vector<int>& bound_here) {
        for (int slot : bound_here) bindings[slot].reset();
    }

    void run(std::size_t atom_index) {
        if (stopped) return;
        if (atom_index == cp.atoms.size()) {
            emit();
            return;
        }
        const auto& ca = cp.atoms[atom_index];
        const auto& facts = view.facts(ca.source->predicate);

        // Prefer the index on the first position already determined.
        int pinned_pos = -1;
        Term pinned_value;
        for (std::size_t i = 0; i < ca.positions.size(); ++i) {
            const auto& pos = ca.positions[i];
            if (pos.literal) {
                pinned_pos = static_cast<int>(i);
                pinned_value = pos.constant;
                break;
            }
            if (bindings[pos.slot]) {
                pinned_pos = static_cast<int>(i);
                pinned_value = *bindings[pos.slot];
                break;
            }
        }

        auto try_fact = [&](const TrustedView::StoredFact& sf) {
            if (static_cast<std::size_t>(sf.fact.atom().arity()) != ca.positions.size()) return;
            std::vector<int> bound_here;
            if (admits(ca, sf, bound_here)) {
                used.push_back(&sf);
                run(atom_index + 1);
                used.pop_back();
            }
            undo(bound_here);
        };

        if (pinned_pos >= 0) {
            for (int idx : view.candidates(ca.source->predicate, pinned_pos, pinned_value)) {
                if (stopped) return;
                try_fact(facts[idx]);
            }
        } else {
            for (const auto& sf : facts) {
                if (stopped) return;
                try_fact(sf);
            }
        }
    }

    void emit() {
        MatchResult result;
        for (const auto& [term, slot] : cp.term_slot) result.h.bind(term, *bindings[slot]);
        for (const auto& [term, constant] : cp.fixed) result.h.bind(term, constant);
        result.facts_used.reserve(used.size());
        for (const auto* sf : used)
            result.facts_used.push_back({sf->fact, sf->source_ids, sf->degree});
        if (!visit(result)) stopped = true;
    }
};

}  // namespace

void for_each_homomorphism(const std::vector<Atom>& pattern,
                           const std::vector<ComparisonAtom>& comparisons,
                           const TrustedView& view,
                           const std::function<bool(const MatchResult&)>& visit) {
    for (const Atom& a : pattern) {
        auto arity = view.schema().arity(a.predicate);
        if (!arity)
            throw EngineError(Errc::UnknownPredicate, "predicate '" + a.predicate + "' is not declared");
        if (*arity != a.arity())
            throw EngineError(Errc::ArityMismatch,
                              "predicate '" + a.predicate + "' used with arity " +
                                  std::to_string(a.arity()) + ", declared " + std::to_string(*arity));
    }
    CompiledPattern cp = compile_pattern(pattern, comparisons);
    if (!cp.satisfiable) return;
    Matcher m{cp, view, visit, {}, {}, false};
    m.bindings.resize(cp.slot_count);
    m.run(0);
}

std::vector<MatchResult> homomorphisms(const std::vector<Atom>& pattern,
                                       const std::vector<ComparisonAtom>& comparisons,
                                       const TrustedView& view) {
    std::vector<MatchResult> out;
    for_each_homomorphism(pattern, comparisons, view, [&](const MatchResult& m) {
        out.push_back(m);
        return true;
    });
    return out;
}

bool has_homomorphism(const std::vector<Atom>& pattern,
                      const std::vector<ComparisonAtom>& comparisons, const TrustedView& view) {
    bool found = false;
    for_each_homomorphism(pattern, comparisons, view, [&](const MatchResult&) {
        found = true;
        return false;
    });
    return found;
}

std::vector<EvalAnswer> evaluate(const ConjunctiveQuery& q, const TrustedView& view) {
    std::map<std::vector<Term>, std::vector<MatchResult>> grouped;
    for_each_homomorphism(q.body, q.comparisons, view, [&](const MatchResult& m) {
        std::vector<Term> tuple;
        tuple.reserve(q.head.size());
        for (const Term& t : q.head) tuple.push_back(m.h.apply(t));
        grouped[std::move(tuple)].push_back(m);
        return true;
    });
    std::vector<EvalAnswer> out;
    out.reserve(grouped.size());
    for (auto& [tuple, matches] : grouped) out.push_back({tuple, std::move(matches)});
    return out;
}

std::vector<EvalAnswer> evaluate(const ConjunctiveQuery& q, const FederatedStore& store,
                                 Degree tau_in) {
    return evaluate(q, store.trusted(tau_in));
}

std::optional<Homomorphism> unify(const Atom& a, const Atom& b) {
    if (a.predicate != b.predicate || a.arity() != b.arity()) return std::nullopt;
    EqualityClosure closure;
    std::set<Term> seen;
    for (int i = 0; i < a.arity(); ++i) {
        const Term& ta = a.terms[i];
        const Term& tb = b.terms[i];
        seen.insert(ta);
        seen.insert(tb);
        if (!closure.merge(ta, tb)) return std::nullopt;
    }
    Homomorphism theta;
    for (const Term& t : seen) {
        Term rep = closure.representative(t);
        if (rep != t && !theta.bind(t, rep)) return std::nullopt;
    }
    return theta;
}

}  // namespace contextdl
