#pragma once

// Shared fixtures, random program generators and brute-force oracles for the
// test suites. The oracles are deliberately independent of the engine's
// matching and validation paths.

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "contextdl/chase.hpp"
#include "contextdl/match.hpp"
#include "contextdl/model.hpp"
#include "contextdl/parse.hpp"
#include "contextdl/validate.hpp"

#ifndef CONTEXTDL_FIXTURE_DIR
#define CONTEXTDL_FIXTURE_DIR "tests/fixtures"
#endif

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(CONTEXTDL_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name), std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline contextdl::FederatedStore table2_store() {
    contextdl::FederatedStore store;
    for (const char* name : {"source1.facts", "source2.facts", "source3.facts"})
        store.add_source(contextdl::parse_source_file(read_fixture(name), name));
    return store;
}

inline contextdl::Context table1_context() {
    return contextdl::parse_context_file(read_fixture("context_full.rules"), "context_full.rules");
}

inline contextdl::Context scenario1_context() {
    return contextdl::parse_context_file(read_fixture("context_scenario1.rules"),
                                         "context_scenario1.rules");
}

inline contextdl::ConjunctiveQuery foreign_professors_query() {
    return contextdl::parse_query(read_fixture("query_foreign.cq"), "query_foreign.cq");
}

inline contextdl::Degree deg(const char* text) { return *contextdl::Degree::parse(text); }

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

/// Active domain of the view: every constant appearing in a trusted fact.
inline std::vector<contextdl::Term> active_domain(const contextdl::TrustedView& view) {
    std::set<contextdl::Term> constants;
    for (const auto& sf : view.all_facts())
        for (const contextdl::Term& t : sf.fact.terms()) constants.insert(t);
    return {constants.begin(), constants.end()};
}

/// Enumerates all |adom|^|slots| assignments of the pattern's variables and
/// nulls and keeps those mapping every atom into the view with all
/// comparisons satisfied. Returns the set of term mappings.
inline std::set<std::map<contextdl::Term, contextdl::Term>> brute_force_homomorphisms(
    const std::vector<contextdl::Atom>& pattern,
    const std::vector<contextdl::ComparisonAtom>& comparisons,
    const contextdl::TrustedView& view) {
    using namespace contextdl;
    std::set<Term> slot_set;
    for (const Atom& a : pattern)
        for (const Term& t : a.terms)
            if (!t.is_constant()) slot_set.insert(t);
    for (const ComparisonAtom& c : comparisons) {
        slot_set.insert(c.left());
        if (!c.right().is_constant()) slot_set.insert(c.right());
    }
    // Comparison variables that do not occur in the pattern would make the
    // enumeration unsound; the callers' generators never produce them.
    std::vector<Term> slots(slot_set.begin(), slot_set.end());
    std::vector<Term> domain = active_domain(view);

    std::set<std::map<Term, Term>> results;
    std::vector<std::size_t> choice(slots.size(), 0);
    while (true) {
        std::map<Term, Term> h;
        for (std::size_t i = 0; i < slots.size(); ++i) h[slots[i]] = domain.empty() ? Term() : domain[choice[i]];
        bool ok = !slots.empty() ? !domain.empty() : true;
        auto image = [&](const Term& t) {
            auto it = h.find(t);
            return it == h.end() ? t : it->second;
        };
        if (ok)
            for (const ComparisonAtom& c : comparisons) {
                if (image(c.left()) != image(c.right())) {
                    ok = false;
                    break;
                }
            }
        if (ok)
            for (const Atom& a : pattern) {
                Atom grounded{a.predicate, {}};
                for (const Term& t : a.terms) grounded.terms.push_back(image(t));
                if (!view.find(grounded)) {
                    ok = false;
                    break;
                }
            }
        if (ok) results.insert(h);

        // next assignment
        std::size_t i = 0;
        for (; i < slots.size(); ++i) {
            if (++choice[i] < domain.size()) break;
            choice[i] = 0;
        }
        if (i == slots.size()) break;
        if (slots.empty() || domain.empty()) break;
    }
    return results;
}

// ---------------------------------------------------------------------------
// Random program generation
// ---------------------------------------------------------------------------

struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    int below(int n) { return static_cast<int>(engine() % static_cast<std::uint64_t>(n)); }
    bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(engine) < p; }
    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(static_cast<int>(v.size()))];
    }
};

struct RandomSchema {
    // predicate name -> arity; a fixed pool keeps every generated item
    // arity-consistent.
    std::map<std::string, int> predicates;
    std::vector<std::string> names;
    std::vector<contextdl::Term> constants;
    std::vector<contextdl::Term> variables;
};

inline RandomSchema random_schema(Rng& rng) {
    RandomSchema s;
    int pred_count = 3 + rng.below(3);
    for (int i = 0; i < pred_count; ++i) {
        std::string name = "p" + std::to_string(i);
        s.predicates[name] = 1 + rng.below(3);
        s.names.push_back(name);
    }
    for (char c = 'a'; c <= 'h'; ++c) s.constants.push_back(contextdl::Term::constant(std::string(1, c)));
    for (const char* v : {"X", "Y", "Z", "W"}) s.variables.push_back(contextdl::Term::variable(v));
    return s;
}

inline contextdl::Atom random_atom(Rng& rng, const RandomSchema& s, bool allow_vars, double var_p) {
    const std::string& pred = rng.pick(s.names);
    contextdl::Atom a{pred, {}};
    int arity = s.predicates.at(pred);
    for (int i = 0; i < arity; ++i) {
        if (allow_vars && rng.chance(var_p))
            a.terms.push_back(rng.pick(s.variables));
        else
            a.terms.push_back(rng.pick(s.constants));
    }
    return a;
}

inline contextdl::Fact random_fact(Rng& rng, const RandomSchema& s) {
    return contextdl::Fact(random_atom(rng, s, false, 0));
}

/// Random positive constraints, filtered through the checker until the set
/// is weakly acyclic. Head variables reuse body variables (frontier) or
/// introduce fresh existentials.
inline std::vector<contextdl::PositiveConstraint> random_weakly_acyclic_rules(
    Rng& rng, const RandomSchema& s, int max_rules, double existential_p = 0.25) {
    using namespace contextdl;
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<PositiveConstraint> rules;
        int count = 1 + rng.below(max_rules);
        for (int i = 0; i < count; ++i) {
            Atom body = random_atom(rng, s, true, 0.8);
            std::set<Term> body_var_set = body.variables();
            std::vector<Term> body_vars(body_var_set.begin(), body_var_set.end());
            const std::string& head_pred = rng.pick(s.names);
            Atom head{head_pred, {}};
            int existential_counter = 0;
            for (int pos = 0; pos < s.predicates.at(head_pred); ++pos) {
                double roll = std::uniform_real_distribution<double>(0, 1)(rng.engine);
                if (!body_vars.empty() && roll < 0.55)
                    head.terms.push_back(rng.pick(body_vars));
                else if (roll < 0.55 + existential_p)
                    head.terms.push_back(
                        Term::variable("E" + std::to_string(existential_counter++)));
                else
                    head.terms.push_back(rng.pick(s.constants));
            }
            rules.push_back({"r" + std::to_string(i), std::move(body), std::move(head)});
        }
        if (is_weakly_acyclic(rules).ok) return rules;
    }
    return {};  // callers assert non-empty
}

inline std::vector<contextdl::Atom> random_instance(Rng& rng, const RandomSchema& s, int max_facts) {
    std::vector<contextdl::Atom> atoms;
    int count = rng.below(max_facts + 1);
    for (int i = 0; i < count; ++i) atoms.push_back(random_atom(rng, s, false, 0));
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return atoms;
}

inline contextdl::NegativeConstraint random_negative(Rng& rng, const RandomSchema& s, int id) {
    using namespace contextdl;
    NegativeConstraint c;
    c.id = "n" + std::to_string(id);
    Atom first = random_atom(rng, s, true, 0.7);
    c.atoms.push_back(first);
    if (rng.chance(0.6)) {
        std::set<Term> first_vars = first.variables();
        std::vector<Term> fv(first_vars.begin(), first_vars.end());
        Atom second = random_atom(rng, s, true, 0.7);
        if (!fv.empty() && !second.variables().empty()) {
            // force a shared variable
            second.terms[rng.below(second.arity())] = rng.pick(fv);
        }
        c.atoms.push_back(second);
        // occasional comparison on a shared variable
        std::set<Term> vars = c.atoms[0].variables();
        for (const Term& t : c.atoms[1].variables()) vars.insert(t);
        if (!vars.empty() && rng.chance(0.3)) {
            std::vector<Term> pool(vars.begin(), vars.end());
            c.comparisons.emplace_back(rng.pick(pool), rng.chance(0.5)
                                                           ? rng.pick(s.constants)
                                                           : rng.pick(pool));
        }
    }
    return c;
}

inline std::optional<contextdl::EgdConstraint> random_egd(Rng& rng, const RandomSchema& s, int id) {
    using namespace contextdl;
    Atom a1 = random_atom(rng, s, true, 0.9);
    Atom a2 = random_atom(rng, s, true, 0.9);
    std::set<Term> a1_vars = a1.variables();
    std::vector<Term> v1(a1_vars.begin(), a1_vars.end());
    if (v1.empty()) return std::nullopt;
    // share one variable
    int pos = rng.below(a2.arity());
    a2.terms[pos] = rng.pick(v1);
    std::set<Term> a2_vars = a2.variables();
    std::vector<Term> v2(a2_vars.begin(), a2_vars.end());
    if (v2.empty()) return std::nullopt;
    EgdConstraint c;
    c.id = "k" + std::to_string(id);
    c.atom1 = a1;
    c.atom2 = a2;
    c.equalities.emplace_back(rng.pick(v1), rng.pick(v2));
    return c;
}

struct RandomProgram {
    contextdl::FederatedStore store;
    contextdl::Context context;
    contextdl::ConjunctiveQuery query;
    contextdl::Degree tau_in;
};

/// A full random program for the validator equivalence suites: every
/// predicate of the schema is declared in the store so evaluation never
/// trips over unknown predicates.
inline RandomProgram random_program(Rng& rng, int max_facts = 20, int max_sources = 3,
                                    int max_constraints = 6) {
    using namespace contextdl;
    RandomSchema schema = random_schema(rng);
    RandomProgram p;

    // degrees sit high and tau_in low so trusted views are rarely empty
    static const std::vector<const char*> degree_grid = {"0.5", "0.6", "0.7", "0.75",
                                                         "0.8", "0.9", "0.95", "1"};
    int source_count = 1 + rng.below(max_sources);
    int facts_left = rng.below(max_facts + 1);
    for (int i = 0; i < source_count; ++i) {
        SourceDatabase src("R" + std::to_string(i + 1), deg(rng.pick(degree_grid)));
        int here = source_count == i + 1 ? facts_left : rng.below(facts_left + 1);
        facts_left -= here;
        for (int f = 0; f < here; ++f) src.add(random_fact(rng, schema));
        p.store.add_source(std::move(src));
    }
    for (const auto& [pred, arity] : schema.predicates) p.store.declare(pred, arity);

    int budget = rng.below(max_constraints + 1);
    int positives = rng.below(budget + 1);
    p.context.positives = random_weakly_acyclic_rules(rng, schema, std::max(positives, 1), 0.12);
    int id = 0;
    for (int i = positives; i < budget; ++i) {
        if (rng.chance(0.5)) {
            NegativeConstraint c = random_negative(rng, schema, id++);
            (c.atoms.size() == 1 ? p.context.negatives1 : p.context.negatives2).push_back(c);
        } else if (auto egd = random_egd(rng, schema, id++)) {
            p.context.egds.push_back(*egd);
        }
    }

    // query: 1-3 body atoms, head = up to two body variables; most atoms are
    // abstractions of stored facts so the body usually joins something
    std::vector<Fact> fact_pool;
    for (const SourceDatabase& src : p.store.sources())
        fact_pool.insert(fact_pool.end(), src.facts().begin(), src.facts().end());
    int body_count = 1 + rng.below(3);
    for (int i = 0; i < body_count; ++i) {
        if (!fact_pool.empty() && rng.chance(0.8)) {
            Atom a = rng.pick(fact_pool).atom();
            for (Term& t : a.terms)
                if (rng.chance(0.6)) t = rng.pick(schema.variables);
            p.query.body.push_back(std::move(a));
        } else {
            p.query.body.push_back(random_atom(rng, schema, true, 0.75));
        }
    }
    std::set<Term> vars;
    for (const Atom& a : p.query.body)
        for (const Term& t : a.variables()) vars.insert(t);
    std::vector<Term> var_pool(vars.begin(), vars.end());
    p.query.head_predicate = "q";
    if (!var_pool.empty()) {
        int head_arity = std::min<int>(1 + rng.below(2), static_cast<int>(var_pool.size()));
        for (int i = 0; i < head_arity; ++i) p.query.head.push_back(var_pool[i]);
    }
    if (!var_pool.empty() && rng.chance(0.3)) {
        p.query.comparisons.emplace_back(rng.pick(var_pool), rng.chance(0.5)
                                                                 ? rng.pick(schema.constants)
                                                                 : rng.pick(var_pool));
    }
    static const std::vector<const char*> tau_grid = {"0",   "0.1", "0.2", "0.3", "0.4",
                                                      "0.5", "0.6", "0.7", "0.75"};
    p.tau_in = deg(rng.pick(tau_grid));
    p.query.tau_in = p.tau_in;
    return p;
}

}  // namespace testutil
