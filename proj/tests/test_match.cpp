#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "contextdl/match.hpp"
#include "contextdl/parse.hpp"
#include "testutil.hpp"

using namespace contextdl;

namespace {

std::set<Term> bound_values(const std::vector<MatchResult>& results, const Term& var) {
    std::set<Term> out;
    for (const MatchResult& m : results) out.insert(m.h.apply(var));
    return out;
}

std::set<std::map<Term, Term>> mappings(const std::vector<MatchResult>& results) {
    std::set<std::map<Term, Term>> out;
    for (const MatchResult& m : results) out.insert(m.h.mapping());
    return out;
}

}  // namespace

TEST_CASE("single-atom pattern enumerates all professors") {
    FederatedStore store = testutil::table2_store();
    TrustedView view = store.trusted(Degree::zero());
    std::vector<MatchResult> results =
        homomorphisms({Atom{"professor", {Term::variable("X")}}}, {}, view);
    CHECK(bound_values(results, Term::variable("X")) ==
          std::set<Term>{Term::constant("Bob"), Term::constant("Tom"), Term::constant("Alice"),
                         Term::constant("Peter"), Term::constant("Ann")});
}

TEST_CASE("empty pattern yields exactly one empty match") {
    FederatedStore store = testutil::table2_store();
    TrustedView view = store.trusted(Degree::zero());
    std::vector<MatchResult> results = homomorphisms({}, {}, view);
    REQUIRE(results.size() == 1);
    CHECK(results[0].h.empty());
    CHECK(results[0].facts_used.empty());
}

TEST_CASE("nulls in patterns act as pattern-scoped variables") {
    FederatedStore store;
    store.add_source(parse_source_file(testutil::read_fixture("source2.facts"), "source2.facts"));
    TrustedView view = store.trusted(Degree::zero());

    std::vector<Atom> pattern{
        Atom{"teacherOf", {Term::constant("Bob"), Term::null("n1")}},
        Atom{"offeredCourseAt", {Term::null("n1"), Term::variable("W")}},
    };
    std::vector<MatchResult> results = homomorphisms(pattern, {}, view);
    REQUIRE(results.size() == 2);
    // deterministic canonical order: DB before Java
    CHECK(results[0].h.apply(Term::null("n1")) == Term::constant("DB"));
    CHECK(results[0].h.apply(Term::variable("W")) == Term::constant("LIFO"));
    CHECK(results[1].h.apply(Term::null("n1")) == Term::constant("Java"));
    CHECK(results[1].h.apply(Term::variable("W")) == Term::constant("LIFAT"));

    // facts_used mirrors the pattern under h, in order
    for (const MatchResult& m : results) {
        REQUIRE(m.facts_used.size() == pattern.size());
        for (std::size_t i = 0; i < pattern.size(); ++i)
            CHECK(m.h.apply(pattern[i]) == m.facts_used[i].fact.atom());
        CHECK(m.facts_used[0].source_ids == std::vector<std::string>{"S2"});
    }
}

TEST_CASE("evaluation respects the trust threshold") {
    FederatedStore store = testutil::table2_store();
    ConjunctiveQuery q = testutil::foreign_professors_query();

    auto tuples = [&](const char* tau) {
        std::set<Term> out;
        for (const EvalAnswer& a : evaluate(q, store, testutil::deg(tau))) out.insert(a.tuple[0]);
        return out;
    };

    CHECK(tuples("0.75") == std::set<Term>{Term::constant("Bob"), Term::constant("Tom"),
                                           Term::constant("Alice")});
    CHECK(tuples("0.7") ==
          std::set<Term>{Term::constant("Bob"), Term::constant("Tom"), Term::constant("Alice"),
                         Term::constant("Peter"), Term::constant("Ann")});
    CHECK(tuples("1").empty());
}

TEST_CASE("comparisons substitute constants before matching") {
    FederatedStore store = testutil::table2_store();
    ConjunctiveQuery q = parse_query("q(X) :- teacherOf(X, C), C = Java");
    std::set<Term> xs;
    for (const EvalAnswer& a : evaluate(q, store, Degree::zero())) xs.insert(a.tuple[0]);
    CHECK(xs == std::set<Term>{Term::constant("Bob"), Term::constant("Tom"),
                               Term::constant("Peter")});
}

TEST_CASE("unknown predicates are an error") {
    FederatedStore store = testutil::table2_store();
    TrustedView view = store.trusted(Degree::zero());
    CHECK_THROWS_AS(homomorphisms({Atom{"noSuch", {Term::variable("X")}}}, {}, view), EngineError);
}

TEST_CASE("unify matches the worked examples") {
    // forced bindings
    auto theta1 = unify(Atom{"teacherOf", {Term::variable("X"), Term::constant("DB")}},
                        Atom{"teacherOf", {Term::constant("Bob"), Term::variable("Y")}});
    REQUIRE(theta1);
    CHECK(theta1->apply(Term::variable("X")) == Term::constant("Bob"));
    CHECK(theta1->apply(Term::variable("Y")) == Term::constant("DB"));

    // clash through a shared variable
    CHECK_FALSE(unify(Atom{"p", {Term::variable("X"), Term::variable("X")}},
                      Atom{"p", {Term::constant("a"), Term::constant("b")}}));

    // deterministic orientation
    auto theta2 = unify(Atom{"p", {Term::variable("X"), Term::variable("Y")}},
                        Atom{"p", {Term::variable("Y"), Term::variable("Z")}});
    REQUIRE(theta2);
    CHECK(theta2->apply(Term::variable("X")) == Term::variable("Y"));
    CHECK(theta2->apply(Term::variable("Z")) == Term::variable("Y"));
    Atom left{"p", {Term::variable("X"), Term::variable("Y")}};
    Atom right{"p", {Term::variable("Y"), Term::variable("Z")}};
    CHECK(theta2->apply(left) == theta2->apply(right));

    // arity or predicate mismatch
    CHECK_FALSE(unify(Atom{"p", {Term::variable("X")}}, Atom{"q", {Term::variable("X")}}));
}

TEST_CASE("unify is idempotent and most general on random atom pairs") {
    testutil::Rng rng(17);
    std::vector<Term> terms{Term::variable("X"), Term::variable("Y"), Term::variable("Z"),
                            Term::constant("a"), Term::constant("b"), Term::null("n1")};
    int unifiable_seen = 0;
    for (int round = 0; round < 300; ++round) {
        int arity = 1 + rng.below(2);
        Atom a{"p", {}}, b{"p", {}};
        for (int i = 0; i < arity; ++i) {
            a.terms.push_back(rng.pick(terms));
            b.terms.push_back(rng.pick(terms));
        }
        auto theta = unify(a, b);
        // brute-force: all substitutions over the small term universe
        std::set<Term> vars;
        for (const Atom* atom : {&a, &b})
            for (const Term& t : atom->terms)
                if (!t.is_constant()) vars.insert(t);
        std::vector<Term> var_list(vars.begin(), vars.end());
        std::vector<std::size_t> choice(var_list.size(), 0);
        bool any_unifier = false;
        while (true) {
            Homomorphism sigma;
            bool legal = true;
            for (std::size_t i = 0; i < var_list.size() && legal; ++i)
                legal = sigma.bind(var_list[i], terms[choice[i]]);
            if (legal && sigma.apply(a) == sigma.apply(b)) {
                any_unifier = true;
                if (theta) {
                    // sigma must factor through theta: theta(x) = theta(y)
                    // implies sigma(x) = sigma(y), and theta(x) = c implies
                    // sigma(x) = c.
                    for (const Term& x : var_list)
                        for (const Term& y : var_list)
                            if (theta->apply(x) == theta->apply(y))
                                CHECK(sigma.apply(x) == sigma.apply(y));
                    for (const Term& x : var_list)
                        if (theta->apply(x).is_constant())
                            CHECK(sigma.apply(x) == theta->apply(x));
                }
            }
            std::size_t i = 0;
            for (; i < var_list.size(); ++i) {
                if (++choice[i] < terms.size()) break;
                choice[i] = 0;
            }
            if (i == var_list.size()) break;
        }
        if (theta) {
            ++unifiable_seen;
            CHECK(theta->apply(a) == theta->apply(b));
            // idempotence
            for (const auto& [from, to] : theta->mapping()) CHECK(theta->apply(to) == to);
            CHECK(any_unifier);
        } else {
            CHECK_FALSE(any_unifier);
        }
    }
    CHECK(unifiable_seen > 50);
}

TEST_CASE("enumeration agrees with the brute-force oracle") {
    testutil::Rng rng(4242);
    for (int round = 0; round < 60; ++round) {
        testutil::RandomSchema schema = testutil::random_schema(rng);
        FederatedStore store;
        SourceDatabase src("R1", testutil::deg("0.5"));
        int facts = rng.below(13);
        for (int i = 0; i < facts; ++i) src.add(testutil::random_fact(rng, schema));
        store.add_source(std::move(src));
        for (const auto& [pred, arity] : schema.predicates) store.declare(pred, arity);
        TrustedView view = store.trusted(Degree::zero());

        int atom_count = 1 + rng.below(3);
        std::vector<Atom> pattern;
        for (int i = 0; i < atom_count; ++i)
            pattern.push_back(testutil::random_atom(rng, schema, true, 0.6));
        std::vector<ComparisonAtom> comparisons;
        std::set<Term> vars;
        for (const Atom& a : pattern)
            for (const Term& t : a.variables()) vars.insert(t);
        std::vector<Term> var_pool(vars.begin(), vars.end());
        if (!var_pool.empty() && rng.chance(0.4))
            comparisons.emplace_back(rng.pick(var_pool), rng.chance(0.5)
                                                             ? rng.pick(schema.constants)
                                                             : rng.pick(var_pool));

        std::vector<MatchResult> engine = homomorphisms(pattern, comparisons, view);
        auto oracle = testutil::brute_force_homomorphisms(pattern, comparisons, view);
        CHECK(mappings(engine) == oracle);
        CHECK(engine.size() == oracle.size());

        // soundness: h applied to the pattern lands in the trusted facts
        for (const MatchResult& m : engine)
            for (const Atom& a : pattern) CHECK(view.find(m.h.apply(a)) != nullptr);

        // determinism: a second run yields the identical stream
        std::vector<MatchResult> again = homomorphisms(pattern, comparisons, view);
        REQUIRE(again.size() == engine.size());
        for (std::size_t i = 0; i < engine.size(); ++i) {
            CHECK(again[i].h.mapping() == engine[i].h.mapping());
            REQUIRE(again[i].facts_used.size() == engine[i].facts_used.size());
            for (std::size_t j = 0; j < engine[i].facts_used.size(); ++j)
                CHECK(again[i].facts_used[j] == engine[i].facts_used[j]);
        }
    }
}

TEST_CASE("evaluation is a pure read usable from several threads") {
    FederatedStore store = testutil::table2_store();
    ConjunctiveQuery q = testutil::foreign_professors_query();
    std::vector<EvalAnswer> expected = evaluate(q, store, testutil::deg("0.7"));

    std::vector<std::thread> threads;
    std::vector<std::size_t> sizes(8, 0);
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&, i] { sizes[i] = evaluate(q, store, testutil::deg("0.7")).size(); });
    for (std::thread& t : threads) t.join();
    for (std::size_t n : sizes) CHECK(n == expected.size());
}
