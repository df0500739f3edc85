#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "contextdl/chase.hpp"
#include "contextdl/parse.hpp"
#include "contextdl/render.hpp"
#include "testutil.hpp"

using namespace contextdl;

namespace {

std::vector<PositiveConstraint> cyclic_rules() {
    // the same shape as the cyclic fixture; built directly since the parser
    // refuses to load it
    return {
        {"r1", Atom{"p", {Term::variable("X")}},
         Atom{"q", {Term::variable("X"), Term::variable("Y")}}},
        {"r2", Atom{"q", {Term::variable("X"), Term::variable("Y")}},
         Atom{"p", {Term::variable("Y")}}},
    };
}

bool has_edge(const DependencyGraph& g, const std::string& from_pred, int from_pos,
              const std::string& to_pred, int to_pos, bool special) {
    for (const DependencyEdge& e : g.edges)
        if (e.from == PredicatePosition{from_pred, from_pos} &&
            e.to == PredicatePosition{to_pred, to_pos} && e.special == special)
            return true;
    return false;
}

}  // namespace

TEST_CASE("dependency graph of the fixture context") {
    Context ctx = testutil::table1_context();
    DependencyGraph g = DependencyGraph::build(ctx.positives);

    CHECK(has_edge(g, "professor", 0, "teacherOf", 0, false));
    CHECK(has_edge(g, "professor", 0, "teacherOf", 1, true));
    CHECK(has_edge(g, "teacherOf", 1, "offeredCourseAt", 0, false));
    CHECK(has_edge(g, "teacherOf", 1, "offeredCourseAt", 1, true));
    CHECK(has_edge(g, "professor", 0, "employeeGov", 0, false));
    CHECK(has_edge(g, "teacherOf", 0, "researchesIn", 0, false));
    // cP4's head has no existential variables, so nothing special leaves it
    CHECK_FALSE(has_edge(g, "teacherOf", 0, "researchesIn", 1, true));

    CHECK(is_weakly_acyclic(ctx.positives).ok);
}

TEST_CASE("the two-rule cyclic set is rejected with a special-edge witness") {
    AcyclicityResult r = is_weakly_acyclic(cyclic_rules());
    REQUIRE_FALSE(r.ok);
    REQUIRE_FALSE(r.cycle.empty());
    CHECK(r.cycle.front().special);
    bool touches_q2 = false;
    for (const DependencyEdge& e : r.cycle)
        if (e.from == PredicatePosition{"q", 1} || e.to == PredicatePosition{"q", 1})
            touches_q2 = true;
    CHECK(touches_q2);
    CHECK(describe_cycle(r.cycle).find("[special]") != std::string::npos);

    // the cycle is closed: each edge feeds the next
    for (std::size_t i = 0; i < r.cycle.size(); ++i)
        CHECK(r.cycle[i].to == r.cycle[(i + 1) % r.cycle.size()].from);
}

TEST_CASE("empty and normal-cycle-only sets are weakly acyclic") {
    CHECK(is_weakly_acyclic({}).ok);

    // a cycle through normal edges only is fine
    std::vector<PositiveConstraint> ping_pong{
        {"r1", Atom{"p", {Term::variable("X")}}, Atom{"q", {Term::variable("X")}}},
        {"r2", Atom{"q", {Term::variable("X")}}, Atom{"p", {Term::variable("X")}}},
    };
    CHECK(is_weakly_acyclic(ping_pong).ok);
}

TEST_CASE("chasing professor(Bob) under the fixture context") {
    Context ctx = testutil::table1_context();
    ChaseResult r = chase(ctx.positives, {Atom{"professor", {Term::constant("Bob")}}});

    REQUIRE(r.atoms.size() == 4);
    CHECK(r.atoms.count(Atom{"professor", {Term::constant("Bob")}}));
    CHECK(r.atoms.count(Atom{"teacherOf", {Term::constant("Bob"), Term::null("n1")}}));
    CHECK(r.atoms.count(Atom{"offeredCourseAt", {Term::null("n1"), Term::null("n2")}}));
    CHECK(r.atoms.count(Atom{"employeeGov", {Term::constant("Bob")}}));

    // cP4 must not fire: the constant DB never matches the null _:n1
    for (const ChaseStep& s : r.trace) CHECK(s.constraint_id != "cP4");
    REQUIRE(r.trace.size() == 3);
    CHECK(r.trace[0].constraint_id == "cP1");
    CHECK(r.trace[1].constraint_id == "cP2");
    CHECK(r.trace[2].constraint_id == "cP3");

    // registry covers the minted nulls with their provenance
    REQUIRE(r.null_registry.size() == 2);
    CHECK(r.null_registry.at(Term::null("n1")).constraint_id == "cP1");
    CHECK(r.null_registry.at(Term::null("n2")).constraint_id == "cP2");
}

TEST_CASE("chasing teacherOf(Ann, DB) fires the constant-guarded rule") {
    Context ctx = testutil::table1_context();
    ChaseResult r =
        chase(ctx.positives, {Atom{"teacherOf", {Term::constant("Ann"), Term::constant("DB")}}});
    REQUIRE(r.atoms.size() == 3);
    CHECK(r.atoms.count(Atom{"offeredCourseAt", {Term::constant("DB"), Term::null("n1")}}));
    CHECK(r.atoms.count(Atom{"researchesIn", {Term::constant("Ann"), Term::constant("DB")}}));
}

TEST_CASE("chasing the empty instance does nothing") {
    Context ctx = testutil::table1_context();
    ChaseResult r = chase(ctx.positives, {});
    CHECK(r.atoms.empty());
    CHECK(r.trace.empty());
}

TEST_CASE("chase refuses non-weakly-acyclic rule sets") {
    CHECK_THROWS_AS(chase(cyclic_rules(), {Atom{"p", {Term::constant("a")}}}), EngineError);
}

TEST_CASE("re-chasing continues past parsed null labels") {
    Context ctx = testutil::table1_context();
    ChaseResult first = chase(ctx.positives, {Atom{"professor", {Term::constant("Bob")}}});
    std::vector<Atom> replay = parse_instance(render_instance(
        std::vector<Atom>(first.atoms.begin(), first.atoms.end())));
    NullMinter minter;
    minter.bump_past(replay);
    CHECK(minter.next_index() == 3);
}

TEST_CASE("randomized chase properties") {
    testutil::Rng rng(31337);
    for (int round = 0; round < 40; ++round) {
        testutil::RandomSchema schema = testutil::random_schema(rng);
        std::vector<PositiveConstraint> rules =
            testutil::random_weakly_acyclic_rules(rng, schema, 6);
        REQUIRE_FALSE(rules.empty());
        std::vector<Atom> instance = testutil::random_instance(rng, schema, 20);

        ChaseResult r = chase(rules, instance);

        // monotone: the instance is contained in the result
        for (const Atom& a : instance) CHECK(r.atoms.count(a));

        // soundness: each step reproduces its production from its binding,
        // and replaying the trace rebuilds the atom set
        std::set<Atom> replay(r.input.begin(), r.input.end());
        std::map<std::string, const PositiveConstraint*> by_id;
        for (const PositiveConstraint& c : rules) by_id[c.id] = &c;
        for (const ChaseStep& step : r.trace) {
            CHECK(replay.count(step.trigger));
            CHECK(step.produced == step.binding.apply(by_id.at(step.constraint_id)->head));
            replay.insert(step.produced);
        }
        CHECK(replay == r.atoms);

        // restricted: re-chasing the result adds nothing
        NullMinter minter;
        ChaseResult again = detail::chase_unchecked(
            rules, std::vector<Atom>(r.atoms.begin(), r.atoms.end()), minter);
        CHECK(again.trace.empty());
        CHECK(again.atoms == r.atoms);

        // every null in the result is registered
        for (const Atom& a : r.atoms)
            for (const Term& t : a.terms)
                if (t.is_null()) CHECK(r.null_registry.count(t));
    }
}
