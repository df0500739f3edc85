#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "contextdl/model.hpp"
#include "contextdl/program.hpp"
#include "testutil.hpp"

using namespace contextdl;

TEST_CASE("term kinds are disjoint") {
    Term c = Term::constant("Bob");
    Term v = Term::variable("Bob");
    Term n = Term::null("Bob");
    CHECK(c != v);
    CHECK(c != n);
    CHECK(v != n);
    CHECK(c == Term::constant("Bob"));
    // ordering groups by kind first
    CHECK(c < n);
    CHECK(n < v);
}

TEST_CASE("degrees parse and render exactly") {
    CHECK(Degree::parse("0.95")->units() == 950000);
    CHECK(Degree::parse("1")->in_range());
    CHECK(Degree::parse("0.7")->to_string() == "0.7");
    CHECK(Degree::parse("0.80")->to_string() == "0.8");
    CHECK(Degree::parse("1.3").has_value());
    CHECK_FALSE(Degree::parse("1.3")->in_range());
    CHECK_FALSE(Degree::parse("0.1234567").has_value());  // too many digits
    CHECK_FALSE(Degree::parse("x").has_value());
    CHECK_FALSE(Degree::parse("0.").has_value());
    CHECK(min(*Degree::parse("0.95"), *Degree::parse("0.8")) == *Degree::parse("0.8"));
    // exact threshold comparison: 0.7 >= 0.7
    CHECK(*Degree::parse("0.70") >= *Degree::parse("0.7"));
}

TEST_CASE("facts are ground by construction") {
    CHECK_NOTHROW(Fact("professor", {Term::constant("Bob")}));
    CHECK_THROWS_AS(Fact("professor", {Term::variable("X")}), EngineError);
    CHECK_THROWS_AS(Fact("professor", {Term::null("n1")}), EngineError);
}

TEST_CASE("comparison atoms keep a variable on the left") {
    CHECK_NOTHROW(ComparisonAtom(Term::variable("X"), Term::constant("a")));
    CHECK_NOTHROW(ComparisonAtom(Term::variable("X"), Term::variable("Y")));
    CHECK_THROWS_AS(ComparisonAtom(Term::constant("a"), Term::variable("X")), EngineError);
    CHECK_THROWS_AS(ComparisonAtom(Term::variable("X"), Term::null("n1")), EngineError);
}

TEST_CASE("homomorphisms respect kind rules") {
    Homomorphism h;
    CHECK(h.bind(Term::constant("a"), Term::constant("a")));   // identity only
    CHECK_FALSE(h.bind(Term::constant("a"), Term::constant("b")));
    CHECK(h.bind(Term::variable("X"), Term::null("n1")));
    CHECK(h.bind(Term::null("n1"), Term::constant("a")));
    CHECK_FALSE(h.bind(Term::null("n2"), Term::variable("X")));  // null -> var forbidden
    CHECK_FALSE(h.bind(Term::variable("X"), Term::constant("a")));  // conflicts with n1
    CHECK(h.apply(Term::variable("X")) == Term::null("n1"));
    CHECK(h.apply(Term::constant("zzz")) == Term::constant("zzz"));
}

TEST_CASE("equality closure rejects equating two constants") {
    EqualityClosure closure;
    CHECK(closure.merge(Term::variable("X"), Term::constant("a")));
    CHECK_FALSE(closure.merge(Term::variable("X"), Term::constant("b")));
    CHECK_FALSE(closure.satisfiable());
}

TEST_CASE("source databases deduplicate and order facts") {
    SourceDatabase s("S1", *Degree::parse("0.5"));
    s.add(Fact("p", {Term::constant("b")}));
    s.add(Fact("p", {Term::constant("a")}));
    s.add(Fact("p", {Term::constant("a")}));
    CHECK(s.facts().size() == 2);
    CHECK(s.facts()[0].terms()[0] == Term::constant("a"));
    CHECK_THROWS_AS(SourceDatabase("bad", *Degree::parse("1.3")), EngineError);
}

TEST_CASE("store provenance is total and trusted views are exact") {
    FederatedStore store = testutil::table2_store();

    Fact shared("employeeGov", {Term::constant("Bob")});
    CHECK(store.sources_of(shared) == std::vector<std::string>{"S3"});
    Fact s1_fact("professor", {Term::constant("Bob")});
    CHECK(store.sources_of(s1_fact) == std::vector<std::string>{"S1"});

    // trusted restriction at tau_in keeps exactly the sources with tau >= tau_in
    TrustedView at75 = store.trusted(testutil::deg("0.75"));
    std::size_t s1 = 9, s2 = 10, s3 = 13;
    CHECK(at75.fact_count() == s1 + s2);
    CHECK(store.trusted(testutil::deg("0.7")).fact_count() == s1 + s2 + s3);
    CHECK(store.trusted(testutil::deg("1")).fact_count() == 0);
    CHECK(store.trusted(Degree::zero()).fact_count() == s1 + s2 + s3);

    // a fact present in one trusted source reports it with its degree
    const TrustedView::StoredFact* found = at75.find(s1_fact.atom());
    REQUIRE(found);
    CHECK(found->source_ids == std::vector<std::string>{"S1"});
    CHECK(found->degree == testutil::deg("0.95"));
    CHECK(at75.find(shared.atom()) == nullptr);  // S3 excluded at 0.75
}

TEST_CASE("schema locks arity at first use") {
    Schema schema;
    CHECK(schema.declare("p", 2));
    CHECK(schema.declare("p", 2));
    CHECK_FALSE(schema.declare("p", 3));
    CHECK(*schema.arity("p") == 2);
}

TEST_CASE("validate_program flags the spec's failure modes") {
    // head variable missing from the body
    ConjunctiveQuery missing;
    missing.head_predicate = "q";
    missing.head = {Term::variable("X")};
    missing.body = {Atom{"bornIn", {Term::variable("Y"), Term::variable("Z")}}};
    LoadReport r1 = validate_program({}, {}, {missing});
    REQUIRE_FALSE(r1.ok());
    CHECK(r1.diagnostics.front().code == Errc::NotRangeRestricted);

    // comparisons equating two distinct constants
    ConjunctiveQuery unsat;
    unsat.head_predicate = "q";
    unsat.body = {Atom{"p", {Term::variable("X")}}};
    unsat.comparisons.emplace_back(Term::variable("X"), Term::constant("a"));
    unsat.comparisons.emplace_back(Term::variable("X"), Term::constant("b"));
    LoadReport r2 = validate_program({}, {}, {unsat});
    REQUIRE_FALSE(r2.ok());
    CHECK(r2.diagnostics.front().code == Errc::UnsatisfiableQuery);

    // arity clash across files
    SourceDatabase a("A", *Degree::parse("0.5"));
    a.add(Fact("p", {Term::constant("x")}));
    SourceDatabase b("B", *Degree::parse("0.5"));
    b.add(Fact("p", {Term::constant("x"), Term::constant("y")}));
    LoadReport r3 = validate_program({a, b}, {}, {});
    REQUIRE_FALSE(r3.ok());
    CHECK(r3.diagnostics.front().code == Errc::ArityMismatch);
    CHECK(r3.diagnostics.front().message.find("'p'") != std::string::npos);

    // non-weakly-acyclic positive constraints
    Context cyclic;
    cyclic.positives.push_back({"r1", Atom{"p", {Term::variable("X")}},
                                Atom{"q", {Term::variable("X"), Term::variable("Y")}}});
    cyclic.positives.push_back({"r2", Atom{"q", {Term::variable("X"), Term::variable("Y")}},
                                Atom{"p", {Term::variable("Y")}}});
    LoadReport r4 = validate_program({}, cyclic, {});
    REQUIRE_FALSE(r4.ok());
    CHECK(r4.diagnostics.front().code == Errc::NotWeaklyAcyclic);

    // the golden fixture program is clean
    std::vector<SourceDatabase> sources;
    for (const char* name : {"source1.facts", "source2.facts", "source3.facts"})
        sources.push_back(parse_source_file(testutil::read_fixture(name), name));
    LoadReport ok = validate_program(sources, testutil::table1_context(),
                                     {testutil::foreign_professors_query()});
    CHECK(ok.ok());
}

TEST_CASE("core values are usable as set keys deterministically") {
    std::set<Atom> atoms;
    atoms.insert(Atom{"b", {Term::constant("x")}});
    atoms.insert(Atom{"a", {Term::constant("y")}});
    atoms.insert(Atom{"a", {Term::constant("x")}});
    std::vector<Atom> in_order(atoms.begin(), atoms.end());
    CHECK(in_order[0].predicate == "a");
    CHECK(in_order[0].terms[0] == Term::constant("x"));
    CHECK(in_order[2].predicate == "b");
}
