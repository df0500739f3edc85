#include "contextdl/model.hpp"

#include <algorithm>

namespace contextdl {

// ---------------------------------------------------------------------------
// Atom / Fact
// ---------------------------------------------------------------------------

bool Atom::is_ground() const {
    return std::all_of(terms.begin(), terms.end(), [](const Term& t) { return t.is_constant(); });
}

bool Atom::has_variables() const {
    return std::any_of(terms.begin(), terms.end(), [](const Term& t) { return t.is_variable(); });
}

std::set<Term> Atom::variables() const {
    std::set<Term> out;
    for (const Term& t : terms)
        if (t.is_variable()) out.insert(t);
    return out;
}

std::set<Term> Atom::nulls() const {
    std::set<Term> out;
    for (const Term& t : terms)
        if (t.is_null()) out.insert(t);
    return out;
}

Fact::Fact(Atom atom) : atom_(std::move(atom)) {
    if (!atom_.is_ground())
        throw EngineError(Errc::MalformedConstraint,
                          "fact over '" + atom_.predicate + "' contains a non-constant term");
}

Fact::Fact(std::string predicate, std::vector<Term> terms)
    : Fact(Atom{std::move(predicate), std::move(terms)}) {}

ComparisonAtom::ComparisonAtom(Term left, Term right)
    : left_(std::move(left)), right_(std::move(right)) {
    if (!left_.is_variable())
        throw EngineError(Errc::MalformedConstraint, "comparison left side must be a variable");
    if (right_.is_null())
        throw EngineError(Errc::MalformedConstraint, "comparison right side must be a variable or constant");
}

// ---------------------------------------------------------------------------
// Homomorphism
// ---------------------------------------------------------------------------

bool Homomorphism::bind(const Term& from, const Term& to) {
    if (from.is_constant()) return from == to;
    if (from.is_null() && to.is_variable()) return false;
    auto [it, inserted] = mapping_.emplace(from, to);
    return inserted || it->second == to;
}

const Term& Homomorphism::apply(const Term& t) const {
    auto it = mapping_.find(t);
    return it == mapping_.end() ? t : it->second;
}

Atom Homomorphism::apply(const Atom& a) const {
    Atom out{a.predicate, {}};
    out.terms.reserve(a.terms.size());
    for (const Term& t : a.terms) out.terms.push_back(apply(t));
    return out;
}

std::vector<Atom> Homomorphism::apply(const std::vector<Atom>& atoms) const {
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const Atom& a : atoms) out.push_back(apply(a));
    return out;
}

std::optional<Term> Homomorphism::lookup(const Term& t) const {
    auto it = mapping_.find(t);
    if (it == mapping_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// EqualityClosure
// ---------------------------------------------------------------------------

Term EqualityClosure::find(const Term& t) const {
    auto it = parent_.find(t);
    if (it == parent_.end() || it->second == t) return t;
    Term root = find(it->second);
    parent_[t] = root;
    return root;
}

Term EqualityClosure::representative(const Term& t) const { return find(t); }

bool EqualityClosure::merge(const Term& a, const Term& b) {
    Term ra = find(a);
    Term rb = find(b);
    if (ra == rb) return satisfiable_;
    if (ra.is_constant() && rb.is_constant()) {
        satisfiable_ = false;
        return false;
    }
    // Representative priority: constants over nulls over variables (a null
    // may map to a constant or null but never to a variable). Within a kind
    // the larger class keeps its representative; ties go to the
    // lexicographically larger name so the smaller one ends up bound.
    bool ra_is_rep;
    if (ra.kind() != rb.kind()) {
        ra_is_rep = ra.kind() < rb.kind();
    } else {
        int sa = size_.count(ra) ? size_.at(ra) : 1;
        int sb = size_.count(rb) ? size_.at(rb) : 1;
        if (sa != sb)
            ra_is_rep = sa > sb;
        else
            ra_is_rep = ra > rb;
    }
    const Term& rep = ra_is_rep ? ra : rb;
    const Term& child = ra_is_rep ? rb : ra;
    parent_[child] = rep;
    int total = (size_.count(ra) ? size_.at(ra) : 1) + (size_.count(rb) ? size_.at(rb) : 1);
    size_[rep] = total;
    return true;
}

// ---------------------------------------------------------------------------
// Query checks
// ---------------------------------------------------------------------------

std::vector<Diagnostic> check_query(const ConjunctiveQuery& q) {
    std::vector<Diagnostic> out;
    std::set<Term> body_vars;
    for (const Atom& a : q.body)
        for (const Term& t : a.terms)
            if (t.is_variable()) body_vars.insert(t);

    for (const Term& t : q.head) {
        if (t.is_variable() && !body_vars.count(t))
            out.push_back({Errc::NotRangeRestricted,
                           "head variable " + t.text() + " does not occur in the body"});
        if (t.is_null())
            out.push_back({Errc::NotRangeRestricted, "head contains a null"});
    }
    for (const ComparisonAtom& c : q.comparisons) {
        if (!body_vars.count(c.left()))
            out.push_back({Errc::NotRangeRestricted,
                           "comparison variable " + c.left().text() + " does not occur in the body"});
        if (c.right().is_variable() && !body_vars.count(c.right()))
            out.push_back({Errc::NotRangeRestricted,
                           "comparison variable " + c.right().text() + " does not occur in the body"});
    }

    EqualityClosure closure;
    for (const ComparisonAtom& c : q.comparisons) closure.add(c);
    if (!closure.satisfiable())
        out.push_back({Errc::UnsatisfiableQuery,
                       "comparisons equate two distinct constants"});
    return out;
}

// ---------------------------------------------------------------------------
// Constraint checks
// ---------------------------------------------------------------------------

std::set<Term> PositiveConstraint::frontier() const {
    std::set<Term> out;
    std::set<Term> body_vars = body.variables();
    for (const Term& t : head.variables())
        if (body_vars.count(t)) out.insert(t);
    return out;
}

std::set<Term> PositiveConstraint::existentials() const {
    std::set<Term> out;
    std::set<Term> body_vars = body.variables();
    for (const Term& t : head.variables())
        if (!body_vars.count(t)) out.insert(t);
    return out;
}

namespace {
bool atom_has_null(const Atom& a) {
    return std::any_of(a.terms.begin(), a.terms.end(), [](const Term& t) { return t.is_null(); });
}
}  // namespace

std::vector<Diagnostic> check_constraint(const PositiveConstraint& c) {
    std::vector<Diagnostic> out;
    if (atom_has_null(c.body) || atom_has_null(c.head))
        out.push_back({Errc::MalformedConstraint, c.id + ": constraints may not contain nulls"});
    return out;
}

std::vector<Diagnostic> check_constraint(const NegativeConstraint& c) {
    std::vector<Diagnostic> out;
    if (c.atoms.empty() || c.atoms.size() > 2) {
        out.push_back({Errc::MalformedConstraint,
                       c.id + ": negative constraint needs one or two body atoms, got " +
                           std::to_string(c.atoms.size())});
        return out;
    }
    for (const Atom& a : c.atoms)
        if (atom_has_null(a))
            out.push_back({Errc::MalformedConstraint, c.id + ": constraints may not contain nulls"});
    if (c.atoms.size() == 2) {
        std::set<Term> v1 = c.atoms[0].variables();
        std::set<Term> v2 = c.atoms[1].variables();
        if (!v1.empty() && !v2.empty()) {
            // The atoms must share a variable, either directly or through the
            // comparison closure.
            EqualityClosure closure;
            for (const ComparisonAtom& cmp : c.comparisons) closure.add(cmp);
            std::set<Term> r1, r2;
            for (const Term& t : v1) r1.insert(closure.representative(t));
            for (const Term& t : v2) r2.insert(closure.representative(t));
            bool shared = std::any_of(r1.begin(), r1.end(),
                                      [&](const Term& t) { return r2.count(t) > 0; });
            if (!shared)
                out.push_back({Errc::MalformedConstraint,
                               c.id + ": the two atoms share no variable"});
        }
    }
    return out;
}

std::vector<Diagnostic> check_constraint(const EgdConstraint& c) {
    std::vector<Diagnostic> out;
    if (atom_has_null(c.atom1) || atom_has_null(c.atom2))
        out.push_back({Errc::MalformedConstraint, c.id + ": constraints may not contain nulls"});
    std::set<Term> v1 = c.atom1.variables();
    std::set<Term> v2 = c.atom2.variables();
    bool shared = std::any_of(v1.begin(), v1.end(), [&](const Term& t) { return v2.count(t) > 0; });
    if (!shared)
        out.push_back({Errc::MalformedConstraint, c.id + ": the two atoms share no variable"});
    if (c.equalities.empty())
        out.push_back({Errc::MalformedConstraint, c.id + ": EGD has no equalities"});
    for (const auto& [x, y] : c.equalities) {
        if (!x.is_variable() || !v1.count(x))
            out.push_back({Errc::MalformedConstraint,
                           c.id + ": equality term " + x.text() + " is not a variable of the first atom"});
        if (!y.is_variable() || !v2.count(y))
            out.push_back({Errc::MalformedConstraint,
                           c.id + ": equality term " + y.text() + " is not a variable of the second atom"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// SourceDatabase
// ---------------------------------------------------------------------------

SourceDatabase::SourceDatabase(std::string id, Degree tau) : id_(std::move(id)), tau_(tau) {
    if (!tau_.in_range())
        throw EngineError(Errc::ConfidenceOutOfRange,
                          "source " + id_ + " has confidence " + tau_.to_string());
}

void SourceDatabase::add(Fact fact) {
    auto it = std::lower_bound(facts_.begin(), facts_.end(), fact);
    if (it != facts_.end() && *it == fact) return;
    facts_.insert(it, std::move(fact));
}

bool SourceDatabase::contains(const Fact& fact) const {
    return std::binary_search(facts_.begin(), facts_.end(), fact);
}

// ---------------------------------------------------------------------------
// Schema / FederatedStore / TrustedView
// ---------------------------------------------------------------------------

bool Schema::declare(const std::string& predicate, int arity) {
    auto [it, inserted] = arities_.emplace(predicate, arity);
    return inserted || it->second == arity;
}

std::optional<int> Schema::arity(const std::string& predicate) const {
    auto it = arities_.find(predicate);
    if (it == arities_.end()) return std::nullopt;
    return it->second;
}

bool Schema::knows(const std::string& predicate) const { return arities_.count(predicate) > 0; }

void FederatedStore::add_source(SourceDatabase source) {
    for (const Fact& f : source.facts()) schema_.declare(f.predicate(), f.atom().arity());
    sources_.push_back(std::move(source));
}

std::vector<std::string> FederatedStore::sources_of(const Fact& fact) const {
    std::vector<std::string> out;
    for (const SourceDatabase& s : sources_)
        if (s.contains(fact)) out.push_back(s.id());
    std::sort(out.begin(), out.end());
    return out;
}

TrustedView FederatedStore::trusted(Degree tau_in) const {
    return trusted(tau_in, [](Degree tin, Degree tau) { return tau >= tin; });
}

TrustedView FederatedStore::trusted(Degree tau_in, const TrustCond& cond) const {
    return TrustedView(*this, tau_in, cond);
}

const std::vector<TrustedView::StoredFact> TrustedView::kNoFacts;
const std::vector<int> TrustedView::kNoIndices;

TrustedView::TrustedView(const FederatedStore& store, Degree tau_in, const TrustCond& cond)
    : tau_in_(tau_in), schema_(store.schema()) {
    std::map<Fact, StoredFact> merged;
    for (const SourceDatabase& s : store.sources()) {
        if (!cond(tau_in, s.tau())) continue;
        for (const Fact& f : s.facts()) {
            auto [it, inserted] = merged.emplace(f, StoredFact{f, {s.id()}, s.tau()});
            if (!inserted) {
                it->second.source_ids.push_back(s.id());
                it->second.degree = max(it->second.degree, s.tau());
            }
        }
    }
    for (auto& [fact, stored] : merged) {
        std::sort(stored.source_ids.begin(), stored.source_ids.end());
        by_predicate_[fact.predicate()].push_back(std::move(stored));
    }
    for (auto& [pred, facts] : by_predicate_) {
        // map iteration already yields canonical fact order
        int arity = facts.front().fact.atom().arity();
        auto& slots = index_[pred];
        slots.resize(arity);
        for (int i = 0; i < static_cast<int>(facts.size()); ++i)
            for (int pos = 0; pos < arity; ++pos)
                slots[pos][facts[i].fact.terms()[pos]].push_back(i);
    }
}

const std::vector<TrustedView::StoredFact>& TrustedView::facts(const std::string& predicate) const {
    auto it = by_predicate_.find(predicate);
    return it == by_predicate_.end() ? kNoFacts : it->second;
}

const TrustedView::StoredFact* TrustedView::find(const Atom& ground_atom) const {
    auto it = by_predicate_.find(ground_atom.predicate);
    if (it == by_predicate_.end()) return nullptr;
    const auto& facts = it->second;
    auto pos = std::lower_bound(facts.begin(), facts.end(), ground_atom,
                                [](const StoredFact& s, const Atom& a) { return s.fact.atom() < a; });
    if (pos == facts.end() || pos->fact.atom() != ground_atom) return nullptr;
    return &*pos;
}

const std::vector<int>& TrustedView::candidates(const std::string& predicate, int position,
                                                const Term& value) const {
    auto it = index_.find(predicate);
    if (it == index_.end()) return kNoIndices;
    const auto& slots = it->second;
    if (position < 0 || position >= static_cast<int>(slots.size())) return kNoIndices;
    auto vit = slots[position].find(value);
    return vit == slots[position].end() ? kNoIndices : vit->second;
}

std::size_t TrustedView::fact_count() const {
    std::size_t n = 0;
    for (const auto& [pred, facts] : by_predicate_) n += facts.size();
    return n;
}

std::vector<TrustedView::StoredFact> TrustedView::all_facts() const {
    std::vector<StoredFact> out;
    out.reserve(fact_count());
    for (const auto& [pred, facts] : by_predicate_)
        out.insert(out.end(), facts.begin(), facts.end());
    return out;
}

// ---------------------------------------------------------------------------
// AnswerWitness
// ---------------------------------------------------------------------------

std::vector<Degree> AnswerWitness::degrees() const {
    std::vector<Degree> out;
    out.reserve(body_facts.size() + entailed_facts.size());
    for (const UsedFact& f : body_facts) out.push_back(f.degree);
    for (const UsedFact& f : entailed_facts) out.push_back(f.degree);
    return out;
}

}  // namespace contextdl
