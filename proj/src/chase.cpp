#include "contextdl/chase.hpp"

#include <algorithm>
#include <deque>

namespace contextdl {

// ---------------------------------------------------------------------------
// Dependency graph and weak acyclicity
// ---------------------------------------------------------------------------

DependencyGraph DependencyGraph::build(const std::vector<PositiveConstraint>& positives) {
    DependencyGraph g;
    std::set<PredicatePosition> nodes;
    std::set<DependencyEdge> edges;

    auto positions_of = [](const Atom& atom, const Term& var) {
        std::vector<int> out;
        for (int i = 0; i < atom.arity(); ++i)
            if (atom.terms[i] == var) out.push_back(i);
        return out;
    };

    for (const PositiveConstraint& c : positives) {
        for (int i = 0; i < c.body.arity(); ++i) nodes.insert({c.body.predicate, i});
        for (int i = 0; i < c.head.arity(); ++i) nodes.insert({c.head.predicate, i});

        std::set<Term> frontier = c.frontier();
        std::set<Term> existentials = c.existentials();
        for (const Term& x : frontier) {
            for (int body_pos : positions_of(c.body, x)) {
                PredicatePosition from{c.body.predicate, body_pos};
                for (int head_pos : positions_of(c.head, x))
                    edges.insert({from, {c.head.predicate, head_pos}, false, c.id});
                for (const Term& z : existentials)
                    for (int head_pos : positions_of(c.head, z))
                        edges.insert({from, {c.head.predicate, head_pos}, true, c.id});
            }
        }
    }
    g.nodes.assign(nodes.begin(), nodes.end());
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

namespace {

// Shortest edge path from -> to, restricted to the given node set.
std::vector<DependencyEdge> shortest_path(const DependencyGraph& g,
                                          const std::set<PredicatePosition>& allowed,
                                          const PredicatePosition& from,
                                          const PredicatePosition& to) {
    std::map<PredicatePosition, DependencyEdge> came_from;
    std::set<PredicatePosition> visited{from};
    std::deque<PredicatePosition> queue{from};
    while (!queue.empty()) {
        PredicatePosition node = queue.front();
        queue.pop_front();
        if (node == to) break;
        for (const DependencyEdge& e : g.edges) {
            if (e.from != node || !allowed.count(e.to) || visited.count(e.to)) continue;
            visited.insert(e.to);
            came_from.emplace(e.to, e);
            queue.push_back(e.to);
        }
    }
    std::vector<DependencyEdge> path;
    if (from == to) return path;
    if (!visited.count(to)) return path;  // unreachable; caller checks
    PredicatePosition cur = to;
    while (cur != from) {
        const DependencyEdge& e = came_from.at(cur);
        path.push_back(e);
        cur = e.from;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

AcyclicityResult is_weakly_acyclic(const std::vector<PositiveConstraint>& positives) {
    DependencyGraph g = DependencyGraph::build(positives);

    // Tarjan-style SCC via iterative Kosaraju: order by finish time, then
    // assign components on the transposed graph.
    std::map<PredicatePosition, std::vector<PredicatePosition>> fwd, rev;
    for (const DependencyEdge& e : g.edges) {
        fwd[e.from].push_back(e.to);
        rev[e.to].push_back(e.from);
    }
    std::vector<PredicatePosition> order;
    std::set<PredicatePosition> seen;
    for (const PredicatePosition& start : g.nodes) {
        if (seen.count(start)) continue;
        // Iterative DFS with an explicit exit marker.
        std::vector<std::pair<PredicatePosition, bool>> stack{{start, false}};
        while (!stack.empty()) {
            auto [node, exiting] = stack.back();
            stack.pop_back();
            if (exiting) {
                order.push_back(node);
                continue;
            }
            if (seen.count(node)) continue;
            seen.insert(node);
            stack.push_back({node, true});
            auto it = fwd.find(node);
            if (it != fwd.end())
                for (const PredicatePosition& next : it->second)
                    if (!seen.count(next)) stack.push_back({next, false});
        }
    }
    std::map<PredicatePosition, int> component;
    int component_count = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (component.count(*it)) continue;
        int id = component_count++;
        std::vector<PredicatePosition> stack{*it};
        component[*it] = id;
        while (!stack.empty()) {
            PredicatePosition node = stack.back();
            stack.pop_back();
            auto rit = rev.find(node);
            if (rit == rev.end()) continue;
            for (const PredicatePosition& prev : rit->second) {
                if (component.count(prev)) continue;
                component[prev] = id;
                stack.push_back(prev);
            }
        }
    }

    for (const DependencyEdge& e : g.edges) {
        if (!e.special || component.at(e.from) != component.at(e.to)) continue;
        // A cycle through this special edge exists: e plus a path back.
        std::set<PredicatePosition> scc;
        for (const auto& [node, id] : component)
            if (id == component.at(e.from)) scc.insert(node);
        std::vector<DependencyEdge> cycle{e};
        std::vector<DependencyEdge> back = shortest_path(g, scc, e.to, e.from);
        cycle.insert(cycle.end(), back.begin(), back.end());
        return {false, std::move(cycle)};
    }
    return {true, {}};
}

std::string describe_cycle(const std::vector<DependencyEdge>& cycle) {
    std::string out;
    for (const DependencyEdge& e : cycle) {
        if (!out.empty()) out += ", ";
        out += e.from.to_string() + " -> " + e.to.to_string();
        if (e.special) out += " [special]";
        out += " (" + e.constraint_id + ")";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Chase
// ---------------------------------------------------------------------------

void NullMinter::bump_past(const std::vector<Atom>& atoms) {
    for (const Atom& a : atoms) {
        for (const Term& t : a.terms) {
            if (!t.is_null()) continue;
            const std::string& label = t.text();
            if (label.size() < 2 || label[0] != 'n') continue;
            bool digits = std::all_of(label.begin() + 1, label.end(),
                                      [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
            if (!digits) continue;
            int k = std::atoi(label.c_str() + 1);
            if (k >= next_) next_ = k + 1;
        }
    }
}

std::vector<Atom> ChaseResult::atoms_in_creation_order() const {
    std::vector<Atom> out = input;
    for (const ChaseStep& step : trace) out.push_back(step.produced);
    return out;
}

namespace detail {

std::optional<Homomorphism> match_rule_atom(const Atom& pattern, const Atom& candidate) {
    if (pattern.predicate != candidate.predicate || pattern.arity() != candidate.arity())
        return std::nullopt;
    Homomorphism h;
    for (int i = 0; i < pattern.arity(); ++i) {
        const Term& p = pattern.terms[i];
        const Term& c = candidate.terms[i];
        if (p.is_variable()) {
            if (!h.bind(p, c)) return std::nullopt;
        } else if (p != c) {
            // constants (and nulls) match only themselves
            return std::nullopt;
        }
    }
    return h;
}

namespace {

// Does any extension of `bound` map `head` into the atom set? Unbound head
// variables may take any term of a candidate atom; bound images and
// constants must match exactly.
bool head_satisfied(const Homomorphism& bound, const Atom& head, const std::set<Atom>& atoms) {
    for (const Atom& candidate : atoms) {
        if (candidate.predicate != head.predicate || candidate.arity() != head.arity()) continue;
        Homomorphism h = bound;
        bool ok = true;
        for (int i = 0; i < head.arity() && ok; ++i) {
            const Term& p = head.terms[i];
            const Term& c = candidate.terms[i];
            if (p.is_variable())
                ok = h.bind(p, c);
            else
                ok = h.apply(p) == c;
        }
        if (ok) return true;
    }
    return false;
}

}  // namespace

ChaseResult chase_unchecked(const std::vector<PositiveConstraint>& positives,
                            std::vector<Atom> instance, NullMinter& minter) {
    std::sort(instance.begin(), instance.end());
    instance.erase(std::unique(instance.begin(), instance.end()), instance.end());
    minter.bump_past(instance);

    ChaseResult result;
    result.input = instance;
    result.atoms.insert(instance.begin(), instance.end());
    // Nulls carried in by the instance are recorded with an empty
    // constraint id so the registry stays total over the atom set.
    for (const Atom& a : instance)
        for (const Term& t : a.terms)
            if (t.is_null()) result.null_registry.emplace(t, NullOrigin{"", a});

    bool changed = true;
    while (changed) {
        changed = false;
        for (const PositiveConstraint& c : positives) {
            std::vector<Atom> snapshot(result.atoms.begin(), result.atoms.end());
            for (const Atom& trigger : snapshot) {
                auto h = match_rule_atom(c.body, trigger);
                if (!h) continue;
                if (head_satisfied(*h, c.head, result.atoms)) continue;

                ChaseStep step;
                step.constraint_id = c.id;
                step.trigger = trigger;
                step.binding = *h;
                for (const Term& z : c.head.variables()) {
                    if (step.binding.lookup(z)) continue;
                    Term fresh = minter.fresh();
                    step.binding.bind(z, fresh);
                    step.fresh_nulls.push_back(fresh);
                    result.null_registry.emplace(fresh, NullOrigin{c.id, trigger});
                }
                step.produced = step.binding.apply(c.head);
                result.atoms.insert(step.produced);
                result.trace.push_back(std::move(step));
                changed = true;
            }
        }
    }
    return result;
}

}  // namespace detail

ChaseResult chase(const std::vector<PositiveConstraint>& positives, std::vector<Atom> instance,
                  NullMinter& minter) {
    AcyclicityResult acyclicity = is_weakly_acyclic(positives);
    if (!acyclicity.ok)
        throw EngineError(Errc::NotWeaklyAcyclic,
                          "refusing to chase: " + describe_cycle(acyclicity.cycle));
    for (const Atom& a : instance)
        if (a.has_variables())
            throw EngineError(Errc::MalformedConstraint,
                              "chase instances may not contain variables");
    return detail::chase_unchecked(positives, std::move(instance), minter);
}

ChaseResult chase(const std::vector<PositiveConstraint>& positives, std::vector<Atom> instance) {
    NullMinter minter;
    return chase(positives, std::move(instance), minter);
}

}  // namespace contextdl
