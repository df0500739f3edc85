#include "contextdl/render.hpp"

#include <algorithm>
#include <cctype>

namespace contextdl {

namespace {

bool bare_identifier(const std::string& s) {
    if (s.empty()) return false;
    unsigned char first = static_cast<unsigned char>(s[0]);
    if (!std::isalnum(first)) return false;  // '_' would clash with the null prefix
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    // A bare digit run with a fraction would lex as a number; plain runs are fine.
    return true;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string render_constant(const std::string& symbol, TermStyle style) {
    if (!bare_identifier(symbol) || symbol == "false") return quoted(symbol);
    if (style == TermStyle::Rule && std::isupper(static_cast<unsigned char>(symbol[0])))
        return "#" + symbol;
    return symbol;
}

// Comparison right sides fold capitalized identifiers back to variables only
// when they occur in the body, so constants that do not collide with a body
// variable can stay bare.
std::string render_comparison_rhs(const Term& t, const std::set<std::string>& body_vars) {
    if (t.is_variable()) return t.text();
    if (bare_identifier(t.text()) && t.text() != "false" && !body_vars.count(t.text()))
        return t.text();
    return render_constant(t.text(), TermStyle::Rule);
}

std::set<std::string> variable_names(const std::vector<Atom>& atoms) {
    std::set<std::string> out;
    for (const Atom& a : atoms)
        for (const Term& t : a.terms)
            if (t.is_variable()) out.insert(t.text());
    return out;
}

std::string render_comparisons(const std::vector<ComparisonAtom>& comparisons,
                               const std::vector<Atom>& body) {
    std::set<std::string> body_vars = variable_names(body);
    std::string out;
    for (const ComparisonAtom& c : comparisons)
        out += ", " + c.left().text() + " = " + render_comparison_rhs(c.right(), body_vars);
    return out;
}

std::string join_atoms(const std::vector<Atom>& atoms, TermStyle style) {
    std::string out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (i) out += ", ";
        out += render_atom(atoms[i], style);
    }
    return out;
}

}  // namespace

std::string render_term(const Term& t, TermStyle style) {
    switch (t.kind()) {
        case TermKind::Constant:
            return render_constant(t.text(), style);
        case TermKind::Null:
            return "_:" + t.text();
        case TermKind::Variable:
            return t.text();
    }
    return t.text();
}

std::string render_atom(const Atom& a, TermStyle style) {
    std::string out = a.predicate + "(";
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (i) out += ", ";
        out += render_term(a.terms[i], style);
    }
    out += ")";
    return out;
}

std::string render_tuple(const std::vector<Term>& tuple) {
    std::string out = "(";
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) out += ",";
        out += render_term(tuple[i], TermStyle::Ground);
    }
    out += ")";
    return out;
}

std::string render_fact(const Fact& f) { return render_atom(f.atom(), TermStyle::Ground) + "."; }

std::string render_source(const SourceDatabase& s) {
    std::string out = "@source " + s.id() + " @confidence " + s.tau().to_string() + "\n";
    for (const Fact& f : s.facts()) out += render_fact(f) + "\n";
    return out;
}

std::string render_instance(const std::vector<Atom>& atoms) {
    std::vector<Atom> sorted = atoms;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::string out;
    for (const Atom& a : sorted) out += render_atom(a, TermStyle::Ground) + ".\n";
    return out;
}

std::string render_constraint(const PositiveConstraint& c) {
    return c.id + ": " + render_atom(c.body, TermStyle::Rule) + " -> " +
           render_atom(c.head, TermStyle::Rule) + ".";
}

std::string render_constraint(const NegativeConstraint& c) {
    return c.id + ": " + join_atoms(c.atoms, TermStyle::Rule) +
           render_comparisons(c.comparisons, c.atoms) + " -> false.";
}

std::string render_constraint(const EgdConstraint& c) {
    std::string out = c.id + ": " + render_atom(c.atom1, TermStyle::Rule) + ", " +
                      render_atom(c.atom2, TermStyle::Rule) + " -> ";
    for (std::size_t i = 0; i < c.equalities.size(); ++i) {
        if (i) out += ", ";
        out += c.equalities[i].first.text() + " = " + c.equalities[i].second.text();
    }
    out += ".";
    return out;
}

std::string render_context(const Context& ctx) {
    std::string out;
    for (const auto& c : ctx.positives) out += render_constraint(c) + "\n";
    for (const auto& c : ctx.negatives1) out += render_constraint(c) + "\n";
    for (const auto& c : ctx.negatives2) out += render_constraint(c) + "\n";
    for (const auto& c : ctx.egds) out += render_constraint(c) + "\n";
    return out;
}

std::string render_query(const ConjunctiveQuery& q) {
    Atom head{q.head_predicate, q.head};
    std::string out = render_atom(head, TermStyle::Rule) + " :- " + join_atoms(q.body, TermStyle::Rule);
    out += render_comparisons(q.comparisons, q.body);
    if (q.tau_in != Degree::zero()) out += " @tau " + q.tau_in.to_string();
    return out;
}

}  // namespace contextdl
