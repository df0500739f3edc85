#pragma once

#include <set>
#include <string>

#include "contextdl/model.hpp"

namespace contextdl {

/// Ground text (facts, instances) reads every identifier as a constant, so
/// capitalized constants render bare. Rule text (constraints, queries) reads
/// capitalized identifiers as variables, so capitalized constants render
/// with the `#` escape.
enum class TermStyle { Ground, Rule };

std::string render_term(const Term& t, TermStyle style);
std::string render_atom(const Atom& a, TermStyle style);
std::string render_tuple(const std::vector<Term>& tuple);

std::string render_fact(const Fact& f);                    // with trailing '.'
std::string render_source(const SourceDatabase& s);        // header + sorted facts
std::string render_instance(const std::vector<Atom>& atoms);  // sorted atom statements

std::string render_constraint(const PositiveConstraint& c);
std::string render_constraint(const NegativeConstraint& c);
std::string render_constraint(const EgdConstraint& c);
std::string render_context(const Context& ctx);

std::string render_query(const ConjunctiveQuery& q);

}  // namespace contextdl
