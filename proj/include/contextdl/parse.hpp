#pragma once

#include <string>
#include <vector>

#include "contextdl/model.hpp"

namespace contextdl {

/// Source file: `@source <id> @confidence <decimal>` header followed by
/// ground fact statements `pred(c1, ..., cn).`  `%` comments to end of line.
SourceDatabase parse_source_file(const std::string& text, const std::string& filename = "");

/// Context file: one rule per statement, `id: body -> head.`  A head of
/// `false` marks a negative constraint, an equality list marks an EGD,
/// anything else is a positive constraint. Identifiers starting uppercase
/// are variables; `#Name` forces constant reading. Weak acyclicity of the
/// positive constraints is checked before returning.
Context parse_context_file(const std::string& text, const std::string& filename = "");

/// Query file: one query per line, `q(X, ...) :- atom, ..., X = t, ... @tau <decimal>`.
std::vector<ConjunctiveQuery> parse_query_file(const std::string& text,
                                               const std::string& filename = "");

/// Single query; rejects trailing statements.
ConjunctiveQuery parse_query(const std::string& text, const std::string& filename = "");

/// Instance file: atom statements like a source body but without a header;
/// labeled nulls `_:nK` are allowed, variables are not.
std::vector<Atom> parse_instance(const std::string& text, const std::string& filename = "");

}  // namespace contextdl
