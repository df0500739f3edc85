#pragma once

#include <optional>
#include <string>

#include "contextdl/program.hpp"

namespace contextdl {

/// Outcome of one CLI command; the tool prints `out` to stdout, `err` to
/// stderr and exits with `exit_code` (0 ok, 2 load error, 3 validator
/// mismatch).
struct CmdResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

struct QueryOverrides {
    std::optional<Degree> tau;
    bool explain = false;
    std::optional<ValidatorChoice> validator;
    std::optional<EgdMode> egd_mode;
};

CmdResult cmd_check(const std::string& manifest_path);
CmdResult cmd_chase(const std::string& context_path, const std::string& instance_path);
CmdResult cmd_query(const std::string& manifest_path, const QueryOverrides& overrides);

/// Rendering shared with the HTTP service.
std::string render_answer_line(const ScoredAnswer& answer);
std::string render_explanation(const ScoredAnswer& answer);
std::string render_rejection_line(const Rejection& rejection);

/// True when the two reports agree on answer tuples and degrees (the
/// compiled-vs-naive contract).
bool reports_agree(const ValidationReport& a, const ValidationReport& b);

}  // namespace contextdl
