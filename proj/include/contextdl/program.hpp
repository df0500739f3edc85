#pragma once

#include <optional>
#include <string>
#include <vector>

#include "contextdl/model.hpp"
#include "contextdl/validate.hpp"

namespace contextdl {

enum class ValidatorChoice { Naive, Compiled, Both };

/// Manifest: the file list a run works on, plus defaults. Paths are resolved
/// relative to the manifest's directory.
struct Manifest {
    std::vector<std::string> source_paths;
    std::optional<std::string> context_path;
    std::string query_path;
    std::optional<Degree> default_tau;
    EgdMode egd_mode = EgdMode::Lenient;
    ValidatorChoice validator = ValidatorChoice::Naive;
};

Manifest parse_manifest(const std::string& text, const std::string& filename,
                        const std::string& base_dir);
Manifest load_manifest(const std::string& path);

/// Per-item diagnostics from whole-program validation: cross-file arity
/// consistency, query well-formedness, weak acyclicity of the positive
/// constraints.
struct LoadReport {
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

LoadReport validate_program(const std::vector<SourceDatabase>& sources, const Context& ctx,
                            const std::vector<ConjunctiveQuery>& queries);

struct LoadedProgram {
    Manifest manifest;
    FederatedStore store;
    Context context;
    std::vector<ConjunctiveQuery> queries;
};

/// Parses and validates everything the manifest names. Throws ParseError on
/// the first problem. The store's schema covers every predicate the program
/// mentions, so constraint heads unknown to the sources still evaluate.
LoadedProgram load_program(const Manifest& manifest);
LoadedProgram load_program_from(const std::string& manifest_path);

std::string read_file(const std::string& path);  // throws ParseError(IoError)

}  // namespace contextdl
