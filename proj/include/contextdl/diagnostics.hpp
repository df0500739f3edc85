#pragma once

#include <stdexcept>
#include <string>

namespace contextdl {

enum class Errc {
    SyntaxError,
    ConfidenceOutOfRange,
    ArityMismatch,
    NotRangeRestricted,
    UnsatisfiableQuery,
    NotWeaklyAcyclic,
    MalformedConstraint,
    UnknownPredicate,
    EmptyDegreeSet,
    IoError,
};

const char* errc_name(Errc code);

/// A load-time problem tied to a location in an input file. Line and column
/// are 1-based; zero means "not tied to a position" (whole-program checks).
struct Diagnostic {
    Errc code = Errc::SyntaxError;
    std::string message;
    std::string file;
    int line = 0;
    int column = 0;

    std::string to_string() const;
};

class ParseError : public std::runtime_error {
public:
    explicit ParseError(Diagnostic d) : std::runtime_error(d.to_string()), diag_(std::move(d)) {}
    const Diagnostic& diagnostic() const { return diag_; }

private:
    Diagnostic diag_;
};

class EngineError : public std::runtime_error {
public:
    EngineError(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

}  // namespace contextdl
