#include "contextdl/diagnostics.hpp"

namespace contextdl {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::SyntaxError: return "SyntaxError";
        case Errc::ConfidenceOutOfRange: return "ConfidenceOutOfRange";
        case Errc::ArityMismatch: return "ArityMismatch";
        case Errc::NotRangeRestricted: return "NotRangeRestricted";
        case Errc::UnsatisfiableQuery: return "UnsatisfiableQuery";
        case Errc::NotWeaklyAcyclic: return "NotWeaklyAcyclic";
        case Errc::MalformedConstraint: return "MalformedConstraint";
        case Errc::UnknownPredicate: return "UnknownPredicate";
        case Errc::EmptyDegreeSet: return "EmptyDegreeSet";
        case Errc::IoError: return "IoError";
    }
    return "UnknownError";
}

std::string Diagnostic::to_string() const {
    std::string out;
    if (!file.empty()) out += file + ":";
    if (line > 0) {
        out += std::to_string(line) + ":";
        if (column > 0) out += std::to_string(column) + ":";
    }
    if (!out.empty()) out += " ";
    out += errc_name(code);
    out += ": ";
    out += message;
    return out;
}

}  // namespace contextdl
