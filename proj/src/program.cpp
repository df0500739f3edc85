#include "contextdl/program.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "contextdl/chase.hpp"
#include "contextdl/parse.hpp"

namespace contextdl {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError({Errc::IoError, "cannot open file", path, 0, 0});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

Manifest parse_manifest(const std::string& text, const std::string& filename,
                        const std::string& base_dir) {
    Manifest m;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        std::size_t comment = line.find('%');
        if (comment != std::string::npos) line = trim(line.substr(0, comment));
        if (line.empty()) continue;
        std::istringstream parts(line);
        std::string directive, value;
        parts >> directive;
        std::getline(parts, value);
        value = trim(value);
        auto fail = [&](Errc code, const std::string& message) -> void {
            throw ParseError({code, message, filename, line_no, 1});
        };
        if (directive == "@source") {
            if (value.empty()) fail(Errc::SyntaxError, "@source needs a path");
            m.source_paths.push_back(resolve(base_dir, value));
        } else if (directive == "@context") {
            if (value.empty()) fail(Errc::SyntaxError, "@context needs a path");
            m.context_path = resolve(base_dir, value);
        } else if (directive == "@queries") {
            if (value.empty()) fail(Errc::SyntaxError, "@queries needs a path");
            m.query_path = resolve(base_dir, value);
        } else if (directive == "@tau") {
            auto d = Degree::parse(value);
            if (!d) fail(Errc::SyntaxError, "malformed @tau value '" + value + "'");
            if (!d->in_range()) fail(Errc::ConfidenceOutOfRange, "@tau " + value + " outside [0,1]");
            m.default_tau = *d;
        } else if (directive == "@egd-mode") {
            if (value == "lenient")
                m.egd_mode = EgdMode::Lenient;
            else if (value == "strict")
                m.egd_mode = EgdMode::Strict;
            else
                fail(Errc::SyntaxError, "@egd-mode must be 'strict' or 'lenient'");
        } else if (directive == "@validator") {
            if (value == "naive")
                m.validator = ValidatorChoice::Naive;
            else if (value == "compiled")
                m.validator = ValidatorChoice::Compiled;
            else if (value == "both")
                m.validator = ValidatorChoice::Both;
            else
                fail(Errc::SyntaxError, "@validator must be 'naive', 'compiled' or 'both'");
        } else {
            fail(Errc::SyntaxError, "unknown manifest directive '" + directive + "'");
        }
    }
    if (m.source_paths.empty())
        throw ParseError({Errc::SyntaxError, "manifest names no sources", filename, 0, 0});
    if (m.query_path.empty())
        throw ParseError({Errc::SyntaxError, "manifest names no query file", filename, 0, 0});
    return m;
}

Manifest load_manifest(const std::string& path) {
    std::string base = std::filesystem::path(path).parent_path().string();
    return parse_manifest(read_file(path), path, base);
}

LoadReport validate_program(const std::vector<SourceDatabase>& sources, const Context& ctx,
                            const std::vector<ConjunctiveQuery>& queries) {
    LoadReport report;
    Schema schema;

    auto declare = [&](const Atom& atom, const std::string& where) {
        if (!schema.declare(atom.predicate, atom.arity()))
            report.diagnostics.push_back(
                {Errc::ArityMismatch,
                 where + " uses predicate '" + atom.predicate + "' with arity " +
                     std::to_string(atom.arity()) + " but it is declared with arity " +
                     std::to_string(*schema.arity(atom.predicate))});
    };

    for (const SourceDatabase& s : sources) {
        if (!s.tau().in_range())
            report.diagnostics.push_back({Errc::ConfidenceOutOfRange,
                                          "source " + s.id() + " has confidence " +
                                              s.tau().to_string()});
        for (const Fact& f : s.facts()) declare(f.atom(), "source " + s.id());
    }

    for (const PositiveConstraint& c : ctx.positives) {
        declare(c.body, "constraint " + c.id);
        declare(c.head, "constraint " + c.id);
        for (Diagnostic d : check_constraint(c)) report.diagnostics.push_back(std::move(d));
    }
    for (const auto* group : {&ctx.negatives1, &ctx.negatives2})
        for (const NegativeConstraint& c : *group) {
            for (const Atom& a : c.atoms) declare(a, "constraint " + c.id);
            for (Diagnostic d : check_constraint(c)) report.diagnostics.push_back(std::move(d));
        }
    for (const EgdConstraint& c : ctx.egds) {
        declare(c.atom1, "constraint " + c.id);
        declare(c.atom2, "constraint " + c.id);
        for (Diagnostic d : check_constraint(c)) report.diagnostics.push_back(std::move(d));
    }

    for (std::size_t i = 0; i < queries.size(); ++i) {
        const ConjunctiveQuery& q = queries[i];
        std::string where = "query " + std::to_string(i + 1);
        declare(Atom{q.head_predicate, q.head}, where);
        for (const Atom& a : q.body) declare(a, where);
        for (Diagnostic d : check_query(q)) {
            d.message = where + ": " + d.message;
            report.diagnostics.push_back(std::move(d));
        }
    }

    AcyclicityResult acyclicity = is_weakly_acyclic(ctx.positives);
    if (!acyclicity.ok)
        report.diagnostics.push_back({Errc::NotWeaklyAcyclic,
                                      "positive constraints are not weakly acyclic; cycle: " +
                                          describe_cycle(acyclicity.cycle)});
    return report;
}

LoadedProgram load_program(const Manifest& manifest) {
    LoadedProgram program;
    program.manifest = manifest;

    std::vector<SourceDatabase> sources;
    for (const std::string& path : manifest.source_paths)
        sources.push_back(parse_source_file(read_file(path), path));
    if (manifest.context_path)
        program.context = parse_context_file(read_file(*manifest.context_path), *manifest.context_path);
    program.queries = parse_query_file(read_file(manifest.query_path), manifest.query_path);

    LoadReport report = validate_program(sources, program.context, program.queries);
    if (!report.ok()) throw ParseError(report.diagnostics.front());

    for (SourceDatabase& s : sources) program.store.add_source(std::move(s));

    // Predicates only constraints or queries mention still need schema
    // entries so evaluation treats them as empty relations.
    auto declare_atom = [&](const Atom& a) { program.store.declare(a.predicate, a.arity()); };
    for (const PositiveConstraint& c : program.context.positives) {
        declare_atom(c.body);
        declare_atom(c.head);
    }
    for (const auto* group : {&program.context.negatives1, &program.context.negatives2})
        for (const NegativeConstraint& c : *group)
            for (const Atom& a : c.atoms) declare_atom(a);
    for (const EgdConstraint& c : program.context.egds) {
        declare_atom(c.atom1);
        declare_atom(c.atom2);
    }
    for (const ConjunctiveQuery& q : program.queries)
        for (const Atom& a : q.body) declare_atom(a);

    return program;
}

LoadedProgram load_program_from(const std::string& manifest_path) {
    return load_program(load_manifest(manifest_path));
}

}  // namespace contextdl
