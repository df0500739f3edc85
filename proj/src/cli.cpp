#include "contextdl/cli.hpp"

#include <cstdlib>

#include "contextdl/chase.hpp"
#include "contextdl/parse.hpp"
#include "contextdl/render.hpp"

namespace contextdl {

namespace {

std::string used_fact_line(const UsedFact& f) {
    std::string out = render_atom(f.fact.atom(), TermStyle::Ground) + " [";
    for (const std::string& id : f.source_ids) out += id + " ";
    out += f.degree.to_string() + "]";
    return out;
}

Degree effective_tau(const ConjunctiveQuery& q, const Manifest& manifest,
                     const QueryOverrides& overrides) {
    if (overrides.tau) return *overrides.tau;
    if (q.tau_in != Degree::zero()) return q.tau_in;
    return manifest.default_tau.value_or(Degree::zero());
}

// Test hook: lets the mutation tests fake a compiled-validator bug so the
// mismatch path (exit 3) stays exercised end to end.
void apply_test_mutation(ValidationReport& report) {
    const char* mode = std::getenv("CONTEXTDL_TEST_MUTATE_COMPILED");
    if (!mode || !*mode) return;
    std::string m(mode);
    if (m == "drop-first" && !report.valid.empty()) {
        report.valid.erase(report.valid.begin());
    } else if (m == "bump-tau" && !report.valid.empty()) {
        report.valid.front().tau_out = Degree::one();
    }
}

}  // namespace

std::string render_answer_line(const ScoredAnswer& answer) {
    return render_tuple(answer.tuple) + " : " + answer.tau_out.to_string();
}

std::string render_explanation(const ScoredAnswer& answer) {
    std::string out;
    for (const UsedFact& f : answer.witness.body_facts) out += "  uses " + used_fact_line(f) + "\n";
    for (const UsedFact& f : answer.witness.entailed_facts)
        out += "  entails " + used_fact_line(f) + "\n";
    return out;
}

std::string render_rejection_line(const Rejection& r) {
    std::string out = "rejected " + render_tuple(r.tuple) + ": condition (" + r.condition + ")";
    if (!r.constraint_id.empty()) out += ", constraint " + r.constraint_id;
    out += ", atom " + render_atom(r.offending, TermStyle::Ground);
    if (!r.detail.empty()) out += "; " + r.detail;
    return out;
}

bool reports_agree(const ValidationReport& a, const ValidationReport& b) {
    if (a.valid.size() != b.valid.size() || a.rejected.size() != b.rejected.size()) return false;
    for (std::size_t i = 0; i < a.valid.size(); ++i)
        if (a.valid[i].tuple != b.valid[i].tuple || a.valid[i].tau_out != b.valid[i].tau_out)
            return false;
    for (std::size_t i = 0; i < a.rejected.size(); ++i)
        if (a.rejected[i].tuple != b.rejected[i].tuple) return false;
    return true;
}

CmdResult cmd_check(const std::string& manifest_path) {
    CmdResult result;
    try {
        Manifest manifest = load_manifest(manifest_path);

        std::vector<SourceDatabase> sources;
        for (const std::string& path : manifest.source_paths) {
            sources.push_back(parse_source_file(read_file(path), path));
            result.out += "source " + path + ": ok (" + std::to_string(sources.back().facts().size()) +
                          " facts, confidence " + sources.back().tau().to_string() + ")\n";
        }
        Context ctx;
        if (manifest.context_path) {
            ctx = parse_context_file(read_file(*manifest.context_path), *manifest.context_path);
            result.out += "context " + *manifest.context_path + ": ok (" +
                          std::to_string(ctx.positives.size()) + " positive, " +
                          std::to_string(ctx.negatives1.size() + ctx.negatives2.size()) +
                          " negative, " + std::to_string(ctx.egds.size()) + " key)\n";
        }
        std::vector<ConjunctiveQuery> queries =
            parse_query_file(read_file(manifest.query_path), manifest.query_path);
        result.out += "queries " + manifest.query_path + ": ok (" + std::to_string(queries.size()) +
                      (queries.size() == 1 ? " query)\n" : " queries)\n");

        LoadReport report = validate_program(sources, ctx, queries);
        if (!report.ok()) {
            for (const Diagnostic& d : report.diagnostics) result.err += d.to_string() + "\n";
            result.exit_code = 2;
            return result;
        }
        result.out += "program: ok\n";
    } catch (const ParseError& e) {
        result.err += e.diagnostic().to_string() + "\n";
        result.exit_code = 2;
    }
    return result;
}

CmdResult cmd_chase(const std::string& context_path, const std::string& instance_path) {
    CmdResult result;
    try {
        Context ctx = parse_context_file(read_file(context_path), context_path);
        std::vector<Atom> instance = parse_instance(read_file(instance_path), instance_path);
        ChaseResult chased = chase(ctx.positives, instance);
        for (const Atom& a : chased.atoms) result.out += render_atom(a, TermStyle::Ground) + ".\n";
        if (!chased.trace.empty()) {
            result.out += "% trace\n";
            for (const ChaseStep& step : chased.trace)
                result.out += "% " + step.constraint_id + " on " +
                              render_atom(step.trigger, TermStyle::Ground) + " => " +
                              render_atom(step.produced, TermStyle::Ground) + "\n";
        }
    } catch (const ParseError& e) {
        result.err += e.diagnostic().to_string() + "\n";
        result.exit_code = 2;
    } catch (const EngineError& e) {
        result.err += std::string(e.what()) + "\n";
        result.exit_code = 2;
    }
    return result;
}

CmdResult cmd_query(const std::string& manifest_path, const QueryOverrides& overrides) {
    CmdResult result;
    LoadedProgram program;
    try {
        program = load_program_from(manifest_path);
    } catch (const ParseError& e) {
        result.err += e.diagnostic().to_string() + "\n";
        result.exit_code = 2;
        return result;
    }

    ValidatorChoice choice = overrides.validator.value_or(program.manifest.validator);
    ValidatorOptions options;
    options.egd_mode = overrides.egd_mode.value_or(program.manifest.egd_mode);

    try {
        for (std::size_t i = 0; i < program.queries.size(); ++i) {
            const ConjunctiveQuery& q = program.queries[i];
            Degree tau = effective_tau(q, program.manifest, overrides);
            if (program.queries.size() > 1)
                result.out += "% query " + std::to_string(i + 1) + ": " + render_query(q) + "\n";

            ValidationReport report;
            if (choice == ValidatorChoice::Compiled) {
                report = compiled_valid_answers(q, tau, program.context, program.store, options);
                apply_test_mutation(report);
            } else {
                report = valid_answers(q, tau, program.context, program.store, options);
            }
            if (choice == ValidatorChoice::Both) {
                ValidationReport compiled =
                    compiled_valid_answers(q, tau, program.context, program.store, options);
                apply_test_mutation(compiled);
                if (!reports_agree(report, compiled)) {
                    result.err += "validator mismatch on query " + std::to_string(i + 1) + ": " +
                                  render_query(q) + "\n";
                    result.exit_code = 3;
                    return result;
                }
            }

            for (const ScoredAnswer& a : report.valid) {
                result.out += render_answer_line(a) + "\n";
                if (overrides.explain) result.out += render_explanation(a);
            }
            if (overrides.explain)
                for (const Rejection& r : report.rejected)
                    result.out += render_rejection_line(r) + "\n";
        }
    } catch (const EngineError& e) {
        result.err += std::string(e.what()) + "\n";
        result.exit_code = 2;
    }
    return result;
}

}  // namespace contextdl
