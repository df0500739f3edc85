#include "contextdl/service.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "contextdl/cli.hpp"
#include "contextdl/parse.hpp"
#include "contextdl/render.hpp"

namespace contextdl {

namespace {

using nlohmann::json;

json tuple_to_json(const std::vector<Term>& tuple) {
    json out = json::array();
    for (const Term& t : tuple) out.push_back(t.text());
    return out;
}

json used_facts_to_json(const std::vector<UsedFact>& facts) {
    json out = json::array();
    for (const UsedFact& f : facts) {
        json entry;
        entry["fact"] = render_atom(f.fact.atom(), TermStyle::Ground);
        entry["sources"] = f.source_ids;
        entry["tau"] = f.degree.to_string();
        out.push_back(entry);
    }
    return out;
}

}  // namespace

HttpReply handle_health(const LoadedProgram& program) {
    json body;
    body["status"] = "ok";
    json sources = json::array();
    for (const SourceDatabase& s : program.store.sources()) {
        json entry;
        entry["id"] = s.id();
        entry["tau"] = s.tau().to_string();
        entry["facts"] = s.facts().size();
        sources.push_back(entry);
    }
    body["sources"] = sources;
    return {200, body.dump()};
}

HttpReply handle_query(const LoadedProgram& program, const std::string& request_body) {
    json request = json::parse(request_body, nullptr, false);
    if (request.is_discarded() || !request.is_object())
        return {400, json({{"error", "request body is not a JSON object"}}).dump()};
    if (!request.contains("query") || !request["query"].is_string())
        return {400, json({{"error", "missing string field 'query'"}}).dump()};

    ConjunctiveQuery query;
    try {
        query = parse_query(request["query"].get<std::string>(), "request");
    } catch (const ParseError& e) {
        return {400, json({{"error", e.diagnostic().to_string()}}).dump()};
    }

    Degree tau = query.tau_in;
    if (request.contains("tau_in")) {
        const json& t = request["tau_in"];
        std::optional<Degree> parsed;
        if (t.is_number())
            parsed = Degree::from_double(t.get<double>());
        else if (t.is_string())
            parsed = Degree::parse(t.get<std::string>());
        if (!parsed || !parsed->in_range())
            return {400, json({{"error", "tau_in must be a confidence degree in [0,1]"}}).dump()};
        tau = *parsed;
    } else if (query.tau_in == Degree::zero() && program.manifest.default_tau) {
        tau = *program.manifest.default_tau;
    }
    bool explain = request.value("explain", false);

    ValidatorOptions options;
    options.egd_mode = program.manifest.egd_mode;

    ValidationReport report;
    try {
        if (program.manifest.validator == ValidatorChoice::Compiled) {
            report = compiled_valid_answers(query, tau, program.context, program.store, options);
        } else {
            report = valid_answers(query, tau, program.context, program.store, options);
            if (program.manifest.validator == ValidatorChoice::Both) {
                ValidationReport compiled =
                    compiled_valid_answers(query, tau, program.context, program.store, options);
                if (!reports_agree(report, compiled))
                    return {500, json({{"error", "validator mismatch"}}).dump()};
            }
        }
    } catch (const EngineError& e) {
        return {400, json({{"error", e.what()}}).dump()};
    }

    json body;
    json answers = json::array();
    for (const ScoredAnswer& a : report.valid) {
        json entry;
        entry["tuple"] = tuple_to_json(a.tuple);
        entry["tau"] = a.tau_out.to_string();
        if (explain) {
            entry["witness"] = json{{"uses", used_facts_to_json(a.witness.body_facts)},
                                    {"entails", used_facts_to_json(a.witness.entailed_facts)}};
        }
        answers.push_back(entry);
    }
    body["answers"] = answers;

    json rejected = json::array();
    for (const Rejection& r : report.rejected) {
        json entry;
        entry["tuple"] = tuple_to_json(r.tuple);
        entry["condition"] = std::string(1, r.condition);
        if (!r.constraint_id.empty()) entry["constraint"] = r.constraint_id;
        entry["atom"] = render_atom(r.offending, TermStyle::Ground);
        if (explain && !r.detail.empty()) entry["detail"] = r.detail;
        rejected.push_back(entry);
    }
    body["report"] = json{{"rejected", rejected}, {"tau_in", tau.to_string()}};
    return {200, body.dump()};
}

// ---------------------------------------------------------------------------
// HTTP shell
// ---------------------------------------------------------------------------

struct Service::Impl {
    const LoadedProgram& program;
    httplib::Server server;
    std::thread worker;

    explicit Impl(const LoadedProgram& p) : program(p) {
        server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            HttpReply reply = handle_health(program);
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
        server.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
            HttpReply reply = handle_query(program, req.body);
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
    }
};

Service::Service(const LoadedProgram& program) : impl_(std::make_unique<Impl>(program)) {}

Service::~Service() { stop(); }

bool Service::run(const std::string& host, int port) {
    return impl_->server.listen(host, port);
}

int Service::start_background(const std::string& host) {
    int port = impl_->server.bind_to_any_port(host);
    if (port <= 0) return -1;
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace contextdl
