#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>

#include "contextdl/cli.hpp"
#include "contextdl/service.hpp"

namespace {

bool color_enabled() {
    const char* mode = std::getenv("CONTEXTDL_COLOR");
    if (mode && std::string(mode) == "never") return false;
    return isatty(fileno(stderr));
}

int finish(const contextdl::CmdResult& result) {
    std::cout << result.out;
    if (!result.err.empty()) {
        if (color_enabled())
            std::cerr << "\033[31m" << result.err << "\033[0m";
        else
            std::cerr << result.err;
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contextdl: confidence-scored federated query answering under user constraints"};
    app.require_subcommand(1);

    std::string manifest_path;
    std::string context_path;
    std::string instance_path;
    std::string bind_addr = "127.0.0.1:8080";
    std::string tau_text;
    std::string validator_text;
    std::string egd_text;
    bool explain = false;

    CLI::App* check = app.add_subcommand("check", "Load and validate a manifest");
    check->add_option("--manifest", manifest_path, "Manifest file")->required();

    CLI::App* chase = app.add_subcommand("chase", "Chase an instance with a context's positive constraints");
    chase->add_option("--context", context_path, "Context file")->required();
    chase->add_option("--instance", instance_path, "Instance file")->required();

    CLI::App* query = app.add_subcommand("query", "Answer the manifest's queries with validation");
    query->add_option("--manifest", manifest_path, "Manifest file")->required();
    query->add_option("--tau", tau_text, "Override tau_in for all queries");
    query->add_flag("--explain", explain, "Print witnesses and rejection reasons");
    query->add_option("--validator", validator_text, "naive, compiled, or both")
        ->check(CLI::IsMember({"naive", "compiled", "both"}));
    query->add_option("--egd-mode", egd_text, "strict or lenient")
        ->check(CLI::IsMember({"strict", "lenient"}));

    CLI::App* serve = app.add_subcommand("serve", "Serve the loaded program over HTTP");
    serve->add_option("--manifest", manifest_path, "Manifest file")->required();
    serve->add_option("--bind", bind_addr, "host:port to bind (default 127.0.0.1:8080)");

    CLI11_PARSE(app, argc, argv);

    if (check->parsed()) return finish(contextdl::cmd_check(manifest_path));
    if (chase->parsed()) return finish(contextdl::cmd_chase(context_path, instance_path));

    if (query->parsed()) {
        contextdl::QueryOverrides overrides;
        overrides.explain = explain;
        if (!tau_text.empty()) {
            auto d = contextdl::Degree::parse(tau_text);
            if (!d || !d->in_range()) {
                std::cerr << "invalid --tau value '" << tau_text << "'\n";
                return 2;
            }
            overrides.tau = *d;
        }
        if (validator_text == "naive") overrides.validator = contextdl::ValidatorChoice::Naive;
        if (validator_text == "compiled") overrides.validator = contextdl::ValidatorChoice::Compiled;
        if (validator_text == "both") overrides.validator = contextdl::ValidatorChoice::Both;
        if (egd_text == "strict") overrides.egd_mode = contextdl::EgdMode::Strict;
        if (egd_text == "lenient") overrides.egd_mode = contextdl::EgdMode::Lenient;
        return finish(contextdl::cmd_query(manifest_path, overrides));
    }

    if (serve->parsed()) {
        contextdl::LoadedProgram program;
        try {
            program = contextdl::load_program_from(manifest_path);
        } catch (const contextdl::ParseError& e) {
            std::cerr << e.diagnostic().to_string() << "\n";
            return 2;
        }
        std::string host = bind_addr;
        int port = 8080;
        auto colon = bind_addr.rfind(':');
        if (colon != std::string::npos) {
            host = bind_addr.substr(0, colon);
            port = std::atoi(bind_addr.c_str() + colon + 1);
        }
        contextdl::Service service(program);
        std::cerr << "serving on " << host << ":" << port << "\n";
        if (!service.run(host, port)) {
            std::cerr << "failed to bind " << bind_addr << "\n";
            return 2;
        }
        return 0;
    }
    return 0;
}
