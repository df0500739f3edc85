#pragma once

#include <memory>
#include <string>

#include "contextdl/program.hpp"

namespace contextdl {

/// Pure request handlers; the HTTP layer is a thin shell around these so
/// they stay directly testable and responses stay byte-stable.
struct HttpReply {
    int status = 200;
    std::string body;  // JSON
};

HttpReply handle_health(const LoadedProgram& program);
HttpReply handle_query(const LoadedProgram& program, const std::string& request_body);

/// Long-running JSON service over a loaded program. The store is immutable
/// once the server starts; requests are handled concurrently.
class Service {
public:
    explicit Service(const LoadedProgram& program);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds and serves until stop(); returns false when binding fails.
    bool run(const std::string& host, int port);
    // Binds an ephemeral port, serves on a background thread, returns the
    // port. Used by tests.
    int start_background(const std::string& host);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace contextdl
