#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

namespace mixplan::service {

struct Response {
    int status = 200;
    std::string body;
};

// Routes one request to the api layer and wraps the result as
// {"ok": true, "result": ...} or {"ok": false, "error": {"code", "message"}}.
// Stateless; safe to call concurrently.
Response handle_request(std::string_view method, std::string_view path, std::string_view body);

// As above, but gives up after `timeout` with 503. The abandoned computation
// finishes in the background and its result is discarded.
Response handle_with_timeout(std::string_view method, std::string_view path, std::string_view body,
                             std::chrono::milliseconds timeout);

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::chrono::milliseconds timeout{120'000};
};

// PLANNER_PORT, PLANNER_HOST, PLANNER_TIMEOUT_SECONDS.
ServerOptions server_options_from_env();

class Server {
public:
    explicit Server(ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds and serves on a background thread; returns the bound port.
    int start();
    // Blocks until stop() is called from elsewhere.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mixplan::service
