#include "mixplan/service.hpp"

#include "mixplan/api.hpp"
#include "mixplan/errors.hpp"

#include <httplib.h>

#include <cstdlib>
#include <functional>
#include <future>
#include <map>
#include <thread>

namespace mixplan::service {
namespace {

using Handler = Json (*)(const Json&);

const std::map<std::string, Handler, std::less<>>& routes()
{
    static const std::map<std::string, Handler, std::less<>> table{
        {"/plan/one-stage", &api::plan_one_stage},
        {"/plan/two-stage", &api::plan_two_stage},
        {"/plan/multicenter", &api::plan_multicenter},
        {"/feasible", &api::feasible},
        {"/sweep", &api::sweep},
        {"/surface", &api::surface},
        {"/beta-table", &api::beta_table},
        {"/simulate", &api::simulate},
    };
    return table;
}

Response failure(int status, std::string_view code, const std::string& message)
{
    Json body{{"ok", false}, {"error", {{"code", std::string(code)}, {"message", message}}}};
    return {status, body.dump()};
}

Response from_error(const Error& e)
{
    switch (e.code()) {
    case ErrorCode::validation: return failure(400, "validation", e.what());
    case ErrorCode::infeasible: return failure(422, "infeasible", e.what());
    case ErrorCode::resource: return failure(422, "resource", e.what());
    case ErrorCode::numerical:
    case ErrorCode::internal: break;
    }
    return failure(500, "internal", e.what());
}

int env_int(const char* name, int fallback, int lo, int hi)
{
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    const long x = std::strtol(v, &end, 10);
    if (*end != '\0' || x < lo || x > hi) return fallback;
    return static_cast<int>(x);
}

}  // namespace

Response handle_request(std::string_view method, std::string_view path, std::string_view body)
{
    if (path == "/healthz") {
        if (method != "GET") return failure(405, "validation", "use GET /healthz");
        return {200, Json{{"ok", true}}.dump()};
    }
    const auto it = routes().find(path);
    if (it == routes().end()) return failure(404, "validation", "unknown endpoint " + std::string(path));
    if (method != "POST") return failure(405, "validation", "use POST " + std::string(path));
    try {
        const Json request = parse_json(body);
        Json out{{"ok", true}, {"result", it->second(request)}};
        return {200, out.dump()};
    } catch (const Error& e) {
        return from_error(e);
    } catch (const nlohmann::json::exception& e) {
        return failure(400, "validation", e.what());
    } catch (const std::bad_alloc&) {
        return failure(422, "resource", "out of memory");
    } catch (const std::exception& e) {
        return failure(500, "internal", e.what());
    }
}

Response handle_with_timeout(std::string_view method, std::string_view path, std::string_view body,
                             std::chrono::milliseconds timeout)
{
    auto promise = std::make_shared<std::promise<Response>>();
    auto result = promise->get_future();
    std::thread([promise, m = std::string(method), p = std::string(path), b = std::string(body)] {
        promise->set_value(handle_request(m, p, b));
    }).detach();
    if (result.wait_for(timeout) == std::future_status::ready) return result.get();
    return failure(503, "resource",
                   "request exceeded the " + std::to_string(timeout.count() / 1000.0) + " s time limit");
}

ServerOptions server_options_from_env()
{
    ServerOptions o;
    o.port = env_int("PLANNER_PORT", 8080, 0, 65535);
    if (const char* h = std::getenv("PLANNER_HOST"); h && *h) o.host = h;
    o.timeout = std::chrono::seconds(env_int("PLANNER_TIMEOUT_SECONDS", 120, 1, 86'400));
    return o;
}

struct Server::Impl {
    ServerOptions options;
    httplib::Server http;
    std::thread worker;
    int port = -1;
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>())
{
    impl_->options = std::move(options);
    auto& http = impl_->http;
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
    const auto timeout = impl_->options.timeout;
    auto dispatch = [timeout](const httplib::Request& req, httplib::Response& res) {
        const auto r = handle_with_timeout(req.method, req.path, req.body, timeout);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    http.Get(".*", dispatch);
    http.Post(".*", dispatch);
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

Server::~Server() { stop(); }

int Server::start()
{
    auto& im = *impl_;
    if (im.worker.joinable()) return im.port;
    if (im.options.port == 0)
        im.port = im.http.bind_to_any_port(im.options.host);
    else
        im.port = im.http.bind_to_port(im.options.host, im.options.port) ? im.options.port : -1;
    if (im.port < 0)
        throw ResourceError("cannot bind " + im.options.host + ":" + std::to_string(im.options.port));
    im.worker = std::thread([&im] { im.http.listen_after_bind(); });
    im.http.wait_until_ready();
    return im.port;
}

void Server::run()
{
    start();
    if (impl_->worker.joinable()) impl_->worker.join();
}

void Server::stop()
{
    if (!impl_) return;
    impl_->http.stop();
    if (impl_->worker.joinable() && impl_->worker.get_id() != std::this_thread::get_id()) impl_->worker.join();
}

}  // namespace mixplan::service
