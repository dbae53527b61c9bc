#include "mixplan/io.hpp"
#include "mixplan/service.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <cstdlib>
#include <future>
#include <vector>

using namespace mixplan;
using namespace mixplan::service;

namespace {

const char* kOneStage = R"({"region": {"mu": [2, 1, 0.7], "p": [0.2, 0.4, 0.6]}, "alpha": 0.05, "beta_max": 0.2})";

Json body_of(const Response& r) { return parse_json(r.body); }

}  // namespace

TEST(Service, OneStagePlan)
{
    const auto r = handle_request("POST", "/plan/one-stage", kOneStage);
    ASSERT_EQ(r.status, 200) << r.body;
    const auto j = body_of(r);
    EXPECT_EQ(j["ok"], true);
    EXPECT_EQ(j["result"]["n"], 86);
}

TEST(Service, Healthz)
{
    const auto r = handle_request("GET", "/healthz", "");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(body_of(r)["ok"], true);
}

TEST(Service, ErrorEnvelopes)
{
    auto check = [](const Response& r, int status, const char* code) {
        EXPECT_EQ(r.status, status) << r.body;
        const auto j = body_of(r);
        EXPECT_EQ(j["ok"], false);
        EXPECT_EQ(j["error"]["code"], code);
        EXPECT_FALSE(j["error"]["message"].get<std::string>().empty());
    };
    check(handle_request("POST", "/plan/one-stage", "{not json"), 400, "validation");
    check(handle_request("POST", "/plan/one-stage", R"({"region": {"mu": [1, 2], "p": [0.2, 0.4]}})"), 400,
          "validation");
    check(handle_request("POST", "/plan/one-stage", R"({"region": {"mu": [2], "p": [0.2]}, "alpha": "x"})"), 400,
          "validation");
    check(handle_request("POST", "/nope", "{}"), 404, "validation");
    check(handle_request("GET", "/plan/one-stage", ""), 405, "validation");
    check(handle_request("POST", "/plan/two-stage",
                         R"({"region": {"mu": [2, 1, 0.7], "p": [0.2, 0.4, 0.6]}, "alpha": 0.05, "beta_max": 0.2, "n1": 5, "alpha0": 0.7})"),
          422, "infeasible");
}

TEST(Service, LargeEnumerationIsResourceError)
{
    const auto r = handle_request("POST", "/beta-table", R"({
        "M": 10, "procedure": "hochberg", "kind": "exact", "method": "full",
        "center_design": {"n1": 60, "alpha0": 0.7, "alpha1": 0.002, "n2": 40, "alpha": 0.005},
        "strong_point": {"mu": 1, "p": 0.5}})");
    EXPECT_EQ(r.status, 422) << r.body;
    EXPECT_EQ(body_of(r)["error"]["code"], "resource");
}

TEST(Service, OversizedGridIsResourceError)
{
    const auto r = handle_request("POST", "/sweep", R"({
        "region": {"mu": [2, 1, 0.7], "p": [0.2, 0.4, 0.6]}, "alpha": 0.05, "beta_max": 0.2,
        "n1_grid": "1:100000:1", "alpha0_grid": "0.55:0.95:0.0001"})");
    EXPECT_EQ(r.status, 422) << r.body;
    EXPECT_EQ(body_of(r)["error"]["code"], "resource");
}

TEST(Service, TimeoutIs503)
{
    const auto r = handle_with_timeout("POST", "/sweep", R"({
        "region": {"mu": [2, 1, 0.7], "p": [0.2, 0.4, 0.6]}, "alpha": 0.05, "beta_max": 0.2,
        "n1_grid": "12:86:1", "alpha0_grid": "0.55:0.95:0.025"})",
                                       std::chrono::milliseconds(5));
    EXPECT_EQ(r.status, 503);
    EXPECT_EQ(body_of(r)["error"]["code"], "resource");
    EXPECT_EQ(handle_with_timeout("GET", "/healthz", "", std::chrono::seconds(10)).status, 200);
}

TEST(Service, OptionsFromEnvironment)
{
    ::setenv("PLANNER_PORT", "9123", 1);
    ::setenv("PLANNER_TIMEOUT_SECONDS", "7", 1);
    auto o = server_options_from_env();
    EXPECT_EQ(o.port, 9123);
    EXPECT_EQ(o.timeout, std::chrono::seconds(7));
    ::setenv("PLANNER_PORT", "junk", 1);
    EXPECT_EQ(server_options_from_env().port, 8080);
    ::unsetenv("PLANNER_PORT");
    ::unsetenv("PLANNER_TIMEOUT_SECONDS");
}

TEST(Service, LiveServer)
{
    ServerOptions opt;
    opt.port = 0;
    opt.timeout = std::chrono::seconds(60);
    Server server(opt);
    const int port = server.start();
    ASSERT_GT(port, 0);

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);

    auto health = client.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");

    auto pre = client.Options("/plan/one-stage");
    ASSERT_TRUE(pre);
    EXPECT_EQ(pre->status, 204);
    EXPECT_FALSE(pre->get_header_value("Access-Control-Allow-Methods").empty());

    auto plan = client.Post("/plan/one-stage", kOneStage, "application/json");
    ASSERT_TRUE(plan);
    EXPECT_EQ(plan->status, 200);
    EXPECT_EQ(parse_json(plan->body)["result"]["n"], 86);
    EXPECT_NE(plan->get_header_value("Content-Type").find("application/json"), std::string::npos);

    auto missing = client.Post("/unknown", "{}", "application/json");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    std::vector<std::future<std::string>> jobs;
    for (int i = 0; i < 4; ++i)
        jobs.push_back(std::async(std::launch::async, [port] {
            httplib::Client c("127.0.0.1", port);
            c.set_read_timeout(60, 0);
            auto r = c.Post("/plan/one-stage", kOneStage, "application/json");
            return r && r->status == 200 ? r->body : std::string();
        }));
    std::vector<std::string> bodies;
    for (auto& j : jobs) bodies.push_back(j.get());
    for (const auto& b : bodies) {
        EXPECT_FALSE(b.empty());
        EXPECT_EQ(b, bodies.front());
    }
    server.stop();
}
