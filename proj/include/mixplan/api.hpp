#pragma once

#include "mixplan/io.hpp"

// JSON-in/JSON-out operations shared by the HTTP service and the CLI. Each
// call validates its request and throws mixplan::Error subclasses.
//
// Common request fields:
//   region         {"mu": [...], "p": [...]} (or top-level "mu"/"p")
//   alpha, beta_max
//   mode           "exact" | "approximate"
//   M, procedure   multicenter requests; targets become (alpha(M), 1-(1-beta_max)^(1/M))
//   grids          "start:stop:step" strings or explicit arrays
namespace mixplan::api {

Json plan_one_stage(const Json& request);
Json plan_two_stage(const Json& request);
Json plan_multicenter(const Json& request);
Json feasible(const Json& request);
Json sweep(const Json& request);
Json surface(const Json& request);
Json beta_table(const Json& request);
Json simulate(const Json& request);

// Typed variants for callers that want CSV.
SweepResult run_sweep(const Json& request);
Surface run_surface(const Json& request);
ErrorTable run_beta_table(const Json& request);
SimulationResult run_simulate(const Json& request);

}  // namespace mixplan::api
