#include "mixplan/api.hpp"

#include "mixplan/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mixplan::api {
namespace {

constexpr std::size_t kMaxSurfaceCells = 250'000;
constexpr std::size_t kMaxSweepCells = 100'000;

void require_object(const Json& req)
{
    if (!req.is_object()) throw ValidationError("request body must be a JSON object");
}

double num(const Json& req, const char* key)
{
    if (!req.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    if (!req[key].is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
    return req[key].get<double>();
}

double num(const Json& req, const char* key, double fallback)
{
    return req.contains(key) ? num(req, key) : fallback;
}

long integer(const Json& req, const char* key)
{
    const double v = num(req, key);
    if (v != std::floor(v) || std::abs(v) > 1e12)
        throw ValidationError(std::string("field '") + key + "' must be an integer");
    return static_cast<long>(v);
}

long integer(const Json& req, const char* key, long fallback)
{
    return req.contains(key) ? integer(req, key) : fallback;
}

int small_int(const Json& req, const char* key)
{
    const long v = integer(req, key);
    if (v < -1'000'000 || v > 1'000'000)
        throw ValidationError(std::string("field '") + key + "' is out of range");
    return static_cast<int>(v);
}

std::string text(const Json& req, const char* key, const std::string& fallback)
{
    if (!req.contains(key)) return fallback;
    if (!req[key].is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
    return req[key].get<std::string>();
}

bool flag(const Json& req, const char* key, bool fallback)
{
    if (!req.contains(key)) return fallback;
    if (!req[key].is_boolean()) throw ValidationError(std::string("field '") + key + "' must be a boolean");
    return req[key].get<bool>();
}

EvaluationMode mode_of(const Json& req, EvaluationMode fallback)
{
    return req.contains("mode") ? parse_evaluation_mode(text(req, "mode", "")) : fallback;
}

StrongEffectRegion region_of(const Json& req)
{
    if (req.contains("region")) return region_from_json(req["region"]);
    if (req.contains("mu") && req.contains("p")) return region_from_json(req);
    throw ValidationError("missing field 'region'");
}

std::vector<double> grid_of(const Json& req, const char* key)
{
    if (!req.contains(key)) return {};
    const auto& g = req[key];
    if (g.is_string()) return parse_grid(g.get<std::string>());
    if (g.is_array()) {
        std::vector<double> out;
        for (const auto& v : g) {
            if (!v.is_number()) throw ValidationError(std::string("grid '") + key + "' must hold numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    throw ValidationError(std::string("grid '") + key + "' must be \"start:stop:step\" or an array");
}

std::vector<int> int_grid(const Json& req, const char* key)
{
    std::vector<int> out;
    for (double v : grid_of(req, key)) {
        if (v != std::floor(v) || v < 1 || v > 1e6)
            throw ValidationError(std::string("grid '") + key + "' must hold positive integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// Level and type II target a single center is planned against.
struct Targets {
    int M = 1;
    ProcedureKind kind = ProcedureKind::hochberg;
    double alpha = 0.0;
    double beta_max = 0.0;
    double level = 0.0;
    double beta = 0.0;
};

Targets targets_of(const Json& req)
{
    Targets t;
    t.alpha = num(req, "alpha");
    t.beta_max = num(req, "beta_max");
    t.M = static_cast<int>(integer(req, "M", 1));
    if (t.M > 1000) throw ValidationError("M is out of range");
    t.kind = parse_procedure_kind(text(req, "procedure", "hochberg"));
    const auto c = per_center_targets(t.M, t.alpha, t.beta_max, t.kind);
    t.level = c.alpha_M;
    t.beta = c.beta_M_se;
    validate_error_rates(t.level, t.beta);
    return t;
}

Json targets_json(const Targets& t)
{
    return {{"M", t.M},
            {"procedure", std::string(to_string(t.kind))},
            {"alpha_M", t.level},
            {"beta_M_se", t.beta}};
}

TwoStageOptions two_stage_options(const Json& req)
{
    TwoStageOptions opt;
    if (req.contains("alpha1")) opt.alpha1 = num(req, "alpha1");
    opt.search.mode = mode_of(req, EvaluationMode::approximate);
    opt.search.n2_cap = static_cast<int>(integer(req, "n2_cap", 0));
    opt.verify_exact = flag(req, "verify_exact", true);
    return opt;
}

MulticenterDesign multicenter_of(const Json& req)
{
    if (req.contains("design")) return multicenter_from_json(req["design"]);
    const int M = small_int(req, "M");
    const auto kind = parse_procedure_kind(text(req, "procedure", "hochberg"));
    if (!req.contains("center_design")) throw ValidationError("missing field 'design' or 'center_design'");
    const StepUpProcedure proc(kind, M, num(req, "alpha"));
    Json center = req["center_design"];
    if (center.is_object() && !center.contains("alpha")) center["alpha"] = proc.threshold(M);
    return make_multicenter_design(two_stage_from_json(center), proc, num(req, "beta_max"));
}

Json row_or_null(const std::vector<SweepRow>& rows, SweepObjective obj)
{
    try {
        return to_json(best_row(rows, obj));
    } catch (const InfeasibleError&) {
        return nullptr;
    }
}

}  // namespace

Json plan_one_stage(const Json& req)
{
    require_object(req);
    const auto region = region_of(req);
    const auto t = targets_of(req);
    const auto mode = mode_of(req, EvaluationMode::exact);
    const auto d = mixplan::plan_one_stage(region, t.level, t.beta, mode);
    const auto worst = beta_se_one_stage_detail(region, d.n, t.level, mode);
    Json out = to_json(d);
    out["beta_se"] = worst.value;
    out["binding_corner"] = {{"index", worst.corner + 1},
                             {"mu", region.mu()[worst.corner]},
                             {"p", region.p()[worst.corner]}};
    out["approximate_n"] = approximate_sample_size(region, t.level, t.beta);
    out["mode"] = std::string(to_string(mode));
    if (t.M > 1) out["targets"] = targets_json(t);
    return out;
}

Json plan_two_stage(const Json& req)
{
    require_object(req);
    const auto region = region_of(req);
    const auto t = targets_of(req);
    const auto opt = two_stage_options(req);
    const auto plan = mixplan::plan_two_stage(region, t.level, t.beta, small_int(req, "n1"),
                                              num(req, "alpha0"), opt);
    Json out = to_json(plan);
    out["mode"] = std::string(to_string(opt.search.mode));
    if (t.M > 1) out["targets"] = targets_json(t);
    return out;
}

Json plan_multicenter(const Json& req)
{
    require_object(req);
    const auto region = region_of(req);
    const auto t = targets_of(req);
    const auto plan = mixplan::plan_multicenter(t.M, region, t.alpha, t.beta_max, small_int(req, "n1"),
                                                num(req, "alpha0"), t.kind, two_stage_options(req));
    Json out = to_json(plan);
    out["targets"] = targets_json(t);
    return out;
}

Json feasible(const Json& req)
{
    require_object(req);
    const auto region = region_of(req);
    const auto t = targets_of(req);
    const int n = req.contains("n_one_stage")
                      ? small_int(req, "n_one_stage")
                      : mixplan::plan_one_stage(region, t.level, t.beta, EvaluationMode::exact).n;
    const auto fc = feasibility(region, t.level, t.beta, n);
    Json out = to_json(fc);
    out["n_one_stage"] = n;
    out["targets"] = targets_json(t);
    if (req.contains("n1") && req.contains("alpha0"))
        out["admits"] = fc.admits(small_int(req, "n1"), num(req, "alpha0"));
    return out;
}

SweepResult run_sweep(const Json& req)
{
    require_object(req);
    const auto region = region_of(req);
    const auto t = targets_of(req);
    SweepOptions opt;
    opt.n1_grid = int_grid(req, "n1_grid");
    opt.alpha0_grid = grid_of(req, "alpha0_grid");
    opt.n2_cap = static_cast<int>(integer(req, "n2_cap", 0));
    const std::size_t cells = std::max<std::size_t>(opt.n1_grid.size(), 1) *
                              std::max<std::size_t>(opt.alpha0_grid.size(), 1);
    if (cells > kMaxSweepCells) throw ResourceError("sweep grid exceeds " + std::to_string(kMaxSweepCells) + " cells");
    return mixplan::sweep(region, t.level, t.beta, opt);
}

Json sweep(const Json& req)
{
    const auto result = run_sweep(req);
    const auto t = targets_of(req);
    Json rows = Json::array();
    for (const auto& r : result.rows) rows.push_back(to_json(r));
    return {{"n_one_stage", result.n_one_stage},
            {"targets", targets_json(t)},
            {"n1_min", result.constraints.n1_min},
            {"n1_max", result.constraints.n1_max},
            {"rows", rows},
            {"minima",
             {{"q0", row_or_null(result.rows, SweepObjective::q0)},
              {"q1", row_or_null(result.rows, SweepObjective::q1)},
              {"total", row_or_null(result.rows, SweepObjective::total)}}}};
}

Surface run_surface(const Json& req)
{
    require_object(req);
    if (!req.contains("design")) throw ValidationError("missing field 'design'");
    const auto design = two_stage_from_json(req["design"]);
    const std::string kind = text(req, "kind", "false-negative");
    auto mu = grid_of(req, "mu_grid");
    auto p = grid_of(req, "p_grid");
    if (mu.empty()) mu = make_grid(0.0, 3.0, 0.05);
    if (p.empty()) p = make_grid(0.0, 1.0, 0.05);
    if (mu.size() * p.size() > kMaxSurfaceCells)
        throw ResourceError("surface grid exceeds " + std::to_string(kMaxSurfaceCells) + " cells");
    const auto mode = mode_of(req, EvaluationMode::exact);
    if (kind == "false-negative")
        return false_negative_surface(design, num(req, "alpha", design.alpha), mu, p, mode);
    if (kind == "second-stage-prob") return second_stage_surface(design, mu, p, mode);
    throw ValidationError("surface kind must be 'false-negative' or 'second-stage-prob'");
}

Json surface(const Json& req)
{
    const auto s = run_surface(req);
    Json out = to_json(s);
    out["kind"] = text(req, "kind", "false-negative");
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.values.size(); ++k)
        if (s.values[k] > s.values[best]) best = k;
    out["max"] = {{"mu", s.mu[best / s.p.size()]}, {"p", s.p[best % s.p.size()]}, {"value", s.values[best]}};
    return out;
}

ErrorTable run_beta_table(const Json& req)
{
    require_object(req);
    const std::string kind = text(req, "kind", "exact");
    if (kind != "exact" && kind != "bound") throw ValidationError("table kind must be 'exact' or 'bound'");
    FamilyWiseOptions opt;
    opt.mode = mode_of(req, EvaluationMode::exact);
    if (text(req, "method", "collapsed") == "full") opt.method = EnumerationMethod::full;
    // Reject oversized enumerations before any planning work.
    if (kind == "exact") {
        const Json& src = req.contains("design") ? req["design"] : req;
        const Json& d = src.contains("design") ? src["design"] : src;
        if (d.is_object() && d.contains("M") && d["M"].is_number() && d["M"].get<double>() > opt.cap)
            throw ResourceError("exact enumeration is capped at M = " + std::to_string(opt.cap) +
                                " centers; use /simulate for larger M");
    }
    const auto design = multicenter_of(req);
    if (kind == "bound") return beta_fw_bound_table(design, region_of(req), opt.mode);
    if (!req.contains("strong_point")) throw ValidationError("missing field 'strong_point'");
    return beta_fw_table(design, point_from_json(req["strong_point"]), opt);
}

Json beta_table(const Json& req) { return to_json(run_beta_table(req)); }

SimulationResult run_simulate(const Json& req)
{
    require_object(req);
    const auto design = multicenter_of(req);
    SimulationConfig cfg;
    cfg.M = design.centers;
    cfg.M1 = small_int(req, "M1");
    if (cfg.M1 < 1) throw ValidationError("M1 must be at least 1 (M1 = 0 runs the all-null simulation)");
    if (!req.contains("strong_point")) throw ValidationError("missing field 'strong_point'");
    cfg.strong_point = point_from_json(req["strong_point"]);
    cfg.delta = num(req, "delta", 0.0);
    cfg.replications = integer(req, "replications", 1000);
    const long seed = integer(req, "seed", 1);
    if (seed < 0) throw ValidationError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.known_sigma = flag(req, "known_sigma", false);
    cfg.effect = parse_random_effect(text(req, "random_effect", "center"));
    return empirical_beta_fw(cfg, design);
}

Json simulate(const Json& req)
{
    require_object(req);
    const bool all_null = flag(req, "null", false) || (req.contains("M1") && req["M1"] == 0);
    if (all_null) {
        const auto design = multicenter_of(req);
        const long reps = integer(req, "replications", 1000);
        const long seed = integer(req, "seed", 1);
        if (reps < 1) throw ValidationError("replications must be at least 1");
        if (reps > 10'000'000) throw ResourceError("replications are capped at 10^7");
        if (seed < 0) throw ValidationError("seed must be non-negative");
        const bool known = flag(req, "known_sigma", false);
        return {{"type1", empirical_type1(design, reps, static_cast<std::uint64_t>(seed), known)},
                {"replications", reps},
                {"seed", seed}};
    }
    return to_json(run_simulate(req));
}

}  // namespace mixplan::api
