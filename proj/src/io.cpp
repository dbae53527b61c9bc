#include "mixplan/io.hpp"

#include "mixplan/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mixplan {

std::string format_fixed(double value, int digits)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);  // "-0.000000"
    return s;
}

namespace {

const Json& unwrap_design(const Json& j)
{
    if (j.is_object() && j.contains("design") && j["design"].is_object()) return j["design"];
    return j;
}

double number(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw ValidationError(std::string("missing field '") + key + "'");
    const auto& v = j[key];
    if (!v.is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

int integer(const Json& j, const char* key)
{
    const double v = number(j, key);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ValidationError(std::string("field '") + key + "' must be an integer");
    return static_cast<int>(v);
}

std::vector<double> number_array(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw ValidationError(std::string("missing field '") + key + "'");
    const auto& v = j[key];
    if (!v.is_array()) throw ValidationError(std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number())
            throw ValidationError(std::string("field '") + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace

Json to_json(const MixturePoint& point) { return {{"mu", point.mu}, {"p", point.p}}; }

Json to_json(const StrongEffectRegion& region)
{
    return {{"mu", std::vector<double>(region.mu().begin(), region.mu().end())},
            {"p", std::vector<double>(region.p().begin(), region.p().end())}};
}

Json to_json(const OneStageDesign& d) { return {{"n", d.n}, {"alpha", d.alpha}, {"eta", d.eta}}; }

Json to_json(const TwoStageDesign& d)
{
    return {{"n1", d.n1},         {"n2", d.n2},     {"alpha0", d.alpha0}, {"alpha1", d.alpha1},
            {"alpha", d.alpha},   {"eta0", d.eta0}, {"eta1", d.eta1},     {"eta2", d.eta2}};
}

Json to_json(const PlanDiagnostics& d)
{
    return {{"q0", d.q0},
            {"q1", d.q1},
            {"total", d.total},
            {"worst_point", to_json(d.worst_point)},
            {"max_second_stage_probability", d.max_second_stage_probability}};
}

Json to_json(const TwoStagePlan& plan)
{
    Json j{{"design", to_json(plan.design)},
           {"diagnostics", to_json(plan.diagnostics)},
           {"n_one_stage", plan.n_one_stage},
           {"beta_se", plan.beta_se},
           {"binding_corner", plan.binding_corner + 1}};
    if (plan.beta_se_exact >= 0.0) j["beta_se_exact"] = plan.beta_se_exact;
    if (plan.n2_exact) j["n2_exact"] = *plan.n2_exact;
    return j;
}

Json to_json(const StepUpProcedure& p)
{
    return {{"kind", std::string(to_string(p.kind()))},
            {"alpha", p.alpha()},
            {"M", p.centers()},
            {"thresholds", std::vector<double>(p.thresholds().begin(), p.thresholds().end())}};
}

Json to_json(const MulticenterDesign& d)
{
    return {{"M", d.centers},
            {"procedure", to_json(d.procedure)},
            {"center_design", to_json(d.center_design)},
            {"alpha", d.alpha},
            {"beta_max", d.beta_max},
            {"beta_M_se", d.beta_M_se}};
}

Json to_json(const MulticenterPlan& plan)
{
    return {{"design", to_json(plan.design)},
            {"center_plan", to_json(plan.center_plan)},
            {"n_one_stage", plan.n_one_stage}};
}

Json to_json(const FeasibilityConstraints& c)
{
    Json upper = Json::array();
    for (int n1 = c.n1_min; n1 <= c.n1_max; ++n1)
        upper.push_back({{"n1", n1}, {"alpha0_upper", std::min(c.alpha0_upper(n1), 1.0 - c.alpha)}});
    return {{"n1_min", c.n1_min}, {"n1_max", c.n1_max}, {"alpha0_upper", upper}};
}

Json to_json(const SweepRow& r)
{
    Json j{{"n1", r.n1}, {"alpha0", r.alpha0}, {"feasible", r.feasible}};
    if (r.feasible) {
        j["alpha1"] = r.alpha1;
        j["n2"] = r.n2;
        j["eta0"] = r.eta0;
        j["eta1"] = r.eta1;
        j["eta2"] = r.eta2;
        j["q0"] = r.q0;
        j["q1"] = r.q1;
        j["total"] = r.total;
    }
    return j;
}

Json to_json(const ErrorTable& t)
{
    Json cells = Json::array();
    for (const auto& c : t.cells) cells.push_back({{"M1", c.M1}, {"m", c.m}, {"value", c.value}});
    return {{"M", t.centers}, {"kind", std::string(to_string(t.kind))}, {"cells", cells}};
}

Json to_json(const SimulationResult& r)
{
    return {{"table", to_json(r.table)},
            {"failure_counts", r.failure_counts},
            {"replications", r.replications},
            {"seed", r.seed},
            {"delta", r.delta},
            {"random_effect", std::string(to_string(r.effect))},
            {"deferred_decisions", r.deferred_decisions}};
}

Json to_json(const Surface& s)
{
    return {{"mu", s.mu}, {"p", s.p}, {"values", s.values}};
}

MixturePoint point_from_json(const Json& j)
{
    MixturePoint p{number(j, "mu"), number(j, "p")};
    p.validate();
    return p;
}

StrongEffectRegion region_from_json(const Json& j)
{
    if (!j.is_object()) throw ValidationError("region must be an object {\"mu\": [...], \"p\": [...]}");
    return StrongEffectRegion(number_array(j, "mu"), number_array(j, "p"));
}

OneStageDesign one_stage_from_json(const Json& in)
{
    const Json& j = unwrap_design(in);
    OneStageDesign d{integer(j, "n"), number(j, "alpha"), 0.0};
    validate_error_rates(d.alpha, 0.25);
    if (d.n < 1) throw ValidationError("n must be at least 1");
    d.eta = one_stage_threshold(d.n, d.alpha);
    if (j.contains("eta") && std::abs(number(j, "eta") - d.eta) > 1e-9)
        throw ValidationError("eta does not match z_{1-alpha} sqrt(2/n)");
    return d;
}

TwoStageDesign two_stage_from_json(const Json& in)
{
    const Json* j = &unwrap_design(in);
    if (j->contains("center_design")) j = &(*j)["center_design"];
    auto d = make_two_stage_design(integer(*j, "n1"), number(*j, "alpha0"), number(*j, "alpha1"),
                                   integer(*j, "n2"), number(*j, "alpha"));
    for (const char* key : {"eta0", "eta1", "eta2"}) {
        if (!j->contains(key)) continue;
        const double given = number(*j, key);
        const double mine = key[3] == '0' ? d.eta0 : key[3] == '1' ? d.eta1 : d.eta2;
        if (std::abs(given - mine) > 1e-6)
            throw ValidationError(std::string(key) + " is inconsistent with n1, n2, alpha0, alpha1, alpha");
    }
    return d;
}

StepUpProcedure procedure_from_json(const Json& j)
{
    if (j.is_string()) throw ValidationError("procedure must be an object with kind, alpha, M");
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ValidationError("procedure needs a string 'kind'");
    const auto kind = parse_procedure_kind(j["kind"].get<std::string>());
    if (kind == ProcedureKind::custom) return StepUpProcedure(number_array(j, "thresholds"));
    StepUpProcedure p(kind, integer(j, "M"), number(j, "alpha"));
    if (j.contains("thresholds")) {
        const auto given = number_array(j, "thresholds");
        if (given.size() != p.thresholds().size())
            throw ValidationError("thresholds length does not match M");
        for (std::size_t i = 0; i < given.size(); ++i)
            if (std::abs(given[i] - p.thresholds()[i]) > 1e-12)
                throw ValidationError("thresholds do not match the named procedure");
    }
    return p;
}

MulticenterDesign multicenter_from_json(const Json& in)
{
    const Json& j = unwrap_design(in);
    if (!j.contains("procedure") || !j.contains("center_design"))
        throw ValidationError("multicenter design needs 'procedure' and 'center_design'");
    return make_multicenter_design(two_stage_from_json(j["center_design"]),
                                   procedure_from_json(j["procedure"]), number(j, "beta_max"));
}

Json parse_json(std::string_view text)
{
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content, bool force)
{
    if (!force && std::filesystem::exists(path))
        throw ValidationError("'" + path + "' exists; pass --force to overwrite");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace mixplan
