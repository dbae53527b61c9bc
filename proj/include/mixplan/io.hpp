#pragma once

#include "mixplan/multicenter.hpp"
#include "mixplan/one_stage.hpp"
#include "mixplan/simulate.hpp"
#include "mixplan/sweep.hpp"
#include "mixplan/two_stage.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace mixplan {

using Json = nlohmann::ordered_json;

// Fixed-point with `digits` decimals, '.' separator regardless of locale.
std::string format_fixed(double value, int digits = 6);

Json to_json(const MixturePoint& point);
Json to_json(const StrongEffectRegion& region);
Json to_json(const OneStageDesign& design);
Json to_json(const TwoStageDesign& design);
Json to_json(const PlanDiagnostics& diagnostics);
Json to_json(const TwoStagePlan& plan);
Json to_json(const StepUpProcedure& procedure);
Json to_json(const MulticenterDesign& design);
Json to_json(const MulticenterPlan& plan);
Json to_json(const FeasibilityConstraints& constraints);
Json to_json(const SweepRow& row);
Json to_json(const ErrorTable& table);
Json to_json(const SimulationResult& result);
Json to_json(const Surface& surface);

// Readers validate the same invariants as the constructors. Design readers
// also accept a plan document and pick its "design" member.
MixturePoint point_from_json(const Json& j);
StrongEffectRegion region_from_json(const Json& j);
OneStageDesign one_stage_from_json(const Json& j);
TwoStageDesign two_stage_from_json(const Json& j);
StepUpProcedure procedure_from_json(const Json& j);
MulticenterDesign multicenter_from_json(const Json& j);

// Parse text as JSON; syntax errors become ValidationError.
Json parse_json(std::string_view text);

std::string read_text_file(const std::string& path);

// Refuses to replace an existing file unless force is set.
void write_text_file(const std::string& path, std::string_view content, bool force);

}  // namespace mixplan
