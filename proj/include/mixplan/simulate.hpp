#pragma once

#include "mixplan/multicenter.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace mixplan {

// xoshiro256** keyed by (seed, replicate, center, stage) through splitmix64,
// so any replicate can be regenerated independently of the others.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t center,
              std::uint64_t stage);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

private:
    std::uint64_t s_[4];
};

// Where the random responder effect enters when delta > 0: each responder
// draws N(mu, 1 + delta^2), or each center draws one mu_c ~ N(mu, delta^2)
// shared by its responders in both stages.
enum class RandomEffect { patient, center };
std::string_view to_string(RandomEffect effect);
RandomEffect parse_random_effect(std::string_view text);

struct SimulationConfig {
    int M = 1;
    int M1 = 1;
    MixturePoint strong_point;
    double delta = 0.0;  // s.d. of the random responder effect
    RandomEffect effect = RandomEffect::center;
    long replications = 1000;
    std::uint64_t seed = 1;
    // Standardize by the true sigma = 1 instead of the control-arm estimate.
    bool known_sigma = false;

    void validate() const;
};

struct CenterResult {
    double p_value = 1.0;
    bool stopped_early = false;
    double stage1_mean = 0.0;
    double stage2_mean = std::numeric_limits<double>::quiet_NaN();
    int n_stage1 = 0;
    int n_stage2 = 0;
};

// One center: n1 controls and n1 treated (then n2 fresh of each if the
// stage-1 mean falls in [eta0, eta1]); treated patients respond with
// probability p at the responder law, otherwise N(0, 1). Each stage's mean
// difference is divided by that stage's control-arm s.d. estimate.
CenterResult simulate_center(const TwoStageDesign& design, const MixturePoint& point,
                             double delta, std::uint64_t seed, std::uint64_t replicate,
                             std::uint64_t center, bool known_sigma = false,
                             RandomEffect effect = RandomEffect::center);

struct SimulationResult {
    ErrorTable table;  // kind = empirical, M1 = config.M1, m = 1..M1
    std::vector<long> failure_counts;  // index f: replicates with f strong centers unrejected
    long replications = 0;
    std::uint64_t seed = 0;
    double delta = 0.0;
    RandomEffect effect = RandomEffect::center;
    long deferred_decisions = 0;  // centers whose rejection hinged on the others
};

SimulationResult empirical_beta_fw(const SimulationConfig& config,
                                   const MulticenterDesign& design, unsigned threads = 0);

// All-null rejection frequency: single center, or any rejection among M.
double empirical_type1(const TwoStageDesign& design, long replications, std::uint64_t seed,
                       bool known_sigma = false, unsigned threads = 0);
double empirical_type1(const MulticenterDesign& design, long replications, std::uint64_t seed,
                       bool known_sigma = false, unsigned threads = 0);

// ErrorTable columns plus replications,seed,delta.
std::string simulation_csv(const SimulationResult& result);

}  // namespace mixplan
