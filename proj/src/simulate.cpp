#include "mixplan/simulate.hpp"

#include "mixplan/errors.hpp"
#include "mixplan/io.hpp"
#include "mixplan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace mixplan {
namespace {

std::uint64_t splitmix64(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr long kChunk = 256;

// Mean treated-minus-control difference over n patients per arm, in units of
// the control s.d. (estimated unless known_sigma).
double draw_stage(RngStream& rng, int n, const MixturePoint& point, double delta, bool known_sigma)
{
    std::normal_distribution<double> z(0.0, 1.0);
    double sum_c = 0.0, sum_sq_c = 0.0;
    std::vector<double> control(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) control[static_cast<std::size_t>(i)] = z(rng);
    for (double v : control) sum_c += v;
    const double mean_c = sum_c / n;
    for (double v : control) sum_sq_c += (v - mean_c) * (v - mean_c);

    const double responder_sd = std::sqrt(1.0 + delta * delta);
    double sum_t = 0.0;
    for (int i = 0; i < n; ++i) {
        const bool responder = rng.uniform() < point.p;
        const double noise = z(rng);
        sum_t += responder ? point.mu + responder_sd * noise : noise;
    }
    const double diff = sum_t / n - mean_c;
    if (known_sigma || n < 2) return diff;
    return diff / std::sqrt(sum_sq_c / (n - 1));
}

}  // namespace

std::string_view to_string(RandomEffect effect)
{
    return effect == RandomEffect::center ? "center" : "patient";
}

RandomEffect parse_random_effect(std::string_view text)
{
    if (text == "patient") return RandomEffect::patient;
    if (text == "center") return RandomEffect::center;
    throw ValidationError("random effect must be 'patient' or 'center'");
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t center,
                     std::uint64_t stage)
{
    std::uint64_t x = seed;
    std::uint64_t key = splitmix64(x);
    for (std::uint64_t part : {replicate, center, stage}) {
        x = key ^ (part * 0xd1b54a32d192ed03ULL);
        key = splitmix64(x);
    }
    x = key;
    for (auto& s : s_) s = splitmix64(x);
}

RngStream::result_type RngStream::operator()()
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

void SimulationConfig::validate() const
{
    if (M < 1) throw ValidationError("M must be at least 1");
    if (M1 < 0 || M1 > M) throw ValidationError("M1 must lie in 0..M");
    strong_point.validate();
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be non-negative");
    if (replications < 1) throw ValidationError("replications must be at least 1");
    if (replications > 10'000'000) throw ResourceError("replications are capped at 10^7");
}

CenterResult simulate_center(const TwoStageDesign& design, const MixturePoint& point,
                             double delta, std::uint64_t seed, std::uint64_t replicate,
                             std::uint64_t center, bool known_sigma, RandomEffect effect)
{
    CenterResult r;
    MixturePoint local = point;
    if (effect == RandomEffect::center && delta > 0.0) {
        RngStream draw(seed, replicate, center, 0);
        local.mu = point.mu + delta * std::normal_distribution<double>(0.0, 1.0)(draw);
        delta = 0.0;
    }
    RngStream stage1(seed, replicate, center, 1);
    r.n_stage1 = design.n1;
    r.stage1_mean = draw_stage(stage1, design.n1, local, delta, known_sigma);
    TrialData data{r.stage1_mean, std::nullopt};
    r.stopped_early = !(r.stage1_mean >= design.eta0 && r.stage1_mean <= design.eta1);
    if (!r.stopped_early) {
        RngStream stage2(seed, replicate, center, 2);
        r.n_stage2 = design.n2;
        r.stage2_mean = draw_stage(stage2, design.n2, local, delta, known_sigma);
        data.xbar2 = r.stage2_mean;
    }
    r.p_value = two_stage_p_value(data, design);
    return r;
}

SimulationResult empirical_beta_fw(const SimulationConfig& config,
                                   const MulticenterDesign& design, unsigned threads)
{
    config.validate();
    if (config.M != design.centers)
        throw ValidationError("simulation M must match the design's number of centers");
    if (config.M1 < 1) throw ValidationError("M1 must be at least 1 for type II error tables");

    const long chunks = (config.replications + kChunk - 1) / kChunk;
    std::vector<std::vector<long>> counts(static_cast<std::size_t>(chunks),
                                          std::vector<long>(static_cast<std::size_t>(config.M1) + 1, 0));
    std::vector<long> deferred(static_cast<std::size_t>(chunks), 0);
    const MixturePoint null_point{0.0, 0.0};

    parallel_for(
        static_cast<std::size_t>(chunks),
        [&](std::size_t c) {
            const long first = static_cast<long>(c) * kChunk;
            const long last = std::min(config.replications, first + kChunk);
            std::vector<double> p(static_cast<std::size_t>(config.M));
            const auto early = std::make_unique<bool[]>(static_cast<std::size_t>(config.M));
            for (long rep = first; rep < last; ++rep) {
                for (int i = 0; i < config.M; ++i) {
                    const auto res = simulate_center(design.center_design,
                                                     i < config.M1 ? config.strong_point : null_point,
                                                     config.delta, config.seed,
                                                     static_cast<std::uint64_t>(rep),
                                                     static_cast<std::uint64_t>(i), config.known_sigma,
                                                     config.effect);
                    p[static_cast<std::size_t>(i)] = res.p_value;
                    early[static_cast<std::size_t>(i)] = res.stopped_early;
                }
                const auto rejected = apply_step_up(p, design.procedure);
                int failures = config.M1;
                for (std::size_t idx : rejected)
                    if (static_cast<int>(idx) < config.M1) --failures;
                ++counts[c][static_cast<std::size_t>(failures)];
                deferred[c] += static_cast<long>(
                    deferred_decision_centers(
                        p, std::span<const bool>(early.get(), p.size()), design.center_design.alpha1, design.procedure)
                        .size());
            }
        },
        threads);

    SimulationResult out;
    out.replications = config.replications;
    out.seed = config.seed;
    out.delta = config.delta;
    out.effect = config.effect;
    out.failure_counts.assign(static_cast<std::size_t>(config.M1) + 1, 0);
    for (long c = 0; c < chunks; ++c) {
        for (std::size_t f = 0; f < out.failure_counts.size(); ++f)
            out.failure_counts[f] += counts[static_cast<std::size_t>(c)][f];
        out.deferred_decisions += deferred[static_cast<std::size_t>(c)];
    }
    out.table = {config.M, TableKind::empirical, {}};
    long tail = 0;
    std::vector<double> tails(static_cast<std::size_t>(config.M1) + 1);
    for (int f = config.M1; f >= 1; --f) {
        tail += out.failure_counts[static_cast<std::size_t>(f)];
        tails[static_cast<std::size_t>(f)] = static_cast<double>(tail) / config.replications;
    }
    for (int m = 1; m <= config.M1; ++m)
        out.table.cells.push_back({config.M1, m, tails[static_cast<std::size_t>(m)]});
    return out;
}

namespace {

template <class RejectFn>
double null_rejection_rate(int centers, const TwoStageDesign& design, long replications,
                           std::uint64_t seed, bool known_sigma, unsigned threads, RejectFn&& rejects)
{
    if (replications < 1) throw ValidationError("replications must be at least 1");
    if (replications > 10'000'000) throw ResourceError("replications are capped at 10^7");
    const long chunks = (replications + kChunk - 1) / kChunk;
    std::vector<long> hits(static_cast<std::size_t>(chunks), 0);
    parallel_for(
        static_cast<std::size_t>(chunks),
        [&](std::size_t c) {
            const long first = static_cast<long>(c) * kChunk;
            const long last = std::min(replications, first + kChunk);
            std::vector<double> p(static_cast<std::size_t>(centers));
            for (long rep = first; rep < last; ++rep) {
                for (int i = 0; i < centers; ++i)
                    p[static_cast<std::size_t>(i)] =
                        simulate_center(design, {0.0, 0.0}, 0.0, seed, static_cast<std::uint64_t>(rep),
                                        static_cast<std::uint64_t>(i), known_sigma)
                            .p_value;
                if (rejects(p)) ++hits[c];
            }
        },
        threads);
    long total = 0;
    for (long h : hits) total += h;
    return static_cast<double>(total) / replications;
}

}  // namespace

double empirical_type1(const TwoStageDesign& design, long replications, std::uint64_t seed,
                       bool known_sigma, unsigned threads)
{
    return null_rejection_rate(1, design, replications, seed, known_sigma, threads,
                               [&](const std::vector<double>& p) { return p[0] <= design.alpha; });
}

double empirical_type1(const MulticenterDesign& design, long replications, std::uint64_t seed,
                       bool known_sigma, unsigned threads)
{
    return null_rejection_rate(design.centers, design.center_design, replications, seed, known_sigma,
                               threads,
                               [&](const std::vector<double>& p) {
                                   return !apply_step_up(p, design.procedure).empty();
                               });
}

std::string simulation_csv(const SimulationResult& result)
{
    std::string out = "M1,m,value,kind,replications,seed,delta\n";
    for (const auto& c : result.table.cells)
        out += std::to_string(c.M1) + ',' + std::to_string(c.m) + ',' + format_fixed(c.value) +
               ",empirical," + std::to_string(result.replications) + ',' +
               std::to_string(result.seed) + ',' + format_fixed(result.delta) + '\n';
    return out;
}

}  // namespace mixplan
