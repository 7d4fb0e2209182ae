#ifndef SLICESIM_GENETIC_HPP
#define SLICESIM_GENETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/env.hpp"

namespace slicesim {

// Per-type cap on concurrently active instances: the whole admission
// strategy is this vector of thresholds.
struct ThresholdStrategy {
    std::vector<int> thresholds;
};

// Fixed-length bit string: per-type big-endian fields of ceil(log2(cap+1))
// bits, concatenated in type order.
struct Genome {
    std::vector<std::uint8_t> bits;

    bool operator==(const Genome&) const = default;
    bool operator<(const Genome& o) const { return bits < o.bits; }
    std::string to_hex() const;
};

// Bit widths for one scenario's strategy space.
class GenomeLayout {
public:
    static GenomeLayout from_scenario(const Scenario& scenario);

    int total_bits() const { return total_bits_; }
    const std::vector<int>& caps() const { return caps_; }
    const std::vector<int>& widths() const { return widths_; }
    // Number of distinct threshold strategies, saturated at cap.
    std::uint64_t strategy_count(std::uint64_t saturate_at = UINT64_MAX) const;

    Genome encode(const ThresholdStrategy& strategy) const;
    // Values above cap_i clamp to cap_i. Throws ConfigError on wrong length.
    ThresholdStrategy decode(const Genome& genome) const;

    bool operator==(const GenomeLayout&) const = default;

private:
    std::vector<int> caps_;
    std::vector<int> widths_;
    int total_bits_ = 0;
};

// Accept iff the active count of the request's type is under its threshold
// and the nominal demand fits; never scales down.
class ThresholdStrategyPolicy : public Policy {
public:
    ThresholdStrategyPolicy(const Scenario& scenario, ThresholdStrategy strategy);
    Action decide(const Env& env, const SliceRequest& request, const ActionMask& mask) override;
    std::string name() const override { return "ga-strategy"; }

private:
    const Scenario* scenario_;
    ThresholdStrategy strategy_;
};

Action strategy_decide(int threshold, int active_count, const ResourceVector& demand,
                       const ResourceVector& free);

// Common random numbers: one fixed seed list shared by every genome of a
// run, so fitness rankings are reproducible and low-variance.
std::vector<std::uint64_t> make_fitness_seeds(std::uint64_t master, int count);

// Mean over seeds of the episode's normalized utility rate
// (total utility / horizon / U_max). Throws ConfigError when U_max is 0 or
// horizon < 1.
double fitness(const ThresholdStrategy& strategy, const Scenario& scenario,
               const std::vector<std::uint64_t>& seeds, std::int64_t horizon);

// One generation: roulette reproduction (uniform fallback when all
// fitnesses are 0), one-point crossover, per-bit mutation, and elitism
// (ties by genome lexicographic order).
std::vector<Genome> evolve_generation(const std::vector<Genome>& population,
                                      const std::vector<double>& fitnesses, Rng& rng,
                                      const GaParams& params, const GenomeLayout& layout);

struct GaTrajectoryRow {
    int generation = 0;
    double best_fitness = 0.0;  // best of the current population
    double mean_fitness = 0.0;
    Genome best_genome;
    bool after_shift = false;
};

struct GaResult {
    ThresholdStrategy best_strategy;  // best under the final fitness environment
    Genome best_genome;
    double best_fitness = 0.0;
    std::vector<GaTrajectoryRow> trajectory;  // generations + 1 rows
};

// Runs scenario.genetic.generations evolution steps; deterministic per seed.
GaResult optimize(const Scenario& scenario, std::uint64_t seed);

struct ShiftResult {
    GaResult ga;
    bool shift_occurred = false;
    int shift_generation = 0;
    // The pre-shift best strategy, frozen and re-evaluated under scenario_b.
    ThresholdStrategy benchmark_strategy;
    double benchmark_fitness = 0.0;
};

// Evolves against scenario_a, then from shift_generation on evaluates the
// same population under scenario_b (no reinitialization). A shift at or
// beyond the generation count never occurs and the run equals optimize on
// scenario_a. Throws ConfigError when the scenarios disagree on the genome
// layout or shift_generation < 1.
ShiftResult run_regime_shift(const Scenario& scenario_a, const Scenario& scenario_b,
                             int shift_generation, std::uint64_t seed);

}  // namespace slicesim

#endif
