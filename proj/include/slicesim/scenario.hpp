#ifndef SLICESIM_SCENARIO_HPP
#define SLICESIM_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/core.hpp"
#include "slicesim/orchestrator.hpp"

namespace slicesim {

// Rewards for admission decisions. Only the orderings are fixed; magnitudes
// are configurable.
struct RewardParams {
    double accept_gs = 2.0;
    double accept_be = 1.0;
    double drop_gs = -2.0;
    double drop_be = 0.0;
    double scaledown_penalty = -0.1;  // per scaled victim

    void validate() const;
};

struct QlHyperparams {
    int levels = 4;        // occupancy bins per dimension (L)
    int queue_clamp = 5;   // Qmax
    double gamma = 0.95;
    double alpha0 = 0.5;             // alpha = alpha0 / (1 + visits / alpha_decay_visits)
    double alpha_decay_visits = 1000.0;
    double epsilon_start = 0.3;      // linear decay over training episodes
    double epsilon_end = 0.01;
    int episodes = 60;
    double init_value = 0.0;

    void validate() const;
};

struct GaParams {
    int population_size = 32;
    double crossover_prob = 0.9;
    double mutation_prob_per_bit = -1.0;  // -1: default to 1/bits
    int elite_count = 2;
    int generations = 100;
    int fitness_seeds = 3;     // episodes averaged per evaluation
    std::int64_t fitness_horizon = 0;  // 0: use scenario horizon_slots

    void validate() const;
};

struct EvaluationParams {
    int episodes = 5;

    void validate() const;
};

struct Scenario {
    std::vector<std::string> dimension_names;
    ResourceVector capacity;
    std::vector<SliceTypeSpec> types;  // sorted by type_id
    RewardParams rewards;
    int queue_capacity = 8;
    std::int64_t horizon_slots = 5000;
    EvaluationParams evaluation;
    QlHyperparams qlearning;
    GaParams genetic;
    orch::Inventory inventory;
    orch::PolicyFlags policy_flags;

    std::size_t dims() const { return capacity.dims(); }
    const SliceTypeSpec& type(int type_id) const;
    std::size_t type_index(int type_id) const;

    // Best steady-state utility rate achievable by saturating the pool with
    // a single type: max over types of physical_cap * utility_rate.
    double u_max() const;

    void validate() const;
};

// Strict loaders: unknown keys are rejected, every invariant is checked
// before a simulation starts.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

// Standalone loaders for orchestrator fixtures (same schema as the
// scenario's "orchestrator" block and its catalog entries).
orch::Inventory inventory_from_json_text(const std::string& text);
orch::NetworkRequirements requirements_from_json_text(const std::string& text);

}  // namespace slicesim

#endif
