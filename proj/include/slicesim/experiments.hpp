#ifndef SLICESIM_EXPERIMENTS_HPP
#define SLICESIM_EXPERIMENTS_HPP

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "slicesim/scenario.hpp"

namespace slicesim {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;     // usage/config error (incl. infeasible input)
inline constexpr int kExitContract = 2;  // runtime contract violation

struct RunOptions {
    std::string scenario_path;
    std::string policy_id;  // greedy | qlearning | ga-strategy
    std::uint64_t seed = 0;
    std::string out_path;
    std::optional<std::int64_t> horizon_override;
    std::optional<int> episodes_override;
    std::string model_path;       // qlearning: QTable CSV; ga-strategy: strategy JSON
    std::string save_model_path;  // write the trained model here
    std::string trace_path;       // per-slot event trace CSV
};

// Trains (or loads) the policy, runs the evaluation episodes, writes the
// metrics CSV with mean/std summary rows.
int cmd_run(const RunOptions& options, std::ostream& diag = std::cerr);

struct CompareOptions {
    std::string scenario_path;
    std::vector<double> sweep;  // BE departure probabilities
    int eval_seeds = 10;
    std::uint64_t seed = 0;
    std::string out_path;
    std::optional<std::int64_t> horizon_override;
};

// For each sweep value: overrides the BE departure probability, trains
// Q-learning fresh, evaluates it and greedy on identical seed sets, and
// emits one row per (value, policy).
int cmd_compare(const CompareOptions& options, std::ostream& diag = std::cerr);

struct EvolveOptions {
    std::string scenario_path;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string strategy_out_path;  // default: out_path + ".strategy.json"
    std::optional<int> generations_override;
    std::optional<int> shift_at;
    std::string shift_scenario_path;
};

// Runs the GA (optionally with the regime-shift experiment), writes the
// trajectory CSV and the best strategy JSON.
int cmd_evolve(const EvolveOptions& options, std::ostream& diag = std::cerr);

struct ScheduleOptions {
    std::string table_path;  // CSV: slice_id,demand_fraction,start,end
    int n_cpus = 4;
    std::string out_path;  // per-slot utilization CSV (optional)
    std::optional<double> probe_demand;
    std::optional<std::int64_t> probe_start;
    std::optional<std::int64_t> probe_end;
};

// Computes the slice-to-CPU assignment, prints it with per-CPU utilization,
// and answers the accommodation probe when given. An unschedulable table
// exits nonzero with an "infeasible" verdict.
int cmd_schedule(const ScheduleOptions& options, std::ostream& out = std::cout,
                 std::ostream& diag = std::cerr);

}  // namespace slicesim

#endif
