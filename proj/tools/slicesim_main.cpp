#include <CLI11.hpp>

#include "slicesim/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Network-slice admission and congestion control simulator"};
    app.require_subcommand(1);

    slicesim::RunOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "Evaluate one policy on a scenario");
    run->add_option("--scenario", run_opts.scenario_path, "Scenario JSON file")->required();
    run->add_option("--policy", run_opts.policy_id, "greedy | qlearning | ga-strategy")->required();
    run->add_option("--seed", run_opts.seed, "Master seed (default 0)");
    run->add_option("--out", run_opts.out_path, "Metrics CSV output path")->required();
    std::int64_t run_horizon = 0;
    int run_episodes = 0;
    run->add_option("--horizon", run_horizon, "Override horizon_slots");
    run->add_option("--episodes", run_episodes, "Override evaluation episodes");
    run->add_option("--model", run_opts.model_path, "Load a trained model instead of training");
    run->add_option("--save-model", run_opts.save_model_path, "Write the trained model here");
    run->add_option("--trace", run_opts.trace_path, "Write a per-slot event trace CSV");

    slicesim::CompareOptions cmp_opts;
    CLI::App* cmp = app.add_subcommand("compare", "Sweep BE departure probability: QL vs greedy");
    cmp->add_option("--scenario", cmp_opts.scenario_path, "Scenario JSON file")->required();
    cmp->add_option("--sweep", cmp_opts.sweep, "BE departure probabilities")->required();
    cmp->add_option("--eval-seeds", cmp_opts.eval_seeds, "Evaluation seeds per point (default 10)");
    cmp->add_option("--seed", cmp_opts.seed, "Master seed (default 0)");
    cmp->add_option("--out", cmp_opts.out_path, "Sweep CSV output path")->required();
    std::int64_t cmp_horizon = 0;
    cmp->add_option("--horizon", cmp_horizon, "Override horizon_slots");

    slicesim::EvolveOptions evo_opts;
    CLI::App* evo = app.add_subcommand("evolve", "Genetic threshold-strategy optimization");
    evo->add_option("--scenario", evo_opts.scenario_path, "Scenario JSON file")->required();
    evo->add_option("--seed", evo_opts.seed, "Master seed (default 0)");
    evo->add_option("--out", evo_opts.out_path, "Trajectory CSV output path")->required();
    evo->add_option("--strategy-out", evo_opts.strategy_out_path,
                    "Best strategy JSON path (default <out>.strategy.json)");
    int evo_generations = 0;
    evo->add_option("--generations", evo_generations, "Override generations");
    int shift_at = 0;
    CLI::Option* shift_at_opt =
        evo->add_option("--shift-at", shift_at, "Generation at which the environment shifts");
    evo->add_option("--shift-scenario", evo_opts.shift_scenario_path,
                    "Scenario JSON in force after the shift");

    slicesim::ScheduleOptions sch_opts;
    CLI::App* sch = app.add_subcommand("schedule", "Slice-to-CPU scheduling and probe");
    sch->add_option("--table", sch_opts.table_path,
                    "Slice window CSV (slice_id,demand_fraction,start,end)")
        ->required();
    sch->add_option("--cpus", sch_opts.n_cpus, "Number of CPUs (default 4)");
    sch->add_option("--out", sch_opts.out_path, "Per-CPU utilization CSV output path");
    double probe_demand = 0.0;
    std::int64_t probe_start = 0;
    std::int64_t probe_end = 0;
    CLI::Option* pd = sch->add_option("--probe-demand", probe_demand, "New slice demand fraction");
    CLI::Option* ps = sch->add_option("--probe-start", probe_start, "Probe window start slot");
    CLI::Option* pe = sch->add_option("--probe-end", probe_end, "Probe window end slot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : slicesim::kExitUsage;
    }

    if (run->parsed()) {
        if (run->count("--horizon")) run_opts.horizon_override = run_horizon;
        if (run->count("--episodes")) run_opts.episodes_override = run_episodes;
        return slicesim::cmd_run(run_opts);
    }
    if (cmp->parsed()) {
        if (cmp->count("--horizon")) cmp_opts.horizon_override = cmp_horizon;
        return slicesim::cmd_compare(cmp_opts);
    }
    if (evo->parsed()) {
        if (evo->count("--generations")) evo_opts.generations_override = evo_generations;
        if (shift_at_opt->count()) evo_opts.shift_at = shift_at;
        return slicesim::cmd_evolve(evo_opts);
    }
    if (sch->parsed()) {
        if (pd->count()) sch_opts.probe_demand = probe_demand;
        if (ps->count()) sch_opts.probe_start = probe_start;
        if (pe->count()) sch_opts.probe_end = probe_end;
        return slicesim::cmd_schedule(sch_opts);
    }
    return slicesim::kExitUsage;
}
