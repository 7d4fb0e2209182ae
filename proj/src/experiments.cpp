#include "slicesim/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "slicesim/env.hpp"
#include "slicesim/genetic.hpp"
#include "slicesim/metrics.hpp"
#include "slicesim/orchestrator.hpp"
#include "slicesim/qlearning.hpp"

namespace slicesim {

namespace {

using nlohmann::json;

template <typename F>
int guarded(std::ostream& diag, F&& body) {
    try {
        return body();
    } catch (const ContractViolation& e) {
        diag << "error: " << e.what() << "\n";
        return kExitContract;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

Scenario load_with_overrides(const std::string& path,
                             std::optional<std::int64_t> horizon_override,
                             std::optional<int> episodes_override) {
    Scenario s = load_scenario(path);
    if (horizon_override) s.horizon_slots = *horizon_override;
    if (episodes_override) s.evaluation.episodes = *episodes_override;
    s.validate();
    return s;
}

void save_strategy_json(const std::string& path, const ThresholdStrategy& strategy,
                        double fitness_value, const Genome& genome) {
    json doc;
    doc["thresholds"] = strategy.thresholds;
    doc["fitness"] = fitness_value;
    doc["genome_hex"] = genome.to_hex();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << "\n";
}

ThresholdStrategy load_strategy_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open strategy file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("strategy file '" + path + "': " + e.what());
    }
    if (!doc.contains("thresholds") || !doc["thresholds"].is_array()) {
        throw ConfigError("strategy file '" + path + "': missing 'thresholds' array");
    }
    ThresholdStrategy s;
    for (const json& t : doc["thresholds"]) s.thresholds.push_back(t.get<int>());
    return s;
}

double summary_value(const MetricsSummary& summary, const std::string& field, bool want_std) {
    for (std::size_t i = 0; i < summary.fields.size(); ++i) {
        if (summary.fields[i] == field) return want_std ? summary.stddev[i] : summary.mean[i];
    }
    throw ConfigError("unknown metric field '" + field + "'");
}

void write_metrics_csv(const std::string& path, const std::vector<EpisodeMetrics>& episodes,
                       std::size_t dims) {
    CsvRow header{"episode"};
    for (const std::string& f : metric_field_names(dims)) header.push_back(f);
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        CsvRow row{std::to_string(i)};
        for (double v : metric_field_values(episodes[i])) row.push_back(format_real(v));
        rows.push_back(std::move(row));
    }
    MetricsSummary summary = aggregate(episodes);
    CsvRow mean_row{"mean"};
    CsvRow std_row{"std"};
    for (std::size_t f = 0; f < summary.fields.size(); ++f) {
        mean_row.push_back(format_real(summary.mean[f]));
        std_row.push_back(format_real(summary.stddev[f]));
    }
    rows.push_back(std::move(mean_row));
    rows.push_back(std::move(std_row));
    write_csv(rows, header, path);
}

void write_trace_csv(const std::string& path,
                     const std::vector<std::vector<TraceEvent>>& traces) {
    CsvRow header{"episode", "slot", "event", "type_id", "id", "value"};
    std::vector<CsvRow> rows;
    for (std::size_t e = 0; e < traces.size(); ++e) {
        for (const TraceEvent& ev : traces[e]) {
            rows.push_back({std::to_string(e), std::to_string(ev.slot), ev.event,
                            std::to_string(ev.type_id), std::to_string(ev.id),
                            format_real(ev.value)});
        }
    }
    write_csv(rows, header, path);
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& diag) {
    return guarded(diag, [&]() {
        Scenario scenario = load_with_overrides(options.scenario_path, options.horizon_override,
                                                options.episodes_override);
        if (options.out_path.empty()) throw ConfigError("run: --out is required");

        std::unique_ptr<Policy> policy;
        std::unique_ptr<QTable> table;
        if (options.policy_id == "greedy") {
            if (!options.save_model_path.empty()) {
                throw ConfigError("run: greedy has no model to save");
            }
            policy = std::make_unique<GreedyPolicy>();
        } else if (options.policy_id == "qlearning") {
            ObservationSpace space(scenario.qlearning, scenario.dims());
            if (!options.model_path.empty()) {
                table = std::make_unique<QTable>(
                    QTable::load_csv(options.model_path, space.size(), kNumActions));
            } else {
                table = std::make_unique<QTable>(
                    train_qlearning(scenario, derive_seed(options.seed, "train")).table);
            }
            if (!options.save_model_path.empty()) table->save_csv(options.save_model_path);
            policy = std::make_unique<QLearningPolicy>(scenario, *table, /*epsilon=*/0.0,
                                                       derive_seed(options.seed, "eval-explore"),
                                                       /*learn=*/false);
        } else if (options.policy_id == "ga-strategy") {
            ThresholdStrategy strategy;
            if (!options.model_path.empty()) {
                strategy = load_strategy_json(options.model_path);
            } else {
                GaResult result = optimize(scenario, derive_seed(options.seed, "ga"));
                strategy = result.best_strategy;
                if (!options.save_model_path.empty()) {
                    save_strategy_json(options.save_model_path, strategy, result.best_fitness,
                                       result.best_genome);
                }
            }
            policy = std::make_unique<ThresholdStrategyPolicy>(scenario, std::move(strategy));
        } else {
            throw ConfigError("unknown policy '" + options.policy_id +
                              "' (expected greedy, qlearning or ga-strategy)");
        }

        std::vector<EpisodeMetrics> episodes;
        std::vector<std::vector<TraceEvent>> traces;
        for (int i = 0; i < scenario.evaluation.episodes; ++i) {
            std::uint64_t episode_seed =
                derive_seed(options.seed, "eval-episode", static_cast<std::uint64_t>(i));
            if (!options.trace_path.empty()) {
                std::vector<TraceEvent> trace;
                episodes.push_back(run_episode(scenario, *policy, episode_seed,
                                               scenario.horizon_slots, &trace));
                traces.push_back(std::move(trace));
            } else {
                episodes.push_back(
                    run_episode(scenario, *policy, episode_seed, scenario.horizon_slots));
            }
        }
        write_metrics_csv(options.out_path, episodes, scenario.dims());
        if (!options.trace_path.empty()) write_trace_csv(options.trace_path, traces);
        return kExitOk;
    });
}

int cmd_compare(const CompareOptions& options, std::ostream& diag) {
    return guarded(diag, [&]() {
        Scenario base = load_with_overrides(options.scenario_path, options.horizon_override,
                                            std::nullopt);
        if (options.out_path.empty()) throw ConfigError("compare: --out is required");
        if (options.sweep.empty()) throw ConfigError("compare: sweep must be non-empty");
        for (double p : options.sweep) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ConfigError("compare: sweep probabilities must be in [0,1]");
            }
        }
        if (options.eval_seeds < 1) throw ConfigError("compare: eval_seeds must be >= 1");
        bool has_be = std::any_of(base.types.begin(), base.types.end(), [](const SliceTypeSpec& t) {
            return t.slice_class == SliceClass::BestEffort;
        });
        if (!has_be) throw ConfigError("compare: scenario has no BestEffort type to sweep");

        std::vector<std::uint64_t> eval_seeds;
        for (int i = 0; i < options.eval_seeds; ++i) {
            eval_seeds.push_back(
                derive_seed(options.seed, "compare-eval", static_cast<std::uint64_t>(i)));
        }

        const std::vector<std::string> summary_fields = {
            "acceptance_pct_overall", "acceptance_pct_gs", "acceptance_pct_be",
            "drop_prob_gs",           "drop_prob_be",      "cumulative_reward",
            "normalized_utility_rate", "scale_down_events"};
        CsvRow header{"be_departure_prob", "policy"};
        for (const std::string& f : summary_fields) {
            std::string base_name = f == "acceptance_pct_overall" ? "acceptance_pct" : f;
            header.push_back(base_name + "_mean");
            header.push_back(base_name + "_std");
        }

        std::vector<CsvRow> rows;
        for (std::size_t vi = 0; vi < options.sweep.size(); ++vi) {
            Scenario scenario = base;
            for (SliceTypeSpec& t : scenario.types) {
                if (t.slice_class == SliceClass::BestEffort) {
                    t.departure_prob = options.sweep[vi];
                }
            }
            scenario.validate();

            TrainResult trained = train_qlearning(
                scenario, derive_seed(options.seed, "compare-train", static_cast<std::uint64_t>(vi)));

            for (const std::string& policy_id : {std::string("greedy"), std::string("qlearning")}) {
                std::unique_ptr<Policy> policy;
                if (policy_id == "greedy") {
                    policy = std::make_unique<GreedyPolicy>();
                } else {
                    policy = std::make_unique<QLearningPolicy>(
                        scenario, trained.table, /*epsilon=*/0.0,
                        derive_seed(options.seed, "compare-eval-explore"), /*learn=*/false);
                }
                std::vector<EpisodeMetrics> episodes;
                for (std::uint64_t s : eval_seeds) {
                    episodes.push_back(run_episode(scenario, *policy, s, scenario.horizon_slots));
                }
                MetricsSummary summary = aggregate(episodes);
                CsvRow row{format_real(options.sweep[vi]), policy_id};
                for (const std::string& f : summary_fields) {
                    row.push_back(format_real(summary_value(summary, f, false)));
                    row.push_back(format_real(summary_value(summary, f, true)));
                }
                rows.push_back(std::move(row));
            }
        }
        write_csv(rows, header, options.out_path);
        return kExitOk;
    });
}

int cmd_evolve(const EvolveOptions& options, std::ostream& diag) {
    return guarded(diag, [&]() {
        Scenario scenario = load_with_overrides(options.scenario_path, std::nullopt, std::nullopt);
        if (options.out_path.empty()) throw ConfigError("evolve: --out is required");
        if (options.generations_override) {
            scenario.genetic.generations = *options.generations_override;
            scenario.validate();
        }
        if (options.shift_at.has_value() != !options.shift_scenario_path.empty()) {
            throw ConfigError("evolve: --shift-at and --shift-scenario must be given together");
        }

        const std::string strategy_path = options.strategy_out_path.empty()
                                              ? options.out_path + ".strategy.json"
                                              : options.strategy_out_path;

        if (options.shift_at.has_value()) {
            Scenario shifted = load_with_overrides(options.shift_scenario_path, std::nullopt,
                                                   std::nullopt);
            if (options.generations_override) {
                shifted.genetic.generations = *options.generations_override;
                shifted.validate();
            }
            ShiftResult result =
                run_regime_shift(scenario, shifted, *options.shift_at, options.seed);
            if (result.shift_occurred) {
                CsvRow header{"generation", "best_fitness", "mean_fitness", "best_genome_hex",
                              "benchmark_fitness"};
                std::vector<CsvRow> rows;
                for (const GaTrajectoryRow& r : result.ga.trajectory) {
                    rows.push_back({std::to_string(r.generation), format_real(r.best_fitness),
                                    format_real(r.mean_fitness), r.best_genome.to_hex(),
                                    r.after_shift ? format_real(result.benchmark_fitness)
                                                  : std::string()});
                }
                write_csv(rows, header, options.out_path);
                save_strategy_json(strategy_path, result.ga.best_strategy, result.ga.best_fitness,
                                   result.ga.best_genome);
                return kExitOk;
            }
            // Shift scheduled past the run's end: identical to a plain run.
        }

        GaResult result = optimize(scenario, options.seed);
        CsvRow header{"generation", "best_fitness", "mean_fitness", "best_genome_hex"};
        std::vector<CsvRow> rows;
        for (const GaTrajectoryRow& r : result.trajectory) {
            rows.push_back({std::to_string(r.generation), format_real(r.best_fitness),
                            format_real(r.mean_fitness), r.best_genome.to_hex()});
        }
        write_csv(rows, header, options.out_path);
        save_strategy_json(strategy_path, result.best_strategy, result.best_fitness,
                           result.best_genome);
        return kExitOk;
    });
}

namespace {

std::vector<orch::ScheduledSlice> parse_slice_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open slice table '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "slice_id,demand_fraction,start,end") {
        throw ConfigError("slice table '" + path +
                          "': line 1: expected header 'slice_id,demand_fraction,start,end'");
    }
    std::vector<orch::ScheduledSlice> slices;
    int line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) continue;
        orch::ScheduledSlice s;
        long long start = 0;
        long long end = 0;
        if (std::sscanf(line.c_str(), "%d,%lf,%lld,%lld", &s.slice_id, &s.cpu_demand_fraction,
                        &start, &end) != 4) {
            throw ConfigError("slice table '" + path + "': line " + std::to_string(line_no) +
                              ": malformed row '" + line + "'");
        }
        s.start_slot = start;
        s.end_slot = end;
        slices.push_back(s);
    }
    return slices;
}

}  // namespace

int cmd_schedule(const ScheduleOptions& options, std::ostream& out, std::ostream& diag) {
    return guarded(diag, [&]() {
        if (options.n_cpus < 1) throw ConfigError("schedule: --cpus must be >= 1");
        const int given_probe_flags = (options.probe_demand ? 1 : 0) +
                                      (options.probe_start ? 1 : 0) + (options.probe_end ? 1 : 0);
        if (given_probe_flags != 0 && given_probe_flags != 3) {
            throw ConfigError(
                "schedule: --probe-demand, --probe-start and --probe-end go together");
        }

        std::vector<orch::ScheduledSlice> slices = parse_slice_table(options.table_path);
        std::optional<orch::CpuSchedule> schedule = orch::schedule_slices(slices, options.n_cpus);
        if (!schedule) {
            out << "verdict: infeasible\n";
            diag << "error: no feasible assignment of " << slices.size() << " slices to "
                 << options.n_cpus << " cpus\n";
            return kExitUsage;
        }

        std::vector<orch::ScheduledSlice> by_id = slices;
        std::sort(by_id.begin(), by_id.end(),
                  [](const orch::ScheduledSlice& a, const orch::ScheduledSlice& b) {
                      return a.slice_id < b.slice_id;
                  });
        for (const orch::ScheduledSlice& s : by_id) {
            out << "slice " << s.slice_id << " -> cpu" << schedule->assignment.at(s.slice_id) + 1
                << "\n";
        }

        if (!options.out_path.empty()) {
            std::int64_t first = 0;
            std::int64_t last = 0;
            if (!slices.empty()) {
                first = slices.front().start_slot;
                last = slices.front().end_slot;
                for (const orch::ScheduledSlice& s : slices) {
                    first = std::min(first, s.start_slot);
                    last = std::max(last, s.end_slot);
                }
            }
            CsvRow header{"slot"};
            for (int c = 0; c < options.n_cpus; ++c) header.push_back("cpu" + std::to_string(c + 1));
            std::vector<CsvRow> rows;
            auto series = orch::cpu_utilization_series(slices, *schedule, first, last);
            for (std::size_t i = 0; i < series.size(); ++i) {
                CsvRow row{std::to_string(first + static_cast<std::int64_t>(i))};
                for (double u : series[i]) row.push_back(format_real(u));
                rows.push_back(std::move(row));
            }
            write_csv(rows, header, options.out_path);
        }

        if (given_probe_flags == 3) {
            std::optional<int> cpu =
                orch::first_fit_cpu(slices, *schedule, options.n_cpus, *options.probe_demand,
                                    *options.probe_start, *options.probe_end);
            if (cpu) {
                out << "probe verdict: accept on cpu" << *cpu + 1 << "\n";
            } else {
                out << "probe verdict: reject\n";
            }
        }
        return kExitOk;
    });
}

}  // namespace slicesim
