#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slicesim/env.hpp"
#include "slicesim/genetic.hpp"
#include "slicesim/metrics.hpp"
#include "slicesim/orchestrator.hpp"
#include "slicesim/qlearning.hpp"
#include "slicesim/scenario.hpp"

namespace py = pybind11;
using namespace slicesim;

namespace {

ResourceVector to_vec(const std::vector<double>& v) { return ResourceVector(v); }

std::unique_ptr<Policy> make_policy(const Scenario& scenario, const std::string& policy_id,
                                    QTable* table, const ThresholdStrategy* strategy,
                                    std::uint64_t seed) {
    if (policy_id == "greedy") return std::make_unique<GreedyPolicy>();
    if (policy_id == "qlearning") {
        if (!table) throw ConfigError("qlearning evaluation needs a trained table");
        return std::make_unique<QLearningPolicy>(scenario, *table, 0.0,
                                                 derive_seed(seed, "eval-explore"), false);
    }
    if (policy_id == "ga-strategy") {
        if (!strategy) throw ConfigError("ga-strategy evaluation needs a strategy");
        return std::make_unique<ThresholdStrategyPolicy>(scenario, *strategy);
    }
    throw ConfigError("unknown policy '" + policy_id + "'");
}

py::dict metrics_dict(const EpisodeMetrics& m, std::size_t dims) {
    py::dict d;
    std::vector<std::string> names = metric_field_names(dims);
    std::vector<double> values = metric_field_values(m);
    for (std::size_t i = 0; i < names.size(); ++i) d[names[i].c_str()] = values[i];
    return d;
}

}  // namespace

PYBIND11_MODULE(_slicesim, m) {
    m.doc() = "Network-slice admission and congestion control simulator";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<NotFoundError>(m, "NotFoundError");
    py::register_exception<ContractViolation>(m, "ContractViolation");

    py::class_<Scenario>(m, "Scenario")
        .def_property_readonly("dimension_names",
                               [](const Scenario& s) { return s.dimension_names; })
        .def_property_readonly("capacity",
                               [](const Scenario& s) { return s.capacity.amounts(); })
        .def_property_readonly("horizon_slots", [](const Scenario& s) { return s.horizon_slots; })
        .def_property_readonly("n_types", [](const Scenario& s) { return s.types.size(); })
        .def("u_max", &Scenario::u_max);

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("scenario_from_json", &scenario_from_json_text, py::arg("text"));

    m.def(
        "fits",
        [](const std::vector<double>& demand, const std::vector<double>& free) {
            return fits(to_vec(demand), to_vec(free));
        },
        py::arg("demand"), py::arg("free"));
    m.def(
        "utilization",
        [](const std::vector<double>& allocated, const std::vector<double>& capacity) {
            ResourcePool pool(to_vec(capacity));
            pool.allocate(to_vec(allocated));
            return utilization(pool);
        },
        py::arg("allocated"), py::arg("capacity"));

    m.def(
        "run_episode",
        [](const Scenario& scenario, const std::string& policy, std::uint64_t seed,
           std::optional<std::int64_t> horizon, std::optional<std::vector<int>> thresholds) {
            std::int64_t h = horizon.value_or(scenario.horizon_slots);
            std::unique_ptr<Policy> p;
            ThresholdStrategy strategy;
            if (thresholds) {
                strategy.thresholds = *thresholds;
                p = make_policy(scenario, policy, nullptr, &strategy, seed);
            } else {
                p = make_policy(scenario, policy, nullptr, nullptr, seed);
            }
            EpisodeMetrics metrics = run_episode(scenario, *p, seed, h);
            return metrics_dict(metrics, scenario.dims());
        },
        py::arg("scenario"), py::arg("policy"), py::arg("seed"), py::arg("horizon") = std::nullopt,
        py::arg("thresholds") = std::nullopt,
        "Run one episode with the greedy or ga-strategy policy and return its metrics");

    py::class_<QTable>(m, "QTable")
        .def_property_readonly("n_states", &QTable::n_states)
        .def_property_readonly("n_actions", &QTable::n_actions)
        .def("q", &QTable::q, py::arg("state"), py::arg("action"))
        .def("save_csv", &QTable::save_csv, py::arg("path"));

    m.def(
        "train_qlearning",
        [](const Scenario& scenario, std::uint64_t seed) {
            TrainResult r = train_qlearning(scenario, seed);
            return py::make_tuple(std::move(r.table), r.learning_curve);
        },
        py::arg("scenario"), py::arg("seed"),
        "Train the Q-learning controller; returns (table, learning_curve)");

    m.def(
        "evaluate_qlearning",
        [](const Scenario& scenario, QTable& table, std::uint64_t seed,
           std::optional<std::int64_t> horizon) {
            QLearningPolicy policy(scenario, table, 0.0, derive_seed(seed, "eval-explore"), false);
            EpisodeMetrics metrics =
                run_episode(scenario, policy, seed, horizon.value_or(scenario.horizon_slots));
            return metrics_dict(metrics, scenario.dims());
        },
        py::arg("scenario"), py::arg("table"), py::arg("seed"), py::arg("horizon") = std::nullopt);

    m.def(
        "decode_genome",
        [](const Scenario& scenario, const std::string& bits) {
            Genome g;
            for (char c : bits) {
                if (c != '0' && c != '1') throw ConfigError("genome bits must be 0/1");
                g.bits.push_back(c == '1' ? 1 : 0);
            }
            return GenomeLayout::from_scenario(scenario).decode(g).thresholds;
        },
        py::arg("scenario"), py::arg("bits"));

    m.def(
        "strategy_fitness",
        [](const Scenario& scenario, const std::vector<int>& thresholds, std::uint64_t seed,
           int fitness_seeds, std::optional<std::int64_t> horizon) {
            ThresholdStrategy s{thresholds};
            return fitness(s, scenario, make_fitness_seeds(seed, fitness_seeds),
                           horizon.value_or(scenario.horizon_slots));
        },
        py::arg("scenario"), py::arg("thresholds"), py::arg("seed"), py::arg("fitness_seeds") = 3,
        py::arg("horizon") = std::nullopt);

    m.def(
        "ga_optimize",
        [](const Scenario& scenario, std::uint64_t seed) {
            GaResult r = optimize(scenario, seed);
            py::list rows;
            for (const GaTrajectoryRow& row : r.trajectory) {
                rows.append(py::make_tuple(row.generation, row.best_fitness, row.mean_fitness,
                                           row.best_genome.to_hex()));
            }
            py::dict d;
            d["best_thresholds"] = r.best_strategy.thresholds;
            d["best_fitness"] = r.best_fitness;
            d["best_genome_hex"] = r.best_genome.to_hex();
            d["trajectory"] = rows;
            return d;
        },
        py::arg("scenario"), py::arg("seed"));

    m.def(
        "pareto_filter",
        [](const std::vector<std::pair<std::uint64_t, std::vector<double>>>& candidates,
           const std::vector<std::string>& senses) {
            std::vector<orch::Sense> tags;
            for (const std::string& s : senses) {
                if (s == "max") tags.push_back(orch::Sense::Maximize);
                else if (s == "min") tags.push_back(orch::Sense::Minimize);
                else throw ConfigError("sense must be 'max' or 'min'");
            }
            std::vector<std::pair<std::uint64_t, orch::ObjectiveVector>> cs;
            for (const auto& [id, values] : candidates) {
                cs.push_back({id, orch::ObjectiveVector{values, tags}});
            }
            return orch::pareto_filter(cs);
        },
        py::arg("candidates"), py::arg("senses"),
        "Non-dominated ids of (id, objective_values) candidates");

    m.def(
        "schedule_slices",
        [](const std::vector<std::tuple<int, double, std::int64_t, std::int64_t>>& slices,
           int n_cpus) -> std::optional<std::map<int, int>> {
            std::vector<orch::ScheduledSlice> ss;
            for (const auto& [id, frac, start, end] : slices) {
                ss.push_back({id, frac, start, end});
            }
            auto schedule = orch::schedule_slices(ss, n_cpus);
            if (!schedule) return std::nullopt;
            return schedule->assignment;
        },
        py::arg("slices"), py::arg("n_cpus"),
        "First-fit-decreasing slice-to-CPU assignment; None when infeasible");

    m.def(
        "can_accommodate",
        [](const std::vector<std::tuple<int, double, std::int64_t, std::int64_t>>& slices,
           int n_cpus, double demand_fraction, std::int64_t start, std::int64_t end) {
            std::vector<orch::ScheduledSlice> ss;
            for (const auto& [id, frac, s, e] : slices) ss.push_back({id, frac, s, e});
            auto schedule = orch::schedule_slices(ss, n_cpus);
            if (!schedule) throw ConfigError("slice table is not schedulable");
            return orch::can_accommodate(ss, *schedule, n_cpus, demand_fraction, start, end);
        },
        py::arg("slices"), py::arg("n_cpus"), py::arg("demand_fraction"), py::arg("start"),
        py::arg("end"));
}
