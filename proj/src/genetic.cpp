#include "slicesim/genetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace slicesim {

std::string Genome::to_hex() const {
    static const char digits[] = "0123456789abcdef";
    std::string hex;
    int nibble = 0;
    int in_nibble = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        nibble = (nibble << 1) | (bits[i] ? 1 : 0);
        if (++in_nibble == 4) {
            hex += digits[nibble];
            nibble = 0;
            in_nibble = 0;
        }
    }
    if (in_nibble > 0) {
        nibble <<= (4 - in_nibble);  // pad the tail nibble on the right
        hex += digits[nibble];
    }
    return hex.empty() ? "0" : hex;
}

GenomeLayout GenomeLayout::from_scenario(const Scenario& scenario) {
    GenomeLayout layout;
    for (const SliceTypeSpec& t : scenario.types) {
        int cap = t.physical_cap(scenario.capacity);
        int width = 0;
        while ((1 << width) < cap + 1) width++;
        layout.caps_.push_back(cap);
        layout.widths_.push_back(width);
        layout.total_bits_ += width;
    }
    return layout;
}

std::uint64_t GenomeLayout::strategy_count(std::uint64_t saturate_at) const {
    std::uint64_t n = 1;
    for (int cap : caps_) {
        n *= static_cast<std::uint64_t>(cap) + 1;
        if (n >= saturate_at) return saturate_at;
    }
    return n;
}

Genome GenomeLayout::encode(const ThresholdStrategy& strategy) const {
    if (strategy.thresholds.size() != caps_.size()) {
        throw ConfigError("encode: strategy has " + std::to_string(strategy.thresholds.size()) +
                          " thresholds, layout has " + std::to_string(caps_.size()));
    }
    Genome g;
    g.bits.reserve(static_cast<std::size_t>(total_bits_));
    for (std::size_t i = 0; i < caps_.size(); ++i) {
        int v = strategy.thresholds[i];
        if (v < 0 || v > caps_[i]) {
            throw ConfigError("encode: threshold " + std::to_string(v) + " outside [0," +
                              std::to_string(caps_[i]) + "]");
        }
        for (int b = widths_[i] - 1; b >= 0; --b) {
            g.bits.push_back(static_cast<std::uint8_t>((v >> b) & 1));
        }
    }
    return g;
}

ThresholdStrategy GenomeLayout::decode(const Genome& genome) const {
    if (static_cast<int>(genome.bits.size()) != total_bits_) {
        throw ConfigError("decode: genome has " + std::to_string(genome.bits.size()) +
                          " bits, layout needs " + std::to_string(total_bits_));
    }
    ThresholdStrategy s;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < caps_.size(); ++i) {
        int v = 0;
        for (int b = 0; b < widths_[i]; ++b) v = (v << 1) | genome.bits[pos++];
        s.thresholds.push_back(std::min(v, caps_[i]));
    }
    return s;
}

Action strategy_decide(int threshold, int active_count, const ResourceVector& demand,
                       const ResourceVector& free) {
    if (active_count < threshold && fits(demand, free)) return Action::Accept;
    return Action::Reject;
}

ThresholdStrategyPolicy::ThresholdStrategyPolicy(const Scenario& scenario,
                                                 ThresholdStrategy strategy)
    : scenario_(&scenario), strategy_(std::move(strategy)) {
    if (strategy_.thresholds.size() != scenario.types.size()) {
        throw ConfigError("strategy has " + std::to_string(strategy_.thresholds.size()) +
                          " thresholds, scenario has " + std::to_string(scenario.types.size()) +
                          " types");
    }
}

Action ThresholdStrategyPolicy::decide(const Env& env, const SliceRequest& request,
                                       const ActionMask&) {
    const std::size_t i = scenario_->type_index(request.type_id);
    return strategy_decide(strategy_.thresholds[i], env.active_count(request.type_id),
                           scenario_->types[i].demand, env.pool().free());
}

std::vector<std::uint64_t> make_fitness_seeds(std::uint64_t master, int count) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        seeds.push_back(derive_seed(master, "ga-fitness", static_cast<std::uint64_t>(i)));
    }
    return seeds;
}

double fitness(const ThresholdStrategy& strategy, const Scenario& scenario,
               const std::vector<std::uint64_t>& seeds, std::int64_t horizon) {
    if (horizon < 1) throw ConfigError("fitness: horizon must be >= 1");
    if (!(scenario.u_max() > 0.0)) throw ConfigError("fitness: U_max is 0");
    if (seeds.empty()) throw ConfigError("fitness: need at least one seed");
    double sum = 0.0;
    for (std::uint64_t seed : seeds) {
        ThresholdStrategyPolicy policy(scenario, strategy);
        EpisodeMetrics m = run_episode(scenario, policy, seed, horizon);
        sum += m.normalized_utility_rate;
    }
    return sum / static_cast<double>(seeds.size());
}

namespace {

// Elite order: fitness descending, ties by genome lexicographic order.
std::vector<std::size_t> elite_order(const std::vector<Genome>& population,
                                     const std::vector<double>& fitnesses) {
    std::vector<std::size_t> order(population.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (fitnesses[a] != fitnesses[b]) return fitnesses[a] > fitnesses[b];
        return population[a] < population[b];
    });
    return order;
}

std::size_t roulette_pick(const std::vector<double>& fitnesses, double total, Rng& rng) {
    if (total <= 0.0) {
        return static_cast<std::size_t>(rng.uniform_int(fitnesses.size()));
    }
    double u = rng.uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < fitnesses.size(); ++i) {
        acc += fitnesses[i];
        if (u < acc) return i;
    }
    // Rounding tail: last genome with positive fitness.
    for (std::size_t i = fitnesses.size(); i-- > 0;) {
        if (fitnesses[i] > 0.0) return i;
    }
    return fitnesses.size() - 1;
}

}  // namespace

std::vector<Genome> evolve_generation(const std::vector<Genome>& population,
                                      const std::vector<double>& fitnesses, Rng& rng,
                                      const GaParams& params, const GenomeLayout& layout) {
    if (static_cast<int>(population.size()) != params.population_size ||
        fitnesses.size() != population.size()) {
        throw ConfigError("evolve_generation: population/fitness size mismatch");
    }
    const int bits = layout.total_bits();
    const double mutation_prob =
        params.mutation_prob_per_bit >= 0.0 ? params.mutation_prob_per_bit : 1.0 / bits;

    std::vector<Genome> next;
    next.reserve(population.size());
    for (std::size_t i : elite_order(population, fitnesses)) {
        next.push_back(population[i]);
        if (static_cast<int>(next.size()) == params.elite_count) break;
    }

    double total = 0.0;
    for (double f : fitnesses) total += f;

    while (static_cast<int>(next.size()) < params.population_size) {
        Genome a = population[roulette_pick(fitnesses, total, rng)];
        Genome b = population[roulette_pick(fitnesses, total, rng)];
        if (bits >= 2 && rng.bernoulli(params.crossover_prob)) {
            int cut = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(bits - 1)));
            for (int i = cut; i < bits; ++i) {
                std::swap(a.bits[static_cast<std::size_t>(i)], b.bits[static_cast<std::size_t>(i)]);
            }
        }
        for (Genome* child : {&a, &b}) {
            for (std::uint8_t& bit : child->bits) {
                if (rng.bernoulli(mutation_prob)) bit ^= 1;
            }
        }
        next.push_back(std::move(a));
        if (static_cast<int>(next.size()) < params.population_size) next.push_back(std::move(b));
    }
    return next;
}

namespace {

struct GaRun {
    const Scenario* env_a;
    const Scenario* env_b;  // nullptr: no shift
    int shift_generation;   // active from this generation on
    std::uint64_t seed;

    ShiftResult execute() const {
        const Scenario& base = *env_a;
        const GaParams& params = base.genetic;
        GenomeLayout layout = GenomeLayout::from_scenario(base);
        if (layout.total_bits() < 1) {
            throw ConfigError("optimize: strategy space is empty (all caps are 0)");
        }
        const std::int64_t horizon =
            params.fitness_horizon > 0 ? params.fitness_horizon : base.horizon_slots;
        std::vector<std::uint64_t> seeds = make_fitness_seeds(seed, params.fitness_seeds);

        Rng init_rng(derive_seed(seed, "ga-init"));
        std::vector<Genome> population;
        for (int i = 0; i < params.population_size; ++i) {
            Genome g;
            g.bits.resize(static_cast<std::size_t>(layout.total_bits()));
            for (std::uint8_t& bit : g.bits) bit = init_rng.bernoulli(0.5) ? 1 : 0;
            population.push_back(std::move(g));
        }
        Rng evolve_rng(derive_seed(seed, "ga-evolve"));

        ShiftResult result;
        const bool shifting = env_b != nullptr && shift_generation < params.generations;
        result.shift_occurred = shifting;
        result.shift_generation = shift_generation;

        // Fitness is a pure function of the genome under fixed seeds, so
        // repeated evaluations (elites, converged populations) are memoized.
        std::map<std::vector<std::uint8_t>, double> memo;

        bool have_best = false;
        for (int gen = 0; gen <= params.generations; ++gen) {
            const bool after_shift = shifting && gen >= shift_generation;
            const Scenario& env = after_shift ? *env_b : *env_a;
            if (shifting && gen == shift_generation) memo.clear();

            std::vector<double> fitnesses(population.size());
            double sum = 0.0;
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < population.size(); ++i) {
                auto it = memo.find(population[i].bits);
                if (it == memo.end()) {
                    it = memo.emplace(population[i].bits,
                                      fitness(layout.decode(population[i]), env, seeds, horizon))
                             .first;
                }
                fitnesses[i] = it->second;
                sum += fitnesses[i];
                if (fitnesses[i] > fitnesses[best_i] ||
                    (fitnesses[i] == fitnesses[best_i] && population[i] < population[best_i])) {
                    best_i = i;
                }
            }

            if (shifting && gen == shift_generation) {
                // Freeze the pre-shift best as the static benchmark.
                result.benchmark_strategy = result.ga.best_strategy;
                result.benchmark_fitness =
                    fitness(result.benchmark_strategy, *env_b, seeds, horizon);
                have_best = false;  // best-ever restarts under the new environment
            }

            GaTrajectoryRow row;
            row.generation = gen;
            row.best_fitness = fitnesses[best_i];
            row.mean_fitness = sum / static_cast<double>(population.size());
            row.best_genome = population[best_i];
            row.after_shift = after_shift;
            result.ga.trajectory.push_back(row);

            if (!have_best || fitnesses[best_i] > result.ga.best_fitness) {
                result.ga.best_fitness = fitnesses[best_i];
                result.ga.best_genome = population[best_i];
                result.ga.best_strategy = layout.decode(population[best_i]);
                have_best = true;
            }

            if (gen == params.generations) break;
            population = evolve_generation(population, fitnesses, evolve_rng, params, layout);
        }
        return result;
    }
};

}  // namespace

GaResult optimize(const Scenario& scenario, std::uint64_t seed) {
    GaRun run{&scenario, nullptr, 0, seed};
    return run.execute().ga;
}

ShiftResult run_regime_shift(const Scenario& scenario_a, const Scenario& scenario_b,
                             int shift_generation, std::uint64_t seed) {
    if (shift_generation < 1) {
        throw ConfigError("run_regime_shift: shift_generation must be >= 1");
    }
    if (scenario_a.types.size() != scenario_b.types.size()) {
        throw ConfigError("run_regime_shift: scenarios must share the type set");
    }
    for (std::size_t i = 0; i < scenario_a.types.size(); ++i) {
        if (scenario_a.types[i].type_id != scenario_b.types[i].type_id) {
            throw ConfigError("run_regime_shift: scenarios must share the type set");
        }
    }
    if (!(GenomeLayout::from_scenario(scenario_a) == GenomeLayout::from_scenario(scenario_b))) {
        throw ConfigError("run_regime_shift: scenarios must share the genome layout");
    }
    GaRun run{&scenario_a, &scenario_b, shift_generation, seed};
    return run.execute();
}

}  // namespace slicesim
