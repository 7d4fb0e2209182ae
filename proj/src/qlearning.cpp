#include "slicesim/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slicesim {

ObservationSpace::ObservationSpace(const QlHyperparams& hp, std::size_t dims)
    : levels_(hp.levels), queue_clamp_(hp.queue_clamp), dims_(dims) {
    size_ = 1;
    for (std::size_t d = 0; d < dims_; ++d) size_ *= static_cast<std::size_t>(levels_);
    size_ *= static_cast<std::size_t>(queue_clamp_ + 1);
    size_ *= static_cast<std::size_t>(queue_clamp_ + 1);
    size_ *= 2;
    size_ *= static_cast<std::size_t>(levels_);
}

std::size_t ObservationSpace::index(const Observation& obs) const {
    std::size_t idx = 0;
    for (std::size_t d = 0; d < dims_; ++d) {
        idx = idx * static_cast<std::size_t>(levels_) +
              static_cast<std::size_t>(obs.occupancy_levels[d]);
    }
    idx = idx * static_cast<std::size_t>(queue_clamp_ + 1) +
          static_cast<std::size_t>(obs.queue_len_gs);
    idx = idx * static_cast<std::size_t>(queue_clamp_ + 1) +
          static_cast<std::size_t>(obs.queue_len_be);
    idx = idx * 2 + (obs.head_class == SliceClass::GuaranteedService ? 1 : 0);
    idx = idx * static_cast<std::size_t>(levels_) + static_cast<std::size_t>(obs.be_active_level);
    return idx;
}

Observation ObservationSpace::observe(const Env& env, const SliceRequest& request) const {
    Observation obs;
    std::vector<double> u = utilization(env.pool());
    obs.occupancy_levels.resize(u.size());
    for (std::size_t d = 0; d < u.size(); ++d) {
        int level = static_cast<int>(std::floor(u[d] * levels_));
        obs.occupancy_levels[d] = std::clamp(level, 0, levels_ - 1);
    }
    obs.queue_len_gs =
        std::min(env.queued_waiting(SliceClass::GuaranteedService, /*exclude_head=*/true),
                 queue_clamp_);
    obs.queue_len_be =
        std::min(env.queued_waiting(SliceClass::BestEffort, /*exclude_head=*/true), queue_clamp_);
    obs.head_class = env.scenario().type(request.type_id).slice_class;
    obs.be_active_level = std::min(env.scalable_be_count(), levels_ - 1);
    return obs;
}

QTable::QTable(std::size_t n_states, int n_actions, double init_value)
    : n_states_(n_states),
      n_actions_(n_actions),
      values_(n_states * static_cast<std::size_t>(n_actions), init_value),
      visits_(n_states * static_cast<std::size_t>(n_actions), 0) {}

double QTable::max_q(std::size_t s) const {
    double best = q(s, 0);
    for (int a = 1; a < n_actions_; ++a) best = std::max(best, q(s, a));
    return best;
}

double QTable::max_abs_value() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void QTable::save_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("QTable: cannot open '" + path + "' for writing");
    out << "state_index,action,value\n";
    char buf[64];
    for (std::size_t s = 0; s < n_states_; ++s) {
        for (int a = 0; a < n_actions_; ++a) {
            std::snprintf(buf, sizeof(buf), "%.17g", q(s, a));
            out << s << ',' << a << ',' << buf << '\n';
        }
    }
    if (!out) throw ConfigError("QTable: write failed for '" + path + "'");
}

QTable QTable::load_csv(const std::string& path, std::size_t n_states, int n_actions) {
    std::ifstream in(path);
    if (!in) throw ConfigError("QTable: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "state_index,action,value") {
        throw ConfigError("QTable: '" + path + "' has an unexpected header");
    }
    QTable table(n_states, n_actions, 0.0);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t s;
        int a;
        double v;
        if (std::sscanf(line.c_str(), "%zu,%d,%lf", &s, &a, &v) != 3) {
            throw ConfigError("QTable: malformed row in '" + path + "': " + line);
        }
        if (s >= n_states || a < 0 || a >= n_actions) {
            throw ConfigError("QTable: '" + path + "' does not match this scenario's state space");
        }
        table.set_q(s, a, v);
        rows++;
    }
    if (rows != n_states * static_cast<std::size_t>(n_actions)) {
        throw ConfigError("QTable: '" + path + "' has " + std::to_string(rows) +
                          " rows, expected " +
                          std::to_string(n_states * static_cast<std::size_t>(n_actions)));
    }
    return table;
}

void q_update(QTable& table, std::size_t s, int a, double reward, std::size_t s_next, double alpha,
              double gamma) {
    double target = reward + gamma * table.max_q(s_next);
    table.set_q(s, a, table.q(s, a) + alpha * (target - table.q(s, a)));
}

void q_update_terminal(QTable& table, std::size_t s, int a, double reward, double alpha) {
    table.set_q(s, a, table.q(s, a) + alpha * (reward - table.q(s, a)));
}

int select_action_index(const QTable& table, std::size_t s, const std::vector<char>& legal,
                        double epsilon, Rng& rng) {
    int n_legal = 0;
    for (char l : legal) n_legal += l ? 1 : 0;
    if (n_legal == 0) throw ContractViolation("select_action: no legal action");

    if (epsilon > 0.0 && rng.bernoulli(epsilon)) {
        std::uint64_t pick = rng.uniform_int(static_cast<std::uint64_t>(n_legal));
        for (int a = 0; a < static_cast<int>(legal.size()); ++a) {
            if (!legal[a]) continue;
            if (pick == 0) return a;
            pick--;
        }
    }
    int best = -1;
    for (int a = 0; a < static_cast<int>(legal.size()); ++a) {
        if (!legal[a]) continue;
        if (best < 0 || table.q(s, a) > table.q(s, best)) best = a;
    }
    return best;
}

Action select_action(const QTable& table, std::size_t s, const ActionMask& mask, double epsilon,
                     Rng& rng) {
    std::vector<char> legal = {mask.legal(Action::Accept) ? char(1) : char(0),
                               char(1),
                               mask.legal(Action::ScaleDownAndAccept) ? char(1) : char(0)};
    return static_cast<Action>(select_action_index(table, s, legal, epsilon, rng));
}

QLearningPolicy::QLearningPolicy(const Scenario& scenario, QTable& table, double epsilon,
                                 std::uint64_t explore_seed, bool learn)
    : scenario_(&scenario),
      space_(scenario.qlearning, scenario.dims()),
      table_(&table),
      epsilon_(epsilon),
      learn_(learn),
      rng_(explore_seed) {}

double QLearningPolicy::alpha_for(std::size_t s, int a) const {
    const QlHyperparams& hp = scenario_->qlearning;
    return hp.alpha0 / (1.0 + static_cast<double>(table_->visits(s, a)) / hp.alpha_decay_visits);
}

void QLearningPolicy::backup(std::size_t s_next) {
    q_update(*table_, pending_->state, pending_->action, pending_->reward, s_next,
             alpha_for(pending_->state, pending_->action), scenario_->qlearning.gamma);
    table_->bump_visits(pending_->state, pending_->action);
    pending_.reset();
}

Action QLearningPolicy::decide(const Env& env, const SliceRequest& request,
                               const ActionMask& mask) {
    std::size_t s = space_.index(space_.observe(env, request));
    if (learn_ && pending_) backup(s);
    Action a = select_action(*table_, s, mask, epsilon_, rng_);
    if (learn_) pending_ = Pending{s, static_cast<int>(a), 0.0};
    return a;
}

void QLearningPolicy::decision_reward(double reward) {
    if (pending_) pending_->reward = reward;
}

void QLearningPolicy::episode_end() {
    if (learn_ && pending_) {
        q_update_terminal(*table_, pending_->state, pending_->action, pending_->reward,
                          alpha_for(pending_->state, pending_->action));
        table_->bump_visits(pending_->state, pending_->action);
        pending_.reset();
    }
}

namespace {

// Decision rewards are bounded by an accept reward plus the worst-case
// scale-down penalty chain, so |Q| stays within R/(1-gamma) + |init|.
double max_abs_decision_reward(const Scenario& scenario) {
    const RewardParams& rw = scenario.rewards;
    int max_victims = 0;
    for (const SliceTypeSpec& t : scenario.types) {
        if (t.slice_class == SliceClass::BestEffort) {
            max_victims += t.physical_cap(scenario.capacity);
        }
    }
    double max_accept = std::max(std::abs(rw.accept_gs), std::abs(rw.accept_be)) +
                        max_victims * std::abs(rw.scaledown_penalty);
    return std::max({max_accept, std::abs(rw.drop_gs), std::abs(rw.drop_be)});
}

}  // namespace

TrainResult train_qlearning(const Scenario& scenario, std::uint64_t seed) {
    const QlHyperparams& hp = scenario.qlearning;
    ObservationSpace space(hp, scenario.dims());
    TrainResult result{QTable(space.size(), kNumActions, hp.init_value), {}};

    const double q_bound = max_abs_decision_reward(scenario) / (1.0 - hp.gamma) +
                           std::abs(hp.init_value) + 1e-6;

    for (int e = 0; e < hp.episodes; ++e) {
        double frac = hp.episodes > 1 ? static_cast<double>(e) / (hp.episodes - 1) : 0.0;
        double epsilon = hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * frac;
        QLearningPolicy policy(scenario, result.table, epsilon,
                               derive_seed(seed, "ql-explore", static_cast<std::uint64_t>(e)),
                               /*learn=*/true);
        EpisodeMetrics m =
            run_episode(scenario, policy, derive_seed(seed, "ql-train-episode", static_cast<std::uint64_t>(e)),
                        scenario.horizon_slots);
        result.learning_curve.push_back(m.cumulative_reward);
        if (result.table.max_abs_value() > q_bound) {
            throw ContractViolation("train_qlearning: Q-value escaped its bound");
        }
    }
    return result;
}

}  // namespace slicesim
