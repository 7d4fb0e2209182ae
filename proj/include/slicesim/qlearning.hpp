#ifndef SLICESIM_QLEARNING_HPP
#define SLICESIM_QLEARNING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slicesim/env.hpp"

namespace slicesim {

// Discretized view of the environment at a decision point.
struct Observation {
    std::vector<int> occupancy_levels;  // [0, L-1] per resource dimension
    int queue_len_gs = 0;               // waiting behind the head, clamped to Qmax
    int queue_len_be = 0;
    SliceClass head_class = SliceClass::BestEffort;
    int be_active_level = 0;  // count of BE instances with scale-down headroom, clamped
};

// Enumerates the finite observation space and maps observations to indices.
class ObservationSpace {
public:
    ObservationSpace(const QlHyperparams& hp, std::size_t dims);

    std::size_t size() const { return size_; }
    std::size_t index(const Observation& obs) const;
    Observation observe(const Env& env, const SliceRequest& request) const;

    int levels() const { return levels_; }
    int queue_clamp() const { return queue_clamp_; }

private:
    int levels_;
    int queue_clamp_;
    std::size_t dims_;
    std::size_t size_;
};

// Dense (state, action) value table with per-entry visit counts.
class QTable {
public:
    QTable(std::size_t n_states, int n_actions, double init_value = 0.0);

    std::size_t n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    double q(std::size_t s, int a) const { return values_[entry(s, a)]; }
    void set_q(std::size_t s, int a, double v) { values_[entry(s, a)] = v; }
    double max_q(std::size_t s) const;
    std::uint32_t visits(std::size_t s, int a) const { return visits_[entry(s, a)]; }
    void bump_visits(std::size_t s, int a) { visits_[entry(s, a)]++; }

    double max_abs_value() const;

    // Flat CSV (state_index, action, value) for inspection and reload.
    void save_csv(const std::string& path) const;
    static QTable load_csv(const std::string& path, std::size_t n_states, int n_actions);

private:
    std::size_t entry(std::size_t s, int a) const {
        return s * static_cast<std::size_t>(n_actions_) + static_cast<std::size_t>(a);
    }
    std::size_t n_states_;
    int n_actions_;
    std::vector<double> values_;
    std::vector<std::uint32_t> visits_;
};

// Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
void q_update(QTable& table, std::size_t s, int a, double reward, std::size_t s_next, double alpha,
              double gamma);

// Terminal backup without bootstrap.
void q_update_terminal(QTable& table, std::size_t s, int a, double reward, double alpha);

// Epsilon-greedy over the legal actions: with prob epsilon a uniformly
// random legal action, else the argmax over legal actions with ties broken
// by the lowest action index.
int select_action_index(const QTable& table, std::size_t s, const std::vector<char>& legal,
                        double epsilon, Rng& rng);

Action select_action(const QTable& table, std::size_t s, const ActionMask& mask, double epsilon,
                     Rng& rng);

// Admission policy backed by a Q-table. In learning mode it performs one
// backup per decision (rewards attach to decisions, not slots) and a
// terminal backup at the episode end.
class QLearningPolicy : public Policy {
public:
    QLearningPolicy(const Scenario& scenario, QTable& table, double epsilon,
                    std::uint64_t explore_seed, bool learn);

    Action decide(const Env& env, const SliceRequest& request, const ActionMask& mask) override;
    void decision_reward(double reward) override;
    void episode_end() override;
    std::string name() const override { return "qlearning"; }

private:
    double alpha_for(std::size_t s, int a) const;
    void backup(std::size_t s_next);

    const Scenario* scenario_;
    ObservationSpace space_;
    QTable* table_;
    double epsilon_;
    bool learn_;
    Rng rng_;
    struct Pending {
        std::size_t state;
        int action;
        double reward;
    };
    std::optional<Pending> pending_;
};

struct TrainResult {
    QTable table;
    std::vector<double> learning_curve;  // per-episode cumulative reward
};

// Runs scenario.qlearning.episodes training episodes with the configured
// epsilon/alpha schedules; deterministic per seed.
TrainResult train_qlearning(const Scenario& scenario, std::uint64_t seed);

}  // namespace slicesim

#endif
