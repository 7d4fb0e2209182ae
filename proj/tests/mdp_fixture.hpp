#ifndef SLICESIM_TESTS_MDP_FIXTURE_HPP
#define SLICESIM_TESTS_MDP_FIXTURE_HPP

#include <array>
#include <cmath>
#include <cstdint>

#include "slicesim/qlearning.hpp"

namespace slicesim::testing {

// Explicit 3-state / 2-action MDP with deterministic transitions and
// rewards, used to check the Q-learning backup against an independent
// value-iteration oracle.
struct Mdp3 {
    static constexpr int n_states = 3;
    static constexpr int n_actions = 2;
    static constexpr double gamma = 0.9;

    static int next_state(int s, int a) {
        static constexpr std::array<std::array<int, 2>, 3> t = {{{1, 2}, {2, 0}, {0, 1}}};
        return t[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    }
    static double reward(int s, int a) {
        static constexpr std::array<std::array<double, 2>, 3> r = {
            {{0.0, 0.1}, {-0.2, 1.0}, {0.5, 0.0}}};
        return r[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    }

    // Oracle: synchronous value iteration to the given residual.
    static QTable value_iteration(double residual) {
        QTable q(n_states, n_actions, 0.0);
        double delta = 1.0;
        while (delta > residual) {
            delta = 0.0;
            QTable next = q;
            for (int s = 0; s < n_states; ++s) {
                for (int a = 0; a < n_actions; ++a) {
                    double target =
                        reward(s, a) + gamma * q.max_q(static_cast<std::size_t>(next_state(s, a)));
                    delta = std::max(delta, std::abs(target - q.q(static_cast<std::size_t>(s), a)));
                    next.set_q(static_cast<std::size_t>(s), a, target);
                }
            }
            q = next;
        }
        return q;
    }

    // Tabular Q-learning with epsilon-greedy exploration and decaying alpha.
    static QTable train(std::uint64_t seed, long steps, double epsilon, double alpha0,
                        double alpha_decay_visits) {
        QTable q(n_states, n_actions, 0.0);
        Rng rng(seed);
        std::vector<char> all_legal(n_actions, 1);
        int s = 0;
        for (long i = 0; i < steps; ++i) {
            int a = select_action_index(q, static_cast<std::size_t>(s), all_legal, epsilon, rng);
            int s2 = next_state(s, a);
            double alpha =
                alpha0 / (1.0 + static_cast<double>(q.visits(static_cast<std::size_t>(s), a)) /
                                    alpha_decay_visits);
            q_update(q, static_cast<std::size_t>(s), a, reward(s, a),
                     static_cast<std::size_t>(s2), alpha, gamma);
            q.bump_visits(static_cast<std::size_t>(s), a);
            s = s2;
        }
        return q;
    }

    static double max_error(const QTable& a, const QTable& b) {
        double m = 0.0;
        for (int s = 0; s < n_states; ++s) {
            for (int act = 0; act < n_actions; ++act) {
                m = std::max(m, std::abs(a.q(static_cast<std::size_t>(s), act) -
                                         b.q(static_cast<std::size_t>(s), act)));
            }
        }
        return m;
    }

    static int greedy_action(const QTable& q, int s) {
        return q.q(static_cast<std::size_t>(s), 0) >= q.q(static_cast<std::size_t>(s), 1) ? 0 : 1;
    }
};

}  // namespace slicesim::testing

#endif
