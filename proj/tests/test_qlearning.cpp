#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "mdp_fixture.hpp"
#include "slicesim/qlearning.hpp"
#include "test_helpers.hpp"

using namespace slicesim;
using namespace slicesim::testing;

namespace {

Scenario small_scenario() {
    Scenario s = make_scenario(
        {10, 10}, {make_type(0, SliceClass::GuaranteedService, {2, 1}, 1.0, 3.0, 0.4, 0.1, 3),
                   make_type(1, SliceClass::BestEffort, {1, 2}, 0.5, 1.0, 0.6, 0.2, 3)});
    s.qlearning.episodes = 10;
    s.horizon_slots = 500;
    return s;
}

}  // namespace

TEST_CASE("observe: discretization of occupancy, queue and head class") {
    Scenario s = small_scenario();
    ObservationSpace space(s.qlearning, s.dims());

    Env env(s, 1);
    SliceRequest gs_head{1, 0, 0, 3};
    Observation obs = space.observe(env, gs_head);
    CHECK(obs.occupancy_levels == std::vector<int>{0, 0});
    CHECK(obs.queue_len_gs == 0);
    CHECK(obs.queue_len_be == 0);
    CHECK(obs.head_class == SliceClass::GuaranteedService);
    CHECK(obs.be_active_level == 0);

    // u = 1.0 clamps to the top level.
    Env full(s, 1);
    for (int i = 0; i < 5; ++i) {
        SliceRequest r{static_cast<std::uint64_t>(i + 10), 0, 0, 0};
        full.apply_action(r, Action::Accept);  // 5 x [2,1]
    }
    Observation top = space.observe(full, gs_head);
    CHECK(top.occupancy_levels[0] == 3);  // u=1.0 -> level L-1

    // allocated [4,2] on [10,10]: u0=0.4 -> level 1, u1=0.2 -> level 0.
    Env part(s, 1);
    for (int i = 0; i < 2; ++i) {
        SliceRequest r{static_cast<std::uint64_t>(i + 20), 0, 0, 0};
        part.apply_action(r, Action::Accept);
    }
    Observation mid = space.observe(part, gs_head);
    CHECK(mid.occupancy_levels == std::vector<int>{1, 0});
}

TEST_CASE("observe: floor(u*L) arithmetic at 0.49") {
    QlHyperparams hp;  // L = 4
    CHECK(static_cast<int>(std::floor(0.49 * hp.levels)) == 1);
    CHECK(static_cast<int>(std::floor(0.75 * hp.levels)) == 3);
}

TEST_CASE("observe: index is a bijection over the declared ranges") {
    QlHyperparams hp;
    hp.levels = 3;
    hp.queue_clamp = 2;
    ObservationSpace space(hp, 2);
    std::vector<char> seen(space.size(), 0);
    Observation obs;
    for (int o0 = 0; o0 < 3; ++o0) {
        for (int o1 = 0; o1 < 3; ++o1) {
            for (int qg = 0; qg <= 2; ++qg) {
                for (int qb = 0; qb <= 2; ++qb) {
                    for (int hc = 0; hc < 2; ++hc) {
                        for (int bl = 0; bl < 3; ++bl) {
                            obs.occupancy_levels = {o0, o1};
                            obs.queue_len_gs = qg;
                            obs.queue_len_be = qb;
                            obs.head_class =
                                hc ? SliceClass::GuaranteedService : SliceClass::BestEffort;
                            obs.be_active_level = bl;
                            std::size_t idx = space.index(obs);
                            REQUIRE(idx < space.size());
                            REQUIRE_FALSE(seen[idx]);
                            seen[idx] = 1;
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("select_action: tie-break, masking and argmax") {
    QTable q(4, kNumActions, 0.0);
    Rng rng(5);

    ActionMask all;
    all.accept = true;
    all.scale_down = true;
    // All Q equal: lowest legal index wins at epsilon=0.
    CHECK(select_action(q, 0, all, 0.0, rng) == Action::Accept);

    ActionMask reject_only;  // neither accept nor scale-down legal
    CHECK(select_action(q, 0, reject_only, 1.0, rng) == Action::Reject);

    q.set_q(1, 0, 1.0);
    q.set_q(1, 1, 3.0);
    q.set_q(1, 2, 2.0);
    CHECK(select_action(q, 1, all, 0.0, rng) == Action::Reject);  // argmax by table
}

TEST_CASE("select_action: never emits an illegal action (fuzz)") {
    QTable q(8, kNumActions, 0.0);
    Rng value_rng(11);
    for (std::size_t s = 0; s < 8; ++s) {
        for (int a = 0; a < kNumActions; ++a) q.set_q(s, a, value_rng.uniform01() * 10 - 5);
    }
    Rng rng(13);
    for (int i = 0; i < 5000; ++i) {
        ActionMask mask;
        mask.accept = rng.bernoulli(0.5);
        mask.scale_down = !mask.accept && rng.bernoulli(0.5);
        double eps = rng.uniform01();
        Action a = select_action(q, rng.uniform_int(8), mask, eps, rng);
        CHECK(mask.legal(a));
    }
}

TEST_CASE("select_action with epsilon 0 is deterministic given the table") {
    QTable q(4, kNumActions, 0.0);
    Rng seed_rng(3);
    for (std::size_t s = 0; s < 4; ++s) {
        for (int a = 0; a < kNumActions; ++a) q.set_q(s, a, seed_rng.uniform01());
    }
    ActionMask all;
    all.accept = true;
    all.scale_down = true;
    for (std::size_t s = 0; s < 4; ++s) {
        Rng r1(99), r2(1234);
        CHECK(select_action(q, s, all, 0.0, r1) == select_action(q, s, all, 0.0, r2));
    }
}

TEST_CASE("q_update: Bellman backup arithmetic") {
    SUBCASE("degenerate backup writes the reward") {
        QTable q(2, 2, 0.0);
        q_update(q, 0, 0, 5.0, 1, /*alpha=*/1.0, /*gamma=*/0.0);
        CHECK(q.q(0, 0) == doctest::Approx(5.0));
    }
    SUBCASE("partial step toward the target") {
        QTable q(2, 2, 0.0);
        q.set_q(0, 0, 1.0);
        q.set_q(1, 0, 2.0);  // max_a Q(s') = 2
        q_update(q, 0, 0, 0.0, 1, 0.5, 0.9);
        CHECK(q.q(0, 0) == doctest::Approx(1.4));  // 1 + 0.5*(1.8 - 1)
    }
    SUBCASE("alpha 0 freezes the table") {
        QTable q(2, 2, 0.5);
        q_update(q, 0, 1, 7.0, 1, 0.0, 0.9);
        CHECK(q.q(0, 1) == doctest::Approx(0.5));
    }
}

TEST_CASE("train: zero episodes returns the initial table unchanged") {
    Scenario s = small_scenario();
    s.qlearning.episodes = 0;
    s.qlearning.init_value = 0.25;
    TrainResult r = train_qlearning(s, 7);
    CHECK(r.learning_curve.empty());
    CHECK(r.table.max_abs_value() == doctest::Approx(0.25));
    for (std::size_t st = 0; st < std::min<std::size_t>(r.table.n_states(), 50); ++st) {
        for (int a = 0; a < r.table.n_actions(); ++a) CHECK(r.table.q(st, a) == 0.25);
    }
}

TEST_CASE("train on the explicit MDP approaches the value-iteration oracle") {
    QTable oracle = Mdp3::value_iteration(1e-13);
    QTable learned = Mdp3::train(/*seed=*/2718, /*steps=*/300000, /*epsilon=*/0.3,
                                 /*alpha0=*/0.5, /*alpha_decay_visits=*/500.0);
    CHECK(Mdp3::max_error(learned, oracle) < 1e-3);
    for (int s = 0; s < Mdp3::n_states; ++s) {
        CHECK(Mdp3::greedy_action(learned, s) == Mdp3::greedy_action(oracle, s));
    }
}

TEST_CASE("train: learning curve improves on the reference workload") {
    Scenario s = load_scenario(scenario_path("ref_a.json"));
    s.horizon_slots = 1500;
    s.qlearning.episodes = 30;
    TrainResult r = train_qlearning(s, 12);
    REQUIRE(r.learning_curve.size() == 30);
    double first = std::accumulate(r.learning_curve.begin(), r.learning_curve.begin() + 3, 0.0) / 3;
    double last = std::accumulate(r.learning_curve.end() - 3, r.learning_curve.end(), 0.0) / 3;
    CHECK(last >= first);
    // Q-values stay inside the discounted-reward bound (train asserts too).
    CHECK(r.table.max_abs_value() <= 10.0 / (1.0 - s.qlearning.gamma) + 1e-6);
}

TEST_CASE("QTable save/load round-trips through the CSV") {
    namespace fs = std::filesystem;
    QTable q(5, kNumActions, 0.0);
    Rng rng(21);
    for (std::size_t s = 0; s < 5; ++s) {
        for (int a = 0; a < kNumActions; ++a) q.set_q(s, a, rng.uniform01() * 7 - 3.5);
    }
    std::string path = (fs::temp_directory_path() / "slicesim_qtable.csv").string();
    q.save_csv(path);
    QTable loaded = QTable::load_csv(path, 5, kNumActions);
    for (std::size_t s = 0; s < 5; ++s) {
        for (int a = 0; a < kNumActions; ++a) CHECK(loaded.q(s, a) == q.q(s, a));
    }
    CHECK_THROWS_AS(QTable::load_csv(path, 6, kNumActions), ConfigError);
}

TEST_CASE("frozen-table evaluation is deterministic") {
    Scenario s = small_scenario();
    TrainResult r = train_qlearning(s, 99);
    QLearningPolicy policy(s, r.table, 0.0, 1, /*learn=*/false);
    EpisodeMetrics a = run_episode(s, policy, 123, 500);
    EpisodeMetrics b = run_episode(s, policy, 123, 500);
    CHECK(metric_field_values(a) == metric_field_values(b));
}
