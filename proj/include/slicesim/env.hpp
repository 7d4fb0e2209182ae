#ifndef SLICESIM_ENV_HPP
#define SLICESIM_ENV_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slicesim/core.hpp"
#include "slicesim/metrics.hpp"
#include "slicesim/rng.hpp"
#include "slicesim/scenario.hpp"

namespace slicesim {

enum class Action { Accept = 0, Reject = 1, ScaleDownAndAccept = 2 };

inline constexpr int kNumActions = 3;

const char* to_string(Action a);

// Which actions are legal for the head request in the current state.
// Reject is always legal; Accept iff the nominal demand fits free capacity;
// ScaleDownAndAccept iff it does not fit but a scale-down plan exists.
struct ActionMask {
    bool accept = false;
    bool scale_down = false;

    bool legal(Action a) const {
        switch (a) {
            case Action::Accept: return accept;
            case Action::Reject: return true;
            case Action::ScaleDownAndAccept: return scale_down;
        }
        return false;
    }
    int legal_count() const { return 1 + (accept ? 1 : 0) + (scale_down ? 1 : 0); }
};

// One entry of a scale-down plan: victim instance and its new fraction.
struct ScaleDownStep {
    std::uint64_t nsi_id = 0;
    double new_fraction = 1.0;
};

class Env;

// Admission policies get the environment read-only plus the legality mask
// for the head request. Learning policies receive the applied decision's
// reward through decision_reward and a terminal notification at horizon.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action decide(const Env& env, const SliceRequest& request, const ActionMask& mask) = 0;
    virtual void decision_reward(double /*reward*/) {}
    virtual void episode_end() {}
    virtual std::string name() const = 0;
};

// Per-slot trace record, one row per event.
struct TraceEvent {
    std::int64_t slot = 0;
    std::string event;  // arrival, overflow, departure, accept, reject, scale_down, expire
    int type_id = 0;
    std::uint64_t id = 0;  // request or nsi id
    double value = 0.0;    // reward for decisions, new fraction for scale_down
};

// Deterministic per-type Bernoulli arrivals, in type_id order; request ids
// strictly increasing.
std::vector<SliceRequest> sample_arrivals(Rng& rng, const std::vector<SliceTypeSpec>& specs,
                                          std::int64_t slot, std::uint64_t& next_request_id);

// Each active instance departs independently with its type's departure_prob.
std::vector<std::uint64_t> sample_departures(Rng& rng,
                                             const std::vector<NetworkSliceInstance>& active,
                                             const Scenario& scenario);

// Victims are BestEffort instances ordered by allocation L1 norm descending
// (ties by nsi_id ascending); each is scaled to the largest fraction >= its
// type's min_fraction that covers the remaining shortfall. nullopt when even
// maximal scaling is insufficient. GS instances are never victims.
std::optional<std::vector<ScaleDownStep>> compute_scale_down_plan(
    const std::vector<NetworkSliceInstance>& active, const Scenario& scenario,
    const ResourceVector& free, const ResourceVector& incoming_demand);

// Slotted-time environment: owns the pool, the active set, the FIFO patience
// queue and the per-episode counters. Single-threaded; independent episodes
// may run concurrently on their own instances.
class Env {
public:
    Env(const Scenario& scenario, std::uint64_t seed);

    // One slot: departures, arrivals, head-first queue processing, aging,
    // utility accrual. Returns the slot's reward. A Reject decision ends the
    // slot's admission round; requests behind it wait and age.
    double step(Policy& policy);

    const Scenario& scenario() const { return *scenario_; }
    std::int64_t slot() const { return slot_; }
    const ResourcePool& pool() const { return pool_; }
    const std::vector<NetworkSliceInstance>& active() const { return active_; }
    const std::deque<SliceRequest>& queue() const { return queue_; }

    int active_count(int type_id) const;
    // BE instances that still have scale-down headroom.
    int scalable_be_count() const;
    // Queue lengths behind the head request, per class.
    int queued_waiting(SliceClass c, bool exclude_head) const;

    ActionMask legal_actions(const SliceRequest& request) const;

    // Applies one decision for the queue-head request. Throws
    // ContractViolation if the action is illegal in the current state.
    double apply_action(const SliceRequest& request, Action action);

    double cumulative_reward() const { return cumulative_reward_; }
    double total_utility() const { return total_utility_; }
    const ClassCounters& counters(SliceClass c) const {
        return c == SliceClass::GuaranteedService ? gs_ : be_;
    }

    void enable_trace() { trace_enabled_ = true; }
    const std::vector<TraceEvent>& trace() const { return trace_; }

    EpisodeMetrics metrics(std::int64_t horizon_slots) const;

    // Fails with ContractViolation if any structural invariant is broken;
    // used by fuzz tests after every slot.
    void check_invariants() const;

private:
    void release_instance(std::size_t index);
    void record(std::string event, int type_id, std::uint64_t id, double value);

    const Scenario* scenario_;
    Rng rng_;
    std::int64_t slot_ = 0;
    ResourcePool pool_;
    std::vector<NetworkSliceInstance> active_;
    std::deque<SliceRequest> queue_;
    std::vector<int> active_by_type_;
    ClassCounters be_;
    ClassCounters gs_;
    std::uint64_t next_request_id_ = 1;
    std::uint64_t next_nsi_id_ = 1;
    double cumulative_reward_ = 0.0;
    double total_utility_ = 0.0;
    std::vector<double> util_sum_;
    std::uint64_t scale_down_events_ = 0;
    bool trace_enabled_ = false;
    std::vector<TraceEvent> trace_;
};

// Runs `horizon_slots` steps from a fresh environment; identical inputs give
// bit-identical metrics. Throws ConfigError on horizon < 1.
EpisodeMetrics run_episode(const Scenario& scenario, Policy& policy, std::uint64_t seed,
                           std::int64_t horizon_slots,
                           std::vector<TraceEvent>* trace_out = nullptr);

// ---------------------------------------------------------------------------
// Baseline policies

// Admit whenever the nominal demand fits free capacity; never scale down;
// class-blind; stateless.
class GreedyPolicy : public Policy {
public:
    Action decide(const Env& env, const SliceRequest& request, const ActionMask& mask) override;
    std::string name() const override { return "greedy"; }
};

// Pure decision function: Accept iff demand fits free capacity.
Action greedy_decide(const ResourceVector& demand, const ResourceVector& free);

// Uniformly random choice among the legal actions; used by fuzz tests.
class RandomLegalPolicy : public Policy {
public:
    explicit RandomLegalPolicy(std::uint64_t seed) : rng_(seed) {}
    Action decide(const Env& env, const SliceRequest& request, const ActionMask& mask) override;
    std::string name() const override { return "random"; }

private:
    Rng rng_;
};

}  // namespace slicesim

#endif
