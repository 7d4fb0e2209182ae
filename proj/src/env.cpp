#include "slicesim/env.hpp"

#include <algorithm>
#include <cmath>

namespace slicesim {

const char* to_string(Action a) {
    switch (a) {
        case Action::Accept: return "accept";
        case Action::Reject: return "reject";
        case Action::ScaleDownAndAccept: return "scale_down_accept";
    }
    return "?";
}

std::vector<SliceRequest> sample_arrivals(Rng& rng, const std::vector<SliceTypeSpec>& specs,
                                          std::int64_t slot, std::uint64_t& next_request_id) {
    std::vector<SliceRequest> out;
    for (const SliceTypeSpec& t : specs) {
        if (rng.bernoulli(t.arrival_prob)) {
            SliceRequest r;
            r.request_id = next_request_id++;
            r.type_id = t.type_id;
            r.arrival_slot = slot;
            r.remaining_patience = t.patience_slots;
            out.push_back(r);
        }
    }
    return out;
}

std::vector<std::uint64_t> sample_departures(Rng& rng,
                                             const std::vector<NetworkSliceInstance>& active,
                                             const Scenario& scenario) {
    std::vector<std::uint64_t> out;
    for (const NetworkSliceInstance& nsi : active) {
        if (rng.bernoulli(scenario.type(nsi.type_id).departure_prob)) {
            out.push_back(nsi.nsi_id);
        }
    }
    return out;
}

std::optional<std::vector<ScaleDownStep>> compute_scale_down_plan(
    const std::vector<NetworkSliceInstance>& active, const Scenario& scenario,
    const ResourceVector& free, const ResourceVector& incoming_demand) {
    const std::size_t dims = incoming_demand.dims();
    std::vector<double> shortfall(dims, 0.0);
    bool any_short = false;
    for (std::size_t d = 0; d < dims; ++d) {
        double s = incoming_demand[d] - free[d];
        if (s > kResourceEps) {
            shortfall[d] = s;
            any_short = true;
        }
    }
    if (!any_short) return std::vector<ScaleDownStep>{};

    // Victim order: BE instances by allocation L1 descending, then nsi_id.
    std::vector<const NetworkSliceInstance*> victims;
    for (const NetworkSliceInstance& nsi : active) {
        const SliceTypeSpec& t = scenario.type(nsi.type_id);
        if (t.slice_class != SliceClass::BestEffort) continue;
        if (nsi.scale_fraction <= t.min_fraction + 1e-12) continue;
        victims.push_back(&nsi);
    }
    std::sort(victims.begin(), victims.end(),
              [&](const NetworkSliceInstance* a, const NetworkSliceInstance* b) {
                  double la = a->allocation(scenario.type(a->type_id)).l1_norm();
                  double lb = b->allocation(scenario.type(b->type_id)).l1_norm();
                  if (la != lb) return la > lb;
                  return a->nsi_id < b->nsi_id;
              });

    std::vector<ScaleDownStep> plan;
    for (const NetworkSliceInstance* v : victims) {
        const SliceTypeSpec& t = scenario.type(v->type_id);
        // Smallest fraction delta that closes the remaining shortfall alone.
        double needed_delta = 0.0;
        bool coverable = true;
        for (std::size_t d = 0; d < dims; ++d) {
            if (shortfall[d] <= kResourceEps) continue;
            if (t.demand[d] <= 0.0) {
                coverable = false;
                break;
            }
            needed_delta = std::max(needed_delta, shortfall[d] / t.demand[d]);
        }
        const double max_delta = v->scale_fraction - t.min_fraction;
        if (coverable && needed_delta <= max_delta + 1e-12) {
            double new_fraction = std::max(v->scale_fraction - needed_delta, t.min_fraction);
            plan.push_back({v->nsi_id, new_fraction});
            return plan;
        }
        // Scale fully to min_fraction and keep going.
        plan.push_back({v->nsi_id, t.min_fraction});
        for (std::size_t d = 0; d < dims; ++d) {
            shortfall[d] -= t.demand[d] * max_delta;
        }
    }
    for (std::size_t d = 0; d < dims; ++d) {
        if (shortfall[d] > kResourceEps) return std::nullopt;
    }
    return plan;
}

Env::Env(const Scenario& scenario, std::uint64_t seed)
    : scenario_(&scenario),
      rng_(derive_seed(seed, "env")),
      pool_(scenario.capacity),
      active_by_type_(scenario.types.size(), 0),
      util_sum_(scenario.dims(), 0.0) {}

int Env::active_count(int type_id) const {
    return active_by_type_[scenario_->type_index(type_id)];
}

int Env::scalable_be_count() const {
    int n = 0;
    for (const NetworkSliceInstance& nsi : active_) {
        const SliceTypeSpec& t = scenario_->type(nsi.type_id);
        if (t.slice_class == SliceClass::BestEffort &&
            nsi.scale_fraction > t.min_fraction + 1e-12) {
            ++n;
        }
    }
    return n;
}

int Env::queued_waiting(SliceClass c, bool exclude_head) const {
    int n = 0;
    for (std::size_t i = exclude_head ? 1 : 0; i < queue_.size(); ++i) {
        if (scenario_->type(queue_[i].type_id).slice_class == c) ++n;
    }
    return n;
}

ActionMask Env::legal_actions(const SliceRequest& request) const {
    const SliceTypeSpec& t = scenario_->type(request.type_id);
    ActionMask mask;
    mask.accept = fits(t.demand, pool_.free());
    if (!mask.accept) {
        mask.scale_down =
            compute_scale_down_plan(active_, *scenario_, pool_.free(), t.demand).has_value();
    }
    return mask;
}

void Env::record(std::string event, int type_id, std::uint64_t id, double value) {
    if (!trace_enabled_) return;
    trace_.push_back({slot_, std::move(event), type_id, id, value});
}

void Env::release_instance(std::size_t index) {
    const NetworkSliceInstance& nsi = active_[index];
    const SliceTypeSpec& t = scenario_->type(nsi.type_id);
    pool_.release(nsi.allocation(t));
    active_by_type_[scenario_->type_index(nsi.type_id)]--;
    active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(index));
}

double Env::apply_action(const SliceRequest& request, Action action) {
    const SliceTypeSpec& t = scenario_->type(request.type_id);
    const bool is_gs = t.slice_class == SliceClass::GuaranteedService;
    ClassCounters& counters = is_gs ? gs_ : be_;
    const RewardParams& rw = scenario_->rewards;

    switch (action) {
        case Action::Reject: {
            counters.rejected++;
            double reward = is_gs ? rw.drop_gs : rw.drop_be;
            record("reject", request.type_id, request.request_id, reward);
            return reward;
        }
        case Action::Accept: {
            if (!fits(t.demand, pool_.free())) {
                throw ContractViolation("apply_action: Accept for a non-fitting demand (request " +
                                        std::to_string(request.request_id) + ")");
            }
            NetworkSliceInstance nsi;
            nsi.nsi_id = next_nsi_id_++;
            nsi.type_id = request.type_id;
            nsi.scale_fraction = 1.0;
            nsi.admitted_slot = slot_;
            pool_.allocate(nsi.allocation(t));
            active_by_type_[scenario_->type_index(request.type_id)]++;
            active_.push_back(std::move(nsi));
            counters.accepted++;
            double reward = is_gs ? rw.accept_gs : rw.accept_be;
            record("accept", request.type_id, request.request_id, reward);
            return reward;
        }
        case Action::ScaleDownAndAccept: {
            auto plan = compute_scale_down_plan(active_, *scenario_, pool_.free(), t.demand);
            if (!plan.has_value()) {
                throw ContractViolation(
                    "apply_action: ScaleDownAndAccept without a feasible plan (request " +
                    std::to_string(request.request_id) + ")");
            }
            double reward = is_gs ? rw.accept_gs : rw.accept_be;
            for (const ScaleDownStep& step : *plan) {
                auto it = std::find_if(active_.begin(), active_.end(),
                                       [&](const NetworkSliceInstance& n) {
                                           return n.nsi_id == step.nsi_id;
                                       });
                const SliceTypeSpec& vt = scenario_->type(it->type_id);
                ResourceVector freed = vt.demand.scaled(it->scale_fraction - step.new_fraction);
                pool_.release(freed);
                it->scale_fraction = step.new_fraction;
                scale_down_events_++;
                reward += rw.scaledown_penalty;
                record("scale_down", it->type_id, it->nsi_id, step.new_fraction);
            }
            NetworkSliceInstance nsi;
            nsi.nsi_id = next_nsi_id_++;
            nsi.type_id = request.type_id;
            nsi.scale_fraction = 1.0;
            nsi.admitted_slot = slot_;
            pool_.allocate(nsi.allocation(t));
            active_by_type_[scenario_->type_index(request.type_id)]++;
            active_.push_back(std::move(nsi));
            counters.accepted++;
            record("accept", request.type_id, request.request_id, reward);
            return reward;
        }
    }
    throw ContractViolation("apply_action: unknown action");
}

double Env::step(Policy& policy) {
    double slot_reward = 0.0;

    // (1) Departures release capacity before anything else, so it is visible
    // to this slot's admissions.
    {
        std::vector<std::uint64_t> departed = sample_departures(rng_, active_, *scenario_);
        for (std::uint64_t id : departed) {
            auto it = std::find_if(active_.begin(), active_.end(),
                                   [&](const NetworkSliceInstance& n) { return n.nsi_id == id; });
            record("departure", it->type_id, id, 0.0);
            release_instance(static_cast<std::size_t>(it - active_.begin()));
        }
    }

    // (2) Arrivals enqueue; overflow drops immediately.
    {
        std::vector<SliceRequest> arrivals =
            sample_arrivals(rng_, scenario_->types, slot_, next_request_id_);
        for (SliceRequest& r : arrivals) {
            const SliceTypeSpec& t = scenario_->type(r.type_id);
            const bool is_gs = t.slice_class == SliceClass::GuaranteedService;
            ClassCounters& counters = is_gs ? gs_ : be_;
            counters.generated++;
            record("arrival", r.type_id, r.request_id, 0.0);
            if (static_cast<int>(queue_.size()) >= scenario_->queue_capacity) {
                counters.overflow_dropped++;
                double reward = is_gs ? scenario_->rewards.drop_gs : scenario_->rewards.drop_be;
                slot_reward += reward;
                record("overflow", r.type_id, r.request_id, reward);
            } else {
                queue_.push_back(std::move(r));
            }
        }
    }

    // (3) Head-first admission round: the policy is consulted once per
    // request; an admit pops and continues, a Reject pops and ends the round
    // (capacity cannot improve within the slot, so the rest wait and age).
    while (!queue_.empty()) {
        SliceRequest head = queue_.front();
        ActionMask mask = legal_actions(head);
        Action action = policy.decide(*this, head, mask);
        if (!mask.legal(action)) {
            throw ContractViolation(std::string("policy returned illegal action ") +
                                    to_string(action));
        }
        queue_.pop_front();
        double reward = apply_action(head, action);
        slot_reward += reward;
        policy.decision_reward(reward);
        if (action == Action::Reject) break;
    }

    // (4) Remaining requests age; patience 0 after aging means expiry.
    {
        std::deque<SliceRequest> kept;
        for (SliceRequest& r : queue_) {
            if (r.remaining_patience > 0) r.remaining_patience--;
            if (r.remaining_patience == 0) {
                const SliceTypeSpec& t = scenario_->type(r.type_id);
                const bool is_gs = t.slice_class == SliceClass::GuaranteedService;
                (is_gs ? gs_ : be_).expired++;
                double reward = is_gs ? scenario_->rewards.drop_gs : scenario_->rewards.drop_be;
                slot_reward += reward;
                record("expire", r.type_id, r.request_id, reward);
            } else {
                kept.push_back(std::move(r));
            }
        }
        queue_ = std::move(kept);
    }

    // (5) Utility accrues for everything active at slot end, proportional to
    // the scale fraction.
    {
        double slot_utility = 0.0;
        for (const NetworkSliceInstance& nsi : active_) {
            slot_utility += scenario_->type(nsi.type_id).utility_rate * nsi.scale_fraction;
        }
        total_utility_ += slot_utility;
        std::vector<double> u = utilization(pool_);
        for (std::size_t d = 0; d < u.size(); ++d) util_sum_[d] += u[d];
    }

    cumulative_reward_ += slot_reward;
    slot_++;
    return slot_reward;
}

EpisodeMetrics Env::metrics(std::int64_t horizon_slots) const {
    EpisodeMetrics m;
    m.be = be_;
    m.gs = gs_;
    for (const SliceRequest& r : queue_) {
        const SliceTypeSpec& t = scenario_->type(r.type_id);
        (t.slice_class == SliceClass::GuaranteedService ? m.gs : m.be).still_queued++;
    }
    m.cumulative_reward = cumulative_reward_;
    m.scale_down_events = scale_down_events_;
    m.mean_utilization.resize(util_sum_.size());
    for (std::size_t d = 0; d < util_sum_.size(); ++d) {
        m.mean_utilization[d] =
            horizon_slots > 0 ? util_sum_[d] / static_cast<double>(horizon_slots) : 0.0;
    }
    m.finalize(total_utility_, horizon_slots, scenario_->u_max());
    return m;
}

void Env::check_invariants() const {
    if (!pool_.allocated().all_leq(pool_.capacity())) {
        throw ContractViolation("env: pool allocated exceeds capacity");
    }
    ResourceVector sum = ResourceVector::zeros(scenario_->dims());
    for (const NetworkSliceInstance& nsi : active_) {
        const SliceTypeSpec& t = scenario_->type(nsi.type_id);
        if (nsi.scale_fraction < t.min_fraction - 1e-12 || nsi.scale_fraction > 1.0 + 1e-12) {
            throw ContractViolation("env: scale fraction out of [min_fraction, 1]");
        }
        if (t.slice_class == SliceClass::GuaranteedService && nsi.scale_fraction != 1.0) {
            throw ContractViolation("env: GS instance was scaled");
        }
        sum += nsi.allocation(t);
    }
    ResourceVector diff = sum - pool_.allocated();
    for (std::size_t d = 0; d < diff.dims(); ++d) {
        if (std::abs(diff[d]) > 1e-6) {
            throw ContractViolation("env: active allocations and pool.allocated disagree");
        }
    }
    if (static_cast<int>(queue_.size()) > scenario_->queue_capacity) {
        throw ContractViolation("env: queue over capacity");
    }
    // Per-class conservation at the current slot.
    std::uint64_t queued_gs = 0;
    std::uint64_t queued_be = 0;
    for (const SliceRequest& r : queue_) {
        (scenario_->type(r.type_id).slice_class == SliceClass::GuaranteedService ? queued_gs
                                                                                 : queued_be)++;
    }
    if (gs_.generated != gs_.accepted + gs_.rejected + gs_.expired + gs_.overflow_dropped + queued_gs ||
        be_.generated != be_.accepted + be_.rejected + be_.expired + be_.overflow_dropped + queued_be) {
        throw ContractViolation("env: per-class conservation identity broken");
    }
}

EpisodeMetrics run_episode(const Scenario& scenario, Policy& policy, std::uint64_t seed,
                           std::int64_t horizon_slots, std::vector<TraceEvent>* trace_out) {
    if (horizon_slots < 1) throw ConfigError("run_episode: horizon_slots must be >= 1");
    Env env(scenario, seed);
    if (trace_out) env.enable_trace();
    for (std::int64_t s = 0; s < horizon_slots; ++s) env.step(policy);
    policy.episode_end();
    if (trace_out) *trace_out = env.trace();
    return env.metrics(horizon_slots);
}

Action greedy_decide(const ResourceVector& demand, const ResourceVector& free) {
    return fits(demand, free) ? Action::Accept : Action::Reject;
}

Action GreedyPolicy::decide(const Env& env, const SliceRequest& request, const ActionMask&) {
    const SliceTypeSpec& t = env.scenario().type(request.type_id);
    return greedy_decide(t.demand, env.pool().free());
}

Action RandomLegalPolicy::decide(const Env&, const SliceRequest&, const ActionMask& mask) {
    std::vector<Action> legal;
    for (Action a : {Action::Accept, Action::Reject, Action::ScaleDownAndAccept}) {
        if (mask.legal(a)) legal.push_back(a);
    }
    return legal[static_cast<std::size_t>(rng_.uniform_int(legal.size()))];
}

}  // namespace slicesim
