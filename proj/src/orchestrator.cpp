#include "slicesim/orchestrator.hpp"

#include <algorithm>
#include <set>

namespace slicesim::orch {

// ---------------------------------------------------------------------------
// Pareto filtering

namespace {

void check_compatible(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.values.size() != b.values.size() || a.senses != b.senses ||
        a.values.size() != a.senses.size()) {
        throw ConfigError("dominates: incompatible objective vectors");
    }
}

}  // namespace

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    check_compatible(a, b);
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double av = a.values[i];
        double bv = b.values[i];
        if (a.senses[i] == Sense::Minimize) {
            av = -av;
            bv = -bv;
        }
        if (av < bv) return false;
        if (av > bv) strictly_better = true;
    }
    return strictly_better;
}

std::vector<std::uint64_t> pareto_filter(
    const std::vector<std::pair<std::uint64_t, ObjectiveVector>>& candidates) {
    // Streaming skyline: keep the running non-dominated set; a new candidate
    // evicts members it dominates and is skipped if any member dominates it.
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const ObjectiveVector& v = candidates[i].second;
        bool dominated = false;
        for (std::size_t j : front) {
            if (dominates(candidates[j].second, v)) {
                dominated = true;
                break;
            }
        }
        if (dominated) continue;
        std::erase_if(front, [&](std::size_t j) { return dominates(v, candidates[j].second); });
        front.push_back(i);
    }
    std::sort(front.begin(), front.end());
    std::vector<std::uint64_t> ids;
    ids.reserve(front.size());
    for (std::size_t i : front) ids.push_back(candidates[i].first);
    return ids;
}

// ---------------------------------------------------------------------------
// CPU scheduling

namespace {

constexpr double kCpuEps = 1e-9;

void validate_slices(const std::vector<ScheduledSlice>& slices) {
    std::set<int> seen;
    for (const ScheduledSlice& s : slices) {
        if (!(s.cpu_demand_fraction > 0.0 && s.cpu_demand_fraction <= 1.0)) {
            throw ConfigError("slice " + std::to_string(s.slice_id) +
                              ": demand fraction must be in (0,1]");
        }
        if (s.start_slot >= s.end_slot) {
            throw ConfigError("slice " + std::to_string(s.slice_id) + ": window start must be < end");
        }
        if (!seen.insert(s.slice_id).second) {
            throw ConfigError("duplicate slice_id " + std::to_string(s.slice_id));
        }
    }
}

// Max occupancy of one CPU over [start, end), given the assigned slices.
double peak_occupancy(const std::vector<ScheduledSlice>& slices,
                      const std::map<int, int>& assignment, int cpu, std::int64_t start,
                      std::int64_t end) {
    // Occupancy is piecewise constant; it can only change at window starts,
    // so evaluating at each breakpoint inside [start, end) is exact.
    std::vector<std::int64_t> breakpoints{start};
    for (const ScheduledSlice& s : slices) {
        auto it = assignment.find(s.slice_id);
        if (it == assignment.end() || it->second != cpu) continue;
        if (s.start_slot > start && s.start_slot < end) breakpoints.push_back(s.start_slot);
    }
    double peak = 0.0;
    for (std::int64_t t : breakpoints) {
        double sum = 0.0;
        for (const ScheduledSlice& s : slices) {
            auto it = assignment.find(s.slice_id);
            if (it == assignment.end() || it->second != cpu) continue;
            if (s.start_slot <= t && t < s.end_slot) sum += s.cpu_demand_fraction;
        }
        peak = std::max(peak, sum);
    }
    return peak;
}

bool cpu_can_take(const std::vector<ScheduledSlice>& slices, const std::map<int, int>& assignment,
                  int cpu, const ScheduledSlice& candidate) {
    return peak_occupancy(slices, assignment, cpu, candidate.start_slot, candidate.end_slot) +
               candidate.cpu_demand_fraction <=
           1.0 + kCpuEps;
}

bool exact_search(const std::vector<ScheduledSlice>& slices, std::size_t next, int n_cpus,
                  std::map<int, int>& assignment) {
    if (next == slices.size()) return true;
    const ScheduledSlice& s = slices[next];
    for (int cpu = 0; cpu < n_cpus; ++cpu) {
        if (cpu_can_take(slices, assignment, cpu, s)) {
            assignment[s.slice_id] = cpu;
            if (exact_search(slices, next + 1, n_cpus, assignment)) return true;
            assignment.erase(s.slice_id);
        }
    }
    return false;
}

}  // namespace

std::optional<CpuSchedule> schedule_slices(const std::vector<ScheduledSlice>& slices, int n_cpus) {
    if (n_cpus < 1) throw ConfigError("schedule_slices: n_cpus must be >= 1");
    validate_slices(slices);

    std::vector<std::size_t> order(slices.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (slices[a].cpu_demand_fraction != slices[b].cpu_demand_fraction) {
            return slices[a].cpu_demand_fraction > slices[b].cpu_demand_fraction;
        }
        return slices[a].slice_id < slices[b].slice_id;
    });

    CpuSchedule schedule;
    schedule.n_cpus = n_cpus;
    bool ok = true;
    for (std::size_t i : order) {
        bool placed = false;
        for (int cpu = 0; cpu < n_cpus && !placed; ++cpu) {
            if (cpu_can_take(slices, schedule.assignment, cpu, slices[i])) {
                schedule.assignment[slices[i].slice_id] = cpu;
                placed = true;
            }
        }
        if (!placed) {
            ok = false;
            break;
        }
    }
    if (ok) return schedule;

    if (slices.size() <= 12) {
        CpuSchedule exact;
        exact.n_cpus = n_cpus;
        std::vector<ScheduledSlice> by_id = slices;
        std::sort(by_id.begin(), by_id.end(),
                  [](const ScheduledSlice& a, const ScheduledSlice& b) { return a.slice_id < b.slice_id; });
        if (exact_search(by_id, 0, n_cpus, exact.assignment)) return exact;
    }
    return std::nullopt;
}

bool schedule_is_valid(const std::vector<ScheduledSlice>& slices, const CpuSchedule& schedule) {
    for (const ScheduledSlice& s : slices) {
        auto it = schedule.assignment.find(s.slice_id);
        if (it == schedule.assignment.end()) return false;
        if (it->second < 0 || it->second >= schedule.n_cpus) return false;
    }
    for (int cpu = 0; cpu < schedule.n_cpus; ++cpu) {
        for (const ScheduledSlice& s : slices) {
            auto it = schedule.assignment.find(s.slice_id);
            if (it->second != cpu) continue;
            double sum = 0.0;
            for (const ScheduledSlice& o : slices) {
                if (schedule.assignment.at(o.slice_id) != cpu) continue;
                if (o.start_slot <= s.start_slot && s.start_slot < o.end_slot) {
                    sum += o.cpu_demand_fraction;
                }
            }
            if (sum > 1.0 + kCpuEps) return false;
        }
    }
    return true;
}

std::optional<int> first_fit_cpu(const std::vector<ScheduledSlice>& slices,
                                 const CpuSchedule& schedule, int n_cpus, double demand_fraction,
                                 std::int64_t start_slot, std::int64_t end_slot) {
    if (!(demand_fraction > 0.0 && demand_fraction <= 1.0)) {
        throw ConfigError("probe demand fraction must be in (0,1]");
    }
    if (start_slot >= end_slot) throw ConfigError("probe window start must be < end");
    for (int cpu = 0; cpu < n_cpus; ++cpu) {
        double peak = peak_occupancy(slices, schedule.assignment, cpu, start_slot, end_slot);
        if (peak + demand_fraction <= 1.0 + kCpuEps) return cpu;
    }
    return std::nullopt;
}

bool can_accommodate(const std::vector<ScheduledSlice>& slices, const CpuSchedule& schedule,
                     int n_cpus, double demand_fraction, std::int64_t start_slot,
                     std::int64_t end_slot) {
    return first_fit_cpu(slices, schedule, n_cpus, demand_fraction, start_slot, end_slot)
        .has_value();
}

std::vector<std::vector<double>> cpu_utilization_series(const std::vector<ScheduledSlice>& slices,
                                                        const CpuSchedule& schedule,
                                                        std::int64_t first, std::int64_t last) {
    std::vector<std::vector<double>> series;
    for (std::int64_t t = first; t < last; ++t) {
        std::vector<double> row(static_cast<std::size_t>(schedule.n_cpus), 0.0);
        for (const ScheduledSlice& s : slices) {
            auto it = schedule.assignment.find(s.slice_id);
            if (it == schedule.assignment.end()) continue;
            if (s.start_slot <= t && t < s.end_slot) {
                row[static_cast<std::size_t>(it->second)] += s.cpu_demand_fraction;
            }
        }
        series.push_back(std::move(row));
    }
    return series;
}

// ---------------------------------------------------------------------------
// NSI / NSSI sharing

ResourceVector NssiRecord::allocated() const {
    ResourceVector total = ResourceVector::zeros(nssi.capacity.dims());
    for (const auto& [nsi_id, share] : shares) total += share;
    return total;
}

ResourceVector NssiRecord::free_capacity() const {
    ResourceVector f = nssi.capacity - allocated();
    f.clamp_non_negative();
    return f;
}

const NssiRecord* Inventory::find_nssi(std::uint64_t id) const {
    for (const NssiRecord& r : nssis) {
        if (r.nssi.nssi_id == id) return &r;
    }
    return nullptr;
}

NssiRecord* Inventory::find_nssi(std::uint64_t id) {
    for (NssiRecord& r : nssis) {
        if (r.nssi.nssi_id == id) return &r;
    }
    return nullptr;
}

const NsiRecord* Inventory::find_nsi(std::uint64_t id) const {
    for (const NsiRecord& r : nsis) {
        if (r.nsi_id == id) return &r;
    }
    return nullptr;
}

NsiRecord* Inventory::find_nsi(std::uint64_t id) {
    for (NsiRecord& r : nsis) {
        if (r.nsi_id == id) return &r;
    }
    return nullptr;
}

std::uint64_t Inventory::next_nssi_id() const {
    std::uint64_t next = 1;
    for (const NssiRecord& r : nssis) next = std::max(next, r.nssi.nssi_id + 1);
    return next;
}

std::uint64_t Inventory::next_nsi_id() const {
    std::uint64_t next = 1;
    for (const NsiRecord& r : nsis) next = std::max(next, r.nsi_id + 1);
    return next;
}

void Inventory::check_invariants() const {
    for (const NssiRecord& r : nssis) {
        if (!r.allocated().all_leq(r.nssi.capacity)) {
            throw ContractViolation("NSSI " + std::to_string(r.nssi.nssi_id) +
                                    ": attached shares exceed capacity");
        }
        if (!r.nssi.shareable && r.nssi.attached_nsis.size() > 1) {
            throw ContractViolation("NSSI " + std::to_string(r.nssi.nssi_id) +
                                    ": non-shareable but attached to multiple NSIs");
        }
        if (r.shares.size() != r.nssi.attached_nsis.size()) {
            throw ContractViolation("NSSI " + std::to_string(r.nssi.nssi_id) +
                                    ": shares and attachment list disagree");
        }
        for (const auto& [nsi_id, share] : r.shares) {
            if (find_nsi(nsi_id) == nullptr) {
                throw ContractViolation("NSSI " + std::to_string(r.nssi.nssi_id) +
                                        ": share for unknown NSI " + std::to_string(nsi_id));
            }
        }
    }
    for (const NsiRecord& n : nsis) {
        for (std::uint64_t nssi_id : n.constituent_nssis) {
            if (find_nssi(nssi_id) == nullptr) {
                throw ContractViolation("NSI " + std::to_string(n.nsi_id) +
                                        ": unknown constituent NSSI " + std::to_string(nssi_id));
            }
        }
    }
}

namespace {

std::vector<RequiredKind> dedupe_kinds(const std::vector<RequiredKind>& kinds) {
    std::vector<RequiredKind> out;
    for (const RequiredKind& k : kinds) {
        if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    return out;
}

void check_known_kinds(const NetworkRequirements& requirements, const Inventory& inventory) {
    for (const RequiredKind& k : requirements.required_nssi_kinds) {
        if (std::find(inventory.known_kinds.begin(), inventory.known_kinds.end(), k) ==
            inventory.known_kinds.end()) {
            throw ConfigError(std::string("unknown NSSI kind '") + to_string(k.segment) + ":" +
                              k.kind_tag + "' in requirements");
        }
    }
}

bool nsi_covers_kinds(const NsiRecord& nsi, const Inventory& inventory,
                      const std::vector<RequiredKind>& kinds) {
    for (const RequiredKind& k : kinds) {
        bool found = false;
        for (std::uint64_t nssi_id : nsi.constituent_nssis) {
            const NssiRecord* r = inventory.find_nssi(nssi_id);
            if (r && r->nssi.segment == k.segment && r->nssi.kind_tag == k.kind_tag) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

// Reuse compatibility: kind coverage, performance floor, and headroom for
// the added demand on every constituent NSSI (each constituent carries the
// slice's full demand).
bool nsi_compatible(const NsiRecord& nsi, const Inventory& inventory,
                    const NetworkRequirements& req) {
    if (nsi.performance < req.performance_floor) return false;
    if (!nsi_covers_kinds(nsi, inventory, req.required_nssi_kinds)) return false;
    for (std::uint64_t nssi_id : nsi.constituent_nssis) {
        const NssiRecord* r = inventory.find_nssi(nssi_id);
        if (!r || !fits(req.demand, r->free_capacity())) return false;
    }
    return true;
}

AllocationDecision allocate_nsi_excluding(const NetworkRequirements& requirements,
                                          const Inventory& inventory, const PolicyFlags& flags,
                                          std::optional<std::uint64_t> excluded_nsi) {
    check_known_kinds(requirements, inventory);
    const std::vector<RequiredKind> kinds = dedupe_kinds(requirements.required_nssi_kinds);

    // (1) Re-use an existing NSI.
    if (flags.allow_nsi_reuse && requirements.sharing_allowed) {
        std::vector<const NsiRecord*> candidates;
        for (const NsiRecord& n : inventory.nsis) candidates.push_back(&n);
        std::sort(candidates.begin(), candidates.end(),
                  [](const NsiRecord* a, const NsiRecord* b) { return a->nsi_id < b->nsi_id; });
        for (const NsiRecord* n : candidates) {
            if (excluded_nsi && n->nsi_id == *excluded_nsi) continue;
            if (nsi_compatible(*n, inventory, requirements)) {
                AllocationDecision d;
                d.kind = AllocationDecision::Kind::ReuseNsi;
                d.nsi_id = n->nsi_id;
                return d;
            }
        }
    }

    // (2) Create a new NSI, sharing sharable NSSIs where allowed.
    SliceBlueprint blueprint;
    blueprint.template_id = -1;
    blueprint.constituents = kinds;
    {
        // Pick the covering template with the fewest extra kinds, ties by id.
        const SliceTemplate* best = nullptr;
        std::size_t best_extra = 0;
        for (const SliceTemplate& t : inventory.templates) {
            std::vector<RequiredKind> tkinds = dedupe_kinds(t.kinds);
            bool covers = true;
            for (const RequiredKind& k : kinds) {
                if (std::find(tkinds.begin(), tkinds.end(), k) == tkinds.end()) {
                    covers = false;
                    break;
                }
            }
            if (!covers) continue;
            std::size_t extra = tkinds.size() - kinds.size();
            if (!best || extra < best_extra ||
                (extra == best_extra && t.template_id < best->template_id)) {
                best = &t;
                best_extra = extra;
            }
        }
        if (best) {
            blueprint.template_id = best->template_id;
            blueprint.constituents = dedupe_kinds(best->kinds);
        }
    }

    const bool may_share_nssi = flags.allow_nssi_sharing && requirements.sharing_allowed;
    ResourceVector new_total = ResourceVector::zeros(requirements.demand.dims());
    for (const RequiredKind& k : blueprint.constituents) {
        const NssiRecord* reusable = nullptr;
        if (may_share_nssi) {
            for (const NssiRecord& r : inventory.nssis) {
                if (r.nssi.segment != k.segment || r.nssi.kind_tag != k.kind_tag) continue;
                if (!r.nssi.shareable) continue;
                if (!fits(requirements.demand, r.free_capacity())) continue;
                bool already = std::find(blueprint.reused_nssi_ids.begin(),
                                         blueprint.reused_nssi_ids.end(),
                                         r.nssi.nssi_id) != blueprint.reused_nssi_ids.end();
                if (already) continue;
                if (!reusable || r.nssi.nssi_id < reusable->nssi.nssi_id) reusable = &r;
            }
        }
        if (reusable) {
            blueprint.reused_nssi_ids.push_back(reusable->nssi.nssi_id);
        } else {
            NssiSpec spec;
            spec.segment = k.segment;
            spec.kind_tag = k.kind_tag;
            spec.capacity = requirements.demand;
            spec.shareable = requirements.sharing_allowed;
            new_total += spec.capacity;
            blueprint.new_nssi_specs.push_back(std::move(spec));
        }
    }
    if (fits(new_total, inventory.pool.free())) {
        AllocationDecision d;
        d.kind = AllocationDecision::Kind::CreateNsi;
        d.blueprint = std::move(blueprint);
        return d;
    }

    // (3) Nothing works.
    AllocationDecision d;
    d.kind = AllocationDecision::Kind::Infeasible;
    return d;
}

}  // namespace

AllocationDecision allocate_nsi(const NetworkRequirements& requirements, const Inventory& inventory,
                                const PolicyFlags& flags) {
    return allocate_nsi_excluding(requirements, inventory, flags, std::nullopt);
}

UpdateDecision update_requirements(std::uint64_t nsi_id, const NetworkRequirements& new_requirements,
                                   const Inventory& inventory, const PolicyFlags& flags) {
    const NsiRecord* nsi = inventory.find_nsi(nsi_id);
    if (!nsi) {
        throw NotFoundError("update_requirements: unknown NSI " + std::to_string(nsi_id));
    }
    check_known_kinds(new_requirements, inventory);
    const std::vector<RequiredKind> kinds = dedupe_kinds(new_requirements.required_nssi_kinds);

    const bool covers = nsi_covers_kinds(*nsi, inventory, kinds);
    const bool perf_ok = nsi->performance >= new_requirements.performance_floor;

    // (1) Current NSI already supports the new requirements.
    if (covers && perf_ok && new_requirements.demand.all_leq(nsi->demand)) {
        UpdateDecision d;
        d.kind = UpdateDecision::Kind::NoChange;
        return d;
    }

    // (2) Reconfigure constituent NSSIs: grow in place when capacity allows,
    // otherwise replace the constituent with a new unshared NSSI.
    if (covers && perf_ok) {
        UpdateDecision d;
        d.kind = UpdateDecision::Kind::Reconfigure;
        ResourceVector new_pool_total = ResourceVector::zeros(new_requirements.demand.dims());
        bool feasible = true;
        for (std::uint64_t nssi_id : nsi->constituent_nssis) {
            const NssiRecord* r = inventory.find_nssi(nssi_id);
            if (!r) {
                feasible = false;
                break;
            }
            const ResourceVector& old_share =
                r->shares.count(nsi_id) ? r->shares.at(nsi_id) : ResourceVector::zeros(r->nssi.capacity.dims());
            if (new_requirements.demand.all_leq(old_share) &&
                old_share.all_leq(new_requirements.demand)) {
                continue;  // share unchanged
            }
            ResourceVector others = r->allocated() - old_share;
            others.clamp_non_negative();
            if (fits(new_requirements.demand + others, r->nssi.capacity)) {
                d.plan.push_back(GrowAction{nssi_id, new_requirements.demand});
            } else {
                NssiSpec spec;
                spec.segment = r->nssi.segment;
                spec.kind_tag = r->nssi.kind_tag;
                spec.capacity = new_requirements.demand;
                spec.shareable = false;
                new_pool_total += spec.capacity;
                d.plan.push_back(ReplaceAction{nssi_id, std::move(spec)});
            }
        }
        if (feasible && fits(new_pool_total, inventory.pool.free())) {
            return d;
        }
    }

    // (3) Migrate onto alternative resources.
    AllocationDecision target =
        allocate_nsi_excluding(new_requirements, inventory, flags, nsi_id);
    if (target.kind != AllocationDecision::Kind::Infeasible) {
        UpdateDecision d;
        d.kind = UpdateDecision::Kind::Migrate;
        d.migrate_target = std::move(target);
        return d;
    }

    UpdateDecision d;
    d.kind = UpdateDecision::Kind::Infeasible;
    return d;
}

const NetworkRequirements& translate_service_request(const std::string& service_profile_id,
                                                     const Inventory& catalog_holder) {
    auto it = catalog_holder.catalog.find(service_profile_id);
    if (it == catalog_holder.catalog.end()) {
        throw NotFoundError("unknown service profile '" + service_profile_id + "'");
    }
    return it->second;
}

namespace {

void attach_share(NssiRecord& r, std::uint64_t nsi_id, const ResourceVector& share) {
    r.shares[nsi_id] = share;
    if (std::find(r.nssi.attached_nsis.begin(), r.nssi.attached_nsis.end(), nsi_id) ==
        r.nssi.attached_nsis.end()) {
        r.nssi.attached_nsis.push_back(nsi_id);
    }
}

void detach_share(NssiRecord& r, std::uint64_t nsi_id) {
    r.shares.erase(nsi_id);
    std::erase(r.nssi.attached_nsis, nsi_id);
}

}  // namespace

std::uint64_t apply_allocation(Inventory& inventory, const NetworkRequirements& requirements,
                               const AllocationDecision& decision) {
    switch (decision.kind) {
        case AllocationDecision::Kind::Infeasible:
            throw ContractViolation("apply_allocation: decision is infeasible");
        case AllocationDecision::Kind::ReuseNsi: {
            NsiRecord* nsi = inventory.find_nsi(decision.nsi_id);
            if (!nsi) throw NotFoundError("apply_allocation: unknown NSI");
            nsi->demand += requirements.demand;
            for (std::uint64_t nssi_id : nsi->constituent_nssis) {
                NssiRecord* r = inventory.find_nssi(nssi_id);
                attach_share(*r, nsi->nsi_id, r->shares.at(nsi->nsi_id) + requirements.demand);
            }
            inventory.check_invariants();
            return nsi->nsi_id;
        }
        case AllocationDecision::Kind::CreateNsi: {
            NsiRecord nsi;
            nsi.nsi_id = inventory.next_nsi_id();
            nsi.demand = requirements.demand;
            nsi.performance = requirements.performance_floor;
            for (std::uint64_t reused : decision.blueprint.reused_nssi_ids) {
                NssiRecord* r = inventory.find_nssi(reused);
                if (!r) throw NotFoundError("apply_allocation: unknown reused NSSI");
                attach_share(*r, nsi.nsi_id, requirements.demand);
                nsi.constituent_nssis.push_back(reused);
            }
            for (const NssiSpec& spec : decision.blueprint.new_nssi_specs) {
                inventory.pool.allocate(spec.capacity);
                NssiRecord r;
                r.nssi.nssi_id = inventory.next_nssi_id();
                r.nssi.segment = spec.segment;
                r.nssi.kind_tag = spec.kind_tag;
                r.nssi.capacity = spec.capacity;
                r.nssi.shareable = spec.shareable;
                attach_share(r, nsi.nsi_id, requirements.demand);
                nsi.constituent_nssis.push_back(r.nssi.nssi_id);
                inventory.nssis.push_back(std::move(r));
            }
            std::uint64_t id = nsi.nsi_id;
            inventory.nsis.push_back(std::move(nsi));
            inventory.check_invariants();
            return id;
        }
    }
    throw ContractViolation("apply_allocation: unreachable");
}

void apply_update(Inventory& inventory, std::uint64_t nsi_id,
                  const NetworkRequirements& new_requirements, const UpdateDecision& decision) {
    NsiRecord* nsi = inventory.find_nsi(nsi_id);
    if (!nsi) throw NotFoundError("apply_update: unknown NSI");
    switch (decision.kind) {
        case UpdateDecision::Kind::Infeasible:
            throw ContractViolation("apply_update: decision is infeasible");
        case UpdateDecision::Kind::NoChange:
            return;
        case UpdateDecision::Kind::Reconfigure: {
            for (const ReconfigureAction& action : decision.plan) {
                if (const GrowAction* grow = std::get_if<GrowAction>(&action)) {
                    NssiRecord* r = inventory.find_nssi(grow->nssi_id);
                    if (!r) throw NotFoundError("apply_update: unknown NSSI in plan");
                    attach_share(*r, nsi_id, grow->new_share);
                } else {
                    const ReplaceAction& rep = std::get<ReplaceAction>(action);
                    NssiRecord* old_r = inventory.find_nssi(rep.old_nssi_id);
                    if (!old_r) throw NotFoundError("apply_update: unknown NSSI in plan");
                    detach_share(*old_r, nsi_id);
                    inventory.pool.allocate(rep.spec.capacity);
                    NssiRecord r;
                    r.nssi.nssi_id = inventory.next_nssi_id();
                    r.nssi.segment = rep.spec.segment;
                    r.nssi.kind_tag = rep.spec.kind_tag;
                    r.nssi.capacity = rep.spec.capacity;
                    r.nssi.shareable = rep.spec.shareable;
                    attach_share(r, nsi_id, new_requirements.demand);
                    std::replace(nsi->constituent_nssis.begin(), nsi->constituent_nssis.end(),
                                 rep.old_nssi_id, r.nssi.nssi_id);
                    inventory.nssis.push_back(std::move(r));
                }
            }
            nsi->demand = new_requirements.demand;
            inventory.check_invariants();
            return;
        }
        case UpdateDecision::Kind::Migrate: {
            // Release the old NSI's reservations, then allocate the target.
            for (std::uint64_t nssi_id : nsi->constituent_nssis) {
                NssiRecord* r = inventory.find_nssi(nssi_id);
                if (r) detach_share(*r, nsi_id);
            }
            std::erase_if(inventory.nsis, [&](const NsiRecord& n) { return n.nsi_id == nsi_id; });
            apply_allocation(inventory, new_requirements, decision.migrate_target);
            return;
        }
    }
}

}  // namespace slicesim::orch
