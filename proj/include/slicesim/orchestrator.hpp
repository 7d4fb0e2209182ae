#ifndef SLICESIM_ORCHESTRATOR_HPP
#define SLICESIM_ORCHESTRATOR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "slicesim/core.hpp"

namespace slicesim::orch {

// ---------------------------------------------------------------------------
// Multi-objective filtering

enum class Sense { Maximize, Minimize };

struct ObjectiveVector {
    std::vector<double> values;
    std::vector<Sense> senses;
};

// true iff a is at least as good as b in every objective and strictly
// better in at least one. Throws ConfigError on incompatible vectors.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Exactly the non-dominated candidates, in input order. Duplicate vectors
// are all retained.
std::vector<std::uint64_t> pareto_filter(
    const std::vector<std::pair<std::uint64_t, ObjectiveVector>>& candidates);

// ---------------------------------------------------------------------------
// Slice-to-CPU scheduling (one CPU per slice, no splitting)

struct ScheduledSlice {
    int slice_id = 0;
    double cpu_demand_fraction = 0.0;  // in (0,1]
    std::int64_t start_slot = 0;       // half-open window [start, end)
    std::int64_t end_slot = 0;
};

struct CpuSchedule {
    std::map<int, int> assignment;  // slice_id -> cpu index (0-based, label cpu1..cpuN)
    int n_cpus = 0;
};

// First-fit-decreasing by demand fraction (ties by slice_id), CPUs tried in
// label order. Instances with <= 12 slices fall back to an exact search
// before giving up.
std::optional<CpuSchedule> schedule_slices(const std::vector<ScheduledSlice>& slices, int n_cpus);

// Re-checks the per-slot sum <= 1 invariant on every CPU, independently of
// how the schedule was built.
bool schedule_is_valid(const std::vector<ScheduledSlice>& slices, const CpuSchedule& schedule);

// First CPU (label order) with >= demand_fraction headroom at every slot of
// the window, if any.
std::optional<int> first_fit_cpu(const std::vector<ScheduledSlice>& slices,
                                 const CpuSchedule& schedule, int n_cpus,
                                 double demand_fraction, std::int64_t start_slot,
                                 std::int64_t end_slot);

bool can_accommodate(const std::vector<ScheduledSlice>& slices, const CpuSchedule& schedule,
                     int n_cpus, double demand_fraction, std::int64_t start_slot,
                     std::int64_t end_slot);

// Per-CPU utilization series over [first, last) slots, one row per slot.
std::vector<std::vector<double>> cpu_utilization_series(const std::vector<ScheduledSlice>& slices,
                                                        const CpuSchedule& schedule,
                                                        std::int64_t first, std::int64_t last);

// ---------------------------------------------------------------------------
// NSI / NSSI sharing decisions

struct RequiredKind {
    NetworkSegment segment = NetworkSegment::Access;
    std::string kind_tag;

    bool operator==(const RequiredKind&) const = default;
    bool operator<(const RequiredKind& o) const {
        return segment != o.segment ? segment < o.segment : kind_tag < o.kind_tag;
    }
};

// Output of the CSMF translation step: what the network must provide.
struct NetworkRequirements {
    ResourceVector demand;
    std::vector<RequiredKind> required_nssi_kinds;
    bool sharing_allowed = true;
    double performance_floor = 0.0;
};

// Specification for an NSSI that would be newly created.
struct NssiSpec {
    NetworkSegment segment = NetworkSegment::Access;
    std::string kind_tag;
    ResourceVector capacity;
    bool shareable = true;
};

struct SliceBlueprint {
    int template_id = -1;  // -1: synthesized from the requirements
    std::vector<RequiredKind> constituents;
    std::vector<std::uint64_t> reused_nssi_ids;
    std::vector<NssiSpec> new_nssi_specs;
};

struct SliceTemplate {
    int template_id = 0;
    std::vector<RequiredKind> kinds;
};

// An NSSI plus the per-NSI resource shares reserved on it.
struct NssiRecord {
    NssiInstance nssi;
    std::map<std::uint64_t, ResourceVector> shares;  // nsi_id -> reserved share

    ResourceVector allocated() const;
    ResourceVector free_capacity() const;
};

// An NSI as the orchestrator tracks it: constituents, the demand it
// currently reserves on each of them, and its measured performance rating.
struct NsiRecord {
    std::uint64_t nsi_id = 0;
    std::vector<std::uint64_t> constituent_nssis;
    ResourceVector demand;  // reserved on every constituent NSSI
    double performance = 0.0;
};

struct Inventory {
    ResourcePool pool;  // capacity backing creation of new NSSIs
    std::vector<NssiRecord> nssis;
    std::vector<NsiRecord> nsis;
    std::vector<SliceTemplate> templates;
    std::vector<RequiredKind> known_kinds;
    std::map<std::string, NetworkRequirements> catalog;  // service profile -> requirements

    const NssiRecord* find_nssi(std::uint64_t id) const;
    NssiRecord* find_nssi(std::uint64_t id);
    const NsiRecord* find_nsi(std::uint64_t id) const;
    NsiRecord* find_nsi(std::uint64_t id);
    std::uint64_t next_nssi_id() const;
    std::uint64_t next_nsi_id() const;

    void check_invariants() const;  // throws ContractViolation
};

// Network-management policy gates for sharing.
struct PolicyFlags {
    bool allow_nsi_reuse = true;
    bool allow_nssi_sharing = true;
};

struct AllocationDecision {
    enum class Kind { ReuseNsi, CreateNsi, Infeasible };
    Kind kind = Kind::Infeasible;
    std::uint64_t nsi_id = 0;  // ReuseNsi
    SliceBlueprint blueprint;  // CreateNsi
};

struct GrowAction {
    std::uint64_t nssi_id = 0;
    ResourceVector new_share;
};

struct ReplaceAction {
    std::uint64_t old_nssi_id = 0;
    NssiSpec spec;
};

using ReconfigureAction = std::variant<GrowAction, ReplaceAction>;

struct UpdateDecision {
    enum class Kind { NoChange, Reconfigure, Migrate, Infeasible };
    Kind kind = Kind::Infeasible;
    std::vector<ReconfigureAction> plan;  // Reconfigure
    AllocationDecision migrate_target;    // Migrate
};

// Decision ladder: (1) reuse a compatible existing NSI when sharing is
// allowed, lowest id first; (2) create an NSI from a blueprint that shares
// sharable NSSIs and creates new ones only for uncovered kinds, subject to
// pool capacity; (3) infeasible. Throws ConfigError on an unknown kind.
AllocationDecision allocate_nsi(const NetworkRequirements& requirements, const Inventory& inventory,
                                const PolicyFlags& flags);

// Decision ladder: NoChange / Reconfigure / Migrate / Infeasible.
// Throws NotFoundError on an unknown nsi_id.
UpdateDecision update_requirements(std::uint64_t nsi_id, const NetworkRequirements& new_requirements,
                                   const Inventory& inventory, const PolicyFlags& flags);

// Catalog lookup. Throws NotFoundError on an unknown profile.
const NetworkRequirements& translate_service_request(const std::string& service_profile_id,
                                                     const Inventory& catalog_holder);

// Mutating appliers, used to validate that decisions keep the inventory
// invariants intact. Return the id of the serving NSI.
std::uint64_t apply_allocation(Inventory& inventory, const NetworkRequirements& requirements,
                               const AllocationDecision& decision);
void apply_update(Inventory& inventory, std::uint64_t nsi_id,
                  const NetworkRequirements& new_requirements, const UpdateDecision& decision);

}  // namespace slicesim::orch

#endif
