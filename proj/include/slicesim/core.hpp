#ifndef SLICESIM_CORE_HPP
#define SLICESIM_CORE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/errors.hpp"

namespace slicesim {

// Absolute tolerance for resource comparisons; demands and capacities are
// reals and scale-fraction arithmetic may accumulate rounding error.
inline constexpr double kResourceEps = 1e-9;

// One non-negative amount per resource dimension. Dimension names are
// scenario-configured (default: cpu, bandwidth, access-capacity); arithmetic
// is only defined between vectors of identical dimension count.
class ResourceVector {
public:
    ResourceVector() = default;
    explicit ResourceVector(std::vector<double> amounts);
    static ResourceVector zeros(std::size_t dims);

    std::size_t dims() const { return amounts_.size(); }
    double operator[](std::size_t i) const { return amounts_[i]; }
    const std::vector<double>& amounts() const { return amounts_; }

    ResourceVector& operator+=(const ResourceVector& other);
    ResourceVector& operator-=(const ResourceVector& other);
    ResourceVector operator+(const ResourceVector& other) const;
    ResourceVector operator-(const ResourceVector& other) const;
    ResourceVector scaled(double factor) const;

    // Componentwise <= within kResourceEps.
    bool all_leq(const ResourceVector& other) const;
    bool near_zero(double eps = kResourceEps) const;
    double l1_norm() const;

    // Clamps tiny negative residue from float cancellation back to zero.
    void clamp_non_negative(double eps = kResourceEps);

private:
    void check_dims(const ResourceVector& other) const;
    std::vector<double> amounts_;
};

// true iff demand <= free componentwise.
bool fits(const ResourceVector& demand, const ResourceVector& free);

// Capacity plus the currently allocated share of it.
class ResourcePool {
public:
    ResourcePool() = default;
    explicit ResourcePool(ResourceVector capacity);

    const ResourceVector& capacity() const { return capacity_; }
    const ResourceVector& allocated() const { return allocated_; }
    ResourceVector free() const;

    // Throws ContractViolation if the allocation would exceed capacity.
    void allocate(const ResourceVector& amount);
    void release(const ResourceVector& amount);

private:
    ResourceVector capacity_;
    ResourceVector allocated_;
};

// allocated_i / capacity_i per dimension; capacity components must be > 0.
std::vector<double> utilization(const ResourcePool& pool);

enum class SliceClass { BestEffort, GuaranteedService };

const char* to_string(SliceClass c);

// Static description of one slice type offered in a scenario.
struct SliceTypeSpec {
    int type_id = 0;
    std::string name;
    SliceClass slice_class = SliceClass::BestEffort;
    ResourceVector demand;       // nominal, per instance
    double min_fraction = 1.0;   // 1.0 for GS (inelastic)
    double utility_rate = 0.0;   // utility per active slot at full scale
    double arrival_prob = 0.0;   // per-slot Bernoulli
    double departure_prob = 0.0; // per-slot, per active instance
    int patience_slots = 0;

    bool elastic() const { return slice_class == SliceClass::BestEffort && min_fraction < 1.0; }

    // Physical maximum of concurrently active instances of this type:
    // floor(min over dimensions of capacity_d / demand_d), dimensions with
    // zero demand do not constrain.
    int physical_cap(const ResourceVector& capacity) const;

    void validate(std::size_t dims) const;
};

struct SliceRequest {
    std::uint64_t request_id = 0;
    int type_id = 0;
    std::int64_t arrival_slot = 0;
    int remaining_patience = 0;
};

// A deployed slice. allocation is always demand * scale_fraction.
struct NetworkSliceInstance {
    std::uint64_t nsi_id = 0;
    int type_id = 0;
    double scale_fraction = 1.0;
    std::vector<std::uint64_t> constituent_nssis;
    std::int64_t admitted_slot = 0;

    ResourceVector allocation(const SliceTypeSpec& spec) const {
        return spec.demand.scaled(scale_fraction);
    }
};

enum class NetworkSegment { Access, Core, Transport };

const char* to_string(NetworkSegment s);
NetworkSegment segment_from_string(const std::string& s);

// A constituent sub-network of one or more NSIs.
struct NssiInstance {
    std::uint64_t nssi_id = 0;
    NetworkSegment segment = NetworkSegment::Access;
    std::string kind_tag;
    ResourceVector capacity;
    std::vector<std::uint64_t> attached_nsis;
    bool shareable = false;
};

}  // namespace slicesim

#endif
