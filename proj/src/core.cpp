#include "slicesim/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slicesim {

ResourceVector::ResourceVector(std::vector<double> amounts) : amounts_(std::move(amounts)) {
    for (double a : amounts_) {
        if (!(a >= 0.0)) {
            throw ConfigError("ResourceVector: components must be non-negative");
        }
    }
}

ResourceVector ResourceVector::zeros(std::size_t dims) {
    ResourceVector v;
    v.amounts_.assign(dims, 0.0);
    return v;
}

void ResourceVector::check_dims(const ResourceVector& other) const {
    if (amounts_.size() != other.amounts_.size()) {
        throw ConfigError("ResourceVector: dimension mismatch (" +
                          std::to_string(amounts_.size()) + " vs " +
                          std::to_string(other.amounts_.size()) + ")");
    }
}

ResourceVector& ResourceVector::operator+=(const ResourceVector& other) {
    check_dims(other);
    for (std::size_t i = 0; i < amounts_.size(); ++i) amounts_[i] += other.amounts_[i];
    return *this;
}

ResourceVector& ResourceVector::operator-=(const ResourceVector& other) {
    check_dims(other);
    for (std::size_t i = 0; i < amounts_.size(); ++i) amounts_[i] -= other.amounts_[i];
    return *this;
}

ResourceVector ResourceVector::operator+(const ResourceVector& other) const {
    ResourceVector r = *this;
    r += other;
    return r;
}

ResourceVector ResourceVector::operator-(const ResourceVector& other) const {
    ResourceVector r = *this;
    r -= other;
    return r;
}

ResourceVector ResourceVector::scaled(double factor) const {
    ResourceVector r = *this;
    for (double& a : r.amounts_) a *= factor;
    return r;
}

bool ResourceVector::all_leq(const ResourceVector& other) const {
    check_dims(other);
    for (std::size_t i = 0; i < amounts_.size(); ++i) {
        if (amounts_[i] > other.amounts_[i] + kResourceEps) return false;
    }
    return true;
}

bool ResourceVector::near_zero(double eps) const {
    return std::all_of(amounts_.begin(), amounts_.end(),
                       [eps](double a) { return std::abs(a) <= eps; });
}

double ResourceVector::l1_norm() const {
    double s = 0.0;
    for (double a : amounts_) s += std::abs(a);
    return s;
}

void ResourceVector::clamp_non_negative(double eps) {
    for (double& a : amounts_) {
        if (a < 0.0) {
            if (a < -eps) {
                throw ContractViolation("ResourceVector: component went negative");
            }
            a = 0.0;
        }
    }
}

bool fits(const ResourceVector& demand, const ResourceVector& free) {
    return demand.all_leq(free);
}

ResourcePool::ResourcePool(ResourceVector capacity)
    : capacity_(std::move(capacity)), allocated_(ResourceVector::zeros(capacity_.dims())) {}

ResourceVector ResourcePool::free() const {
    ResourceVector f = capacity_ - allocated_;
    f.clamp_non_negative();
    return f;
}

void ResourcePool::allocate(const ResourceVector& amount) {
    ResourceVector next = allocated_ + amount;
    if (!next.all_leq(capacity_)) {
        throw ContractViolation("ResourcePool: allocation exceeds capacity");
    }
    allocated_ = next;
}

void ResourcePool::release(const ResourceVector& amount) {
    allocated_ -= amount;
    allocated_.clamp_non_negative();
}

std::vector<double> utilization(const ResourcePool& pool) {
    std::vector<double> u(pool.capacity().dims());
    for (std::size_t i = 0; i < u.size(); ++i) {
        double cap = pool.capacity()[i];
        if (cap <= 0.0) {
            throw ConfigError("utilization: capacity component " + std::to_string(i) +
                              " must be > 0");
        }
        u[i] = pool.allocated()[i] / cap;
    }
    return u;
}

const char* to_string(SliceClass c) {
    return c == SliceClass::GuaranteedService ? "GS" : "BE";
}

int SliceTypeSpec::physical_cap(const ResourceVector& capacity) const {
    if (capacity.dims() != demand.dims()) {
        throw ConfigError("physical_cap: dimension mismatch");
    }
    double cap = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < demand.dims(); ++d) {
        if (demand[d] > 0.0) cap = std::min(cap, capacity[d] / demand[d]);
    }
    if (!std::isfinite(cap)) {
        throw ConfigError("type " + std::to_string(type_id) +
                          ": demand must have at least one positive component");
    }
    // Nudge by the comparison tolerance so a demand that exactly divides the
    // capacity is not floored away.
    return static_cast<int>(std::floor(cap + kResourceEps));
}

void SliceTypeSpec::validate(std::size_t dims) const {
    if (demand.dims() != dims) {
        throw ConfigError("type " + std::to_string(type_id) + ": demand has " +
                          std::to_string(demand.dims()) + " dimensions, scenario has " +
                          std::to_string(dims));
    }
    if (slice_class == SliceClass::GuaranteedService && min_fraction != 1.0) {
        throw ConfigError("type " + std::to_string(type_id) +
                          ": guaranteed-service slices are inelastic (min_fraction must be 1.0)");
    }
    if (!(min_fraction > 0.0 && min_fraction <= 1.0)) {
        throw ConfigError("type " + std::to_string(type_id) + ": min_fraction must be in (0,1]");
    }
    if (!(utility_rate >= 0.0)) {
        throw ConfigError("type " + std::to_string(type_id) + ": utility_rate must be >= 0");
    }
    if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0)) {
        throw ConfigError("type " + std::to_string(type_id) + ": arrival_prob must be in [0,1]");
    }
    if (!(departure_prob >= 0.0 && departure_prob <= 1.0)) {
        throw ConfigError("type " + std::to_string(type_id) + ": departure_prob must be in [0,1]");
    }
    if (patience_slots < 0) {
        throw ConfigError("type " + std::to_string(type_id) + ": patience_slots must be >= 0");
    }
    bool positive = false;
    for (std::size_t d = 0; d < demand.dims(); ++d) positive = positive || demand[d] > 0.0;
    if (!positive) {
        throw ConfigError("type " + std::to_string(type_id) +
                          ": demand must have at least one positive component");
    }
}

const char* to_string(NetworkSegment s) {
    switch (s) {
        case NetworkSegment::Access: return "access";
        case NetworkSegment::Core: return "core";
        case NetworkSegment::Transport: return "transport";
    }
    return "?";
}

NetworkSegment segment_from_string(const std::string& s) {
    if (s == "access") return NetworkSegment::Access;
    if (s == "core") return NetworkSegment::Core;
    if (s == "transport") return NetworkSegment::Transport;
    throw ConfigError("unknown network segment '" + s + "'");
}

}  // namespace slicesim
