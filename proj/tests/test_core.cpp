#include <doctest.h>

#include "slicesim/core.hpp"
#include "slicesim/rng.hpp"

using namespace slicesim;

TEST_CASE("fits: componentwise comparison") {
    CHECK(fits(ResourceVector({0, 0}), ResourceVector({5, 5})));
    CHECK(fits(ResourceVector({5, 5}), ResourceVector({5, 5})));  // boundary equality admits
    CHECK_FALSE(fits(ResourceVector({3, 6}), ResourceVector({5, 5})));
    CHECK_THROWS_AS(fits(ResourceVector({1}), ResourceVector({1, 2})), ConfigError);
}

TEST_CASE("fits is monotone in the demand") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> d(3), d_smaller(3), f(3);
        for (int i = 0; i < 3; ++i) {
            d[i] = rng.uniform01() * 10.0;
            d_smaller[i] = d[i] * rng.uniform01();
            f[i] = rng.uniform01() * 10.0;
        }
        if (fits(ResourceVector(d), ResourceVector(f))) {
            CHECK(fits(ResourceVector(d_smaller), ResourceVector(f)));
        }
    }
}

TEST_CASE("utilization: per-dimension ratio") {
    ResourcePool pool(ResourceVector({4}));
    pool.allocate(ResourceVector({2}));
    CHECK(utilization(pool) == std::vector<double>{0.5});

    ResourcePool empty(ResourceVector({4, 8}));
    CHECK(utilization(empty) == std::vector<double>{0.0, 0.0});

    ResourcePool mixed(ResourceVector({4, 8}));
    mixed.allocate(ResourceVector({1, 6}));
    CHECK(utilization(mixed) == std::vector<double>{0.25, 0.75});
}

TEST_CASE("utilization: zero capacity component is a configuration error") {
    ResourcePool pool{ResourceVector({4, 0})};
    CHECK_THROWS_AS(utilization(pool), ConfigError);
}

TEST_CASE("ResourceVector rejects negative components") {
    CHECK_THROWS_AS(ResourceVector({1.0, -0.5}), ConfigError);
}

TEST_CASE("ResourcePool enforces allocated <= capacity") {
    ResourcePool pool(ResourceVector({5, 5}));
    pool.allocate(ResourceVector({3, 3}));
    CHECK_THROWS_AS(pool.allocate(ResourceVector({3, 0})), ContractViolation);
    pool.release(ResourceVector({3, 3}));
    CHECK(pool.allocated().near_zero());
}

TEST_CASE("ResourcePool survives randomized allocate/release sequences") {
    Rng rng(7);
    ResourcePool pool(ResourceVector({10, 10, 10}));
    std::vector<ResourceVector> held;
    for (int step = 0; step < 2000; ++step) {
        if (!held.empty() && rng.bernoulli(0.45)) {
            std::size_t i = static_cast<std::size_t>(rng.uniform_int(held.size()));
            pool.release(held[i]);
            held.erase(held.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            std::vector<double> amt(3);
            for (double& a : amt) a = rng.uniform01() * 3.0;
            ResourceVector v(amt);
            if (fits(v, pool.free())) {
                pool.allocate(v);
                held.push_back(v);
            }
        }
        CHECK(pool.allocated().all_leq(pool.capacity()));
    }
    for (const ResourceVector& v : held) pool.release(v);
    CHECK(pool.allocated().near_zero());
}

TEST_CASE("NetworkSliceInstance allocation is demand * scale_fraction") {
    SliceTypeSpec t;
    t.type_id = 0;
    t.slice_class = SliceClass::BestEffort;
    t.demand = ResourceVector({4, 2});
    t.min_fraction = 0.5;

    NetworkSliceInstance nsi;
    nsi.type_id = 0;
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        nsi.scale_fraction = 0.5 + 0.5 * rng.uniform01();
        ResourceVector a = nsi.allocation(t);
        CHECK(a[0] == doctest::Approx(4 * nsi.scale_fraction).epsilon(1e-12));
        CHECK(a[1] == doctest::Approx(2 * nsi.scale_fraction).epsilon(1e-12));
    }
}

TEST_CASE("SliceTypeSpec validation") {
    SliceTypeSpec gs;
    gs.type_id = 0;
    gs.slice_class = SliceClass::GuaranteedService;
    gs.demand = ResourceVector({1, 1});
    gs.min_fraction = 0.8;  // GS must be inelastic
    gs.utility_rate = 1.0;
    CHECK_THROWS_AS(gs.validate(2), ConfigError);
    gs.min_fraction = 1.0;
    CHECK_NOTHROW(gs.validate(2));

    SliceTypeSpec zero = gs;
    zero.demand = ResourceVector({0, 0});
    CHECK_THROWS_AS(zero.validate(2), ConfigError);
}

TEST_CASE("physical_cap: zero-demand dimensions do not constrain") {
    SliceTypeSpec t;
    t.type_id = 1;
    t.demand = ResourceVector({2, 0});
    CHECK(t.physical_cap(ResourceVector({10, 10})) == 5);
    t.demand = ResourceVector({3, 1});
    CHECK(t.physical_cap(ResourceVector({10, 10})) == 3);
}

TEST_CASE("derive_seed is label-stable and collision-averse") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
}
