#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slicesim/metrics.hpp"
#include "slicesim/errors.hpp"

using namespace slicesim;

namespace {

EpisodeMetrics sample_metrics(double acceptance_pct) {
    EpisodeMetrics m;
    m.gs.generated = 100;
    m.gs.accepted = static_cast<std::uint64_t>(acceptance_pct);
    m.gs.rejected = 100 - m.gs.accepted;
    m.be.generated = 100;
    m.be.accepted = static_cast<std::uint64_t>(acceptance_pct);
    m.be.rejected = 100 - m.be.accepted;
    m.mean_utilization = {0.5};
    m.finalize(/*total_utility=*/50.0, /*horizon_slots=*/100, /*u_max=*/1.0);
    return m;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("finalize computes percentages and checks conservation") {
    EpisodeMetrics m = sample_metrics(40);
    CHECK(m.acceptance_pct_overall == doctest::Approx(40.0));
    CHECK(m.dropping_prob_gs == doctest::Approx(0.6));

    EpisodeMetrics broken;
    broken.gs.generated = 5;
    broken.gs.accepted = 1;  // 4 requests unaccounted
    CHECK_THROWS_AS(broken.finalize(0, 10, 1.0), ContractViolation);
}

TEST_CASE("drop + accept + still-queued fractions sum to one per class") {
    EpisodeMetrics m;
    m.gs.generated = 10;
    m.gs.accepted = 4;
    m.gs.rejected = 3;
    m.gs.expired = 1;
    m.gs.overflow_dropped = 1;
    m.gs.still_queued = 1;
    m.be.generated = 0;
    m.mean_utilization = {0.0};
    m.finalize(0, 10, 1.0);
    double accept_frac = m.gs.accepted / 10.0;
    double queued_frac = m.gs.still_queued / 10.0;
    CHECK(m.dropping_prob_gs + accept_frac + queued_frac == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("aggregate: mean and sample standard deviation") {
    SUBCASE("identical metrics have zero stddev") {
        std::vector<EpisodeMetrics> ms(3, sample_metrics(40));
        MetricsSummary s = aggregate(ms);
        for (std::size_t i = 0; i < s.fields.size(); ++i) {
            if (s.fields[i] == "acceptance_pct_overall") {
                CHECK(s.mean[i] == doctest::Approx(40.0));
            }
            CHECK(s.stddev[i] == doctest::Approx(0.0));
        }
    }
    SUBCASE("two-point sample stddev") {
        std::vector<EpisodeMetrics> ms = {sample_metrics(40), sample_metrics(60)};
        MetricsSummary s = aggregate(ms);
        for (std::size_t i = 0; i < s.fields.size(); ++i) {
            if (s.fields[i] == "acceptance_pct_overall") {
                CHECK(s.mean[i] == doctest::Approx(50.0));
                CHECK(s.stddev[i] == doctest::Approx(14.142135).epsilon(1e-4));
            }
        }
    }
    SUBCASE("singleton mean is the value itself") {
        std::vector<EpisodeMetrics> ms = {sample_metrics(40)};
        MetricsSummary s = aggregate(ms);
        CHECK(s.stddev[0] == 0.0);
    }
    SUBCASE("empty list is a usage error") {
        CHECK_THROWS_AS(aggregate({}), ConfigError);
    }
}

TEST_CASE("format_real uses six significant digits") {
    CHECK(format_real(0.123456789) == "0.123457");
    CHECK(format_real(210.0) == "210");
    CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("write_csv: header-only, determinism, quoting") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "slicesim_csv_test";
    fs::create_directories(dir);

    SUBCASE("empty rows produce a header-only file") {
        std::string path = (dir / "empty.csv").string();
        write_csv({}, {"a", "b"}, path);
        CHECK(slurp(path) == "a,b\n");
    }
    SUBCASE("identical inputs give byte-identical files") {
        std::string p1 = (dir / "one.csv").string();
        std::string p2 = (dir / "two.csv").string();
        std::vector<CsvRow> rows = {{"1", format_real(0.123456789)}, {"2", "x"}};
        write_csv(rows, {"id", "v"}, p1);
        write_csv(rows, {"id", "v"}, p2);
        CHECK(slurp(p1) == slurp(p2));
        CHECK(slurp(p1) == "id,v\n1,0.123457\n2,x\n");
    }
    SUBCASE("cells with commas or quotes are quoted") {
        CHECK(csv_to_string({{"a,b", "c\"d"}}, {"x", "y"}) == "x,y\n\"a,b\",\"c\"\"d\"\n");
    }
    SUBCASE("inconsistent column counts are rejected") {
        CHECK_THROWS_AS(csv_to_string({{"1", "2", "3"}}, {"a", "b"}), ConfigError);
    }
    SUBCASE("unwritable path is surfaced with context") {
        CHECK_THROWS_AS(write_csv({}, {"a"}, (dir / "no/such/dir.csv").string()), ConfigError);
    }
}
