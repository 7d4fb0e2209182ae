#ifndef SLICESIM_METRICS_HPP
#define SLICESIM_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace slicesim {

// Request accounting for one slice class over one episode.
struct ClassCounters {
    std::uint64_t generated = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;          // policy said Reject
    std::uint64_t expired = 0;           // patience ran out in the queue
    std::uint64_t overflow_dropped = 0;  // queue was full on arrival
    std::uint64_t still_queued = 0;      // waiting when the horizon ended

    std::uint64_t dropped() const { return rejected + expired + overflow_dropped; }
};

// Aggregated outcome of one episode. Requests still queued at the horizon
// are reported separately so truncation does not distort dropping_prob.
struct EpisodeMetrics {
    ClassCounters be;
    ClassCounters gs;

    double acceptance_pct_be = 0.0;
    double acceptance_pct_gs = 0.0;
    double acceptance_pct_overall = 0.0;
    double dropping_prob_be = 0.0;
    double dropping_prob_gs = 0.0;

    double cumulative_reward = 0.0;
    std::vector<double> mean_utilization;  // per dimension
    double normalized_utility_rate = 0.0;
    std::uint64_t scale_down_events = 0;

    // Computes the derived fields and checks per-class conservation.
    // Throws ContractViolation on a broken identity.
    void finalize(double total_utility, std::int64_t horizon_slots, double u_max);
};

// Flat field view used for aggregation and CSV emission; keeps column
// order identical everywhere.
std::vector<std::string> metric_field_names(std::size_t dims);
std::vector<double> metric_field_values(const EpisodeMetrics& m);

struct MetricsSummary {
    std::vector<std::string> fields;
    std::vector<double> mean;
    std::vector<double> stddev;  // sample stddev, 0 for a singleton
};

// Fieldwise mean and sample standard deviation. Throws ConfigError on an
// empty list.
MetricsSummary aggregate(const std::vector<EpisodeMetrics>& metrics);

// RFC-4180-style CSV cell; reals are printed with 6 significant digits.
std::string format_real(double v);

using CsvRow = std::vector<std::string>;

// Writes header + rows; quoting per RFC 4180. Throws ConfigError with path
// context on I/O failure or inconsistent column counts.
void write_csv(const std::vector<CsvRow>& rows, const CsvRow& header, const std::string& path);

std::string csv_to_string(const std::vector<CsvRow>& rows, const CsvRow& header);

}  // namespace slicesim

#endif
