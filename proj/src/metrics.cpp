#include "slicesim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "slicesim/errors.hpp"

namespace slicesim {

namespace {

double pct(std::uint64_t part, std::uint64_t whole) {
    return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

double ratio(std::uint64_t part, std::uint64_t whole) {
    return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

void check_conservation(const ClassCounters& c, const char* label) {
    if (c.generated != c.accepted + c.rejected + c.expired + c.overflow_dropped + c.still_queued) {
        throw ContractViolation(std::string("EpisodeMetrics: conservation identity broken for ") +
                                label);
    }
}

}  // namespace

void EpisodeMetrics::finalize(double total_utility, std::int64_t horizon_slots, double u_max) {
    check_conservation(be, "BE");
    check_conservation(gs, "GS");

    acceptance_pct_be = pct(be.accepted, be.generated);
    acceptance_pct_gs = pct(gs.accepted, gs.generated);
    acceptance_pct_overall = pct(be.accepted + gs.accepted, be.generated + gs.generated);
    dropping_prob_be = ratio(be.dropped(), be.generated);
    dropping_prob_gs = ratio(gs.dropped(), gs.generated);

    if (horizon_slots > 0 && u_max > 0.0) {
        normalized_utility_rate = total_utility / static_cast<double>(horizon_slots) / u_max;
    } else {
        normalized_utility_rate = 0.0;
    }
}

std::vector<std::string> metric_field_names(std::size_t dims) {
    std::vector<std::string> names = {
        "gs_generated",     "gs_accepted",       "gs_rejected",
        "gs_expired",       "gs_overflow",       "gs_still_queued",
        "be_generated",     "be_accepted",       "be_rejected",
        "be_expired",       "be_overflow",       "be_still_queued",
        "acceptance_pct_gs", "acceptance_pct_be", "acceptance_pct_overall",
        "drop_prob_gs",     "drop_prob_be",      "cumulative_reward",
        "normalized_utility_rate", "scale_down_events",
    };
    for (std::size_t d = 0; d < dims; ++d) {
        names.push_back("mean_util_" + std::to_string(d));
    }
    return names;
}

std::vector<double> metric_field_values(const EpisodeMetrics& m) {
    std::vector<double> v = {
        static_cast<double>(m.gs.generated),
        static_cast<double>(m.gs.accepted),
        static_cast<double>(m.gs.rejected),
        static_cast<double>(m.gs.expired),
        static_cast<double>(m.gs.overflow_dropped),
        static_cast<double>(m.gs.still_queued),
        static_cast<double>(m.be.generated),
        static_cast<double>(m.be.accepted),
        static_cast<double>(m.be.rejected),
        static_cast<double>(m.be.expired),
        static_cast<double>(m.be.overflow_dropped),
        static_cast<double>(m.be.still_queued),
        m.acceptance_pct_gs,
        m.acceptance_pct_be,
        m.acceptance_pct_overall,
        m.dropping_prob_gs,
        m.dropping_prob_be,
        m.cumulative_reward,
        m.normalized_utility_rate,
        static_cast<double>(m.scale_down_events),
    };
    v.insert(v.end(), m.mean_utilization.begin(), m.mean_utilization.end());
    return v;
}

MetricsSummary aggregate(const std::vector<EpisodeMetrics>& metrics) {
    if (metrics.empty()) {
        throw ConfigError("aggregate: empty metrics list");
    }
    MetricsSummary s;
    s.fields = metric_field_names(metrics.front().mean_utilization.size());
    const std::size_t n_fields = s.fields.size();
    const std::size_t n = metrics.size();

    std::vector<std::vector<double>> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = metric_field_values(metrics[i]);
        if (values[i].size() != n_fields) {
            throw ConfigError("aggregate: inconsistent metric dimensions");
        }
    }
    s.mean.assign(n_fields, 0.0);
    s.stddev.assign(n_fields, 0.0);
    for (std::size_t f = 0; f < n_fields; ++f) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += values[i][f];
        s.mean[f] = sum / static_cast<double>(n);
        if (n > 1) {
            double sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = values[i][f] - s.mean[f];
                sq += d * d;
            }
            s.stddev[f] = std::sqrt(sq / static_cast<double>(n - 1));
        }
    }
    return s;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace {

std::string escape_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

void append_row(std::string& out, const CsvRow& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += escape_cell(row[i]);
    }
    out += '\n';
}

}  // namespace

std::string csv_to_string(const std::vector<CsvRow>& rows, const CsvRow& header) {
    for (const CsvRow& row : rows) {
        if (row.size() != header.size()) {
            throw ConfigError("write_csv: row has " + std::to_string(row.size()) +
                              " cells, header has " + std::to_string(header.size()));
        }
    }
    std::string out;
    append_row(out, header);
    for (const CsvRow& row : rows) append_row(out, row);
    return out;
}

void write_csv(const std::vector<CsvRow>& rows, const CsvRow& header, const std::string& path) {
    std::string content = csv_to_string(rows, header);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("write_csv: cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw ConfigError("write_csv: write failed for '" + path + "'");
    }
}

}  // namespace slicesim
