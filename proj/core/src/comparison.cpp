#include "posteval/comparison.hpp"

#include "posteval/errors.hpp"

#include <cmath>
#include <cstddef>

namespace posteval {

const char* to_string(GapMode mode) noexcept {
    return mode == GapMode::raw ? "raw" : "oriented";
}

GapMode parse_gap_mode(const std::string& name) {
    if (name == "raw") return GapMode::raw;
    if (name == "oriented") return GapMode::oriented;
    throw ConfigError("unknown gap mode '" + name +
                      "' (expected raw or oriented)");
}

Rope Rope::uniform(std::span<const MetricSpec> metrics, double eps) {
    if (!(eps > 0.0)) throw ConfigError("rope half-width must be positive");
    Rope rope;
    for (const auto& m : metrics) {
        auto& bucket =
            m.kind == MetricKind::performance ? rope.eps_theta : rope.eps_eta;
        bucket.insert(bucket.end(), m.arity, eps);
    }
    return rope;
}

std::vector<double> Rope::flat(std::span<const MetricSpec> metrics) const {
    std::size_t want_theta = 0;
    std::size_t want_eta = 0;
    for (const auto& m : metrics) {
        (m.kind == MetricKind::performance ? want_theta : want_eta) += m.arity;
    }
    if (eps_theta.size() != want_theta || eps_eta.size() != want_eta) {
        throw ConfigError("rope size mismatch: metric list needs " +
                          std::to_string(want_theta) + " performance and " +
                          std::to_string(want_eta) + " fairness half-widths");
    }
    for (double e : eps_theta) {
        if (!(e > 0.0)) throw ConfigError("rope half-widths must be positive");
    }
    for (double e : eps_eta) {
        if (!(e > 0.0)) throw ConfigError("rope half-widths must be positive");
    }
    std::vector<double> flat;
    std::size_t it = 0;
    std::size_t ie = 0;
    for (const auto& m : metrics) {
        for (std::size_t a = 0; a < m.arity; ++a) {
            flat.push_back(m.kind == MetricKind::performance ? eps_theta[it++]
                                                             : eps_eta[ie++]);
        }
    }
    return flat;
}

JointSampleMatrix gap_distribution(const JointSampleMatrix& samples_a,
                                   const JointSampleMatrix& samples_b,
                                   std::span<const MetricSpec> metrics,
                                   GapMode mode) {
    if (samples_a.columns != samples_b.columns) {
        throw InputError("gap_distribution: column mismatch between methods");
    }
    if (samples_a.rows != samples_b.rows) {
        throw InputError("gap_distribution: sample-count mismatch between "
                         "methods");
    }
    const auto expected = metric_columns(metrics);
    if (samples_a.columns != expected) {
        throw InputError("gap_distribution: samples do not match the metric "
                         "list");
    }

    std::vector<bool> orient_abs;
    orient_abs.reserve(expected.size());
    for (const auto& m : metrics) {
        const bool flip = mode == GapMode::oriented && m.kind == MetricKind::fairness;
        orient_abs.insert(orient_abs.end(), m.arity, flip);
    }

    JointSampleMatrix gap;
    gap.columns.reserve(expected.size());
    for (const auto& name : expected) gap.columns.push_back("delta_" + name);
    gap.rows = samples_a.rows;
    gap.seed = samples_a.seed;
    gap.data.resize(gap.rows * gap.columns.size());

    const std::size_t cols = gap.columns.size();
    for (std::size_t r = 0; r < gap.rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double a = samples_a.at(r, c);
            const double b = samples_b.at(r, c);
            gap.data[r * cols + c] =
                orient_abs[c] ? std::fabs(b) - std::fabs(a) : a - b;
        }
    }
    return gap;
}

ComparisonReport compare(JointSampleMatrix gap,
                         std::span<const double> eps_per_column) {
    const std::size_t cols = gap.columns.size();
    if (cols == 0) throw InputError("compare: gap matrix has no columns");
    if (eps_per_column.size() != cols) {
        throw ConfigError("compare: rope has " +
                          std::to_string(eps_per_column.size()) +
                          " half-widths but the gap has " +
                          std::to_string(cols) + " columns");
    }
    for (double e : eps_per_column) {
        if (!(e > 0.0)) throw ConfigError("rope half-widths must be positive");
    }

    ComparisonReport report;
    std::map<std::string, std::size_t> cell_counts;
    std::size_t inside = 0;
    std::string pattern(cols, '0');

    for (std::size_t r = 0; r < gap.rows; ++r) {
        const auto row = gap.row(r);
        bool flagged = false;
        bool all_inside = true;
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = row[c];
            if (std::isnan(x)) {
                flagged = true;
                break;
            }
            if (x > eps_per_column[c]) {
                pattern[c] = '+';
                all_inside = false;
            } else if (x < -eps_per_column[c]) {
                pattern[c] = '-';
                all_inside = false;
            } else {
                pattern[c] = '0';
            }
        }
        if (flagged) {
            ++report.flagged;
            continue;
        }
        ++report.used;
        if (all_inside) {
            ++inside;
        } else {
            ++cell_counts[pattern];
        }
    }

    if (report.used == 0) {
        throw InputError("compare: every gap sample is flagged");
    }
    const double denom = static_cast<double>(report.used);
    report.p_equivalent = static_cast<double>(inside) / denom;
    const std::string all_plus(cols, '+');
    const std::string all_minus(cols, '-');
    for (const auto& [cell, count] : cell_counts) {
        const double p = static_cast<double>(count) / denom;
        report.orthant_probs.emplace(cell, p);
        if (cell == all_plus) report.p_a_outperforms = p;
        if (cell == all_minus) report.p_b_outperforms = p;
    }
    report.gap_samples = std::move(gap);
    return report;
}

ComparisonReport compare(JointSampleMatrix gap, const Rope& rope,
                         std::span<const MetricSpec> metrics) {
    return compare(std::move(gap), rope.flat(metrics));
}

} // namespace posteval
