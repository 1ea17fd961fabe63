#pragma once

#include "posteval/metrics.hpp"
#include "posteval/types.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace posteval {

// How the per-metric gap between methods A and B is signed.
//
// raw:      delta = value_A - value_B for every column.
// oriented: performance columns keep value_A - value_B; fairness columns use
//           |value_B| - |value_A| so that "positive" always means "A is
//           better" (smaller absolute disparity wins).
enum class GapMode { raw, oriented };

const char* to_string(GapMode mode) noexcept;
GapMode parse_gap_mode(const std::string& name);

// Practical-equivalence half-widths, one per performance column (eps_theta)
// and one per fairness column (eps_eta), in metric order.
struct Rope {
    std::vector<double> eps_theta;
    std::vector<double> eps_eta;

    static Rope uniform(std::span<const MetricSpec> metrics, double eps);
    // Per-column half-widths in column order; validates counts against the
    // metric list.
    std::vector<double> flat(std::span<const MetricSpec> metrics) const;
};

struct ComparisonReport {
    double p_equivalent = 0.0;
    double p_a_outperforms = 0.0;
    double p_b_outperforms = 0.0;
    // Sign pattern per axis ('-', '0', '+'), e.g. "+-0"; the all-zero
    // pattern is the equivalence region and is not listed here. Only cells
    // with at least one sample appear.
    std::map<std::string, double> orthant_probs;
    std::size_t used = 0;
    std::size_t flagged = 0;
    JointSampleMatrix gap_samples;
};

// Rowwise signed gaps between two sample matrices produced with the same
// metric list. Columns are renamed "delta_<name>". Rows where either side is
// flagged stay flagged.
JointSampleMatrix gap_distribution(const JointSampleMatrix& samples_a,
                                   const JointSampleMatrix& samples_b,
                                   std::span<const MetricSpec> metrics,
                                   GapMode mode);

// Classify every unflagged gap row into the closed box |x_c| <= eps_c or,
// outside it, the cell named by its sign pattern. Probabilities are counts
// over the unflagged rows.
ComparisonReport compare(JointSampleMatrix gap,
                         std::span<const double> eps_per_column);

ComparisonReport compare(JointSampleMatrix gap, const Rope& rope,
                         std::span<const MetricSpec> metrics);

} // namespace posteval
