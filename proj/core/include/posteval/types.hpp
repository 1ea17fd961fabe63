#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace posteval {

/// Per-group confusion matrix. Cells are real-valued so that effective
/// (correlation-rescaled) counts and fractional Dirichlet pseudo-counts
/// flow through the same type.
struct GroupConfusionMatrix {
    std::string group_id;
    double tp = 0.0;
    double tn = 0.0;
    double fp = 0.0;
    double fn = 0.0;

    double total() const noexcept { return tp + tn + fp + fn; }

    /// Cells in Dirichlet parameter order (tp, tn, fp, fn).
    std::array<double, 4> cells() const noexcept { return {tp, tn, fp, fn}; }

    /// Throws InputError if any cell is negative or not finite.
    void validate() const;
};

/// Cellwise sum; group_id = "pooled". Throws InputError on an empty list.
GroupConfusionMatrix pool(std::span<const GroupConfusionMatrix> groups);

/// Dirichlet concentration over (tp, tn, fp, fn); every entry > 0.
struct DirichletPrior {
    std::array<double, 4> alpha = {1.0, 1.0, 1.0, 1.0};

    void validate() const;
};

/// Posterior concentration for one group: prior alpha + observed cells.
struct DirichletPosterior {
    std::string group_id;
    std::array<double, 4> alpha_post = {1.0, 1.0, 1.0, 1.0};

    double concentration() const noexcept {
        return alpha_post[0] + alpha_post[1] + alpha_post[2] + alpha_post[3];
    }
};

enum class EvaluationSource { holdout, kfold };

/// Observed evaluation data: per-fold, per-group confusion matrices.
/// Hold-out data is the single-fold case.
struct EvaluationInput {
    EvaluationSource source = EvaluationSource::holdout;
    /// folds[k] lists the groups observed in fold k. For kfold input every
    /// fold carries the same group-label set; labels are unique per fold.
    std::vector<std::vector<GroupConfusionMatrix>> folds;

    std::size_t fold_count() const noexcept { return folds.size(); }

    /// Sorted distinct group labels.
    std::vector<std::string> group_labels() const;

    /// Cellwise sum of one group's matrix across folds.
    GroupConfusionMatrix summed_group(const std::string& group_id) const;

    /// Enforces the invariants above; throws InputError on violation.
    void validate() const;
};

/// T x (N+M) matrix of joint posterior metric samples, row-major. A row
/// may contain NaN cells when a sampled confusion matrix hits a zero
/// denominator; such rows are retained and counted as flagged.
struct JointSampleMatrix {
    std::vector<std::string> columns;
    std::size_t rows = 0;
    std::vector<double> data; // rows * columns.size()
    std::uint64_t seed = 0;

    double at(std::size_t r, std::size_t c) const noexcept {
        return data[r * columns.size() + c];
    }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data.data() + r * columns.size(), columns.size()};
    }
    std::span<double> row(std::size_t r) noexcept {
        return {data.data() + r * columns.size(), columns.size()};
    }

    /// Column index by name; throws ConfigError if absent.
    std::size_t column_index(const std::string& name) const;

    /// Number of rows containing at least one NaN cell.
    std::size_t flagged_rows() const noexcept;

    /// One column as a dense vector (including NaNs).
    std::vector<double> column(std::size_t c) const;
};

} // namespace posteval
