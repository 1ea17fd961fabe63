#pragma once

#include "posteval/metrics.hpp"
#include "posteval/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace posteval {

/// Conjugate update: alpha_post[i] = prior.alpha[i] + cell[i], exact.
DirichletPosterior update(const DirichletPrior& prior,
                          const GroupConfusionMatrix& observed);

/// One group ready for hierarchical sampling: its posterior and the trial
/// count at which the confusion matrix is redrawn (observed N_s for
/// hold-out; rounded effective total for K-fold).
struct GroupPosterior {
    DirichletPosterior posterior;
    std::int64_t resample_total = 0;
};

/// Round half to even (banker's rounding), for effective totals.
double round_half_even(double x) noexcept;

struct SampleOptions {
    std::int64_t draws = 100000; // T
    std::uint64_t seed = 0;
    unsigned threads = 0; // 0 = hardware concurrency
};

/// Joint posterior metric samples via the two-level hierarchy: per row,
/// draw each group's multinomial parameter from its Dirichlet posterior,
/// redraw the confusion matrix at the group's trial count, then evaluate
/// every metric on the redrawn matrices. Row t consumes an RNG seeded from
/// (seed, t) only, so the output is bitwise identical for any thread count.
/// Rows with NaN cells (zero denominators) are retained and flagged.
JointSampleMatrix sample_joint(std::span<const GroupPosterior> groups,
                               std::span<const MetricSpec> metrics,
                               const SampleOptions& options);

/// Builds per-group posteriors from evaluation data. K-fold input is first
/// collapsed to effective confusion matrices with the supplied correlation
/// rho (required for kfold, ignored for hold-out). Groups are ordered
/// reference-first; the reference defaults to the lexicographically
/// smallest label. Returns groups in the order metric evaluators expect.
std::vector<GroupPosterior> posterior_from_input(
    const EvaluationInput& input,
    const DirichletPrior& prior,
    std::optional<double> rho = std::nullopt,
    const std::optional<std::string>& reference_group = std::nullopt);

/// Same, with a per-group prior lookup.
std::vector<GroupPosterior> posterior_from_input(
    const EvaluationInput& input,
    const std::function<DirichletPrior(const std::string&)>& prior_for,
    std::optional<double> rho = std::nullopt,
    const std::optional<std::string>& reference_group = std::nullopt);

struct MarginalSummary {
    double mean = 0.0;
    double sd = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double ci_level = 0.95;
    std::size_t used = 0;    // unflagged samples
    std::size_t flagged = 0; // NaN samples ignored by the summary
};

/// Mean / sd / central credible interval of one metric column, ignoring
/// flagged samples. Throws InputError when every sample is flagged.
MarginalSummary marginal_summary(const JointSampleMatrix& samples,
                                 const std::string& column,
                                 double ci_level = 0.95);

} // namespace posteval
