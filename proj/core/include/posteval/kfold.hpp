#pragma once

#include "posteval/types.hpp"

#include <optional>
#include <span>
#include <string>

namespace posteval {

// How the fold-correlation rho used by the effective confusion matrix was
// chosen: a fixed 1/K point, the interval [0, 1/K] with its midpoint as the
// working point, or either of those pushed through the variance-ratio map
// (see rho_relative).
enum class RhoStrategy { fixed, interval, relative, relative_interval };

const char* to_string(RhoStrategy strategy) noexcept;
RhoStrategy parse_rho_strategy(const std::string& name);

struct RhoInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct RhoEstimate {
    RhoStrategy strategy = RhoStrategy::fixed;
    double value = 0.0; // working point, always in [0,1]
    std::optional<RhoInterval> interval;
    std::optional<std::string> reference_method;
    std::optional<double> r_over;

    void validate() const;
};

// One run of the disjoint-half protocol: the same metric measured by K-fold
// CV on each half of a 50/50 split of the data.
struct HalfSplitPair {
    double mu = 0.0;
    double mu_c = 0.0;
};

// Collapse per-fold confusion matrices for a single group into one
// effective matrix: cellwise sum scaled by 1 / (1 + (K-1)*rho). With K=1 and
// rho=0 this is the identity, i.e. the hold-out case.
GroupConfusionMatrix effective_cm(std::span<const GroupConfusionMatrix> fold_cms,
                                  double rho);

// The scale factor applied by effective_cm, exposed for logging.
double effective_scale(std::size_t fold_count, double rho);

RhoEstimate rho_fixed(int fold_count);

// Interval [0, 1/K]; the working point is the midpoint 1/(2K).
RhoEstimate rho_interval(int fold_count);

// Variance overestimation sigma^2 = (1/2M) * sum (mu - mu_c)^2 from M
// disjoint-half pairs.
double sigma_over(std::span<const HalfSplitPair> pairs);

// Map a reference rho through the variance ratio r_over =
// sigma^2_ref / sigma^2_target:
//
//   rho_1 = (r - 1)/(K - 1) + r * rho_0
//
// clamped into [0,1]. When rho0 carries an interval both endpoints are
// mapped (strategy becomes relative_interval) and the working point is the
// mapped reference point. At r = 1 the map is the identity.
RhoEstimate rho_relative(const RhoEstimate& rho0, double r_over, int fold_count);

} // namespace posteval
