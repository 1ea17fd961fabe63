#include "posteval/kfold.hpp"

#include "posteval/errors.hpp"

#include <algorithm>
#include <cmath>

namespace posteval {

const char* to_string(RhoStrategy strategy) noexcept {
    switch (strategy) {
    case RhoStrategy::fixed: return "fixed";
    case RhoStrategy::interval: return "interval";
    case RhoStrategy::relative: return "relative";
    case RhoStrategy::relative_interval: return "relative_interval";
    }
    return "unknown";
}

RhoStrategy parse_rho_strategy(const std::string& name) {
    if (name == "fixed") return RhoStrategy::fixed;
    if (name == "interval") return RhoStrategy::interval;
    if (name == "relative") return RhoStrategy::relative;
    if (name == "relative_interval") return RhoStrategy::relative_interval;
    throw ConfigError("unknown rho strategy '" + name +
                      "' (expected fixed, interval, relative, or "
                      "relative_interval)");
}

void RhoEstimate::validate() const {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
        throw InputError("rho value must lie in [0,1]");
    }
    if (interval) {
        if (!std::isfinite(interval->lo) || !std::isfinite(interval->hi) ||
            interval->lo < 0.0 || interval->hi > 1.0 ||
            interval->lo > interval->hi) {
            throw InputError("rho interval must satisfy 0 <= lo <= hi <= 1");
        }
        if (value < interval->lo || value > interval->hi) {
            throw InputError("rho working point must lie inside its interval");
        }
    }
    if (r_over && !(*r_over > 0.0)) {
        throw InputError("variance ratio r_over must be positive");
    }
}

double effective_scale(std::size_t fold_count, double rho) {
    return 1.0 + (static_cast<double>(fold_count) - 1.0) * rho;
}

GroupConfusionMatrix effective_cm(std::span<const GroupConfusionMatrix> fold_cms,
                                  double rho) {
    if (fold_cms.empty()) {
        throw InputError("effective_cm: no fold matrices given");
    }
    if (!std::isfinite(rho) || rho < 0.0 || rho > 1.0) {
        throw InputError("effective_cm: rho must lie in [0,1]");
    }
    GroupConfusionMatrix sum;
    sum.group_id = fold_cms.front().group_id;
    for (const auto& cm : fold_cms) {
        cm.validate();
        sum.tp += cm.tp;
        sum.tn += cm.tn;
        sum.fp += cm.fp;
        sum.fn += cm.fn;
    }
    const double scale = effective_scale(fold_cms.size(), rho);
    sum.tp /= scale;
    sum.tn /= scale;
    sum.fp /= scale;
    sum.fn /= scale;
    return sum;
}

RhoEstimate rho_fixed(int fold_count) {
    if (fold_count < 2) {
        throw ConfigError("rho_fixed: needs at least 2 folds");
    }
    RhoEstimate est;
    est.strategy = RhoStrategy::fixed;
    est.value = 1.0 / static_cast<double>(fold_count);
    return est;
}

RhoEstimate rho_interval(int fold_count) {
    if (fold_count < 2) {
        throw ConfigError("rho_interval: needs at least 2 folds");
    }
    RhoEstimate est;
    est.strategy = RhoStrategy::interval;
    est.interval = RhoInterval{0.0, 1.0 / static_cast<double>(fold_count)};
    est.value = 1.0 / (2.0 * static_cast<double>(fold_count));
    return est;
}

double sigma_over(std::span<const HalfSplitPair> pairs) {
    if (pairs.empty()) {
        throw InputError("sigma_over: no half-split pairs");
    }
    double acc = 0.0;
    for (const auto& p : pairs) {
        if (!std::isfinite(p.mu) || !std::isfinite(p.mu_c)) {
            throw InputError("sigma_over: non-finite half-split metric");
        }
        const double d = p.mu - p.mu_c;
        acc += d * d;
    }
    return acc / (2.0 * static_cast<double>(pairs.size()));
}

RhoEstimate rho_relative(const RhoEstimate& rho0, double r_over,
                         int fold_count) {
    if (fold_count < 2) {
        throw ConfigError("rho_relative: needs at least 2 folds");
    }
    if (!(r_over > 0.0) || !std::isfinite(r_over)) {
        throw ConfigError("rho_relative: r_over must be a positive real");
    }
    rho0.validate();

    const double km1 = static_cast<double>(fold_count) - 1.0;
    // Algebraically ((r-1) + r*(K-1)*rho0) / (K-1); written so that r = 1
    // yields rho0 without floating-point residue.
    auto mapped = [&](double rho) {
        return (r_over - 1.0) / km1 + r_over * rho;
    };
    auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };

    RhoEstimate est;
    est.value = clamp01(mapped(rho0.value));
    est.r_over = r_over;
    est.reference_method = rho0.reference_method;
    if (rho0.interval) {
        est.strategy = RhoStrategy::relative_interval;
        est.interval = RhoInterval{clamp01(mapped(rho0.interval->lo)),
                                   clamp01(mapped(rho0.interval->hi))};
    } else {
        est.strategy = RhoStrategy::relative;
    }
    return est;
}

} // namespace posteval
