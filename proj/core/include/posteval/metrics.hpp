#pragma once

#include "posteval/types.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace posteval {

enum class MetricKind { performance, fairness };

/// A metric as a pure function of the per-group confusion matrices.
///
/// Evaluators receive the group list in canonical order: index 0 is the
/// designated reference group (group 0 of the fairness differences),
/// remaining groups follow. Performance metrics only look at the pooled
/// matrix; binary fairness differences require exactly two groups and
/// compute group1 - group0. A zero denominator yields NaN for the affected
/// output, never an exception.
struct MetricSpec {
    std::string name;
    MetricKind kind = MetricKind::performance;
    std::size_t arity = 1;
    std::vector<std::string> column_names; // arity entries
    std::function<void(std::span<const GroupConfusionMatrix>, std::span<double>)>
        evaluator;

    std::vector<double> evaluate(std::span<const GroupConfusionMatrix> groups) const {
        std::vector<double> out(arity);
        evaluator(groups, out);
        return out;
    }
};

/// Built-in registry: accuracy, tpr, fpr, ar, ppv (performance, pooled);
/// dp, eop, pp (scalar fairness differences) and eo (joint delta-TPR /
/// delta-FPR, arity 2).
const std::vector<MetricSpec>& builtin_metrics();

/// Lookup by name; throws ConfigError listing the known names.
const MetricSpec& find_metric(const std::string& name);

/// Resolve a metric-name list to specs; throws ConfigError on unknowns.
std::vector<MetricSpec> resolve_metrics(const std::vector<std::string>& names);

/// Flattened column labels for a metric list (arity-2 metrics expand).
std::vector<std::string> metric_columns(std::span<const MetricSpec> metrics);

/// Inverse of metric_columns: recover the metric list from a sample file's
/// column header. Throws ConfigError on unknown or out-of-order columns.
std::vector<MetricSpec> metrics_from_columns(
    const std::vector<std::string>& columns);

// Scalar helpers shared by the registry and by harness-side summaries.
// Each returns NaN when its denominator is zero.
double accuracy_of(const GroupConfusionMatrix& cm) noexcept;
double tpr_of(const GroupConfusionMatrix& cm) noexcept;
double fpr_of(const GroupConfusionMatrix& cm) noexcept;
double acceptance_rate_of(const GroupConfusionMatrix& cm) noexcept;
double ppv_of(const GroupConfusionMatrix& cm) noexcept;

} // namespace posteval
