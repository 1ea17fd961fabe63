#include "posteval/metrics.hpp"

#include "posteval/errors.hpp"

#include <limits>

namespace posteval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(double num, double den) noexcept {
    return den > 0.0 ? num / den : kNaN;
}

void require_two_groups(std::span<const GroupConfusionMatrix> groups,
                        const char* metric) {
    if (groups.size() != 2) {
        throw ConfigError(std::string(metric) +
                          " requires exactly two groups (reference first), got " +
                          std::to_string(groups.size()));
    }
}

MetricSpec scalar_performance(std::string name, double (*fn)(const GroupConfusionMatrix&) noexcept) {
    MetricSpec spec;
    spec.name = name;
    spec.kind = MetricKind::performance;
    spec.arity = 1;
    spec.column_names = {name};
    spec.evaluator = [fn](std::span<const GroupConfusionMatrix> groups,
                          std::span<double> out) {
        out[0] = fn(pool(groups));
    };
    return spec;
}

MetricSpec scalar_fairness(std::string name, double (*fn)(const GroupConfusionMatrix&) noexcept) {
    MetricSpec spec;
    spec.name = name;
    spec.kind = MetricKind::fairness;
    spec.arity = 1;
    spec.column_names = {name};
    spec.evaluator = [fn, name](std::span<const GroupConfusionMatrix> groups,
                                std::span<double> out) {
        require_two_groups(groups, name.c_str());
        out[0] = fn(groups[1]) - fn(groups[0]);
    };
    return spec;
}

std::vector<MetricSpec> build_registry() {
    std::vector<MetricSpec> registry;
    registry.push_back(scalar_performance("accuracy", accuracy_of));
    registry.push_back(scalar_performance("tpr", tpr_of));
    registry.push_back(scalar_performance("fpr", fpr_of));
    registry.push_back(scalar_performance("ar", acceptance_rate_of));
    registry.push_back(scalar_performance("ppv", ppv_of));

    registry.push_back(scalar_fairness("dp", acceptance_rate_of));
    registry.push_back(scalar_fairness("eop", tpr_of));
    registry.push_back(scalar_fairness("pp", ppv_of));

    MetricSpec eo;
    eo.name = "eo";
    eo.kind = MetricKind::fairness;
    eo.arity = 2;
    eo.column_names = {"eo_dtpr", "eo_dfpr"};
    eo.evaluator = [](std::span<const GroupConfusionMatrix> groups,
                      std::span<double> out) {
        require_two_groups(groups, "eo");
        out[0] = tpr_of(groups[1]) - tpr_of(groups[0]);
        out[1] = fpr_of(groups[1]) - fpr_of(groups[0]);
    };
    registry.push_back(std::move(eo));
    return registry;
}

} // namespace

double accuracy_of(const GroupConfusionMatrix& cm) noexcept {
    return ratio(cm.tp + cm.tn, cm.total());
}

double tpr_of(const GroupConfusionMatrix& cm) noexcept {
    return ratio(cm.tp, cm.tp + cm.fn);
}

double fpr_of(const GroupConfusionMatrix& cm) noexcept {
    return ratio(cm.fp, cm.fp + cm.tn);
}

double acceptance_rate_of(const GroupConfusionMatrix& cm) noexcept {
    return ratio(cm.tp + cm.fp, cm.total());
}

double ppv_of(const GroupConfusionMatrix& cm) noexcept {
    return ratio(cm.tp, cm.tp + cm.fp);
}

const std::vector<MetricSpec>& builtin_metrics() {
    static const std::vector<MetricSpec> registry = build_registry();
    return registry;
}

const MetricSpec& find_metric(const std::string& name) {
    for (const auto& spec : builtin_metrics()) {
        if (spec.name == name) return spec;
    }
    std::string known;
    for (const auto& spec : builtin_metrics()) {
        if (!known.empty()) known += ", ";
        known += spec.name;
    }
    throw ConfigError("unknown metric '" + name + "' (known: " + known + ")");
}

std::vector<MetricSpec> resolve_metrics(const std::vector<std::string>& names) {
    std::vector<MetricSpec> out;
    out.reserve(names.size());
    for (const auto& name : names) out.push_back(find_metric(name));
    return out;
}

std::vector<std::string> metric_columns(std::span<const MetricSpec> metrics) {
    std::vector<std::string> cols;
    for (const auto& m : metrics) {
        cols.insert(cols.end(), m.column_names.begin(), m.column_names.end());
    }
    return cols;
}

std::vector<MetricSpec> metrics_from_columns(
    const std::vector<std::string>& columns) {
    std::vector<MetricSpec> out;
    std::size_t i = 0;
    while (i < columns.size()) {
        const MetricSpec* hit = nullptr;
        for (const auto& spec : builtin_metrics()) {
            if (i + spec.arity > columns.size()) continue;
            bool match = true;
            for (std::size_t a = 0; a < spec.arity; ++a) {
                if (columns[i + a] != spec.column_names[a]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                hit = &spec;
                break;
            }
        }
        if (!hit) {
            throw ConfigError("column '" + columns[i] +
                              "' does not start any known metric");
        }
        out.push_back(*hit);
        i += hit->arity;
    }
    return out;
}

} // namespace posteval
