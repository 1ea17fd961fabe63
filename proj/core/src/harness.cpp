#include "posteval/harness.hpp"

#include "posteval/errors.hpp"
#include "posteval/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

namespace posteval::harness {

void TabularDataset::validate() const {
    if (n == 0) throw InputError("dataset is empty");
    if (features.size() != n * d) {
        throw InputError("dataset feature matrix is not n x d");
    }
    if (group.size() != n || label.size() != n || row_ids.size() != n) {
        throw InputError("dataset columns disagree on the row count");
    }
    for (int y : label) {
        if (y != 0 && y != 1) throw InputError("dataset labels must be 0/1");
    }
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> indices) const {
    TabularDataset out;
    out.n = indices.size();
    out.d = d;
    out.features.reserve(out.n * d);
    out.group.reserve(out.n);
    out.label.reserve(out.n);
    out.row_ids.reserve(out.n);
    for (std::size_t i : indices) {
        const auto r = row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.group.push_back(group[i]);
        out.label.push_back(label[i]);
        out.row_ids.push_back(row_ids[i]);
    }
    return out;
}

ClassifierSpec ClassifierSpec::parse(const std::string& text) {
    ClassifierSpec spec;
    std::string head = text;
    std::string params;
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        head = text.substr(0, colon);
        params = text.substr(colon + 1);
    }
    if (head == "logistic") {
        spec.kind = Kind::logistic;
    } else if (head == "stump") {
        spec.kind = Kind::stump;
    } else if (head == "bernoulli") {
        spec.kind = Kind::bernoulli;
    } else {
        throw ConfigError("unknown classifier '" + head +
                          "' (expected logistic, stump, or bernoulli)");
    }

    std::istringstream in(params);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("classifier parameter '" + item +
                              "' is not key=value");
        }
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            if (key == "lr" && spec.kind == Kind::logistic) {
                spec.learning_rate = std::stod(value);
            } else if (key == "iters" && spec.kind == Kind::logistic) {
                spec.iterations = std::stoi(value);
            } else if (key == "p" && spec.kind == Kind::bernoulli) {
                spec.p_correct = std::stod(value);
            } else {
                throw ConfigError("classifier '" + head +
                                  "' does not take parameter '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("classifier parameter '" + item +
                              "' has a malformed value");
        } catch (const std::out_of_range&) {
            throw ConfigError("classifier parameter '" + item +
                              "' is out of range");
        }
    }
    if (spec.kind == Kind::logistic &&
        (!(spec.learning_rate > 0.0) || spec.iterations < 1)) {
        throw ConfigError("logistic classifier needs lr > 0 and iters >= 1");
    }
    if (spec.kind == Kind::bernoulli &&
        !(spec.p_correct >= 0.0 && spec.p_correct <= 1.0)) {
        throw ConfigError("bernoulli classifier needs p in [0,1]");
    }
    return spec;
}

std::string ClassifierSpec::to_string() const {
    std::ostringstream out;
    switch (kind) {
    case Kind::logistic:
        out << "logistic:lr=" << learning_rate << ",iters=" << iterations;
        break;
    case Kind::stump:
        out << "stump";
        break;
    case Kind::bernoulli:
        out << "bernoulli:p=" << p_correct;
        break;
    }
    return out.str();
}

TabularDataset make_synthetic(const SyntheticSpec& spec) {
    if (spec.groups.empty()) {
        throw ConfigError("synthetic spec declares no groups");
    }
    if (!(spec.positive_fraction >= 0.0 && spec.positive_fraction <= 1.0)) {
        throw ConfigError("positive_fraction must lie in [0,1]");
    }
    for (const auto& g : spec.groups) {
        if (g.name.empty()) throw ConfigError("synthetic group needs a name");
        if (g.n == 0) throw ConfigError("synthetic group '" + g.name +
                                        "' has zero instances");
        if (!(g.tpr >= 0.0 && g.tpr <= 1.0 && g.tnr >= 0.0 && g.tnr <= 1.0)) {
            throw ConfigError("synthetic rates for group '" + g.name +
                              "' must lie in [0,1]");
        }
        for (const auto& other : spec.groups) {
            if (&other != &g && other.name == g.name) {
                throw ConfigError("duplicate synthetic group '" + g.name + "'");
            }
        }
    }

    TabularDataset data;
    data.d = spec.d;
    for (const auto& g : spec.groups) data.n += g.n;
    data.features.reserve(data.n * data.d);
    data.group.reserve(data.n);
    data.label.reserve(data.n);
    data.row_ids.reserve(data.n);

    std::size_t idx = 0;
    for (const auto& g : spec.groups) {
        for (std::size_t i = 0; i < g.n; ++i, ++idx) {
            rng::Rng gen(rng::derive_seed(spec.seed, rng::Stream::synthetic, idx));
            const int y = gen.uniform01() < spec.positive_fraction ? 1 : 0;
            const bool separable = gen.uniform01() < (y == 1 ? g.tpr : g.tnr);
            if (data.d >= 1) {
                const double side = (y == 1 ? 1.0 : -1.0) * (separable ? 1.0 : -1.0);
                data.features.push_back(side + 0.25 * gen.normal());
                for (std::size_t f = 1; f < data.d; ++f) {
                    data.features.push_back(gen.normal());
                }
            }
            data.group.push_back(g.name);
            data.label.push_back(y);
            data.row_ids.push_back(idx);
        }
    }
    return data;
}

std::vector<std::vector<std::size_t>> kfold_split(const TabularDataset& data,
                                                  int folds,
                                                  std::uint64_t seed) {
    data.validate();
    if (folds < 2) throw ConfigError("kfold_split: needs at least 2 folds");
    if (static_cast<std::size_t>(folds) > data.n) {
        throw ConfigError("kfold_split: more folds than instances");
    }

    // Strata in deterministic (group, label) order; dealing continues one
    // global round-robin cursor across strata so fold sizes differ by <= 1.
    std::map<std::pair<std::string, int>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < data.n; ++i) {
        strata[{data.group[i], data.label[i]}].push_back(i);
    }
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
    std::size_t cursor = 0;
    std::uint64_t stratum_index = 0;
    for (auto& [key, members] : strata) {
        rng::Rng gen(rng::derive_seed(seed, rng::Stream::split, stratum_index++));
        gen.shuffle(members);
        for (std::size_t i : members) {
            out[cursor % static_cast<std::size_t>(folds)].push_back(i);
            ++cursor;
        }
    }
    return out;
}

namespace {

struct Model {
    ClassifierSpec spec;
    std::uint64_t seed = 0;         // bernoulli noise key
    std::vector<double> weights;    // logistic: d weights then bias
    std::size_t stump_feature = 0;
    double stump_threshold = 0.0;
    int stump_polarity = 1;         // +1: x > t predicts positive
};

Model train(const TabularDataset& data, std::span<const std::size_t> train_idx,
            const ClassifierSpec& spec, std::uint64_t seed) {
    Model model;
    model.spec = spec;
    model.seed = seed;
    if (spec.kind == ClassifierSpec::Kind::bernoulli) return model;

    if (data.d < 1) {
        throw ConfigError("classifier '" + spec.to_string() +
                          "' needs at least one feature");
    }
    if (train_idx.empty()) throw InputError("empty training set");

    if (spec.kind == ClassifierSpec::Kind::logistic) {
        const std::size_t d = data.d;
        model.weights.assign(d + 1, 0.0);
        std::vector<double> grad(d + 1);
        const double inv_n = 1.0 / static_cast<double>(train_idx.size());
        for (int it = 0; it < spec.iterations; ++it) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i : train_idx) {
                const auto x = data.row(i);
                double z = model.weights[d];
                for (std::size_t f = 0; f < d; ++f) z += model.weights[f] * x[f];
                const double p = 1.0 / (1.0 + std::exp(-z));
                const double g = p - static_cast<double>(data.label[i]);
                for (std::size_t f = 0; f < d; ++f) grad[f] += g * x[f];
                grad[d] += g;
            }
            for (std::size_t f = 0; f <= d; ++f) {
                model.weights[f] -= spec.learning_rate * inv_n * grad[f];
            }
        }
        for (double w : model.weights) {
            if (!std::isfinite(w)) {
                throw Error("logistic training diverged");
            }
        }
        return model;
    }

    // Decision stump: best (feature, threshold, polarity) by training error,
    // deterministic tie-break on the scan order.
    std::size_t best_err = train_idx.size() + 1;
    std::vector<std::pair<double, int>> pts(train_idx.size());
    for (std::size_t f = 0; f < data.d; ++f) {
        for (std::size_t i = 0; i < train_idx.size(); ++i) {
            const std::size_t r = train_idx[i];
            pts[i] = {data.features[r * data.d + f], data.label[r]};
        }
        std::sort(pts.begin(), pts.end());
        std::size_t total_pos = 0;
        for (const auto& [x, y] : pts) total_pos += static_cast<std::size_t>(y);
        const std::size_t total_neg = pts.size() - total_pos;

        // Threshold candidates: below the smallest value, then between each
        // pair of distinct neighbors.
        std::size_t pos_le = 0;
        std::size_t neg_le = 0;
        auto consider = [&](double threshold) {
            // polarity +1: positives are the x > threshold side
            const std::size_t err_plus = pos_le + (total_neg - neg_le);
            const std::size_t err_minus = pts.size() - err_plus;
            if (err_plus < best_err) {
                best_err = err_plus;
                model.stump_feature = f;
                model.stump_threshold = threshold;
                model.stump_polarity = 1;
            }
            if (err_minus < best_err) {
                best_err = err_minus;
                model.stump_feature = f;
                model.stump_threshold = threshold;
                model.stump_polarity = -1;
            }
        };
        consider(pts.front().first - 1.0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pos_le += static_cast<std::size_t>(pts[i].second);
            neg_le += static_cast<std::size_t>(1 - pts[i].second);
            if (i + 1 < pts.size()) {
                if (pts[i].first == pts[i + 1].first) continue;
                consider(0.5 * (pts[i].first + pts[i + 1].first));
            } else {
                consider(pts[i].first + 1.0);
            }
        }
    }
    return model;
}

int predict(const Model& model, const TabularDataset& data, std::size_t i) {
    switch (model.spec.kind) {
    case ClassifierSpec::Kind::bernoulli: {
        rng::Rng gen(rng::derive_seed(model.seed, rng::Stream::classifier,
                                      data.row_ids[i]));
        const bool correct = gen.uniform01() < model.spec.p_correct;
        return correct ? data.label[i] : 1 - data.label[i];
    }
    case ClassifierSpec::Kind::logistic: {
        const auto x = data.row(i);
        const std::size_t d = data.d;
        double z = model.weights[d];
        for (std::size_t f = 0; f < d; ++f) z += model.weights[f] * x[f];
        return z >= 0.0 ? 1 : 0;
    }
    case ClassifierSpec::Kind::stump: {
        const double x = data.features[i * data.d + model.stump_feature];
        const bool above = x > model.stump_threshold;
        return (model.stump_polarity > 0) == above ? 1 : 0;
    }
    }
    return 0;
}

std::vector<std::string> sorted_groups(const TabularDataset& data) {
    std::vector<std::string> labels(data.group.begin(), data.group.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

std::vector<GroupConfusionMatrix> count_fold(const TabularDataset& data,
                                             const Model& model,
                                             std::span<const std::size_t> eval_idx,
                                             std::span<const std::string> groups) {
    std::vector<GroupConfusionMatrix> cms(groups.size());
    std::map<std::string, std::size_t> pos;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        cms[g].group_id = groups[g];
        pos[groups[g]] = g;
    }
    for (std::size_t i : eval_idx) {
        auto& cm = cms[pos.at(data.group[i])];
        const int y = data.label[i];
        const int yhat = predict(model, data, i);
        if (y == 1) {
            (yhat == 1 ? cm.tp : cm.fn) += 1.0;
        } else {
            (yhat == 0 ? cm.tn : cm.fp) += 1.0;
        }
    }
    return cms;
}

} // namespace

EvaluationInput run_cv(const TabularDataset& data, const ClassifierSpec& spec,
                       int folds, std::uint64_t seed) {
    const auto split =
        kfold_split(data, folds, rng::derive_seed(seed, rng::Stream::split, 0));
    const auto groups = sorted_groups(data);

    EvaluationInput input;
    input.source = EvaluationSource::kfold;
    input.folds.reserve(split.size());
    std::vector<std::size_t> train_idx;
    for (std::size_t k = 0; k < split.size(); ++k) {
        train_idx.clear();
        for (std::size_t j = 0; j < split.size(); ++j) {
            if (j == k) continue;
            train_idx.insert(train_idx.end(), split[j].begin(), split[j].end());
        }
        Model model;
        try {
            model = train(data, train_idx, spec, seed);
        } catch (const ConfigError& e) {
            throw ConfigError("fold " + std::to_string(k) + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError("fold " + std::to_string(k) + ": " + e.what());
        } catch (const Error& e) {
            throw Error("fold " + std::to_string(k) + ": " + e.what());
        }
        input.folds.push_back(count_fold(data, model, split[k], groups));
    }
    input.validate();
    return input;
}

EvaluationInput run_holdout(const TabularDataset& data,
                            const ClassifierSpec& spec, std::uint64_t seed) {
    data.validate();
    std::vector<std::size_t> all(data.n);
    for (std::size_t i = 0; i < data.n; ++i) all[i] = i;
    const Model model = train(data, all, spec, seed);
    EvaluationInput input;
    input.source = EvaluationSource::holdout;
    input.folds.push_back(count_fold(data, model, all, sorted_groups(data)));
    input.validate();
    return input;
}

namespace {

// Mean over folds of the metric's first column, groups in sorted order.
double cv_metric_mean(const EvaluationInput& input, const MetricSpec& metric) {
    double acc = 0.0;
    for (const auto& fold : input.folds) {
        std::vector<GroupConfusionMatrix> groups = fold;
        std::sort(groups.begin(), groups.end(),
                  [](const auto& a, const auto& b) {
                      return a.group_id < b.group_id;
                  });
        const double v = metric.evaluate(groups)[0];
        if (std::isnan(v)) {
            throw Error("metric '" + metric.name +
                        "' is undefined on a cross-validation fold");
        }
        acc += v;
    }
    return acc / static_cast<double>(input.fold_count());
}

} // namespace

std::vector<HalfSplitPair> half_split_protocol(const TabularDataset& data,
                                               const ClassifierSpec& spec,
                                               int folds, int m_pairs,
                                               const MetricSpec& metric,
                                               std::uint64_t seed) {
    data.validate();
    if (m_pairs < 1) throw ConfigError("half_split_protocol: M must be >= 1");
    const std::size_t half = data.n / 2;
    if (half < 2 * static_cast<std::size_t>(folds)) {
        throw InputError("dataset too small for the half-split protocol: "
                         "floor(n/2) = " + std::to_string(half) +
                         " but 2K = " + std::to_string(2 * folds));
    }

    std::vector<std::size_t> order(data.n);
    std::vector<HalfSplitPair> pairs;
    pairs.reserve(static_cast<std::size_t>(m_pairs));
    for (int m = 0; m < m_pairs; ++m) {
        for (std::size_t i = 0; i < data.n; ++i) order[i] = i;
        rng::Rng gen(rng::derive_seed(seed, rng::Stream::half_split,
                                      static_cast<std::uint64_t>(m)));
        gen.shuffle(order);
        const auto first = std::span<const std::size_t>(order).subspan(0, half);
        const auto second =
            std::span<const std::size_t>(order).subspan(half, half);
        const auto d_half = data.subset(first);
        const auto d_comp = data.subset(second);

        const auto cv_a =
            run_cv(d_half, spec, folds,
                   rng::derive_seed(seed, rng::Stream::repeat,
                                    static_cast<std::uint64_t>(2 * m)));
        const auto cv_b =
            run_cv(d_comp, spec, folds,
                   rng::derive_seed(seed, rng::Stream::repeat,
                                    static_cast<std::uint64_t>(2 * m + 1)));
        pairs.push_back({cv_metric_mean(cv_a, metric),
                         cv_metric_mean(cv_b, metric)});
    }
    return pairs;
}

SweepResult repeated_cv_sweep(const TabularDataset& data,
                              const ClassifierSpec& spec, int folds,
                              int repeats, std::span<const MetricSpec> metrics,
                              std::uint64_t seed) {
    if (repeats < 1) throw ConfigError("repeated_cv_sweep: repeats must be >= 1");
    if (metrics.empty()) throw ConfigError("repeated_cv_sweep: no metrics");

    SweepResult result;
    result.columns = metric_columns(metrics);
    result.repeats = static_cast<std::size_t>(repeats);
    result.points.reserve(result.repeats * result.columns.size());

    for (int r = 0; r < repeats; ++r) {
        const auto input =
            run_cv(data, spec, folds,
                   rng::derive_seed(seed, rng::Stream::repeat,
                                    static_cast<std::uint64_t>(r)));
        std::vector<GroupConfusionMatrix> pooled;
        for (const auto& label : input.group_labels()) {
            pooled.push_back(input.summed_group(label));
        }
        for (const auto& metric : metrics) {
            const auto values = metric.evaluate(pooled);
            result.points.insert(result.points.end(), values.begin(),
                                 values.end());
        }
    }
    return result;
}

} // namespace posteval::harness
