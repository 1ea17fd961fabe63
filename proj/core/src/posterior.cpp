#include "posteval/posterior.hpp"

#include "posteval/errors.hpp"
#include "posteval/kfold.hpp"
#include "posteval/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace posteval {

DirichletPosterior update(const DirichletPrior& prior,
                          const GroupConfusionMatrix& observed) {
    prior.validate();
    observed.validate();
    DirichletPosterior post;
    post.group_id = observed.group_id;
    const auto cells = observed.cells();
    for (std::size_t i = 0; i < 4; ++i) {
        post.alpha_post[i] = prior.alpha[i] + cells[i];
    }
    return post;
}

double round_half_even(double x) noexcept {
    const double floor_x = std::floor(x);
    const double frac = x - floor_x;
    if (frac > 0.5) return floor_x + 1.0;
    if (frac < 0.5) return floor_x;
    return std::fmod(floor_x, 2.0) == 0.0 ? floor_x : floor_x + 1.0;
}

namespace {

void sample_row(std::uint64_t master_seed, std::int64_t t,
                std::span<const GroupPosterior> groups,
                std::span<const MetricSpec> metrics,
                std::vector<GroupConfusionMatrix>& scratch,
                std::span<double> out_row) {
    rng::Rng gen(rng::derive_seed(master_seed, rng::Stream::sample_row,
                                  static_cast<std::uint64_t>(t)));
    double pi[4];
    std::int64_t counts[4];
    for (std::size_t g = 0; g < groups.size(); ++g) {
        gen.dirichlet(groups[g].posterior.alpha_post, pi);
        gen.multinomial(groups[g].resample_total, pi, counts);
        auto& cm = scratch[g];
        cm.tp = static_cast<double>(counts[0]);
        cm.tn = static_cast<double>(counts[1]);
        cm.fp = static_cast<double>(counts[2]);
        cm.fn = static_cast<double>(counts[3]);
    }
    std::size_t col = 0;
    for (const auto& metric : metrics) {
        metric.evaluator(scratch, out_row.subspan(col, metric.arity));
        col += metric.arity;
    }
}

} // namespace

JointSampleMatrix sample_joint(std::span<const GroupPosterior> groups,
                               std::span<const MetricSpec> metrics,
                               const SampleOptions& options) {
    if (options.draws < 1) throw ConfigError("sample_joint: draws must be >= 1");
    if (groups.empty()) throw InputError("sample_joint: no groups");
    if (metrics.empty()) throw ConfigError("sample_joint: no metrics requested");
    for (const auto& g : groups) {
        for (double a : g.posterior.alpha_post) {
            if (!(a > 0.0)) {
                throw InputError("posterior for group '" + g.posterior.group_id +
                                 "' has a non-positive concentration");
            }
        }
        if (g.resample_total < 1) {
            throw InputError("group '" + g.posterior.group_id +
                             "' has a non-positive resample total");
        }
    }

    // Surface configuration errors (e.g. a two-group metric on one group)
    // before any worker thread runs: evaluate once at the posterior mean.
    {
        std::vector<GroupConfusionMatrix> mean_cms(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& a = groups[g].posterior.alpha_post;
            const double a0 = groups[g].posterior.concentration();
            const double n = static_cast<double>(groups[g].resample_total);
            mean_cms[g].group_id = groups[g].posterior.group_id;
            mean_cms[g].tp = n * a[0] / a0;
            mean_cms[g].tn = n * a[1] / a0;
            mean_cms[g].fp = n * a[2] / a0;
            mean_cms[g].fn = n * a[3] / a0;
        }
        std::vector<double> probe;
        for (const auto& metric : metrics) {
            probe.resize(metric.arity);
            metric.evaluator(mean_cms, probe);
        }
    }

    JointSampleMatrix samples;
    samples.columns = metric_columns(metrics);
    samples.rows = static_cast<std::size_t>(options.draws);
    samples.seed = options.seed;
    samples.data.resize(samples.rows * samples.columns.size());

    unsigned threads = options.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t total = samples.rows;
    threads = static_cast<unsigned>(
        std::min<std::size_t>(threads, std::max<std::size_t>(total / 256, 1)));

    auto worker = [&](std::size_t begin, std::size_t end) {
        std::vector<GroupConfusionMatrix> scratch(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            scratch[g].group_id = groups[g].posterior.group_id;
        }
        for (std::size_t t = begin; t < end; ++t) {
            sample_row(options.seed, static_cast<std::int64_t>(t), groups, metrics,
                       scratch, samples.row(t));
        }
    };

    if (threads <= 1) {
        worker(0, total);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const std::size_t chunk = (total + threads - 1) / threads;
        for (unsigned i = 0; i < threads; ++i) {
            const std::size_t begin = static_cast<std::size_t>(i) * chunk;
            if (begin >= total) break;
            const std::size_t end = std::min(begin + chunk, total);
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return samples;
}

std::vector<GroupPosterior> posterior_from_input(
    const EvaluationInput& input,
    const DirichletPrior& prior,
    std::optional<double> rho,
    const std::optional<std::string>& reference_group) {
    return posterior_from_input(
        input, [&prior](const std::string&) { return prior; }, rho,
        reference_group);
}

std::vector<GroupPosterior> posterior_from_input(
    const EvaluationInput& input,
    const std::function<DirichletPrior(const std::string&)>& prior_for,
    std::optional<double> rho,
    const std::optional<std::string>& reference_group) {
    input.validate();

    std::vector<std::string> labels = input.group_labels();
    if (reference_group) {
        auto it = std::find(labels.begin(), labels.end(), *reference_group);
        if (it == labels.end()) {
            throw ConfigError("reference group '" + *reference_group +
                              "' not present in input");
        }
        std::rotate(labels.begin(), it, it + 1);
    }

    const bool is_kfold = input.source == EvaluationSource::kfold;
    if (is_kfold && !rho) {
        throw ConfigError("K-fold input requires a correlation rho for the "
                          "effective confusion matrix");
    }

    std::vector<GroupPosterior> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        GroupConfusionMatrix cm;
        if (is_kfold) {
            std::vector<GroupConfusionMatrix> fold_cms;
            fold_cms.reserve(input.fold_count());
            for (const auto& fold : input.folds) {
                for (const auto& g : fold) {
                    if (g.group_id == label) fold_cms.push_back(g);
                }
            }
            cm = effective_cm(fold_cms, *rho);
            cm.group_id = label;
        } else {
            cm = input.folds.front()[0];
            for (const auto& g : input.folds.front()) {
                if (g.group_id == label) cm = g;
            }
        }
        if (!(cm.total() > 0.0)) {
            throw InputError("group '" + label + "' has zero total count");
        }
        GroupPosterior gp;
        gp.posterior = update(prior_for(label), cm);
        gp.resample_total =
            static_cast<std::int64_t>(round_half_even(cm.total()));
        if (gp.resample_total < 1) gp.resample_total = 1;
        out.push_back(std::move(gp));
    }
    return out;
}

MarginalSummary marginal_summary(const JointSampleMatrix& samples,
                                 const std::string& column,
                                 double ci_level) {
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw ConfigError("credible-interval level must lie in (0, 1)");
    }
    const std::size_t c = samples.column_index(column);
    std::vector<double> values;
    values.reserve(samples.rows);
    std::size_t flagged = 0;
    for (std::size_t r = 0; r < samples.rows; ++r) {
        const double v = samples.at(r, c);
        if (std::isnan(v)) {
            ++flagged;
        } else {
            values.push_back(v);
        }
    }
    if (values.empty()) {
        throw InputError("column '" + column + "': every sample is flagged");
    }

    MarginalSummary summary;
    summary.flagged = flagged;
    summary.used = values.size();
    summary.ci_level = ci_level;

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    summary.mean = mean;
    summary.sd = values.size() > 1
                     ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                     : 0.0;

    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double h = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = h - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    const double tail = (1.0 - ci_level) / 2.0;
    summary.ci_lo = quantile(tail);
    summary.ci_hi = quantile(1.0 - tail);
    return summary;
}

} // namespace posteval
