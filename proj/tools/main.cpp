// posteval: posterior uncertainty for classifier performance and fairness
// metrics. Subcommands cover the full pipeline: posterior sampling from
// evaluation data, two-method comparison against a practical-equivalence
// box, highest-density regions, the fold-correlation estimator, and a
// self-contained coverage experiment.

#include "CLI11.hpp"

#include "posteval/comparison.hpp"
#include "posteval/errors.hpp"
#include "posteval/harness.hpp"
#include "posteval/hdr.hpp"
#include "posteval/io.hpp"
#include "posteval/kfold.hpp"
#include "posteval/metrics.hpp"
#include "posteval/posterior.hpp"
#include "posteval/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace posteval;

// Paths fully written by the running command; removed if a later step
// fails so a command either produces all of its outputs or none.
std::vector<std::string> g_written;

void note_written(const std::string& path) { g_written.push_back(path); }

void discard_written() {
    for (const auto& path : g_written) {
        std::error_code ec;
        std::filesystem::remove(path, ec);
    }
    g_written.clear();
}

std::vector<double> parse_real_list(const std::string& text,
                                    const char* what) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item =
            text.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start);
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || end != item.c_str() + item.size()) {
            throw ConfigError(std::string(what) + ": '" + item +
                              "' is not a number");
        }
        values.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return values;
}

// Shared flags: a config file plus direct overrides.
struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 0;
    bool threads_set = false;

    io::RunConfig load() const {
        io::RunConfig cfg;
        if (!config_path.empty()) cfg = io::load_config(config_path);
        if (seed_set) cfg.seed = seed;
        if (threads_set) cfg.threads = threads;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path,
                    "JSON run configuration (flags override it)");
    cmd->add_option("--seed", opts.seed, "Master seed for all randomness")
        ->trigger_on_parse()
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads,
                    "Worker threads for sampling (0 = hardware)")
        ->each([&opts](const std::string&) { opts.threads_set = true; });
}

std::vector<MetricSpec> default_or_resolved(const std::vector<std::string>& names,
                                            std::size_t group_count) {
    if (!names.empty()) return resolve_metrics(names);
    if (group_count >= 2) return resolve_metrics({"accuracy", "dp"});
    return resolve_metrics({"accuracy"});
}

double variance_ratio(double sigma_reference, double sigma_target) {
    if (sigma_reference == 0.0 && sigma_target == 0.0) return 1.0;
    if (sigma_target == 0.0) {
        throw ConfigError("target classifier shows zero half-split variance; "
                          "the variance ratio is undefined");
    }
    return sigma_reference / sigma_target;
}

// --- posterior ---

struct PosteriorOpts {
    CommonOpts common;
    std::string input;
    std::string out;
    std::vector<std::string> metrics;
    std::int64_t draws = 0;
    std::string rho; // fixed | interval | explicit value
    std::string reference_group;
};

void run_posterior(const PosteriorOpts& opts) {
    io::RunConfig cfg = opts.common.load();
    if (opts.draws > 0) cfg.draws = opts.draws;
    if (!opts.metrics.empty()) cfg.metrics = opts.metrics;
    if (!opts.reference_group.empty()) cfg.reference_group = opts.reference_group;

    const EvaluationInput input = io::load_evaluation(opts.input, cfg);
    const auto metrics =
        default_or_resolved(cfg.metrics, input.group_labels().size());

    std::optional<RhoEstimate> rho_est;
    std::optional<double> rho;
    if (input.source == EvaluationSource::kfold) {
        const int k = static_cast<int>(input.fold_count());
        std::string choice = opts.rho;
        if (choice.empty()) choice = to_string(cfg.rho_strategy);
        if (choice == "fixed") {
            rho_est = k >= 2 ? rho_fixed(k) : RhoEstimate{};
        } else if (choice == "interval") {
            rho_est = k >= 2 ? rho_interval(k) : RhoEstimate{};
        } else if (choice == "relative" || choice == "relative_interval") {
            throw ConfigError("rho strategy '" + choice +
                              "' needs the half-split protocol; run "
                              "estimate-rho and pass --rho <value>");
        } else {
            char* end = nullptr;
            const double v = std::strtod(choice.c_str(), &end);
            if (end != choice.c_str() + choice.size() || !(v >= 0.0 && v <= 1.0)) {
                throw ConfigError("--rho must be fixed, interval, or a value "
                                  "in [0,1], got '" + choice + "'");
            }
            RhoEstimate est;
            est.value = v;
            rho_est = est;
        }
        rho = rho_est->value;
        std::cout << "effective confusion matrix: scale 1/"
                  << effective_scale(input.fold_count(), *rho) << " (K=" << k
                  << ", rho=" << *rho << ")\n";
    }

    const auto posteriors = posterior_from_input(
        input, [&cfg](const std::string& g) { return cfg.prior_for(g); }, rho,
        cfg.reference_group);

    SampleOptions sample_opts;
    sample_opts.draws = cfg.draws;
    sample_opts.seed = cfg.seed;
    sample_opts.threads = cfg.threads;
    const JointSampleMatrix samples =
        sample_joint(posteriors, metrics, sample_opts);

    io::save_samples_csv(samples, opts.out + ".samples.csv");
    note_written(opts.out + ".samples.csv");

    io::SummaryReport report;
    report.draws = cfg.draws;
    report.seed = cfg.seed;
    report.source = input.source;
    report.rho = rho_est;
    if (rho) {
        report.effective_scale = effective_scale(input.fold_count(), *rho);
    }
    for (const auto& gp : posteriors) {
        report.group_totals.emplace_back(gp.posterior.group_id,
                                         gp.resample_total);
    }
    for (const auto& column : samples.columns) {
        MarginalSummary summary;
        try {
            summary = marginal_summary(samples, column);
        } catch (const InputError&) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            summary.mean = summary.sd = summary.ci_lo = summary.ci_hi = nan;
            summary.used = 0;
            summary.flagged = samples.rows;
        }
        report.columns.emplace_back(column, summary);
        std::cout << column << ": mean=" << summary.mean
                  << " sd=" << summary.sd << " ci" << summary.ci_level * 100
                  << "=[" << summary.ci_lo << ", " << summary.ci_hi
                  << "] flagged=" << summary.flagged << "\n";
    }
    io::save_summary_json(report, opts.out + ".summary.json");
    note_written(opts.out + ".summary.json");
}

// --- compare ---

struct CompareOpts {
    CommonOpts common;
    std::string a_path;
    std::string b_path;
    std::string out;
    std::string rope;
    std::string mode;
};

void run_compare(const CompareOpts& opts) {
    io::RunConfig cfg = opts.common.load();
    const JointSampleMatrix a = io::load_samples_csv(opts.a_path);
    const JointSampleMatrix b = io::load_samples_csv(opts.b_path);
    const auto metrics = metrics_from_columns(a.columns);
    const GapMode mode =
        opts.mode.empty() ? cfg.gap_mode : parse_gap_mode(opts.mode);

    JointSampleMatrix gap = gap_distribution(a, b, metrics, mode);

    std::vector<double> eps;
    if (!opts.rope.empty()) {
        eps = parse_real_list(opts.rope, "--rope");
    } else if (!cfg.rope_eps.empty()) {
        eps = cfg.rope_eps;
    } else {
        eps.assign(gap.columns.size(), 0.01);
    }
    if (eps.size() != gap.columns.size()) {
        throw ConfigError("rope lists " + std::to_string(eps.size()) +
                          " half-widths but the comparison has " +
                          std::to_string(gap.columns.size()) + " axes");
    }

    const ComparisonReport report = compare(std::move(gap), eps);
    io::save_comparison_json(report, mode, eps, opts.out + ".report.json");
    note_written(opts.out + ".report.json");
    io::save_samples_csv(report.gap_samples, opts.out + ".gaps.csv");
    note_written(opts.out + ".gaps.csv");

    std::cout << "P(A~B)  = " << report.p_equivalent << "\n"
              << "P(A>>B) = " << report.p_a_outperforms << "\n"
              << "P(B>>A) = " << report.p_b_outperforms << "\n"
              << "flagged: " << report.flagged << " of "
              << report.flagged + report.used << " samples\n";
}

// --- estimate-rho ---

struct EstimateRhoOpts {
    CommonOpts common;
    std::string dataset;
    std::string classifier;
    std::string reference_classifier;
    int folds = 10;
    int m_pairs = 5;
    std::string reference_rho = "fixed";
    std::string metric = "accuracy";
    std::string out;
};

void run_estimate_rho(const EstimateRhoOpts& opts) {
    const io::RunConfig cfg = opts.common.load();
    const auto data = io::load_dataset(opts.dataset, cfg);
    const auto target = harness::ClassifierSpec::parse(opts.classifier);
    const auto reference = opts.reference_classifier.empty()
                               ? target
                               : harness::ClassifierSpec::parse(
                                     opts.reference_classifier);
    const MetricSpec& metric = find_metric(opts.metric);

    const auto target_pairs = harness::half_split_protocol(
        data, target, opts.folds, opts.m_pairs, metric, cfg.seed);
    const bool same = reference.to_string() == target.to_string();
    const auto reference_pairs =
        same ? target_pairs
             : harness::half_split_protocol(data, reference, opts.folds,
                                            opts.m_pairs, metric, cfg.seed);

    const double sigma_target = sigma_over(target_pairs);
    const double sigma_reference = sigma_over(reference_pairs);
    const double r_over = variance_ratio(sigma_reference, sigma_target);

    RhoEstimate rho0;
    if (opts.reference_rho == "fixed") {
        rho0 = rho_fixed(opts.folds);
    } else if (opts.reference_rho == "interval") {
        rho0 = rho_interval(opts.folds);
    } else {
        throw ConfigError("--reference-rho must be fixed or interval, got '" +
                          opts.reference_rho + "'");
    }
    rho0.reference_method = reference.to_string();
    const RhoEstimate estimate = rho_relative(rho0, r_over, opts.folds);

    std::cout << io::rho_report_json(estimate, sigma_reference, sigma_target)
              << "\n";
    if (!opts.out.empty()) {
        io::save_rho_json(estimate, sigma_reference, sigma_target, opts.out);
        note_written(opts.out);
    }
}

// --- hdr ---

struct HdrOpts {
    CommonOpts common;
    std::string samples_path;
    std::string out;
    std::vector<std::string> columns;
    double coverage = 0.0; // 0 = from config
    std::size_t grid = 0;
};

void run_hdr(const HdrOpts& opts) {
    const io::RunConfig cfg = opts.common.load();
    const JointSampleMatrix samples = io::load_samples_csv(opts.samples_path);
    const std::vector<std::string> columns =
        opts.columns.empty() ? samples.columns : opts.columns;
    const double coverage = opts.coverage > 0.0 ? opts.coverage : cfg.coverage;

    const HdrRegion region = fit_hdr(samples, columns, coverage, opts.grid);
    io::save_hdr_json(region, opts.out + ".hdr.json");
    note_written(opts.out + ".hdr.json");
    if (region.dimension == 2 && !region.degenerate) {
        io::save_hdr_mask_csv(region, opts.out + ".mask.csv");
        note_written(opts.out + ".mask.csv");
    }

    std::cout << "f_alpha=" << region.f_alpha << " area=" << region.area
              << " coverage_target=" << region.coverage_target << "\n";
    if (region.degenerate) {
        std::cout << "warning: degenerate axis collapsed to a point; area is "
                     "zero\n";
    }
    for (const auto& iv : region.intervals) {
        std::cout << "interval: [" << iv.lo << ", " << iv.hi << "]\n";
    }
}

// --- experiment coverage ---

struct CoverageOpts {
    CommonOpts common;
    std::string dataset;
    std::string classifier;
    std::string reference_classifier;
    std::string out;
    int folds = 10;
    int repeats = 100;
    int m_pairs = 5;
    std::int64_t draws = 100000;
    double coverage = 0.95;
    std::vector<std::string> strategies;
    std::vector<std::string> metrics;
    std::string anchor_metric = "accuracy";
};

void run_experiment_coverage(const CoverageOpts& opts) {
    const io::RunConfig cfg = opts.common.load();
    const auto data = io::load_dataset(opts.dataset, cfg);
    const auto target = harness::ClassifierSpec::parse(opts.classifier);
    const auto metrics = opts.metrics.empty()
                             ? resolve_metrics({"accuracy"})
                             : resolve_metrics(opts.metrics);
    const auto columns = metric_columns(metrics);
    if (columns.size() > 2) {
        throw ConfigError("coverage experiment supports at most 2 metric "
                          "columns (the HDR is 1-D or 2-D)");
    }

    std::vector<RhoStrategy> strategies;
    if (opts.strategies.empty()) {
        strategies = {RhoStrategy::fixed, RhoStrategy::interval,
                      RhoStrategy::relative, RhoStrategy::relative_interval};
    } else {
        for (const auto& name : opts.strategies) {
            strategies.push_back(parse_rho_strategy(name));
        }
    }

    const auto anchor_input =
        harness::run_cv(data, target, opts.folds,
                        rng::derive_seed(cfg.seed, rng::Stream::replicate, 0));
    const auto sweep = harness::repeated_cv_sweep(data, target, opts.folds,
                                                  opts.repeats, metrics,
                                                  cfg.seed);

    // Variance ratio, only when a relative strategy is requested.
    std::optional<double> r_over;
    const bool needs_ratio =
        std::any_of(strategies.begin(), strategies.end(), [](RhoStrategy s) {
            return s == RhoStrategy::relative ||
                   s == RhoStrategy::relative_interval;
        });
    if (needs_ratio) {
        const auto reference = opts.reference_classifier.empty()
                                   ? target
                                   : harness::ClassifierSpec::parse(
                                         opts.reference_classifier);
        const MetricSpec& anchor = find_metric(opts.anchor_metric);
        const auto target_pairs = harness::half_split_protocol(
            data, target, opts.folds, opts.m_pairs, anchor, cfg.seed);
        const auto reference_pairs =
            reference.to_string() == target.to_string()
                ? target_pairs
                : harness::half_split_protocol(data, reference, opts.folds,
                                               opts.m_pairs, anchor, cfg.seed);
        r_over = variance_ratio(sigma_over(reference_pairs),
                                sigma_over(target_pairs));
    }

    std::vector<io::CoverageResult> rows;
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        RhoEstimate est;
        switch (strategies[s]) {
        case RhoStrategy::fixed:
            est = rho_fixed(opts.folds);
            break;
        case RhoStrategy::interval:
            est = rho_interval(opts.folds);
            break;
        case RhoStrategy::relative:
            est = rho_relative(rho_fixed(opts.folds), *r_over, opts.folds);
            break;
        case RhoStrategy::relative_interval:
            est = rho_relative(rho_interval(opts.folds), *r_over, opts.folds);
            break;
        }

        const auto posteriors = posterior_from_input(
            anchor_input, [&cfg](const std::string& g) { return cfg.prior_for(g); },
            est.value, cfg.reference_group);
        SampleOptions sample_opts;
        sample_opts.draws = opts.draws;
        sample_opts.seed = rng::derive_seed(cfg.seed, rng::Stream::method_a, s);
        sample_opts.threads = cfg.threads;
        const auto samples = sample_joint(posteriors, metrics, sample_opts);
        const HdrRegion region = fit_hdr(samples, columns, opts.coverage);
        const double pct = 100.0 * coverage_fraction(region, sweep.points);

        io::CoverageResult row;
        row.strategy = to_string(strategies[s]);
        row.rho_value = est.value;
        row.interval = est.interval;
        row.area = region.area;
        row.pct_res = pct;
        row.repeats = sweep.repeats;
        rows.push_back(row);
        std::cout << row.strategy << ": rho=" << row.rho_value
                  << " area=" << row.area << " pct_res=" << row.pct_res
                  << "\n";
    }

    io::save_coverage_json(rows, opts.out + ".coverage.json");
    note_written(opts.out + ".coverage.json");
    io::save_coverage_csv(rows, opts.out + ".coverage.csv");
    note_written(opts.out + ".coverage.csv");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Posterior uncertainty for classifier performance and "
                 "fairness metrics"};
    app.require_subcommand(1);

    PosteriorOpts posterior_opts;
    auto* posterior_cmd = app.add_subcommand(
        "posterior", "Sample the joint metric posterior from evaluation data");
    posterior_cmd->add_option("--input", posterior_opts.input,
                              "Predictions or confusion-matrix CSV")
        ->required();
    posterior_cmd->add_option("--out", posterior_opts.out,
                              "Output prefix (.samples.csv, .summary.json)")
        ->required();
    posterior_cmd
        ->add_option("--metrics", posterior_opts.metrics,
                     "Metric names (default: accuracy, plus dp with 2 groups)")
        ->delimiter(',');
    posterior_cmd->add_option("-T,--draws", posterior_opts.draws,
                              "Posterior sample count");
    posterior_cmd->add_option(
        "--rho", posterior_opts.rho,
        "K-fold correlation: fixed, interval, or a value in [0,1]");
    posterior_cmd->add_option("--reference-group",
                              posterior_opts.reference_group,
                              "Group treated as group 0 in fairness gaps");
    add_common(posterior_cmd, posterior_opts.common);
    posterior_cmd->callback([&] { run_posterior(posterior_opts); });

    CompareOpts compare_opts;
    auto* compare_cmd = app.add_subcommand(
        "compare", "Compare two methods' posterior sample files");
    compare_cmd->add_option("--a", compare_opts.a_path, "Method A samples CSV")
        ->required();
    compare_cmd->add_option("--b", compare_opts.b_path, "Method B samples CSV")
        ->required();
    compare_cmd->add_option("--out", compare_opts.out,
                            "Output prefix (.report.json, .gaps.csv)")
        ->required();
    compare_cmd->add_option("--rope", compare_opts.rope,
                            "Per-axis half-widths, e.g. 0.01,0.01");
    compare_cmd->add_option("--mode", compare_opts.mode,
                            "Gap orientation: oriented (default) or raw");
    add_common(compare_cmd, compare_opts.common);
    compare_cmd->callback([&] { run_compare(compare_opts); });

    EstimateRhoOpts rho_opts;
    auto* rho_cmd = app.add_subcommand(
        "estimate-rho",
        "Estimate the fold correlation via the disjoint-half protocol");
    rho_cmd->add_option("--dataset", rho_opts.dataset,
                        "Tabular CSV or synthetic-spec JSON")
        ->required();
    rho_cmd->add_option("--classifier", rho_opts.classifier,
                        "Target classifier spec")
        ->required();
    rho_cmd->add_option("--reference-classifier",
                        rho_opts.reference_classifier,
                        "Reference classifier spec (default: target)");
    rho_cmd->add_option("-K,--folds", rho_opts.folds, "Folds per CV");
    rho_cmd->add_option("-M,--pairs", rho_opts.m_pairs,
                        "Half-split repetitions");
    rho_cmd->add_option("--reference-rho", rho_opts.reference_rho,
                        "Reference correlation: fixed or interval");
    rho_cmd->add_option("--metric", rho_opts.metric,
                        "Metric driving the variance ratio");
    rho_cmd->add_option("--out", rho_opts.out, "Also write the JSON here");
    add_common(rho_cmd, rho_opts.common);
    rho_cmd->callback([&] { run_estimate_rho(rho_opts); });

    HdrOpts hdr_opts;
    auto* hdr_cmd = app.add_subcommand(
        "hdr", "Highest-density region of a sample file");
    hdr_cmd->add_option("--samples", hdr_opts.samples_path, "Samples CSV")
        ->required();
    hdr_cmd->add_option("--out", hdr_opts.out,
                        "Output prefix (.hdr.json, .mask.csv when 2-D)")
        ->required();
    hdr_cmd->add_option("--columns", hdr_opts.columns,
                        "Columns to use (default: all; 1 or 2)")
        ->delimiter(',');
    hdr_cmd->add_option("--coverage", hdr_opts.coverage,
                        "Target mass, in (0,1)");
    hdr_cmd->add_option("--grid", hdr_opts.grid,
                        "Grid nodes per axis (default 512 / 256)");
    add_common(hdr_cmd, hdr_opts.common);
    hdr_cmd->callback([&] { run_hdr(hdr_opts); });

    auto* experiment_cmd =
        app.add_subcommand("experiment", "Self-contained experiment drivers");
    experiment_cmd->require_subcommand(1);
    CoverageOpts coverage_opts;
    auto* coverage_cmd = experiment_cmd->add_subcommand(
        "coverage",
        "HDR area and repeated-CV coverage per rho strategy");
    coverage_cmd->add_option("--dataset", coverage_opts.dataset,
                             "Tabular CSV or synthetic-spec JSON")
        ->required();
    coverage_cmd->add_option("--classifier", coverage_opts.classifier,
                             "Classifier spec")
        ->required();
    coverage_cmd->add_option("--out", coverage_opts.out,
                             "Output prefix (.coverage.json/.csv)")
        ->required();
    coverage_cmd->add_option("-K,--folds", coverage_opts.folds, "Folds per CV");
    coverage_cmd->add_option("-R,--repeats", coverage_opts.repeats,
                             "Repeated-CV count");
    coverage_cmd
        ->add_option("--rho-strategy", coverage_opts.strategies,
                     "Strategies to evaluate (default: all four)")
        ->delimiter(',');
    coverage_cmd->add_option("--metrics", coverage_opts.metrics,
                             "Metrics (1-2 columns; default accuracy)")
        ->delimiter(',');
    coverage_cmd->add_option("--anchor-metric", coverage_opts.anchor_metric,
                             "Metric driving the variance ratio");
    coverage_cmd->add_option("--reference-classifier",
                             coverage_opts.reference_classifier,
                             "Reference for relative strategies");
    coverage_cmd->add_option("-M,--pairs", coverage_opts.m_pairs,
                             "Half-split repetitions");
    coverage_cmd->add_option("-T,--draws", coverage_opts.draws,
                             "Posterior sample count");
    coverage_cmd->add_option("--coverage", coverage_opts.coverage,
                             "HDR target mass");
    add_common(coverage_cmd, coverage_opts.common);
    coverage_cmd->callback([&] { run_experiment_coverage(coverage_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        discard_written();
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
