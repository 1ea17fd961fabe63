#pragma once

#include "posteval/comparison.hpp"
#include "posteval/harness.hpp"
#include "posteval/hdr.hpp"
#include "posteval/kfold.hpp"
#include "posteval/posterior.hpp"
#include "posteval/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace posteval::io {

// Label mapping for prediction files: which strings mean "positive class"
// and "negative class".
struct LabelConfig {
    std::string positive = "1";
    std::string negative = "0";
};

// Run configuration, loadable from a JSON file. Anything not present in the
// file keeps its default.
struct RunConfig {
    LabelConfig labels;
    std::optional<std::vector<std::string>> groups; // declared group set
    std::optional<std::string> reference_group;
    std::map<std::string, std::array<double, 4>> group_priors;
    std::array<double, 4> default_prior{1.0, 1.0, 1.0, 1.0};
    std::int64_t draws = 100000;
    std::uint64_t seed = 0;
    std::vector<double> rope_eps; // empty: 0.01 per gap axis
    RhoStrategy rho_strategy = RhoStrategy::fixed;
    std::vector<std::string> metrics; // empty: accuracy (+ dp given 2 groups)
    GapMode gap_mode = GapMode::oriented;
    double coverage = 0.95;
    unsigned threads = 0;

    DirichletPrior prior_for(const std::string& group) const;
};

RunConfig load_config(const std::string& path);

// --- ingestion ---

// CSV with header y_true,y_pred,group[,fold]; counts per-(fold,group)
// confusion matrices. Labels must match the configured positive/negative
// strings; groups must belong to the declared set when one is given; fold
// indices, when present, must cover 0..K-1.
EvaluationInput load_predictions(const std::string& path,
                                 const RunConfig& config);

// CSV with header group,tp,tn,fp,fn[,fold]; cells nonnegative reals.
EvaluationInput load_confusion_matrices(const std::string& path);

// Dispatch on the header: prediction files vs confusion-matrix files.
EvaluationInput load_evaluation(const std::string& path,
                                const RunConfig& config);

// Sample matrix written by save_samples_csv (header row of column names,
// then one row per draw; "nan" marks flagged values).
JointSampleMatrix load_samples_csv(const std::string& path);

// Tabular dataset CSV with header group,label,x0,...,x{d-1} (feature
// columns optional). Labels are mapped through config.labels.
harness::TabularDataset load_tabular_csv(const std::string& path,
                                         const RunConfig& config);

harness::SyntheticSpec load_synthetic_spec(const std::string& path);

// Dataset argument dispatch: *.json is a synthetic spec (materialized on
// load), anything else a tabular CSV.
harness::TabularDataset load_dataset(const std::string& path,
                                     const RunConfig& config);

// --- export ---
// All writers are atomic: they write to a temporary sibling and rename, so
// a failure never leaves a partial file. Reals are serialized with 12
// significant digits in CSVs.

void save_samples_csv(const JointSampleMatrix& samples,
                      const std::string& path);

void save_confusion_matrices_csv(const EvaluationInput& input,
                                 const std::string& path);

// Marginal summaries plus the run's provenance, one JSON document.
struct SummaryReport {
    std::vector<std::pair<std::string, MarginalSummary>> columns;
    std::int64_t draws = 0;
    std::uint64_t seed = 0;
    EvaluationSource source = EvaluationSource::holdout;
    std::optional<RhoEstimate> rho;            // K-fold only
    std::optional<double> effective_scale;     // K-fold only: 1 + (K-1)*rho
    std::vector<std::pair<std::string, std::int64_t>> group_totals;
};

void save_summary_json(const SummaryReport& report, const std::string& path);

void save_comparison_json(const ComparisonReport& report, GapMode mode,
                          std::span<const double> eps_per_column,
                          const std::string& path);

void save_hdr_json(const HdrRegion& region, const std::string& path);

// 2-D only: resolution x resolution grid of 0/1 cells (1 = inside region),
// rows follow the first axis.
void save_hdr_mask_csv(const HdrRegion& region, const std::string& path);

std::string rho_report_json(const RhoEstimate& estimate,
                            std::optional<double> sigma_over_reference,
                            std::optional<double> sigma_over_target);

void save_rho_json(const RhoEstimate& estimate,
                   std::optional<double> sigma_over_reference,
                   std::optional<double> sigma_over_target,
                   const std::string& path);

// One row of a coverage experiment: a rho strategy with the HDR it induced
// and the share of repeated-CV points that fall inside.
struct CoverageResult {
    std::string strategy;
    double rho_value = 0.0;
    std::optional<RhoInterval> interval;
    double area = 0.0;
    double pct_res = 0.0; // percentage, 0..100
    std::size_t repeats = 0;
};

void save_coverage_json(std::span<const CoverageResult> rows,
                        const std::string& path);
void save_coverage_csv(std::span<const CoverageResult> rows,
                       const std::string& path);

} // namespace posteval::io
