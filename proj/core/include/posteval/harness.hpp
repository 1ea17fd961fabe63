#pragma once

#include "posteval/kfold.hpp"
#include "posteval/metrics.hpp"
#include "posteval/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace posteval::harness {

// In-memory dataset: n rows of d features with a group label and a binary
// class label per row. row_ids keep the identity of rows across subsetting
// so that stochastic classifiers can key their noise on the original row.
struct TabularDataset {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> features; // n x d, row-major
    std::vector<std::string> group;
    std::vector<int> label; // 0/1
    std::vector<std::size_t> row_ids;

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * d, d};
    }
    void validate() const;
    TabularDataset subset(std::span<const std::size_t> indices) const;
};

// Toy classifiers: enough to drive cross-validation end to end without any
// external ML dependency.
//
//   logistic  — full-batch gradient descent, spec "logistic[:lr=..,iters=..]"
//   stump     — best single-feature threshold on the training folds
//   bernoulli — ignores features; correct with probability p, keyed on the
//               row id so a prediction does not depend on fold membership;
//               spec "bernoulli:p=0.9"
struct ClassifierSpec {
    enum class Kind { logistic, stump, bernoulli };
    Kind kind = Kind::logistic;
    double learning_rate = 0.5;
    int iterations = 200;
    double p_correct = 0.5;

    static ClassifierSpec parse(const std::string& text);
    std::string to_string() const;
};

// Synthetic two-class data with known per-group true-positive/true-negative
// rates: feature 0 carries the class signal, flipped for the rows a
// Bayes-optimal threshold should get wrong; remaining features are noise.
struct SyntheticGroup {
    std::string name;
    std::size_t n = 0;
    double tpr = 0.5;
    double tnr = 0.5;
};

struct SyntheticSpec {
    std::vector<SyntheticGroup> groups;
    std::size_t d = 2;
    double positive_fraction = 0.5;
    std::uint64_t seed = 0;
};

TabularDataset make_synthetic(const SyntheticSpec& spec);

// Stratified K-fold split by (group, label); fold sizes differ by at most
// one and the result is a deterministic function of the seed.
std::vector<std::vector<std::size_t>> kfold_split(const TabularDataset& data,
                                                  int folds,
                                                  std::uint64_t seed);

// Train on K-1 folds, predict the held-out fold, count per-(fold, group)
// confusion matrices.
EvaluationInput run_cv(const TabularDataset& data, const ClassifierSpec& spec,
                       int folds, std::uint64_t seed);

// Single pass over the full dataset (train = predict set for trainable
// classifiers); yields a hold-out style input.
EvaluationInput run_holdout(const TabularDataset& data,
                            const ClassifierSpec& spec, std::uint64_t seed);

// M times: split the data into two disjoint halves of size floor(n/2), run
// K-fold CV on each half, record the metric pair. The metric value of one
// CV is the mean of the per-fold values of `metric`'s first column.
std::vector<HalfSplitPair> half_split_protocol(const TabularDataset& data,
                                               const ClassifierSpec& spec,
                                               int folds, int m_pairs,
                                               const MetricSpec& metric,
                                               std::uint64_t seed);

// Repeated cross-validation: one pooled metric point per repeat, each with
// its own split seed. Points are row-major over metric_columns(metrics).
struct SweepResult {
    std::vector<std::string> columns;
    std::size_t repeats = 0;
    std::vector<double> points; // repeats x columns.size()
};

SweepResult repeated_cv_sweep(const TabularDataset& data,
                              const ClassifierSpec& spec, int folds,
                              int repeats, std::span<const MetricSpec> metrics,
                              std::uint64_t seed);

} // namespace posteval::harness
