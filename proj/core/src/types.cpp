#include "posteval/types.hpp"

#include "posteval/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace posteval {

void GroupConfusionMatrix::validate() const {
    for (double cell : cells()) {
        if (!std::isfinite(cell) || cell < 0.0) {
            throw InputError("confusion matrix '" + group_id +
                             "' has a negative or non-finite cell");
        }
    }
}

GroupConfusionMatrix pool(std::span<const GroupConfusionMatrix> groups) {
    if (groups.empty()) throw InputError("pool: empty group list");
    GroupConfusionMatrix out;
    out.group_id = "pooled";
    for (const auto& g : groups) {
        out.tp += g.tp;
        out.tn += g.tn;
        out.fp += g.fp;
        out.fn += g.fn;
    }
    return out;
}

void DirichletPrior::validate() const {
    for (double a : alpha) {
        if (!std::isfinite(a) || a <= 0.0) {
            throw ConfigError("Dirichlet prior requires strictly positive alpha");
        }
    }
}

std::vector<std::string> EvaluationInput::group_labels() const {
    std::set<std::string> labels;
    for (const auto& fold : folds) {
        for (const auto& g : fold) labels.insert(g.group_id);
    }
    return {labels.begin(), labels.end()};
}

GroupConfusionMatrix EvaluationInput::summed_group(const std::string& group_id) const {
    GroupConfusionMatrix out;
    out.group_id = group_id;
    bool found = false;
    for (const auto& fold : folds) {
        for (const auto& g : fold) {
            if (g.group_id != group_id) continue;
            out.tp += g.tp;
            out.tn += g.tn;
            out.fp += g.fp;
            out.fn += g.fn;
            found = true;
        }
    }
    if (!found) throw InputError("group '" + group_id + "' not present in input");
    return out;
}

void EvaluationInput::validate() const {
    if (folds.empty()) throw InputError("evaluation input has no folds");
    std::vector<std::string> reference;
    for (std::size_t k = 0; k < folds.size(); ++k) {
        std::set<std::string> seen;
        for (const auto& g : folds[k]) {
            g.validate();
            if (!seen.insert(g.group_id).second) {
                throw InputError("duplicate group '" + g.group_id + "' in fold " +
                                 std::to_string(k));
            }
        }
        std::vector<std::string> labels(seen.begin(), seen.end());
        if (k == 0) {
            reference = std::move(labels);
        } else if (source == EvaluationSource::kfold && labels != reference) {
            throw InputError("fold " + std::to_string(k) +
                             " does not contain the same group set as fold 0");
        }
    }
    if (source == EvaluationSource::holdout && folds.size() != 1) {
        throw InputError("hold-out input must have exactly one fold");
    }
}

std::size_t JointSampleMatrix::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("unknown sample column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

std::size_t JointSampleMatrix::flagged_rows() const noexcept {
    std::size_t flagged = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (double v : row(r)) {
            if (std::isnan(v)) {
                ++flagged;
                break;
            }
        }
    }
    return flagged;
}

std::vector<double> JointSampleMatrix::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
}

} // namespace posteval
