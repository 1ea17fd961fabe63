#include "posteval/io.hpp"

#include "posteval/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace posteval::io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_real(const std::string& cell, const std::string& context) {
    const std::string t = trim(cell);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) {
        throw InputError(context + ": '" + cell + "' is not a number");
    }
    return v;
}

std::size_t parse_index(const std::string& cell, const std::string& context) {
    const std::string t = trim(cell);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
        throw InputError(context + ": '" + cell +
                         "' is not a nonnegative integer");
    }
    return static_cast<std::size_t>(std::stoull(t));
}

// Writes to <path>.tmp and renames on commit; a failure or early exit never
// leaves a partial file at the destination.
class AtomicFile {
public:
    explicit AtomicFile(const std::string& path)
        : path_(path), tmp_(path + ".tmp"), out_(tmp_, std::ios::binary) {
        if (!out_) throw IoError("cannot open '" + tmp_ + "' for writing");
    }

    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;

    std::ostream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw IoError("write failed for '" + tmp_ + "'");
        out_.close();
        std::error_code ec;
        std::filesystem::rename(tmp_, path_, ec);
        if (ec) {
            std::filesystem::remove(tmp_, ec);
            throw IoError("cannot finalize '" + path_ + "': " + ec.message());
        }
        committed_ = true;
    }

    ~AtomicFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

void write_json(const ordered_json& doc, const std::string& path) {
    AtomicFile file(path);
    file.stream() << doc.dump(2) << '\n';
    file.commit();
}

ordered_json rho_to_json(const RhoEstimate& estimate) {
    ordered_json j;
    j["strategy"] = to_string(estimate.strategy);
    j["value"] = estimate.value;
    if (estimate.interval) {
        j["interval"] = {estimate.interval->lo, estimate.interval->hi};
    }
    if (estimate.reference_method) {
        j["reference_method"] = *estimate.reference_method;
    }
    if (estimate.r_over) j["r_over"] = *estimate.r_over;
    return j;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    }

    std::size_t require(const std::string& name, const std::string& path) const {
        const auto idx = column(name);
        if (!idx) {
            throw InputError("'" + path + "': missing column '" + name + "'");
        }
        return *idx;
    }
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError("'" + path + "': empty file");
    }
    table.header = split_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw InputError("'" + path + "' line " + std::to_string(lineno) +
                             ": expected " + std::to_string(table.header.size()) +
                             " cells, got " + std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.rows.empty()) {
        throw InputError("'" + path + "': empty file (no data rows)");
    }
    return table;
}

// Check fold indices cover 0..K-1 and return K.
std::size_t fold_count_of(const std::set<std::size_t>& seen,
                          const std::string& path) {
    const std::size_t max_fold = *seen.rbegin();
    for (std::size_t k = 0; k <= max_fold; ++k) {
        if (!seen.count(k)) {
            throw InputError("'" + path +
                             "': non-contiguous fold indices (missing fold " +
                             std::to_string(k) + ")");
        }
    }
    return max_fold + 1;
}

ordered_json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return ordered_json::parse(in);
    } catch (const ordered_json::exception& e) {
        throw ConfigError("'" + path + "': invalid JSON: " + e.what());
    }
}

void reject_unknown_keys(const ordered_json& j,
                         std::initializer_list<const char*> known,
                         const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) {
                return key == k;
            }) == known.end()) {
            throw ConfigError(context + ": unknown key '" + key + "'");
        }
    }
}

std::array<double, 4> to_alpha(const ordered_json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 4) {
        throw ConfigError(context + ": prior must be an array of 4 numbers");
    }
    std::array<double, 4> alpha{};
    for (std::size_t i = 0; i < 4; ++i) alpha[i] = j[i].get<double>();
    return alpha;
}

} // namespace

DirichletPrior RunConfig::prior_for(const std::string& group) const {
    DirichletPrior prior;
    const auto it = group_priors.find(group);
    prior.alpha = it != group_priors.end() ? it->second : default_prior;
    prior.validate();
    return prior;
}

RunConfig load_config(const std::string& path) {
    const ordered_json j = parse_json_file(path);
    if (!j.is_object()) {
        throw ConfigError("'" + path + "': config must be a JSON object");
    }
    reject_unknown_keys(j,
                        {"labels", "groups", "reference_group", "priors",
                         "prior", "draws", "seed", "rope", "rho_strategy",
                         "metrics", "gap_mode", "coverage", "threads"},
                        "'" + path + "'");
    RunConfig config;
    try {
        if (j.contains("labels")) {
            const auto& labels = j.at("labels");
            reject_unknown_keys(labels, {"positive", "negative"},
                                "'" + path + "' labels");
            if (labels.contains("positive")) {
                config.labels.positive = labels.at("positive").get<std::string>();
            }
            if (labels.contains("negative")) {
                config.labels.negative = labels.at("negative").get<std::string>();
            }
        }
        if (j.contains("groups")) {
            config.groups = j.at("groups").get<std::vector<std::string>>();
        }
        if (j.contains("reference_group")) {
            config.reference_group = j.at("reference_group").get<std::string>();
        }
        if (j.contains("prior")) {
            config.default_prior = to_alpha(j.at("prior"), "'" + path + "'");
        }
        if (j.contains("priors")) {
            for (const auto& [group, alpha] : j.at("priors").items()) {
                config.group_priors[group] =
                    to_alpha(alpha, "'" + path + "' priors." + group);
            }
        }
        if (j.contains("draws")) config.draws = j.at("draws").get<std::int64_t>();
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("rope")) {
            const auto& rope = j.at("rope");
            if (rope.is_number()) {
                config.rope_eps = {rope.get<double>()};
            } else {
                config.rope_eps = rope.get<std::vector<double>>();
            }
        }
        if (j.contains("rho_strategy")) {
            config.rho_strategy =
                parse_rho_strategy(j.at("rho_strategy").get<std::string>());
        }
        if (j.contains("metrics")) {
            config.metrics = j.at("metrics").get<std::vector<std::string>>();
        }
        if (j.contains("gap_mode")) {
            config.gap_mode = parse_gap_mode(j.at("gap_mode").get<std::string>());
        }
        if (j.contains("coverage")) {
            config.coverage = j.at("coverage").get<double>();
        }
        if (j.contains("threads")) {
            config.threads = j.at("threads").get<unsigned>();
        }
    } catch (const ordered_json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    if (config.labels.positive == config.labels.negative) {
        throw ConfigError("'" + path +
                          "': positive and negative labels must differ");
    }
    if (config.draws < 1) {
        throw ConfigError("'" + path + "': draws must be >= 1");
    }
    if (!(config.coverage > 0.0 && config.coverage < 1.0)) {
        throw ConfigError("'" + path + "': coverage must lie in (0, 1)");
    }
    for (double e : config.rope_eps) {
        if (!(e > 0.0)) {
            throw ConfigError("'" + path + "': rope entries must be positive");
        }
    }
    return config;
}

EvaluationInput load_predictions(const std::string& path,
                                 const RunConfig& config) {
    const CsvTable table = read_csv(path);
    const std::size_t c_true = table.require("y_true", path);
    const std::size_t c_pred = table.require("y_pred", path);
    const std::size_t c_group = table.require("group", path);
    const auto c_fold = table.column("fold");

    auto classify = [&](const std::string& cell, std::size_t row,
                        const char* column) {
        if (cell == config.labels.positive) return 1;
        if (cell == config.labels.negative) return 0;
        throw InputError("'" + path + "' row " + std::to_string(row) +
                         ": unknown label '" + cell + "' in column " + column +
                         " (expected '" + config.labels.positive + "' or '" +
                         config.labels.negative + "')");
    };

    std::set<std::size_t> folds_seen;
    std::set<std::string> groups_seen;
    // (fold, group) -> counts
    std::map<std::pair<std::size_t, std::string>, GroupConfusionMatrix> counts;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::string& group = cells[c_group];
        if (config.groups &&
            std::find(config.groups->begin(), config.groups->end(), group) ==
                config.groups->end()) {
            throw InputError("'" + path + "' row " + std::to_string(r + 2) +
                             ": group '" + group +
                             "' is not in the declared group set");
        }
        const int y = classify(cells[c_true], r + 2, "y_true");
        const int yhat = classify(cells[c_pred], r + 2, "y_pred");
        std::size_t fold = 0;
        if (c_fold) {
            fold = parse_index(cells[*c_fold], "'" + path + "' row " +
                                                  std::to_string(r + 2) +
                                                  " column fold");
        }
        folds_seen.insert(fold);
        groups_seen.insert(group);
        auto& cm = counts[{fold, group}];
        cm.group_id = group;
        if (y == 1) {
            (yhat == 1 ? cm.tp : cm.fn) += 1.0;
        } else {
            (yhat == 0 ? cm.tn : cm.fp) += 1.0;
        }
    }

    const std::size_t k = fold_count_of(folds_seen, path);
    EvaluationInput input;
    input.source = c_fold ? EvaluationSource::kfold : EvaluationSource::holdout;
    input.folds.resize(k);
    for (std::size_t f = 0; f < k; ++f) {
        for (const auto& group : groups_seen) {
            auto it = counts.find({f, group});
            if (it != counts.end()) {
                input.folds[f].push_back(it->second);
            } else {
                GroupConfusionMatrix empty;
                empty.group_id = group;
                input.folds[f].push_back(empty);
            }
        }
    }
    input.validate();
    return input;
}

EvaluationInput load_confusion_matrices(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::size_t c_group = table.require("group", path);
    const std::size_t c_tp = table.require("tp", path);
    const std::size_t c_tn = table.require("tn", path);
    const std::size_t c_fp = table.require("fp", path);
    const std::size_t c_fn = table.require("fn", path);
    const auto c_fold = table.column("fold");

    std::set<std::size_t> folds_seen;
    std::map<std::pair<std::size_t, std::string>, GroupConfusionMatrix> entries;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::string context = "'" + path + "' row " + std::to_string(r + 2);
        GroupConfusionMatrix cm;
        cm.group_id = cells[c_group];
        cm.tp = parse_real(cells[c_tp], context + " column tp");
        cm.tn = parse_real(cells[c_tn], context + " column tn");
        cm.fp = parse_real(cells[c_fp], context + " column fp");
        cm.fn = parse_real(cells[c_fn], context + " column fn");
        for (double cell : cm.cells()) {
            if (!std::isfinite(cell) || cell < 0.0) {
                throw InputError(context + ": negative or non-finite cell for "
                                 "group '" + cm.group_id + "'");
            }
        }
        std::size_t fold = 0;
        if (c_fold) {
            fold = parse_index(cells[*c_fold], context + " column fold");
        }
        folds_seen.insert(fold);
        if (!entries.emplace(std::make_pair(fold, cm.group_id), cm).second) {
            throw InputError(context + ": duplicate entry for group '" +
                             cm.group_id + "' in fold " + std::to_string(fold));
        }
    }

    const std::size_t k = fold_count_of(folds_seen, path);
    EvaluationInput input;
    input.source = c_fold ? EvaluationSource::kfold : EvaluationSource::holdout;
    input.folds.resize(k);
    for (const auto& [key, cm] : entries) {
        input.folds[key.first].push_back(cm);
    }
    input.validate();
    return input;
}

EvaluationInput load_evaluation(const std::string& path,
                                const RunConfig& config) {
    const CsvTable table = read_csv(path);
    if (table.column("tp")) return load_confusion_matrices(path);
    return load_predictions(path, config);
}

JointSampleMatrix load_samples_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty()) {
        throw InputError("'" + path + "': no columns");
    }
    JointSampleMatrix samples;
    samples.columns = table.header;
    samples.rows = table.rows.size();
    samples.data.reserve(samples.rows * samples.columns.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < samples.columns.size(); ++c) {
            const std::string& cell = table.rows[r][c];
            if (trim(cell) == "nan") {
                samples.data.push_back(std::nan(""));
            } else {
                samples.data.push_back(
                    parse_real(cell, "'" + path + "' row " +
                                         std::to_string(r + 2) + " column " +
                                         samples.columns[c]));
            }
        }
    }
    return samples;
}

harness::TabularDataset load_tabular_csv(const std::string& path,
                                         const RunConfig& config) {
    const CsvTable table = read_csv(path);
    const std::size_t c_group = table.require("group", path);
    const std::size_t c_label = table.require("label", path);
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c != c_group && c != c_label) feature_cols.push_back(c);
    }

    harness::TabularDataset data;
    data.n = table.rows.size();
    data.d = feature_cols.size();
    data.features.reserve(data.n * data.d);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::string context = "'" + path + "' row " + std::to_string(r + 2);
        data.group.push_back(cells[c_group]);
        const std::string& y = cells[c_label];
        if (y == config.labels.positive) {
            data.label.push_back(1);
        } else if (y == config.labels.negative) {
            data.label.push_back(0);
        } else {
            throw InputError(context + ": unknown label '" + y + "'");
        }
        for (std::size_t c : feature_cols) {
            data.features.push_back(
                parse_real(cells[c], context + " column " + table.header[c]));
        }
        data.row_ids.push_back(r);
    }
    data.validate();
    return data;
}

harness::SyntheticSpec load_synthetic_spec(const std::string& path) {
    const ordered_json j = parse_json_file(path);
    if (!j.is_object()) {
        throw ConfigError("'" + path + "': synthetic spec must be an object");
    }
    reject_unknown_keys(j, {"groups", "d", "positive_fraction", "seed"},
                        "'" + path + "'");
    harness::SyntheticSpec spec;
    try {
        if (!j.contains("groups")) {
            throw ConfigError("'" + path + "': synthetic spec needs 'groups'");
        }
        for (const auto& g : j.at("groups")) {
            reject_unknown_keys(g, {"name", "n", "tpr", "tnr"},
                                "'" + path + "' group entry");
            harness::SyntheticGroup group;
            group.name = g.at("name").get<std::string>();
            group.n = g.at("n").get<std::size_t>();
            group.tpr = g.at("tpr").get<double>();
            group.tnr = g.at("tnr").get<double>();
            spec.groups.push_back(std::move(group));
        }
        if (j.contains("d")) spec.d = j.at("d").get<std::size_t>();
        if (j.contains("positive_fraction")) {
            spec.positive_fraction = j.at("positive_fraction").get<double>();
        }
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    } catch (const ordered_json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return spec;
}

harness::TabularDataset load_dataset(const std::string& path,
                                     const RunConfig& config) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        return harness::make_synthetic(load_synthetic_spec(path));
    }
    return load_tabular_csv(path, config);
}

void save_samples_csv(const JointSampleMatrix& samples,
                      const std::string& path) {
    AtomicFile file(path);
    auto& out = file.stream();
    for (std::size_t c = 0; c < samples.columns.size(); ++c) {
        out << (c ? "," : "") << samples.columns[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < samples.rows; ++r) {
        const auto row = samples.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format_real(row[c]);
        }
        out << '\n';
    }
    file.commit();
}

void save_confusion_matrices_csv(const EvaluationInput& input,
                                 const std::string& path) {
    const bool with_fold = input.source == EvaluationSource::kfold;
    AtomicFile file(path);
    auto& out = file.stream();
    out << "group,tp,tn,fp,fn" << (with_fold ? ",fold" : "") << '\n';
    for (std::size_t k = 0; k < input.folds.size(); ++k) {
        for (const auto& cm : input.folds[k]) {
            out << cm.group_id << ',' << format_real(cm.tp) << ','
                << format_real(cm.tn) << ',' << format_real(cm.fp) << ','
                << format_real(cm.fn);
            if (with_fold) out << ',' << k;
            out << '\n';
        }
    }
    file.commit();
}

void save_summary_json(const SummaryReport& report, const std::string& path) {
    ordered_json j;
    j["draws"] = report.draws;
    j["seed"] = report.seed;
    j["source"] =
        report.source == EvaluationSource::kfold ? "kfold" : "holdout";
    if (report.rho) j["rho"] = rho_to_json(*report.rho);
    if (report.effective_scale) j["effective_scale"] = *report.effective_scale;
    ordered_json totals = ordered_json::object();
    for (const auto& [group, total] : report.group_totals) {
        totals[group] = total;
    }
    j["group_totals"] = std::move(totals);
    ordered_json metrics = ordered_json::object();
    for (const auto& [column, summary] : report.columns) {
        ordered_json m;
        m["mean"] = summary.mean;
        m["sd"] = summary.sd;
        m["ci_level"] = summary.ci_level;
        m["ci_lo"] = summary.ci_lo;
        m["ci_hi"] = summary.ci_hi;
        m["used"] = summary.used;
        m["flagged"] = summary.flagged;
        metrics[column] = std::move(m);
    }
    j["metrics"] = std::move(metrics);
    write_json(j, path);
}

void save_comparison_json(const ComparisonReport& report, GapMode mode,
                          std::span<const double> eps_per_column,
                          const std::string& path) {
    ordered_json j;
    j["mode"] = to_string(mode);
    j["columns"] = report.gap_samples.columns;
    j["rope"] = std::vector<double>(eps_per_column.begin(),
                                    eps_per_column.end());
    j["p_equivalent"] = report.p_equivalent;
    j["p_a_outperforms"] = report.p_a_outperforms;
    j["p_b_outperforms"] = report.p_b_outperforms;
    ordered_json orthants = ordered_json::object();
    for (const auto& [pattern, p] : report.orthant_probs) {
        orthants[pattern] = p;
    }
    j["orthant_probs"] = std::move(orthants);
    j["used"] = report.used;
    j["flagged"] = report.flagged;
    write_json(j, path);
}

void save_hdr_json(const HdrRegion& region, const std::string& path) {
    ordered_json j;
    j["dimension"] = region.dimension;
    j["coverage_target"] = region.coverage_target;
    j["f_alpha"] = region.f_alpha;
    j["area"] = region.area;
    j["degenerate"] = region.degenerate;
    j["sample_count"] = region.sample_count;
    j["flagged"] = region.flagged;
    ordered_json axes = ordered_json::array();
    for (const auto& axis : region.axes) {
        ordered_json a;
        a["column"] = axis.column;
        a["bandwidth"] = axis.bandwidth;
        a["lo"] = axis.lo;
        a["hi"] = axis.hi;
        a["resolution"] = axis.resolution;
        a["degenerate"] = axis.degenerate;
        axes.push_back(std::move(a));
    }
    j["axes"] = std::move(axes);
    if (region.dimension == 1) {
        ordered_json intervals = ordered_json::array();
        for (const auto& iv : region.intervals) {
            intervals.push_back({iv.lo, iv.hi});
        }
        j["intervals"] = std::move(intervals);
    }
    if (region.dimension == 2 && !region.degenerate) {
        const std::size_t res0 = region.axes[0].resolution;
        const std::size_t res1 = region.axes[1].resolution;
        ordered_json mask = ordered_json::array();
        for (std::size_t i = 0; i < res0; ++i) {
            ordered_json row = ordered_json::array();
            for (std::size_t k = 0; k < res1; ++k) {
                row.push_back(region.density[i * res1 + k] >= region.f_alpha
                                  ? 1
                                  : 0);
            }
            mask.push_back(std::move(row));
        }
        j["mask"] = std::move(mask);
    }
    write_json(j, path);
}

void save_hdr_mask_csv(const HdrRegion& region, const std::string& path) {
    if (region.dimension != 2 || region.degenerate) {
        throw ConfigError("mask export needs a non-degenerate 2-D region");
    }
    const std::size_t res0 = region.axes[0].resolution;
    const std::size_t res1 = region.axes[1].resolution;
    AtomicFile file(path);
    auto& out = file.stream();
    for (std::size_t i = 0; i < res0; ++i) {
        for (std::size_t k = 0; k < res1; ++k) {
            out << (k ? "," : "")
                << (region.density[i * res1 + k] >= region.f_alpha ? 1 : 0);
        }
        out << '\n';
    }
    file.commit();
}

std::string rho_report_json(const RhoEstimate& estimate,
                            std::optional<double> sigma_over_reference,
                            std::optional<double> sigma_over_target) {
    ordered_json j = rho_to_json(estimate);
    if (sigma_over_reference) {
        j["sigma_over_reference"] = *sigma_over_reference;
    }
    if (sigma_over_target) j["sigma_over_target"] = *sigma_over_target;
    return j.dump(2);
}

void save_rho_json(const RhoEstimate& estimate,
                   std::optional<double> sigma_over_reference,
                   std::optional<double> sigma_over_target,
                   const std::string& path) {
    AtomicFile file(path);
    file.stream() << rho_report_json(estimate, sigma_over_reference,
                                     sigma_over_target)
                  << '\n';
    file.commit();
}

void save_coverage_json(std::span<const CoverageResult> rows,
                        const std::string& path) {
    ordered_json j = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json r;
        r["strategy"] = row.strategy;
        r["rho"] = row.rho_value;
        if (row.interval) r["interval"] = {row.interval->lo, row.interval->hi};
        r["area"] = row.area;
        r["pct_res"] = row.pct_res;
        r["repeats"] = row.repeats;
        j.push_back(std::move(r));
    }
    write_json(j, path);
}

void save_coverage_csv(std::span<const CoverageResult> rows,
                       const std::string& path) {
    AtomicFile file(path);
    auto& out = file.stream();
    out << "strategy,rho,area,pct_res\n";
    for (const auto& row : rows) {
        out << row.strategy << ',' << format_real(row.rho_value) << ','
            << format_real(row.area) << ',' << format_real(row.pct_res)
            << '\n';
    }
    file.commit();
}

} // namespace posteval::io
