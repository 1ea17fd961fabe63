// Acceptance suite: one pass/fail line per release criterion. The first
// argument is the path to the posteval CLI binary, which the end-to-end
// criteria drive through real process invocations.

#include "posteval/comparison.hpp"
#include "posteval/errors.hpp"
#include "posteval/harness.hpp"
#include "posteval/hdr.hpp"
#include "posteval/io.hpp"
#include "posteval/kfold.hpp"
#include "posteval/metrics.hpp"
#include "posteval/posterior.hpp"
#include "posteval/rng.hpp"

#include "json.hpp"

#include <boost/math/distributions/beta.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace posteval;

namespace {

std::string g_cli;
std::filesystem::path g_work;

struct CriterionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& detail) {
    if (!ok) {
        throw CriterionFailure(detail);
    }
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

// --- process helpers -------------------------------------------------------

struct CliResult {
    int exit_code = -1;
    std::string out;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CliResult run_cli(const std::string& args) {
    static int invocation = 0;
    const auto out_path =
        g_work / ("stdout_" + std::to_string(invocation) + ".txt");
    const auto err_path =
        g_work / ("stderr_" + std::to_string(invocation) + ".txt");
    ++invocation;
    const std::string command = "\"" + g_cli + "\" " + args + " > \"" +
                                out_path.string() + "\" 2> \"" +
                                err_path.string() + "\"";
    const int status = std::system(command.c_str());
    CliResult result;
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    }
    result.out = read_file(out_path);
    if (result.exit_code != 0) {
        result.out += "\n--- stderr ---\n" + read_file(err_path);
    }
    return result;
}

CliResult run_cli_checked(const std::string& args) {
    auto result = run_cli(args);
    require(result.exit_code == 0,
            "CLI exited with " + std::to_string(result.exit_code) +
                " for: " + args + "\n" + result.out);
    return result;
}

// --- small numeric helpers -------------------------------------------------

GroupConfusionMatrix cm(const char* id, double tp, double tn, double fp,
                        double fn) {
    GroupConfusionMatrix m;
    m.group_id = id;
    m.tp = tp;
    m.tn = tn;
    m.fp = fp;
    m.fn = fn;
    return m;
}

template <typename Cdf>
double ks_distance(std::vector<double> xs, const Cdf& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

std::string write_synthetic_spec(const std::string& name, std::size_t n_half,
                                 std::uint64_t seed) {
    const auto path = g_work / name;
    std::ofstream out(path);
    out << R"({
  "groups": [
    {"name": "g0", "n": )"
        << n_half << R"(, "tpr": 0.9, "tnr": 0.85},
    {"name": "g1", "n": )"
        << n_half << R"(, "tpr": 0.8, "tnr": 0.75}
  ],
  "d": 2,
  "positive_fraction": 0.5,
  "seed": )"
        << seed << "\n}\n";
    return path.string();
}

// --- criteria --------------------------------------------------------------

// Conjugate update: uniform prior plus counts (3,2,1,4) must land on
// (4,3,2,5) with no floating-point residue.
void criterion_1() {
    DirichletPrior prior;
    const auto post = update(prior, cm("g", 3, 2, 1, 4));
    const std::array<double, 4> expect = {4.0, 3.0, 2.0, 5.0};
    require(post.alpha_post == expect,
            "posterior alpha is not exactly (4,3,2,5)");
}

// Hierarchical accuracy samples at concentration (51,31,11,11), trial count
// 100: the Monte Carlo mean must sit within 3 standard errors of the
// analytic posterior mean 82/104.
void criterion_2() {
    GroupPosterior group;
    group.posterior.group_id = "g";
    group.posterior.alpha_post = {51.0, 31.0, 11.0, 11.0};
    group.resample_total = 100;
    const std::vector<GroupPosterior> groups = {group};
    const auto metrics = resolve_metrics({"accuracy"});
    SampleOptions opt;
    opt.draws = 100000;
    opt.seed = 20250801;
    const auto samples = sample_joint(groups, metrics, opt);
    const auto summary = marginal_summary(samples, "accuracy");
    const double expect = 82.0 / 104.0;
    const double se =
        summary.sd / std::sqrt(static_cast<double>(summary.used));
    require(std::abs(summary.mean - expect) < 3.0 * se,
            "mean " + fmt(summary.mean) + " is " +
                fmt(std::abs(summary.mean - expect) / se) +
                " standard errors from " + fmt(expect));
}

// Summing the (tp, fp) components of Dirichlet draws must reproduce the
// Beta(a_tp + a_fp, a_tn + a_fn) margin: KS distance below 0.01 at 50k
// draws, for three concentrations including the all-ones prior.
void criterion_3() {
    const std::array<std::array<double, 4>, 3> alphas = {{
        {1.0, 1.0, 1.0, 1.0},
        {51.0, 31.0, 11.0, 11.0},
        {4.0, 3.0, 2.0, 5.0},
    }};
    const std::size_t n = 50000;
    std::uint64_t seed = 31;
    for (const auto& alpha : alphas) {
        rng::Rng r(seed++);
        std::vector<double> xs(n);
        std::array<double, 4> pi{};
        for (std::size_t i = 0; i < n; ++i) {
            r.dirichlet(alpha, pi);
            xs[i] = pi[0] + pi[2];
        }
        boost::math::beta_distribution<double> ref(alpha[0] + alpha[2],
                                                   alpha[1] + alpha[3]);
        const double d =
            ks_distance(std::move(xs), [&](double x) { return cdf(ref, x); });
        require(d < 0.01, "KS distance " + fmt(d) + " for alpha (" +
                              fmt(alpha[0]) + "," + fmt(alpha[1]) + "," +
                              fmt(alpha[2]) + "," + fmt(alpha[3]) + ")");
    }
}

// Effective confusion matrix: ten identical folds at rho = 0.1 rescale to
// 100/1.9 per cell (machine precision), and one fold at rho = 0 is the
// identity.
void criterion_4() {
    std::vector<GroupConfusionMatrix> folds(10, cm("g", 10, 10, 10, 10));
    const auto e = effective_cm(folds, 0.1);
    const double expect = 100.0 / 1.9;
    for (double cell : e.cells()) {
        require(std::abs(cell - expect) <=
                    8.0 * std::numeric_limits<double>::epsilon() * expect,
                "cell " + fmt(cell) + " vs " + fmt(expect));
    }
    const std::vector<GroupConfusionMatrix> holdout = {cm("g", 3, 2, 1, 4)};
    const auto id = effective_cm(holdout, 0.0);
    require(id.tp == 3.0 && id.tn == 2.0 && id.fp == 1.0 && id.fn == 4.0,
            "single uncorrelated fold is not returned unchanged");
}

// Variance-ratio correlation map: identity at r = 1 (bitwise), strictly
// increasing in r on a 20-point grid, and clamped exactly when the raw
// value leaves [0,1].
void criterion_5() {
    for (int k : {2, 5, 10}) {
        const auto base = rho_fixed(k);
        const auto mapped = rho_relative(base, 1.0, k);
        require(mapped.value == base.value,
                "identity at r=1 broken for K=" + std::to_string(k));
    }
    RhoEstimate base;
    base.value = 0.1;
    double prev = -1.0;
    for (int i = 0; i < 20; ++i) {
        const double r = 0.6 + 4.4 * static_cast<double>(i) / 19.0;
        const double v = rho_relative(base, r, 10).value;
        require(v > prev, "not strictly increasing at r=" + fmt(r));
        const double raw = (r - 1.0) / 9.0 + r * 0.1;
        require(v == raw || (raw < 0.0 && v == 0.0) || (raw > 1.0 && v == 1.0),
                "clamp fired inside [0,1] at r=" + fmt(r));
        prev = v;
    }
    require(rho_relative(base, 0.01, 10).value == 0.0,
            "raw value below zero must clamp to 0");
    RhoEstimate zero;
    zero.value = 0.0;
    require(rho_relative(zero, 0.1, 10).value == 0.0,
            "raw -0.1 must clamp to 0");
    require(rho_relative(base, 50.0, 10).value == 1.0,
            "raw value above one must clamp to 1");
}

// Equicorrelated Gaussian tuples: the simulated variance of the K-mean must
// match delta * (pi + (1 - pi)/K) within 5% over 10^4 replications.
void criterion_6() {
    struct Params {
        int k;
        double pi;
        double delta;
    };
    const Params cases[] = {{10, 0.1, 1.0}, {5, 0.3, 2.0}};
    for (const auto& p : cases) {
        const std::size_t reps = 10000;
        rng::Rng r(rng::derive_seed(77, rng::Stream::replicate,
                                    static_cast<std::uint64_t>(p.k)));
        const double shared_sd = std::sqrt(p.delta * p.pi);
        const double own_sd = std::sqrt(p.delta * (1.0 - p.pi));
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const double shared = shared_sd * r.normal();
            double mean = 0.0;
            for (int k = 0; k < p.k; ++k) {
                mean += shared + own_sd * r.normal();
            }
            mean /= p.k;
            sum += mean;
            sumsq += mean * mean;
        }
        const double n = static_cast<double>(reps);
        const double var = (sumsq - sum * sum / n) / (n - 1.0);
        const double expect = p.delta * (p.pi + (1.0 - p.pi) / p.k);
        const double rel = std::abs(var - expect) / expect;
        require(rel < 0.05, "relative error " + fmt(rel) + " for K=" +
                                std::to_string(p.k));
    }
}

// Half-split variance formula on the pairs (0.8,0.6),(0.7,0.7): identical
// to the hand-evaluated expression, and within 1e-15 of 0.01.
void criterion_7() {
    const std::vector<HalfSplitPair> pairs = {{0.8, 0.6}, {0.7, 0.7}};
    const double got = sigma_over(pairs);
    const double oracle =
        ((0.8 - 0.6) * (0.8 - 0.6) + (0.7 - 0.7) * (0.7 - 0.7)) / 4.0;
    require(got == oracle, "formula value " + fmt(got) +
                               " differs from the direct expression");
    require(std::abs(got - 0.01) < 1e-15,
            "value " + fmt(got) + " is not 0.01");
}

// Density regions of normal samples: the 95% interval endpoints of 10^5
// standard-normal draws within +-0.05 of +-1.95996, and the bivariate 95%
// region area within 5% of pi * 5.991.
void criterion_8() {
    const std::size_t n = 100000;
    {
        rng::Rng r(88);
        JointSampleMatrix m;
        m.columns = {"x"};
        m.rows = n;
        m.data.resize(n);
        for (auto& v : m.data) {
            v = r.normal();
        }
        const std::vector<std::string> cols = {"x"};
        const auto region = fit_hdr(m, cols, 0.95);
        require(region.intervals.size() == 1,
                "expected a single interval, got " +
                    std::to_string(region.intervals.size()));
        const auto& iv = region.intervals.front();
        require(std::abs(iv.lo + 1.95996) < 0.05,
                "lower endpoint " + fmt(iv.lo));
        require(std::abs(iv.hi - 1.95996) < 0.05,
                "upper endpoint " + fmt(iv.hi));
    }
    {
        rng::Rng r(89);
        JointSampleMatrix m;
        m.columns = {"x", "y"};
        m.rows = n;
        m.data.resize(2 * n);
        for (auto& v : m.data) {
            v = r.normal();
        }
        const std::vector<std::string> cols = {"x", "y"};
        const auto region = fit_hdr(m, cols, 0.95);
        const double expect = 3.141592653589793 * 5.991;
        const double rel = std::abs(region.area - expect) / expect;
        require(rel < 0.05, "area " + fmt(region.area) + " vs " + fmt(expect) +
                                " (relative error " + fmt(rel) + ")");
    }
}

// Comparison probabilities: the equivalence and sign-pattern cells must
// partition the samples (sum to 1 within 1e-9), and negating every gap must
// swap the two outperformance probabilities exactly.
void criterion_9() {
    const std::size_t n = 100000;
    rng::Rng r(99);
    JointSampleMatrix gap;
    gap.columns = {"delta_a", "delta_b"};
    gap.rows = n;
    gap.data.resize(2 * n);
    for (auto& v : gap.data) {
        v = 0.2 * r.normal();
    }
    JointSampleMatrix negated = gap;
    for (auto& v : negated.data) {
        v = -v;
    }
    const std::vector<double> eps = {0.05, 0.05};
    const auto fwd = compare(std::move(gap), eps);
    double total = fwd.p_equivalent;
    for (const auto& [pattern, p] : fwd.orthant_probs) {
        total += p;
    }
    require(std::abs(total - 1.0) < 1e-9,
            "partition sums to " + fmt(total));
    const auto rev = compare(std::move(negated), eps);
    require(fwd.p_a_outperforms == rev.p_b_outperforms &&
                fwd.p_b_outperforms == rev.p_a_outperforms &&
                fwd.p_equivalent == rev.p_equivalent,
            "probabilities are not antisymmetric under negation");
    for (const auto& [pattern, p] : fwd.orthant_probs) {
        std::string flipped = pattern;
        for (char& c : flipped) {
            c = c == '+' ? '-' : (c == '-' ? '+' : c);
        }
        const auto it = rev.orthant_probs.find(flipped);
        require(it != rev.orthant_probs.end() && it->second == p,
                "cell " + pattern + " does not mirror to " + flipped);
    }
}

// End to end on synthetic data: label-noise classifiers at 90% vs 60%
// correctness on n=2000, hold-out evaluation, accuracy gap against the
// default 0.01 half-width: the better method must win with probability
// above 0.99.
void criterion_10() {
    harness::SyntheticSpec spec;
    spec.groups = {{"g0", 1000, 0.9, 0.85}, {"g1", 1000, 0.8, 0.75}};
    spec.d = 2;
    spec.seed = 1010;
    const auto data = harness::make_synthetic(spec);
    const std::uint64_t master = 2025;
    const auto input_a = harness::run_holdout(
        data, harness::ClassifierSpec::parse("bernoulli:p=0.9"),
        rng::derive_seed(master, rng::Stream::method_a, 0));
    const auto input_b = harness::run_holdout(
        data, harness::ClassifierSpec::parse("bernoulli:p=0.6"),
        rng::derive_seed(master, rng::Stream::method_b, 0));

    DirichletPrior prior;
    const auto post_a = posterior_from_input(input_a, prior);
    const auto post_b = posterior_from_input(input_b, prior);
    const auto metrics = resolve_metrics({"accuracy"});
    SampleOptions opt;
    opt.draws = 100000;
    opt.seed = rng::derive_seed(master, rng::Stream::method_a, 1);
    const auto samples_a = sample_joint(post_a, metrics, opt);
    opt.seed = rng::derive_seed(master, rng::Stream::method_b, 1);
    const auto samples_b = sample_joint(post_b, metrics, opt);

    auto gap =
        gap_distribution(samples_a, samples_b, metrics, GapMode::oriented);
    const auto report =
        compare(std::move(gap), Rope::uniform(metrics, 0.01), metrics);
    require(report.p_a_outperforms > 0.99,
            "P(A outperforms B) = " + fmt(report.p_a_outperforms));
}

// Coverage experiment through the CLI: logistic classifier on n=500, K=10,
// 100 repeated CVs. The variance-mapped interval strategy must cover at
// least 90% of the repeat points, and the fixed-point region must be larger
// than the interval-midpoint region.
void criterion_11() {
    const auto spec = write_synthetic_spec("coverage_data.json", 250, 1100);
    const auto prefix = (g_work / "cov").string();
    run_cli_checked("experiment coverage --dataset \"" + spec +
                    "\" --classifier logistic --out \"" + prefix +
                    "\" -K 10 -R 100 "
                    "--rho-strategy fixed,interval,relative_interval "
                    "--seed 7");
    std::ifstream in(prefix + ".coverage.json");
    const auto j = nlohmann::json::parse(in);
    double area_fixed = -1.0;
    double area_interval = -1.0;
    double pct_mapped = -1.0;
    for (const auto& row : j) {
        const std::string strategy = row.at("strategy").get<std::string>();
        if (strategy == "fixed") {
            area_fixed = row.at("area").get<double>();
        } else if (strategy == "interval") {
            area_interval = row.at("area").get<double>();
        } else if (strategy == "relative_interval") {
            pct_mapped = row.at("pct_res").get<double>();
        }
    }
    require(area_fixed > 0 && area_interval > 0 && pct_mapped >= 0,
            "coverage report is missing strategies");
    require(pct_mapped >= 90.0,
            "resolved fraction " + fmt(pct_mapped) + "% is below 90%");
    require(area_fixed > area_interval,
            "area ordering violated: fixed " + fmt(area_fixed) +
                " vs interval midpoint " + fmt(area_interval));
}

// Self-referenced correlation estimate through the CLI: with the target
// also acting as its own reference and M=5 half-splits, the mapped value
// must stay within 0.5/K of the 1/K anchor for five protocol seeds.
void criterion_12() {
    const auto spec = write_synthetic_spec("rho_data.json", 100, 1200);
    const int k = 10;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto result = run_cli_checked(
            "estimate-rho --dataset \"" + spec +
            "\" --classifier logistic -K 10 -M 5 --seed " +
            std::to_string(seed));
        const auto j = nlohmann::json::parse(result.out);
        const double value = j.at("value").get<double>();
        const double anchor = 1.0 / k;
        require(std::abs(value - anchor) < 0.5 / k,
                "seed " + std::to_string(seed) + ": estimate " + fmt(value) +
                    " vs anchor " + fmt(anchor));
    }
}

// Determinism of the CLI: re-running a command with the same seed, and
// varying only the thread count, must reproduce every output byte for
// byte.
void criterion_13() {
    const auto cm_path = g_work / "det_input.csv";
    {
        std::ofstream out(cm_path);
        out << "group,tp,tn,fp,fn,fold\n";
        for (int fold = 0; fold < 3; ++fold) {
            out << "g0,12,9,4,5," << fold << "\n";
            out << "g1,7,14,6,3," << fold << "\n";
        }
    }
    const std::string base = "posterior --input \"" + cm_path.string() +
                             "\" --rho fixed -T 20000 --seed 5 ";
    const auto p1 = (g_work / "det1").string();
    const auto p2 = (g_work / "det2").string();
    const auto p3 = (g_work / "det3").string();
    run_cli_checked(base + "--threads 1 --out \"" + p1 + "\"");
    run_cli_checked(base + "--threads 8 --out \"" + p2 + "\"");
    run_cli_checked(base + "--threads 1 --out \"" + p3 + "\"");
    for (const char* suffix : {".samples.csv", ".summary.json"}) {
        const auto a = read_file(p1 + suffix);
        require(!a.empty(), std::string("empty output ") + suffix);
        require(a == read_file(p2 + suffix),
                std::string(suffix) + " changes with the thread count");
        require(a == read_file(p3 + suffix),
                std::string(suffix) + " changes across identical runs");
    }

    const auto q1 = (g_work / "det_b1").string();
    run_cli_checked("posterior --input \"" + cm_path.string() +
                    "\" --rho fixed -T 20000 --seed 6 --out \"" + q1 + "\"");
    const std::string cmp = "compare --a \"" + p1 + ".samples.csv\" --b \"" +
                            q1 + ".samples.csv\" ";
    const auto c1 = (g_work / "cmp1").string();
    const auto c2 = (g_work / "cmp2").string();
    run_cli_checked(cmp + "--out \"" + c1 + "\"");
    run_cli_checked(cmp + "--out \"" + c2 + "\"");
    require(read_file(c1 + ".report.json") == read_file(c2 + ".report.json"),
            "comparison report changes across identical runs");

    const std::string hdr_cmd =
        "hdr --samples \"" + p1 + ".samples.csv\" --columns accuracy ";
    const auto h1 = (g_work / "hdr1").string();
    const auto h2 = (g_work / "hdr2").string();
    run_cli_checked(hdr_cmd + "--out \"" + h1 + "\"");
    run_cli_checked(hdr_cmd + "--out \"" + h2 + "\"");
    require(read_file(h1 + ".hdr.json") == read_file(h2 + ".hdr.json"),
            "density-region report changes across identical runs");
}

struct Criterion {
    int id;
    const char* label;
    std::function<void()> run;
};

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: posteval_acceptance <path-to-posteval-cli>\n";
        return 2;
    }
    g_cli = argv[1];
    g_work = std::filesystem::temp_directory_path() / "posteval_acceptance";
    std::filesystem::remove_all(g_work);
    std::filesystem::create_directories(g_work);

    const std::vector<Criterion> criteria = {
        {1, "conjugate update is exact", criterion_1},
        {2, "posterior accuracy mean matches the analytic value",
         criterion_2},
        {3, "aggregated Dirichlet margins follow the Beta law", criterion_3},
        {4, "effective confusion matrix rescaling is exact", criterion_4},
        {5, "variance-ratio correlation map identities hold", criterion_5},
        {6, "equicorrelated pooled-variance identity holds in simulation",
         criterion_6},
        {7, "half-split variance formula is exact", criterion_7},
        {8, "normal-sample density regions match analytic geometry",
         criterion_8},
        {9, "comparison probabilities partition and are antisymmetric",
         criterion_9},
        {10, "dominant classifier wins the end-to-end comparison",
         criterion_10},
        {11, "coverage experiment reproduces the expected region shape",
         criterion_11},
        {12, "self-referenced correlation estimate stays at the anchor",
         criterion_12},
        {13, "CLI outputs are byte-identical across runs and thread counts",
         criterion_13},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        std::string detail;
        try {
            criterion.run();
        } catch (const std::exception& e) {
            detail = e.what();
        }
        if (detail.empty()) {
            std::cout << "[PASS] criterion " << criterion.id << ": "
                      << criterion.label << "\n";
        } else {
            ++failures;
            std::cout << "[FAIL] criterion " << criterion.id << ": "
                      << criterion.label << " — " << detail << "\n";
        }
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size()
              << " criteria passed\n";
    std::filesystem::remove_all(g_work);
    return failures == 0 ? 0 : 1;
}
