#include "surv/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "surv/metrics.hpp"

namespace surv {

std::vector<double> perturb_continuous(const std::vector<double>& column, double sigma,
                                       double epsilon, std::mt19937_64& rng) {
    if (epsilon <= 0.0) throw InvalidInput("perturb_continuous: epsilon must be positive");
    std::vector<double> out = column;
    if (sigma == 0.0) return out;  // constant column stays put
    std::normal_distribution<double> noise(0.0, sigma * epsilon);
    for (double& v : out) v += noise(rng);
    return out;
}

std::vector<double> perturb_discrete(const std::vector<double>& column, double flip_prob,
                                     std::mt19937_64& rng) {
    if (flip_prob < 0.0 || flip_prob > 1.0)
        throw InvalidInput("perturb_discrete: flip_prob must lie in [0,1]");
    std::vector<double> out = column;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : out) {
        if (v != 0.0 && v != 1.0)
            throw InvalidInput("perturb_discrete: entries must be binary");
        const double s = u(rng) < flip_prob ? 1.0 : 0.0;
        v = v * (1.0 - s) + (1.0 - v) * s;
    }
    return out;
}

namespace {

double column_sd(const Eigen::MatrixXd& X, std::size_t col) {
    const double mean = X.col(col).mean();
    const double var = (X.col(col).array() - mean).square().sum() /
                       static_cast<double>(X.rows());
    return std::sqrt(var);
}

}  // namespace

VimpEntry vimp(const RiskScorer& predictor, const Eigen::MatrixXd& X,
               const std::vector<double>& times, const std::vector<std::uint8_t>& events,
               std::size_t feature_index, const std::string& feature_name, bool is_indicator,
               const VimpConfig& cfg) {
    if (feature_index >= static_cast<std::size_t>(X.cols()))
        throw InvalidInput("vimp: feature index out of range");
    if (cfg.repetitions < 1) throw InvalidInput("vimp: repetitions must be >= 1");

    VimpEntry entry;
    entry.feature = feature_name;
    entry.baseline_error = 1.0 - concordance_index(times, events, predictor(X));

    const std::vector<double> column(X.col(feature_index).data(),
                                     X.col(feature_index).data() + X.rows());
    const double sigma = is_indicator ? 0.0 : column_sd(X, feature_index);

    std::vector<double> errors(cfg.repetitions);
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        auto rng = make_rng(cfg.seed, 0x71AB, feature_index + 1, static_cast<std::uint64_t>(rep + 1));
        const std::vector<double> perturbed =
            is_indicator ? perturb_discrete(column, cfg.flip_prob, rng)
                         : perturb_continuous(column, sigma, cfg.epsilon, rng);
        Eigen::MatrixXd Xp = X;
        for (Eigen::Index r = 0; r < X.rows(); ++r) Xp(r, feature_index) = perturbed[r];
        errors[rep] = 1.0 - concordance_index(times, events, predictor(Xp));
    }

    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(cfg.repetitions);
    double sq = 0.0;
    for (double e : errors) sq += (e - mean) * (e - mean);
    entry.perturbed_error_mean = mean;
    entry.perturbed_error_sd =
        cfg.repetitions > 1 ? std::sqrt(sq / static_cast<double>(cfg.repetitions - 1)) : 0.0;
    entry.vimp = entry.perturbed_error_mean - entry.baseline_error;
    return entry;
}

VimpReport vimp_report(const RiskScorer& predictor, const Eigen::MatrixXd& X,
                       const std::vector<double>& times, const std::vector<std::uint8_t>& events,
                       const std::vector<std::string>& feature_names,
                       const std::vector<std::uint8_t>& is_indicator, const VimpConfig& cfg) {
    if (feature_names.size() != static_cast<std::size_t>(X.cols()))
        throw InvalidInput("vimp_report: feature name count mismatch");

    VimpReport report;
    report.config = cfg;
    report.entries.resize(feature_names.size());

    // per-feature streams are independent, so the loop order cannot matter
#pragma omp parallel for schedule(dynamic)
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        report.entries[f] =
            vimp(predictor, X, times, events, f, feature_names[f], is_indicator[f] != 0, cfg);
    }

    std::stable_sort(report.entries.begin(), report.entries.end(),
                     [](const VimpEntry& a, const VimpEntry& b) { return a.vimp > b.vimp; });
    return report;
}

StrataCurves strata_curves(const CurvePredictor& predictor, const Eigen::MatrixXd& X,
                           std::size_t feature_index, const std::vector<double>& bin_edges) {
    if (feature_index >= static_cast<std::size_t>(X.cols()))
        throw InvalidInput("strata_curves: feature index out of range");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        if (bin_edges[i] <= bin_edges[i - 1])
            throw InvalidInput("strata_curves: bin edges must be strictly increasing");

    const std::size_t n_strata = bin_edges.size() + 1;
    StrataCurves out;
    out.sizes.assign(n_strata, 0);
    out.mean_curves.assign(n_strata, std::nullopt);

    char buf[64];
    for (std::size_t s = 0; s < n_strata; ++s) {
        if (s == 0) {
            std::snprintf(buf, sizeof(buf), "<%g", bin_edges.front());
        } else if (s == bin_edges.size()) {
            std::snprintf(buf, sizeof(buf), ">=%g", bin_edges.back());
        } else {
            std::snprintf(buf, sizeof(buf), "[%g,%g)", bin_edges[s - 1], bin_edges[s]);
        }
        out.labels.push_back(buf);
    }

    std::vector<std::vector<double>> sums(n_strata);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        const double v = X(r, feature_index);
        std::size_t s =
            std::upper_bound(bin_edges.begin(), bin_edges.end(), v) - bin_edges.begin();
        const std::vector<double> curve = predictor(X.row(r));
        if (sums[s].empty()) sums[s].assign(curve.size(), 0.0);
        for (std::size_t t = 0; t < curve.size(); ++t) sums[s][t] += curve[t];
        ++out.sizes[s];
    }
    for (std::size_t s = 0; s < n_strata; ++s) {
        if (out.sizes[s] == 0) continue;  // absent, not zero
        for (double& v : sums[s]) v /= static_cast<double>(out.sizes[s]);
        out.mean_curves[s] = std::move(sums[s]);
    }
    return out;
}

std::optional<int> median_survival(const std::vector<double>& s2) {
    for (std::size_t t = 0; t < s2.size(); ++t)
        if (s2[t] < 0.5) return static_cast<int>(t);
    return std::nullopt;
}

}  // namespace surv
