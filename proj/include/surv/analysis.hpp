#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "surv/types.hpp"

namespace surv {

// Gaussian noise with standard deviation sigma * epsilon added entrywise.
std::vector<double> perturb_continuous(const std::vector<double>& column, double sigma,
                                       double epsilon, std::mt19937_64& rng);

// Independent Bernoulli flips x -> x(1-s) + (1-x)s; entries must be 0/1.
std::vector<double> perturb_discrete(const std::vector<double>& column, double flip_prob,
                                     std::mt19937_64& rng);

struct VimpConfig {
    double epsilon = 0.1;     // continuous noise scale
    double flip_prob = 0.1;   // discrete flip probability
    int repetitions = 10;
    std::uint64_t seed = 0;
};

struct VimpEntry {
    std::string feature;
    double baseline_error = 0.0;         // 1 - C-index of the unperturbed scores
    double perturbed_error_mean = 0.0;
    double perturbed_error_sd = 0.0;
    double vimp = 0.0;                   // perturbed - baseline, exactly
};

struct VimpReport {
    std::vector<VimpEntry> entries;  // sorted descending by vimp
    VimpConfig config;
    std::string split = "test";
};

// Risk scores for an encoded matrix; the predictor is fixed, never refit.
using RiskScorer = std::function<std::vector<double>(const Eigen::MatrixXd&)>;

VimpEntry vimp(const RiskScorer& predictor, const Eigen::MatrixXd& X,
               const std::vector<double>& times, const std::vector<std::uint8_t>& events,
               std::size_t feature_index, const std::string& feature_name, bool is_indicator,
               const VimpConfig& cfg);

// Per-feature VIMP, computed in parallel with independent RNG streams per
// (feature, repetition).
VimpReport vimp_report(const RiskScorer& predictor, const Eigen::MatrixXd& X,
                       const std::vector<double>& times, const std::vector<std::uint8_t>& events,
                       const std::vector<std::string>& feature_names,
                       const std::vector<std::uint8_t>& is_indicator, const VimpConfig& cfg);

// Survival-vector predictor for one encoded row.
using CurvePredictor = std::function<std::vector<double>(const Eigen::RowVectorXd&)>;

struct StrataCurves {
    std::vector<std::string> labels;
    std::vector<std::size_t> sizes;
    std::vector<std::optional<std::vector<double>>> mean_curves;  // absent when empty
};

// Mean predicted survival curve per stratum of one encoded feature; strata
// are (-inf, e0), [e0, e1), ..., [e_{k-1}, +inf) for strictly increasing
// bin edges.
StrataCurves strata_curves(const CurvePredictor& predictor, const Eigen::MatrixXd& X,
                           std::size_t feature_index, const std::vector<double>& bin_edges);

// Smallest t with s2[t] < 0.5; nullopt when the curve never crosses.
std::optional<int> median_survival(const std::vector<double>& s2);

}  // namespace surv
