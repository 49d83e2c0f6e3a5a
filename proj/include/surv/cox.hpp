#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "surv/types.hpp"

namespace surv {

// Efron-approximated Cox partial likelihood evaluated on per-subject
// log-hazard scores. For unique event time t_j with tie set H_j (m = |H_j|),
// the negative log-likelihood accumulates
//   sum_{l=0}^{m-1} log( sum_{Y_i >= t_j} s_i - (l/m) sum_{i in H_j} s_i )
//     - sum_{i in H_j} log s_i
// with s_i = exp(log_hazard_i). Sums are taken in the max-shifted stable
// form, so large scores do not overflow. grad is the exact derivative with
// respect to log_hazard.
struct EfronResult {
    double nll = 0.0;
    std::vector<double> grad;
    std::size_t n_events = 0;
};

EfronResult efron_partial_nll(const std::vector<double>& log_hazard,
                              const std::vector<double>& times,
                              const std::vector<std::uint8_t>& events);

struct CoxFitOptions {
    double tolerance = 1e-8;  // gradient max-norm at convergence
    int max_iters = 100;
    double l2 = 0.0;
    // Monotone-likelihood guard: with l2 = 0 a separated dataset pushes
    // ||theta|| to infinity along a flattening likelihood; past this bound
    // the fit stops and reports non-convergence. Features are expected on
    // the encoded [0,1] scale, where legitimate log-hazard ratios stay well
    // below this.
    double theta_bound = 15.0;
};

struct CoxModel {
    Eigen::VectorXd theta;
    std::vector<std::string> feature_names;
    double final_nll = 0.0;
    int iterations = 0;
    bool converged = false;
    double l2_penalty = 0.0;
    std::vector<double> nll_trace;  // accepted line-search values, non-increasing
};

// Negative Efron partial log-likelihood of the linear model s = exp(theta.x),
// plus l2 * ||theta||^2 when configured.
double efron_nll(const Eigen::VectorXd& theta, const SurvivalDataset& ds, double l2 = 0.0);

// Exact gradient of efron_nll with respect to theta.
Eigen::VectorXd efron_nll_grad(const Eigen::VectorXd& theta, const SurvivalDataset& ds,
                               double l2 = 0.0);

// Newton iterations with step-halving line search on the Efron NLL; falls
// back to a gradient step when the Hessian solve fails or is not a descent
// direction. Convergence is declared on the gradient max-norm.
CoxModel fit_cox(const SurvivalDataset& ds, const CoxFitOptions& opts = {});

// Linear predictor theta.x; higher means higher hazard, earlier event.
double predict_risk(const CoxModel& model, const std::vector<double>& features);

}  // namespace surv
