#include "surv/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace surv {

namespace {

// Tie-group view over (times, events): unique event times ascending, each
// with the indices of its events and the first position (in the ascending
// time order) of its risk set.
struct TieIndex {
    std::vector<std::size_t> asc;            // record indices sorted by time ascending
    std::vector<double> etimes;              // unique event times ascending
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> risk_begin;     // position in asc where Y >= t_j starts
};

TieIndex build_tie_index(const std::vector<double>& times,
                         const std::vector<std::uint8_t>& events) {
    TieIndex ti;
    const std::size_t n = times.size();
    ti.asc.resize(n);
    std::iota(ti.asc.begin(), ti.asc.end(), 0);
    std::sort(ti.asc.begin(), ti.asc.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    for (std::size_t pos = 0; pos < n;) {
        const double t = times[ti.asc[pos]];
        std::size_t end = pos;
        std::vector<std::size_t> group;
        while (end < n && times[ti.asc[end]] == t) {
            if (events[ti.asc[end]]) group.push_back(ti.asc[end]);
            ++end;
        }
        if (!group.empty()) {
            ti.etimes.push_back(t);
            ti.groups.push_back(std::move(group));
            ti.risk_begin.push_back(pos);
        }
        pos = end;
    }
    return ti;
}

}  // namespace

EfronResult efron_partial_nll(const std::vector<double>& log_hazard,
                              const std::vector<double>& times,
                              const std::vector<std::uint8_t>& events) {
    const std::size_t n = times.size();
    if (log_hazard.size() != n || events.size() != n)
        throw InvalidInput("efron_partial_nll: input length mismatch");
    if (n == 0) throw InvalidInput("efron_partial_nll: empty input");

    const TieIndex ti = build_tie_index(times, events);
    const std::size_t J = ti.etimes.size();
    if (J == 0) throw InvalidInput("efron_partial_nll: no uncensored records");

    // Max-shifted hazards: s'_i = exp(eta_i - c). The shift cancels in every
    // ratio below and only re-enters the NLL as + m_j * c per tie group.
    const double c = *std::max_element(log_hazard.begin(), log_hazard.end());
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::exp(log_hazard[i] - c);

    // Suffix sums over ascending time order give each risk-set total in O(n).
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t pos = n; pos-- > 0;) suffix[pos] = suffix[pos + 1] + s[ti.asc[pos]];

    std::vector<double> nll_j(J, 0.0);     // per-group NLL pieces, summed serially
    std::vector<double> inv_sum(J, 0.0);   // A'_j = sum_l 1/phi
    std::vector<double> inv_wsum(J, 0.0);  // B'_j = sum_l (l/m)/phi
    std::vector<std::uint8_t> bad(J, 0);

#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < J; ++j) {
        const auto& group = ti.groups[j];
        const double m = static_cast<double>(group.size());
        const double risk = suffix[ti.risk_begin[j]];
        double tie_sum = 0.0, eta_sum = 0.0;
        for (std::size_t i : group) {
            tie_sum += s[i];
            eta_sum += log_hazard[i];
        }
        double logs = 0.0, inv = 0.0, winv = 0.0;
        for (std::size_t l = 0; l < group.size(); ++l) {
            const double w = static_cast<double>(l) / m;
            const double phi = risk - w * tie_sum;
            if (!(phi > 0.0) || !std::isfinite(phi)) {
                bad[j] = 1;
                break;
            }
            logs += std::log(phi);
            inv += 1.0 / phi;
            winv += w / phi;
        }
        nll_j[j] = logs + m * c - eta_sum;
        inv_sum[j] = inv;
        inv_wsum[j] = winv;
    }

    for (std::size_t j = 0; j < J; ++j)
        if (bad[j]) throw NumericError("efron_partial_nll: non-finite risk-set term");

    EfronResult res;
    res.n_events = 0;
    for (std::size_t j = 0; j < J; ++j) {
        res.nll += nll_j[j];
        res.n_events += ti.groups[j].size();
    }
    if (!std::isfinite(res.nll)) throw NumericError("efron_partial_nll: non-finite NLL");

    // d NLL / d eta_i = s'_i * sum_{j : t_j <= Y_i} A'_j
    //                   - [i event] * (s'_i * B'_{g(i)} + 1)
    std::vector<double> prefix_inv(J);
    double acc = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
        acc += inv_sum[j];
        prefix_inv[j] = acc;
    }
    std::vector<std::size_t> group_of(n, J);  // J marks non-events
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t i : ti.groups[j]) group_of[i] = j;

    res.grad.assign(n, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        // last event time <= Y_i
        const auto it = std::upper_bound(ti.etimes.begin(), ti.etimes.end(), times[i]);
        double g = 0.0;
        if (it != ti.etimes.begin())
            g = s[i] * prefix_inv[static_cast<std::size_t>(it - ti.etimes.begin()) - 1];
        if (events[i]) g -= s[i] * inv_wsum[group_of[i]] + 1.0;
        res.grad[i] = g;
    }
    return res;
}

namespace {

Eigen::MatrixXd feature_matrix(const SurvivalDataset& ds) {
    const std::size_t n = ds.size(), p = ds.feature_count();
    Eigen::MatrixXd X(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        if (ds.records[i].features.size() != p)
            throw InvalidInput("cox: record feature length mismatch");
        for (std::size_t k = 0; k < p; ++k) X(i, k) = ds.records[i].features[k];
    }
    return X;
}

std::vector<double> linear_predictor(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) {
    Eigen::VectorXd eta = X * theta;
    return std::vector<double>(eta.data(), eta.data() + eta.size());
}

// Hessian of the Efron NLL at theta. Streams the risk set once in
// descending time order, keeping running sums of s, s*x and s*x*x^T.
Eigen::MatrixXd efron_hessian(const Eigen::MatrixXd& X, const std::vector<double>& eta,
                              const TieIndex& ti, double l2) {
    const std::size_t p = static_cast<std::size_t>(X.cols());
    const std::size_t n = static_cast<std::size_t>(X.rows());
    const double c = *std::max_element(eta.begin(), eta.end());

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p, p);
    double risk = 0.0;
    Eigen::VectorXd risk_x = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd risk_xx = Eigen::MatrixXd::Zero(p, p);

    std::size_t pos = n;  // walk asc order from the back = descending time
    for (std::size_t jj = ti.etimes.size(); jj-- > 0;) {
        while (pos > ti.risk_begin[jj]) {
            --pos;
            const std::size_t i = ti.asc[pos];
            const double si = std::exp(eta[i] - c);
            risk += si;
            risk_x.noalias() += si * X.row(i).transpose();
            risk_xx.noalias() += si * X.row(i).transpose() * X.row(i);
        }
        const auto& group = ti.groups[jj];
        const double m = static_cast<double>(group.size());
        double tie = 0.0;
        Eigen::VectorXd tie_x = Eigen::VectorXd::Zero(p);
        Eigen::MatrixXd tie_xx = Eigen::MatrixXd::Zero(p, p);
        for (std::size_t i : group) {
            const double si = std::exp(eta[i] - c);
            tie += si;
            tie_x.noalias() += si * X.row(i).transpose();
            tie_xx.noalias() += si * X.row(i).transpose() * X.row(i);
        }
        for (std::size_t l = 0; l < group.size(); ++l) {
            const double w = static_cast<double>(l) / m;
            const double phi = risk - w * tie;
            const Eigen::VectorXd mu = (risk_x - w * tie_x) / phi;
            H.noalias() += (risk_xx - w * tie_xx) / phi - mu * mu.transpose();
        }
    }
    H.diagonal().array() += 2.0 * l2;
    return H;
}

}  // namespace

double efron_nll(const Eigen::VectorXd& theta, const SurvivalDataset& ds, double l2) {
    const Eigen::MatrixXd X = feature_matrix(ds);
    const EfronResult r = efron_partial_nll(linear_predictor(X, theta), ds.times(), ds.events());
    return r.nll + l2 * theta.squaredNorm();
}

Eigen::VectorXd efron_nll_grad(const Eigen::VectorXd& theta, const SurvivalDataset& ds, double l2) {
    const Eigen::MatrixXd X = feature_matrix(ds);
    const EfronResult r = efron_partial_nll(linear_predictor(X, theta), ds.times(), ds.events());
    const Eigen::Map<const Eigen::VectorXd> g(r.grad.data(), r.grad.size());
    return X.transpose() * g + 2.0 * l2 * theta;
}

CoxModel fit_cox(const SurvivalDataset& ds, const CoxFitOptions& opts) {
    const Eigen::MatrixXd X = feature_matrix(ds);
    const std::vector<double> times = ds.times();
    const std::vector<std::uint8_t> events = ds.events();
    const TieIndex ti = build_tie_index(times, events);
    if (ti.etimes.empty()) throw InvalidInput("fit_cox: no uncensored records");
    const std::size_t p = ds.feature_count();

    auto eval = [&](const Eigen::VectorXd& th) {
        const EfronResult r = efron_partial_nll(linear_predictor(X, th), times, events);
        const Eigen::Map<const Eigen::VectorXd> g(r.grad.data(), r.grad.size());
        Eigen::VectorXd grad = X.transpose() * g + 2.0 * opts.l2 * th;
        return std::make_pair(r.nll + opts.l2 * th.squaredNorm(), grad);
    };

    CoxModel model;
    model.feature_names = ds.feature_names;
    model.l2_penalty = opts.l2;
    model.theta = Eigen::VectorXd::Zero(p);

    auto [nll, grad] = eval(model.theta);
    model.nll_trace.push_back(nll);
    bool diverged = false;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() <= opts.tolerance) {
            model.converged = true;
            break;
        }
        std::vector<double> eta = linear_predictor(X, model.theta);
        Eigen::MatrixXd H = efron_hessian(X, eta, ti, opts.l2);

        Eigen::VectorXd dir;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() == Eigen::Success) dir = ldlt.solve(-grad);
        if (ldlt.info() != Eigen::Success || !dir.allFinite() || grad.dot(dir) >= 0.0)
            dir = -grad;  // Hessian solve failed: plain gradient descent step

        const double slope = grad.dot(dir);
        double alpha = 1.0;
        Eigen::VectorXd cand;
        double cand_nll = std::numeric_limits<double>::infinity();
        bool accepted = false;
        while (alpha > 1e-14) {
            cand = model.theta + alpha * dir;
            try {
                cand_nll = eval(cand).first;
            } catch (const NumericError&) {
                alpha *= 0.5;
                continue;
            }
            if (cand_nll <= nll + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // no descent step exists at this scale

        model.theta = cand;
        std::tie(nll, grad) = eval(model.theta);
        model.nll_trace.push_back(nll);
        model.iterations = iter + 1;

        if (opts.l2 == 0.0 && model.theta.lpNorm<Eigen::Infinity>() > opts.theta_bound) {
            diverged = true;  // monotone likelihood: no finite maximizer
            break;
        }
    }

    if (!model.converged && !diverged)
        model.converged = grad.lpNorm<Eigen::Infinity>() <= opts.tolerance;
    model.final_nll = nll;
    return model;
}

double predict_risk(const CoxModel& model, const std::vector<double>& features) {
    if (static_cast<Eigen::Index>(features.size()) != model.theta.size())
        throw InvalidInput("predict_risk: feature length mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < features.size(); ++k) acc += model.theta[k] * features[k];
    return acc;
}

}  // namespace surv
