#pragma once

#include "surv/types.hpp"

namespace surv {

// Product-limit estimator. One curve entry per unique event time t_i with
// S(t_i) = S(t_{i-1}) * (1 - d_i / n_i); the risk set n_i counts every
// subject with Y >= t_i, so censoring times tied with t_i stay in n_i.
KMCurve kaplan_meier(const SurvivalDataset& ds);
KMCurve kaplan_meier(const std::vector<double>& times, const std::vector<std::uint8_t>& events);

}  // namespace surv
