#pragma once

#include "surv/types.hpp"

namespace surv {

// Per-threshold survival labels for the T-unit head.
//   event at bin b:    labels 1 for t < b, 0 for t >= b; mask all true
//   censored at bin b: labels 1 for t < b; mask true exactly for t < b
// Everything at or past a censoring bin is unobservable and stays masked.
LabelMatrix survival_labels(const SurvivalDataset& ds, double unit_length);

// Fraction of adjacent (t, t+1) prediction pairs with s2[t+1] > s2[t].
// Monotonicity of the head is not enforced; this is the diagnostic.
double monotonicity_violation_rate(const std::vector<std::vector<double>>& s2_rows);

}  // namespace surv
