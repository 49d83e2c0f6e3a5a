#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "surv/types.hpp"

namespace surv {

// A pair (i, j) of subjects can be ordered iff the strictly earlier observed
// time belongs to an uncensored record. Pairs where both are censored, where
// the earlier time is censored, or where the observed times are exactly equal
// carry no usable order. Returned pairs are oriented (earlier, later).
std::vector<std::pair<std::size_t, std::size_t>> admissible_pairs(
    const std::vector<double>& times, const std::vector<std::uint8_t>& events);

// Harrell's C over admissible pairs: a pair is correct when the record with
// the earlier event has the strictly higher risk score; tied scores count
// half. Pair counting runs on integer accumulators, so the result is exact
// and identical for any thread count. Throws UndefinedMetric when no pair
// is admissible.
double concordance_index(const std::vector<double>& times, const std::vector<std::uint8_t>& events,
                         const std::vector<double>& risk_scores);

// AUROC at one threshold over the unmasked labels: positives are survivors
// (label 1), negatives had their event by t (label 0); counts a pair correct
// when the positive scores >= ... strictly above the negative, ties half.
// Throws UndefinedMetric when a side is empty (a gap in the per-year curve).
double censored_auroc_at(int threshold_bin, const LabelMatrix& labels,
                         const std::vector<double>& scores_at_t);

// Per-threshold AUROC series; thresholds with no valid pair are nullopt.
// scores_per_t[t] are the scores used at threshold t.
std::vector<std::optional<double>> censored_auroc_series(
    const LabelMatrix& labels, const std::vector<std::vector<double>>& scores_per_t);

}  // namespace surv
