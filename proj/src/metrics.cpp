#include "surv/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace surv {

std::vector<std::pair<std::size_t, std::size_t>> admissible_pairs(
    const std::vector<double>& times, const std::vector<std::uint8_t>& events) {
    if (times.size() != events.size())
        throw InvalidInput("admissible_pairs: times/events length mismatch");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    const std::size_t n = times.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // orient by time; equal times cannot be ordered
            if (times[i] < times[j]) {
                if (events[i]) pairs.emplace_back(i, j);
            } else if (times[j] < times[i]) {
                if (events[j]) pairs.emplace_back(j, i);
            }
        }
    }
    return pairs;
}

double concordance_index(const std::vector<double>& times, const std::vector<std::uint8_t>& events,
                         const std::vector<double>& risk_scores) {
    const std::size_t n = times.size();
    if (events.size() != n || risk_scores.size() != n)
        throw InvalidInput("concordance_index: input length mismatch");

    // Sort once by time; for each event record, every strictly later record
    // forms an admissible pair. Counts are integers (2*correct + tied), so
    // the parallel reduction is exact regardless of scheduling.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    long long admissible = 0;
    long long half_units = 0;  // 2 per correct pair, 1 per tied-score pair

#pragma omp parallel for schedule(dynamic, 64) reduction(+ : admissible, half_units)
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        if (!events[i]) continue;
        const double ti = times[i];
        const double si = risk_scores[i];
        for (std::size_t l = k + 1; l < n; ++l) {
            const std::size_t j = order[l];
            if (times[j] <= ti) continue;  // equal times are not admissible
            ++admissible;
            if (si > risk_scores[j])
                half_units += 2;
            else if (si == risk_scores[j])
                half_units += 1;
        }
    }

    if (admissible == 0) throw UndefinedMetric("concordance_index: no admissible pairs");
    return static_cast<double>(half_units) / (2.0 * static_cast<double>(admissible));
}

double censored_auroc_at(int threshold_bin, const LabelMatrix& lm,
                         const std::vector<double>& scores_at_t) {
    if (threshold_bin < 0 || static_cast<std::size_t>(threshold_bin) >= lm.horizon)
        throw InvalidInput("censored_auroc_at: threshold outside horizon");
    if (scores_at_t.size() != lm.rows)
        throw InvalidInput("censored_auroc_at: score length mismatch");

    const std::size_t t = static_cast<std::size_t>(threshold_bin);
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < lm.rows; ++i) {
        if (!lm.masked(i, t)) continue;
        if (lm.label(i, t))
            pos.push_back(scores_at_t[i]);
        else
            neg.push_back(scores_at_t[i]);
    }
    if (pos.empty() || neg.empty())
        throw UndefinedMetric("censored_auroc_at: no valid positive/negative pair");

    long long half_units = 0;
#pragma omp parallel for schedule(static) reduction(+ : half_units)
    for (std::size_t a = 0; a < pos.size(); ++a) {
        for (std::size_t b = 0; b < neg.size(); ++b) {
            if (pos[a] > neg[b])
                half_units += 2;
            else if (pos[a] == neg[b])
                half_units += 1;
        }
    }
    return static_cast<double>(half_units) /
           (2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::vector<std::optional<double>> censored_auroc_series(
    const LabelMatrix& lm, const std::vector<std::vector<double>>& scores_per_t) {
    if (scores_per_t.size() != lm.horizon)
        throw InvalidInput("censored_auroc_series: need one score vector per threshold");
    std::vector<std::optional<double>> out(lm.horizon);
    for (std::size_t t = 0; t < lm.horizon; ++t) {
        try {
            out[t] = censored_auroc_at(static_cast<int>(t), lm, scores_per_t[t]);
        } catch (const UndefinedMetric&) {
            out[t] = std::nullopt;  // reported as a gap, never fabricated
        }
    }
    return out;
}

}  // namespace surv
