#include "surv/labels.hpp"

namespace surv {

LabelMatrix survival_labels(const SurvivalDataset& ds, double unit_length) {
    if (ds.records.empty()) throw InvalidInput("survival_labels: empty dataset");
    if (ds.horizon_T <= 0) throw InvalidInput("survival_labels: horizon_T must be positive");

    LabelMatrix lm;
    lm.rows = ds.records.size();
    lm.horizon = static_cast<std::size_t>(ds.horizon_T);
    lm.labels.assign(lm.rows * lm.horizon, 0);
    lm.mask.assign(lm.rows * lm.horizon, 0);

    for (std::size_t i = 0; i < lm.rows; ++i) {
        const auto& r = ds.records[i];
        const int b = discretize_time(r.observed_time, unit_length);
        for (std::size_t t = 0; t < lm.horizon; ++t) {
            const bool survived = static_cast<int>(t) < b;
            if (r.event) {
                lm.mask[i * lm.horizon + t] = 1;
                lm.labels[i * lm.horizon + t] = survived ? 1 : 0;
            } else if (survived) {
                lm.mask[i * lm.horizon + t] = 1;
                lm.labels[i * lm.horizon + t] = 1;
            }
        }
    }
    return lm;
}

double monotonicity_violation_rate(const std::vector<std::vector<double>>& s2_rows) {
    std::size_t pairs = 0, violations = 0;
    for (const auto& row : s2_rows) {
        for (std::size_t t = 0; t + 1 < row.size(); ++t) {
            ++pairs;
            if (row[t + 1] > row[t]) ++violations;
        }
    }
    if (pairs == 0) return 0.0;
    return static_cast<double>(violations) / static_cast<double>(pairs);
}

}  // namespace surv
