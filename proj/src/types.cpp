#include "surv/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace surv {

std::vector<double> SurvivalDataset::times() const {
    std::vector<double> t(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) t[i] = records[i].observed_time;
    return t;
}

std::vector<std::uint8_t> SurvivalDataset::events() const {
    std::vector<std::uint8_t> e(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) e[i] = records[i].event ? 1 : 0;
    return e;
}

int discretize_time(double observed_time, double unit_length) {
    if (unit_length <= 0.0) throw InvalidInput("discretize_time: unit_length must be positive");
    if (observed_time < 0.0) throw InvalidInput("discretize_time: negative observed_time");
    return static_cast<int>(std::floor(observed_time / unit_length));
}

SurvivalDataset make_dataset(std::vector<SurvivalRecord> records,
                             std::vector<std::string> feature_names, double unit_length,
                             int horizon_override) {
    SurvivalDataset ds;
    ds.records = std::move(records);
    ds.feature_names = std::move(feature_names);
    ds.unit_length = unit_length;

    int max_bin = 0;
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& r = ds.records[i];
        if (r.features.size() != ds.feature_names.size())
            throw InvalidInput("make_dataset: record feature length mismatch");
        max_bin = std::max(max_bin, discretize_time(r.observed_time, unit_length));
        if (r.event) groups[r.observed_time].push_back(i);
    }
    ds.horizon_T = std::max(max_bin + 1, horizon_override);
    ds.unique_event_times.reserve(groups.size());
    ds.tie_groups.reserve(groups.size());
    for (auto& [t, idx] : groups) {
        ds.unique_event_times.push_back(t);
        ds.tie_groups.push_back(std::move(idx));
    }
    return ds;
}

SurvivalDataset subset(const SurvivalDataset& ds, const std::vector<std::size_t>& indices) {
    std::vector<SurvivalRecord> recs;
    recs.reserve(indices.size());
    for (std::size_t i : indices) recs.push_back(ds.records.at(i));
    return make_dataset(std::move(recs), ds.feature_names, ds.unit_length, ds.horizon_T);
}

}  // namespace surv
