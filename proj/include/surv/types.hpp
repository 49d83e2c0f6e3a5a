#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "surv/common.hpp"

namespace surv {

// One subject: encoded feature vector, observed time Y_i (event or censoring
// time, in dataset time units) and the event indicator C_i.
struct SurvivalRecord {
    std::vector<double> features;
    double observed_time = 0.0;
    bool event = false;  // true = event observed, false = right-censored
};

// A cohort plus the index structures every downstream loss/metric needs:
// unique (raw) event times t_j in increasing order and, per t_j, the tie
// group H_j = { i : Y_i = t_j, C_i = 1 }.
struct SurvivalDataset {
    std::vector<SurvivalRecord> records;
    std::vector<std::string> feature_names;
    int horizon_T = 0;          // number of discrete time units covered
    double unit_length = 1.0;   // length of one discrete unit in raw time
    std::vector<double> unique_event_times;
    std::vector<std::vector<std::size_t>> tie_groups;  // parallel to unique_event_times

    std::size_t size() const { return records.size(); }
    std::size_t feature_count() const { return feature_names.size(); }

    std::vector<double> times() const;
    std::vector<std::uint8_t> events() const;
};

// Kaplan-Meier product-limit curve: one entry per unique event time.
struct KMCurve {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<long> at_risk;  // n_i, subjects with Y >= t_i
    std::vector<long> events;   // d_i, events at t_i
};

// Per-record, per-threshold survival labels. labels(i,t) = 1 means record i
// survived beyond threshold t; mask(i,t) = false means the label is hidden
// by censoring and must not contribute to any loss or metric.
struct LabelMatrix {
    std::size_t rows = 0;
    std::size_t horizon = 0;
    std::vector<std::uint8_t> labels;  // row-major rows x horizon
    std::vector<std::uint8_t> mask;

    std::uint8_t label(std::size_t i, std::size_t t) const { return labels[i * horizon + t]; }
    std::uint8_t masked(std::size_t i, std::size_t t) const { return mask[i * horizon + t]; }
};

// floor(observed_time / unit_length); the bin a subject's observed time
// falls in. A subject alive at t has completed every unit before t.
int discretize_time(double observed_time, double unit_length);

// Builds the tie-group index and horizon for a set of records. horizon_T is
// max bin + 1 unless a larger explicit horizon is requested.
SurvivalDataset make_dataset(std::vector<SurvivalRecord> records,
                             std::vector<std::string> feature_names, double unit_length,
                             int horizon_override = 0);

// Dataset restricted to the given record indices (tie groups rebuilt).
SurvivalDataset subset(const SurvivalDataset& ds, const std::vector<std::size_t>& indices);

}  // namespace surv
