#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surv/csv.hpp"
#include "surv/dataset_spec.hpp"

namespace surv {

// Feature columns extracted from a CSV, still raw text with missingness
// flags, plus the per-row survival target.
struct FeatureTable {
    std::vector<FeatureSpec> features;
    std::vector<std::vector<std::string>> cells;  // row-major, one cell per feature
    std::vector<std::uint8_t> missing;            // row-major flags
    std::vector<double> times;
    std::vector<std::uint8_t> events;

    std::size_t rows() const { return times.size(); }
    const std::string& cell(std::size_t r, std::size_t f) const { return cells[r][f]; }
    bool is_missing(std::size_t r, std::size_t f) const {
        return missing[r * features.size() + f] != 0;
    }
};

// Parses the declared columns out of a raw table: applies the row filter,
// derives time (optionally as time_column - origin), decodes the event
// indicator, and flags missing feature cells. Numeric cells of continuous
// features must parse; failures carry row/column context.
FeatureTable load_csv(const DatasetSpec& spec, const RawTable& raw);
FeatureTable load_csv(const DatasetSpec& spec, const std::string& resolved_path);

struct DroppedFeature {
    std::string name;
    double missing_fraction = 0.0;
};

// Removes feature columns whose missing fraction strictly exceeds the
// threshold (computed over all rows).
FeatureTable drop_sparse_features(const FeatureTable& table, double threshold,
                                  std::vector<DroppedFeature>* dropped = nullptr);

// Imputation statistics — continuous medians / categorical modes — fitted
// on the given rows only (training split).
struct ImputeModel {
    std::vector<double> medians;        // per feature; NaN for categorical
    std::vector<std::string> modes;     // per feature; empty for continuous
};

ImputeModel fit_impute(const FeatureTable& table, const std::vector<std::size_t>& fit_rows);
FeatureTable impute(const FeatureTable& table, const ImputeModel& model);

// One-hot encoding for categoricals (levels observed in the fit rows,
// sorted; unseen levels encode to all-zeros) and unit scaling to [0,1] for
// continuous features (fit-row min/max; transform clips to [0,1]).
struct EncodeModel {
    std::vector<FeatureSpec> source;                  // features being encoded
    std::vector<double> mins, maxs;                   // continuous scaling stats
    std::vector<std::vector<std::string>> categories; // per-categorical levels
    std::vector<std::string> encoded_names;
    std::vector<std::uint8_t> encoded_is_indicator;
    std::vector<std::string> warnings;                // e.g. constant columns
};

EncodeModel fit_encode(const FeatureTable& table, const std::vector<std::size_t>& fit_rows);
Eigen::MatrixXd encode(const FeatureTable& table, const EncodeModel& model,
                       const std::vector<std::size_t>& rows);

}  // namespace surv
