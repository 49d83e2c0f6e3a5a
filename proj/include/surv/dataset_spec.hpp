#pragma once

#include <optional>
#include <string>
#include <vector>

#include "surv/common.hpp"

namespace surv {

enum class FeatureKind { Continuous, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
};

// Binds one CSV to the pipeline: where the time/event live, which columns
// are features and of what kind, the discretization unit, and the expected
// (row count, censored %) fingerprint used as a hard ingestion check.
struct DatasetSpec {
    std::string name;
    std::string path;
    std::string time_column;
    std::string event_column;
    std::string event_value = "1";  // cell value meaning "event observed"
    std::optional<std::string> time_origin_column;  // time = time_column - origin
    std::vector<FeatureSpec> features;
    double time_unit_length = 1.0;
    std::string missing_token = "NA";
    double drop_threshold = 0.20;
    std::optional<std::pair<std::string, std::string>> filter;  // keep rows where col == value
    std::optional<long> expected_rows;
    std::optional<double> expected_censored_pct;
};

DatasetSpec load_dataset_spec(const std::string& path);
void save_dataset_spec(const DatasetSpec& spec, const std::string& path);

// time/event columns must not appear among features; unit length > 0.
void validate_spec(const DatasetSpec& spec);

// Resolves spec.path against (in order): as-is, the spec file's directory,
// $SURVKIT_DATA_DIR. Returns the first existing candidate, else the last one.
std::string resolve_data_path(const DatasetSpec& spec, const std::string& spec_file);

}  // namespace surv
