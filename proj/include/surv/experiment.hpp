#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surv/analysis.hpp"
#include "surv/cox.hpp"
#include "surv/dataset_spec.hpp"
#include "surv/net.hpp"
#include "surv/pipeline.hpp"
#include "surv/split.hpp"

namespace surv {

enum class ModelKind { Cox, MlpEfron, MlpRank, MlpEfronRank };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from(const std::string& name);

struct Fingerprint {
    long rows = 0;
    double censored_pct = 0.0;
    long unique_times = 0;
};

// Everything downstream commands need: the fitted pipeline, the split and
// the fully encoded dataset (train statistics applied everywhere).
struct PreparedData {
    DatasetSpec spec;
    std::vector<DroppedFeature> dropped;
    ImputeModel imputer;
    EncodeModel encoder;
    SplitIndices split;
    std::array<double, 3> fractions{0.6, 0.2, 0.2};
    SurvivalDataset full;
    Fingerprint fingerprint;
};

PreparedData prepare(const DatasetSpec& spec, const std::string& spec_file,
                     const std::array<double, 3>& fractions, std::uint64_t seed);

void write_prep_artifacts(const PreparedData& prep, const std::string& out_dir);

struct ExperimentConfig {
    std::string spec_path;
    ModelKind model = ModelKind::Cox;
    std::array<double, 3> fractions{0.6, 0.2, 0.2};
    std::uint64_t split_seed = 1;
    int splits = 1;  // consecutive split seeds starting at split_seed
    std::vector<HiddenLayerSpec> hidden{{32, Activation::Relu, 0.0, false}};
    S1Mode s1_mode = S1Mode::LogHazard;
    TrainConfig train;
    CoxFitOptions cox;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct SplitMetrics {
    std::uint64_t seed = 0;
    double test_cindex = 0.0;
    std::optional<double> test_cindex_mean_s2;  // mlp kinds: risk = -mean(s2)
    std::optional<double> s2_monotonicity_violation_rate;
    int chosen_epoch = 0;
    bool converged = true;  // cox: Newton convergence; mlp: not aborted
    std::string failure;
};

struct MetricReport {
    std::string dataset;
    ModelKind model = ModelKind::Cox;
    Fingerprint fingerprint;
    std::vector<SplitMetrics> splits;
    double cindex_mean = 0.0;
    double cindex_sd = 0.0;
    double wall_seconds = 0.0;  // console only, never persisted
};

// Full benchmark path for one config: per split seed, prepare + fit/train +
// evaluate; writes prep artifacts, per-split metrics/curves/model files and
// an aggregate report.json under out_dir.
MetricReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

struct SearchSpace {
    std::vector<int> widths{8, 16, 32, 64};
    std::vector<int> depths{1, 2};
    std::vector<double> dropouts{0.0, 0.1, 0.25};
    std::vector<int> batch_sizes{32, 64, 128};
    std::vector<double> clip_norms{1.0, 5.0, 10.0};
    std::array<double, 2> learning_rate_range{3e-4, 3e-2};   // log-uniform
    std::array<double, 2> lambda_rank_range{0.05, 5.0};      // log-uniform
    std::array<double, 2> l1_range{1e-7, 1e-3};              // log-uniform, half the draws 0
    std::array<double, 2> l2_range{1e-7, 1e-3};
    bool try_batch_norm = true;
    bool try_hazard_mode = true;
    int max_epochs = 80;
    int patience = 10;
    int budget = 30;
    std::uint64_t master_seed = 0;
};

SearchSpace load_search_space(const std::string& path);

// Deterministic config for one trial; the draw sequence depends only on
// (master_seed, trial_index), so different model kinds sample identically.
std::pair<std::vector<HiddenLayerSpec>, TrainConfig> sample_trial(const SearchSpace& space,
                                                                  std::uint64_t trial_index);

struct TrialOutcome {
    int index = 0;
    double val_cindex = 0.0;
    bool failed = false;
    std::string error;
    std::vector<HiddenLayerSpec> hidden;
    S1Mode s1_mode = S1Mode::LogHazard;
    TrainConfig train;
};

struct SearchResult {
    std::vector<TrialOutcome> trials;
    int best_index = -1;
    ExperimentConfig best_config;
};

// Random search: trains each sampled config on the train split, scores on
// the validation split, returns the best (ties to the lower trial index).
// Trials run in parallel bounded by `workers`.
SearchResult run_search(ModelKind kind, const SearchSpace& space, const std::string& spec_path,
                        const std::array<double, 3>& fractions, std::uint64_t split_seed,
                        int workers, const std::string& out_dir);

// Saved model artifact (cox coefficients or network manifest + metadata).
struct ModelArtifact {
    ModelKind kind = ModelKind::Cox;
    std::string dataset;
    std::uint64_t split_seed = 1;
    std::array<double, 3> fractions{0.6, 0.2, 0.2};
    std::vector<std::string> feature_names;
    CoxModel cox;
    NetworkState net;
};

void save_model_artifact(const ModelArtifact& artifact, const std::string& path);
ModelArtifact load_model_artifact(const std::string& path);

// Curve emission for a saved artifact: KM (dataset-level), per-threshold
// censored AUROC with gaps, mean survival curve and per-record median
// survival for network models; optional SVG renderings.
void cmd_curves(const std::string& model_path, const std::string& spec_path,
                const std::string& out_dir, bool svg);

void cmd_vimp(const std::string& model_path, const std::string& spec_path,
              const std::string& out_dir, const VimpConfig& vimp_cfg);

}  // namespace surv
