#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "surv/labels.hpp"
#include "surv/types.hpp"

namespace surv {

enum class Activation { Relu, Tanh, Identity };

// How the bottleneck scalar enters the partial-likelihood loss(Eq-style):
// LogHazard uses s = exp(s1) (always valid); Hazard models the hazard
// directly as s = softplus(s1) + 1e-8.
enum class S1Mode { LogHazard, Hazard };

// Ranking pair orientation: the survivor's score minus the event's score
// toward margin 1 (default), or the literal transposed order.
enum class RankOrientation { SurvivorMinusEvent, EventMinusSurvivor };

struct HiddenLayerSpec {
    int width = 32;
    Activation activation = Activation::Relu;
    double dropout = 0.0;  // in [0,1)
    bool batch_norm = false;
};

// Feed-forward stack ending in a single linear unit (the bottleneck score
// s1) which alone feeds a T-unit sigmoid head (the survival curve s2).
struct Architecture {
    int input_dim = 0;
    std::vector<HiddenLayerSpec> hidden;
    int horizon_T = 0;
    S1Mode s1_mode = S1Mode::LogHazard;
};

struct DenseParams {
    Eigen::MatrixXd W;  // in x out; layer output = X * W + b
    Eigen::VectorXd b;
};

struct BatchNormParams {
    Eigen::VectorXd gamma, beta;
    Eigen::VectorXd running_mean, running_var;
};

struct NetworkState {
    Architecture arch;
    std::vector<DenseParams> hidden;
    std::vector<BatchNormParams> bn;  // one per hidden layer; used when batch_norm set
    DenseParams bottleneck;           // last hidden width x 1
    DenseParams head;                 // 1 x horizon_T
};

// Mirrors NetworkState's parameter tensors.
struct Gradients {
    std::vector<DenseParams> hidden;
    std::vector<BatchNormParams> bn;  // running stats unused, kept for shape
    DenseParams bottleneck;
    DenseParams head;
};

struct ForwardCache {
    Eigen::MatrixXd input;
    // per hidden layer
    std::vector<Eigen::MatrixXd> layer_in;    // input to the dense op
    std::vector<Eigen::MatrixXd> pre_bn;      // z = X W + b
    std::vector<Eigen::MatrixXd> normalized;  // (z - mean)/sqrt(var+eps), when BN on
    std::vector<Eigen::VectorXd> bn_mean, bn_var;
    std::vector<Eigen::MatrixXd> pre_act;     // BN output (or z), input of the activation
    std::vector<Eigen::MatrixXd> activated;
    std::vector<Eigen::MatrixXd> dropout_mask;  // scaled keep mask, empty when rate 0
    Eigen::MatrixXd last_hidden;                // input to the bottleneck
    Eigen::VectorXd s1;
    Eigen::MatrixXd pre_sigmoid;  // s1 * head.W + head.b, batch x T
    Eigen::MatrixXd s2;
    bool train_mode = false;
};

struct ForwardResult {
    Eigen::VectorXd s1;
    Eigen::MatrixXd s2;  // batch x T, entries in (0,1)
    ForwardCache cache;
};

struct TrainConfig {
    double learning_rate = 1e-5;
    int batch_size = 32;
    double efron_weight = 1.0;  // 0 disables the partial-likelihood term
    double lambda_rank = 1.0;   // weight of the ranking loss
    double l1 = 0.0, l2 = 0.0;
    double clip_norm = 5.0;
    int max_epochs = 200;
    int patience = 10;
    std::uint64_t seed = 0;
    RankOrientation rank_orientation = RankOrientation::SurvivorMinusEvent;
    double bn_momentum = 0.9;
};

struct EpochStats {
    double efron_loss = 0.0;
    double rank_loss = 0.0;
    double penalty = 0.0;
    double val_cindex = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int chosen_epoch = 0;  // 1-based argmax of validation C-index
    double best_val_cindex = 0.0;
    std::size_t skipped_batches = 0;  // batches with no event (no Efron term)
    bool aborted = false;
    std::string abort_reason;
};

// Seeded He/Xavier initialization; deterministic given (arch, seed).
NetworkState init_network(const Architecture& arch, std::uint64_t seed);

// In train mode dropout masks come from rng (required when any rate > 0)
// and batch normalization uses batch statistics; in eval mode running
// statistics are used and dropout is off. Throws NumericError naming the
// layer on non-finite activations.
ForwardResult forward(const NetworkState& state, const Eigen::MatrixXd& X, bool train_mode,
                      std::mt19937_64* rng = nullptr);

// Exponential-moving-average update of BN running statistics from the batch
// statistics captured in the cache. Separate from forward so forward stays
// a pure function of (state, X, masks).
void update_running_stats(NetworkState& state, const ForwardCache& cache, double momentum);

struct EfronBatchResult {
    double loss = 0.0;
    Eigen::VectorXd grad_s1;
    bool skipped = false;  // batch had no event; trainer logs and proceeds
};

// Efron partial-likelihood loss over the batch's own risk sets/tie groups.
EfronBatchResult efron_batch_loss(const Eigen::VectorXd& s1, const std::vector<double>& times,
                                  const std::vector<std::uint8_t>& events, S1Mode mode);

struct RankingResult {
    double loss = 0.0;
    Eigen::MatrixXd grad_s2;
    std::size_t acceptable_pairs = 0;
};

// Censoring-masked pairwise squared-margin loss over the T thresholds:
// at threshold t a pair (survivor i, event j) is acceptable iff both labels
// are unmasked with y_i = 1, y_j = 0; each pair contributes (d - 1)^2 and
// the total is normalized by the acceptable-pair count. batch_rows maps
// batch rows to label-matrix rows.
RankingResult ranking_loss(const Eigen::MatrixXd& s2, const LabelMatrix& labels,
                           const std::vector<std::size_t>& batch_rows,
                           RankOrientation orientation = RankOrientation::SurvivorMinusEvent);

struct CombinedLoss {
    double total = 0.0;
    double efron = 0.0;
    double rank = 0.0;
    double penalty = 0.0;
    bool efron_skipped = false;
    std::size_t acceptable_pairs = 0;
    Gradients grads;
};

// efron_weight * efron + lambda_rank * ranking + l1 |W| + l2 W^2, with all
// gradients composed through the network.
CombinedLoss combined_loss(const NetworkState& state, const ForwardResult& fwd,
                           const std::vector<double>& batch_times,
                           const std::vector<std::uint8_t>& batch_events,
                           const LabelMatrix& labels, const std::vector<std::size_t>& batch_rows,
                           const TrainConfig& cfg);

// Reverse-mode pass for the fixed architecture; exact including dropout
// masks and batch-norm batch statistics.
Gradients backward(const NetworkState& state, const ForwardCache& cache,
                   const Eigen::VectorXd& grad_s1, const Eigen::MatrixXd& grad_s2);

// Global-L2-norm clipping; returns the pre-clip norm.
double clip_gradients(Gradients& grads, double clip_norm);

struct AdamState {
    Gradients m, v;
    long step = 0;
};

AdamState init_adam(const NetworkState& state);

// Bias-corrected Adam update (beta1 0.9, beta2 0.999, eps 1e-8). Rejects
// non-finite gradients with NumericError.
void adam_step(NetworkState& state, AdamState& adam, const Gradients& grads,
               double learning_rate);

// Epoch loop over seeded shuffled batches with early stopping on the
// validation C-index of s1; returns the parameters of the best epoch.
std::pair<NetworkState, TrainHistory> train(const SurvivalDataset& train_ds,
                                            const SurvivalDataset& val_ds,
                                            const Architecture& arch, const TrainConfig& cfg);

struct Prediction {
    double s1 = 0.0;
    std::vector<double> s2;
};

Prediction predict(const NetworkState& state, const std::vector<double>& features);
Eigen::VectorXd predict_s1_all(const NetworkState& state, const Eigen::MatrixXd& X);
Eigen::MatrixXd predict_s2_all(const NetworkState& state, const Eigen::MatrixXd& X);

void save_network(const NetworkState& state, const std::string& path);
NetworkState load_network(const std::string& path);
std::string network_to_json_string(const NetworkState& state);
NetworkState network_from_json_string(const std::string& body);

}  // namespace surv
