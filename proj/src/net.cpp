#include "surv/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "surv/cox.hpp"
#include "surv/metrics.hpp"

namespace surv {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

void apply_activation(Eigen::MatrixXd& m, Activation act) {
    switch (act) {
        case Activation::Relu:
            m = m.cwiseMax(0.0);
            break;
        case Activation::Tanh:
            m = m.array().tanh().matrix();
            break;
        case Activation::Identity:
            break;
    }
}

Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& pre_act, const Eigen::MatrixXd& activated,
                                Activation act) {
    switch (act) {
        case Activation::Relu:
            return (pre_act.array() > 0.0).cast<double>().matrix();
        case Activation::Tanh:
            return (1.0 - activated.array().square()).matrix();
        case Activation::Identity:
            return Eigen::MatrixXd::Ones(pre_act.rows(), pre_act.cols());
    }
    return {};
}

void validate_architecture(const Architecture& arch) {
    if (arch.input_dim <= 0) throw InvalidInput("architecture: input_dim must be positive");
    if (arch.horizon_T <= 0) throw InvalidInput("architecture: horizon_T must be positive");
    for (const auto& h : arch.hidden) {
        if (h.width <= 0) throw InvalidInput("architecture: hidden width must be positive");
        if (h.dropout < 0.0 || h.dropout >= 1.0)
            throw InvalidInput("architecture: dropout rate must lie in [0,1)");
    }
}

struct Span {
    double* data;
    std::size_t n;
};

template <typename State>
std::vector<Span> trainable_spans(State& s) {
    std::vector<Span> out;
    auto add = [&out](Eigen::MatrixXd& m) {
        out.push_back({m.data(), static_cast<std::size_t>(m.size())});
    };
    auto addv = [&out](Eigen::VectorXd& v) {
        out.push_back({v.data(), static_cast<std::size_t>(v.size())});
    };
    for (std::size_t l = 0; l < s.hidden.size(); ++l) {
        add(s.hidden[l].W);
        addv(s.hidden[l].b);
        if (l < s.bn.size() && s.bn[l].gamma.size() > 0) {
            addv(s.bn[l].gamma);
            addv(s.bn[l].beta);
        }
    }
    add(s.bottleneck.W);
    addv(s.bottleneck.b);
    add(s.head.W);
    addv(s.head.b);
    return out;
}

// weight matrices only; L1/L2 penalties exclude biases and BN parameters
template <typename State>
std::vector<Eigen::MatrixXd*> weight_matrices(State& s) {
    std::vector<Eigen::MatrixXd*> out;
    for (auto& h : s.hidden) out.push_back(&h.W);
    out.push_back(&s.bottleneck.W);
    out.push_back(&s.head.W);
    return out;
}

}  // namespace

NetworkState init_network(const Architecture& arch, std::uint64_t seed) {
    validate_architecture(arch);
    NetworkState s;
    s.arch = arch;

    auto fill_normal = [](Eigen::MatrixXd& m, double stddev, std::mt19937_64& rng) {
        std::normal_distribution<double> dist(0.0, stddev);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    };

    int fan_in = arch.input_dim;
    for (std::size_t l = 0; l < arch.hidden.size(); ++l) {
        const auto& spec = arch.hidden[l];
        auto rng = make_rng(seed, 0x11D0, l + 1);
        DenseParams d;
        d.W.resize(fan_in, spec.width);
        // He for rectifiers, Xavier otherwise
        const double stddev = spec.activation == Activation::Relu ? std::sqrt(2.0 / fan_in)
                                                                  : std::sqrt(1.0 / fan_in);
        fill_normal(d.W, stddev, rng);
        d.b = Eigen::VectorXd::Zero(spec.width);
        s.hidden.push_back(std::move(d));

        BatchNormParams bn;
        if (spec.batch_norm) {
            bn.gamma = Eigen::VectorXd::Ones(spec.width);
            bn.beta = Eigen::VectorXd::Zero(spec.width);
            bn.running_mean = Eigen::VectorXd::Zero(spec.width);
            bn.running_var = Eigen::VectorXd::Ones(spec.width);
        }
        s.bn.push_back(std::move(bn));
        fan_in = spec.width;
    }

    auto rng_b = make_rng(seed, 0xB0771);
    s.bottleneck.W.resize(fan_in, 1);
    fill_normal(s.bottleneck.W, std::sqrt(1.0 / fan_in), rng_b);
    s.bottleneck.b = Eigen::VectorXd::Zero(1);

    auto rng_h = make_rng(seed, 0x4EAD);
    s.head.W.resize(1, arch.horizon_T);
    fill_normal(s.head.W, 1.0, rng_h);
    s.head.b = Eigen::VectorXd::Zero(arch.horizon_T);
    return s;
}

ForwardResult forward(const NetworkState& state, const Eigen::MatrixXd& X, bool train_mode,
                      std::mt19937_64* rng) {
    if (X.cols() != state.arch.input_dim)
        throw InvalidInput("forward: batch width does not match input_dim");

    ForwardCache cache;
    cache.train_mode = train_mode;
    cache.input = X;
    const std::size_t L = state.hidden.size();
    cache.layer_in.resize(L);
    cache.pre_bn.resize(L);
    cache.normalized.resize(L);
    cache.bn_mean.resize(L);
    cache.bn_var.resize(L);
    cache.pre_act.resize(L);
    cache.activated.resize(L);
    cache.dropout_mask.resize(L);

    Eigen::MatrixXd cur = X;
    const double B = static_cast<double>(X.rows());

    for (std::size_t l = 0; l < L; ++l) {
        const auto& spec = state.arch.hidden[l];
        cache.layer_in[l] = cur;
        Eigen::MatrixXd z = (cur * state.hidden[l].W).rowwise() + state.hidden[l].b.transpose();
        cache.pre_bn[l] = z;

        if (spec.batch_norm) {
            const auto& bn = state.bn[l];
            Eigen::VectorXd mean, var;
            if (train_mode) {
                mean = z.colwise().mean();
                Eigen::MatrixXd centered = z.rowwise() - mean.transpose();
                var = centered.array().square().colwise().sum() / B;
            } else {
                mean = bn.running_mean;
                var = bn.running_var;
            }
            cache.bn_mean[l] = mean;
            cache.bn_var[l] = var;
            Eigen::ArrayXd inv_sd = (var.array() + kBnEps).sqrt().inverse();
            Eigen::MatrixXd zhat =
                ((z.rowwise() - mean.transpose()).array().rowwise() * inv_sd.transpose())
                    .matrix();
            cache.normalized[l] = zhat;
            z = ((zhat.array().rowwise() * bn.gamma.transpose().array()).rowwise() +
                 bn.beta.transpose().array())
                    .matrix();
        }
        cache.pre_act[l] = z;
        apply_activation(z, spec.activation);
        cache.activated[l] = z;

        if (train_mode && spec.dropout > 0.0) {
            if (!rng) throw InvalidInput("forward: train-mode dropout requires an RNG");
            const double keep = 1.0 - spec.dropout;
            Eigen::MatrixXd mask(z.rows(), z.cols());
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (Eigen::Index i = 0; i < mask.rows(); ++i)
                for (Eigen::Index j = 0; j < mask.cols(); ++j)
                    mask(i, j) = u(*rng) < keep ? 1.0 / keep : 0.0;
            cache.dropout_mask[l] = mask;
            z = z.cwiseProduct(mask);
        }
        if (!z.allFinite())
            throw NumericError("forward: non-finite activation at hidden layer " +
                               std::to_string(l));
        cur = z;
    }

    cache.last_hidden = cur;
    Eigen::VectorXd s1 = (cur * state.bottleneck.W).col(0).array() + state.bottleneck.b[0];
    if (!s1.allFinite()) throw NumericError("forward: non-finite activation at bottleneck");
    cache.s1 = s1;

    Eigen::MatrixXd pre = (s1 * state.head.W).rowwise() + state.head.b.transpose();
    cache.pre_sigmoid = pre;
    Eigen::MatrixXd s2(pre.rows(), pre.cols());
    for (Eigen::Index i = 0; i < pre.rows(); ++i)
        for (Eigen::Index j = 0; j < pre.cols(); ++j) s2(i, j) = sigmoid(pre(i, j));
    cache.s2 = s2;

    ForwardResult out;
    out.s1 = std::move(s1);
    out.s2 = s2;
    out.cache = std::move(cache);
    return out;
}

void update_running_stats(NetworkState& state, const ForwardCache& cache, double momentum) {
    if (!cache.train_mode) return;
    for (std::size_t l = 0; l < state.hidden.size(); ++l) {
        if (!state.arch.hidden[l].batch_norm) continue;
        auto& bn = state.bn[l];
        bn.running_mean = momentum * bn.running_mean + (1.0 - momentum) * cache.bn_mean[l];
        bn.running_var = momentum * bn.running_var + (1.0 - momentum) * cache.bn_var[l];
    }
}

EfronBatchResult efron_batch_loss(const Eigen::VectorXd& s1, const std::vector<double>& times,
                                  const std::vector<std::uint8_t>& events, S1Mode mode) {
    const std::size_t n = times.size();
    if (static_cast<std::size_t>(s1.size()) != n || events.size() != n)
        throw InvalidInput("efron_batch_loss: input length mismatch");

    EfronBatchResult out;
    out.grad_s1 = Eigen::VectorXd::Zero(n);
    if (std::none_of(events.begin(), events.end(), [](std::uint8_t e) { return e != 0; })) {
        out.skipped = true;  // no event in batch: no Efron term this step
        return out;
    }

    std::vector<double> log_hazard(n);
    if (mode == S1Mode::LogHazard) {
        for (std::size_t i = 0; i < n; ++i) log_hazard[i] = s1[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) log_hazard[i] = std::log(softplus(s1[i]) + 1e-8);
    }

    const EfronResult core = efron_partial_nll(log_hazard, times, events);
    out.loss = core.nll;
    if (mode == S1Mode::LogHazard) {
        for (std::size_t i = 0; i < n; ++i) out.grad_s1[i] = core.grad[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double s = softplus(s1[i]) + 1e-8;
            out.grad_s1[i] = core.grad[i] * sigmoid(s1[i]) / s;  // chain through log softplus
        }
    }
    return out;
}

RankingResult ranking_loss(const Eigen::MatrixXd& s2, const LabelMatrix& labels,
                           const std::vector<std::size_t>& batch_rows,
                           RankOrientation orientation) {
    const std::size_t B = batch_rows.size();
    if (static_cast<std::size_t>(s2.rows()) != B)
        throw InvalidInput("ranking_loss: batch size mismatch");
    if (static_cast<std::size_t>(s2.cols()) != labels.horizon)
        throw InvalidInput("ranking_loss: horizon mismatch");
    if (B < 2) throw InvalidInput("ranking_loss: batch must hold at least 2 records");

    const std::size_t T = labels.horizon;
    RankingResult out;
    out.grad_s2 = Eigen::MatrixXd::Zero(B, T);
    std::vector<double> loss_t(T, 0.0);
    std::vector<long long> pairs_t(T, 0);

    const double sign = orientation == RankOrientation::SurvivorMinusEvent ? 1.0 : -1.0;

    // thresholds are independent; each t owns its own gradient column
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<std::size_t> pos, neg;
        for (std::size_t r = 0; r < B; ++r) {
            const std::size_t row = batch_rows[r];
            if (!labels.masked(row, t)) continue;
            (labels.label(row, t) ? pos : neg).push_back(r);
        }
        if (pos.empty() || neg.empty()) continue;
        double acc = 0.0;
        for (std::size_t i : pos) {
            for (std::size_t j : neg) {
                const double d = sign * (s2(i, t) - s2(j, t));
                const double e = d - 1.0;
                acc += e * e;
                out.grad_s2(i, t) += 2.0 * e * sign;
                out.grad_s2(j, t) -= 2.0 * e * sign;
            }
        }
        loss_t[t] = acc;
        pairs_t[t] = static_cast<long long>(pos.size()) * static_cast<long long>(neg.size());
    }

    long long total_pairs = 0;
    double total_loss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        total_pairs += pairs_t[t];
        total_loss += loss_t[t];
    }
    out.acceptable_pairs = static_cast<std::size_t>(total_pairs);
    if (total_pairs == 0) return out;  // flagged by acceptable_pairs == 0

    // normalized by acceptable-pair count so lambda_rank is batch-size free
    out.loss = total_loss / static_cast<double>(total_pairs);
    out.grad_s2 /= static_cast<double>(total_pairs);
    return out;
}

namespace {

Gradients make_zero_grads(const NetworkState& state) {
    Gradients g;
    for (std::size_t l = 0; l < state.hidden.size(); ++l) {
        DenseParams d;
        d.W = Eigen::MatrixXd::Zero(state.hidden[l].W.rows(), state.hidden[l].W.cols());
        d.b = Eigen::VectorXd::Zero(state.hidden[l].b.size());
        g.hidden.push_back(std::move(d));
        BatchNormParams bn;
        if (state.bn[l].gamma.size() > 0) {
            bn.gamma = Eigen::VectorXd::Zero(state.bn[l].gamma.size());
            bn.beta = Eigen::VectorXd::Zero(state.bn[l].beta.size());
        }
        g.bn.push_back(std::move(bn));
    }
    g.bottleneck.W = Eigen::MatrixXd::Zero(state.bottleneck.W.rows(), state.bottleneck.W.cols());
    g.bottleneck.b = Eigen::VectorXd::Zero(1);
    g.head.W = Eigen::MatrixXd::Zero(1, state.head.W.cols());
    g.head.b = Eigen::VectorXd::Zero(state.head.b.size());
    return g;
}

}  // namespace

Gradients backward(const NetworkState& state, const ForwardCache& cache,
                   const Eigen::VectorXd& grad_s1, const Eigen::MatrixXd& grad_s2) {
    const Eigen::Index B = cache.input.rows();
    if (grad_s1.size() != cache.s1.size() || grad_s2.rows() != cache.s2.rows() ||
        grad_s2.cols() != cache.s2.cols())
        throw InvalidInput("backward: gradient shape does not match cache");

    Gradients g = make_zero_grads(state);

    // head: s2 = sigmoid(s1 * W + b)
    Eigen::MatrixXd dpre = grad_s2.cwiseProduct(
        cache.s2.cwiseProduct((1.0 - cache.s2.array()).matrix()));
    g.head.W = cache.s1.transpose() * dpre;  // 1 x T
    g.head.b = dpre.colwise().sum().transpose();
    Eigen::VectorXd ds1 = grad_s1 + dpre * state.head.W.transpose();

    // bottleneck: s1 = h * W + b
    g.bottleneck.W = cache.last_hidden.transpose() * ds1;
    g.bottleneck.b[0] = ds1.sum();
    Eigen::MatrixXd dcur = ds1 * state.bottleneck.W.transpose();

    for (std::size_t l = state.hidden.size(); l-- > 0;) {
        const auto& spec = state.arch.hidden[l];
        if (cache.train_mode && spec.dropout > 0.0)
            dcur = dcur.cwiseProduct(cache.dropout_mask[l]);

        Eigen::MatrixXd dy = dcur.cwiseProduct(
            activation_grad(cache.pre_act[l], cache.activated[l], spec.activation));

        Eigen::MatrixXd dz;
        if (spec.batch_norm) {
            const auto& bn = state.bn[l];
            const Eigen::MatrixXd& zhat = cache.normalized[l];
            g.bn[l].gamma = dy.cwiseProduct(zhat).colwise().sum().transpose();
            g.bn[l].beta = dy.colwise().sum().transpose();
            Eigen::MatrixXd dzhat =
                (dy.array().rowwise() * bn.gamma.transpose().array()).matrix();
            Eigen::ArrayXd inv_sd = (cache.bn_var[l].array() + kBnEps).sqrt().inverse();
            if (cache.train_mode) {
                // batch mean/variance were themselves functions of z
                const double Bd = static_cast<double>(B);
                dz.resize(dzhat.rows(), dzhat.cols());
                for (Eigen::Index u = 0; u < dzhat.cols(); ++u) {
                    const double sum_d = dzhat.col(u).sum();
                    const double sum_dz = dzhat.col(u).dot(zhat.col(u));
                    dz.col(u) = ((Bd * dzhat.col(u).array() - sum_d -
                                  zhat.col(u).array() * sum_dz) *
                                 (inv_sd[u] / Bd))
                                    .matrix();
                }
            } else {
                dz = (dzhat.array().rowwise() * inv_sd.transpose()).matrix();
            }
        } else {
            dz = dy;
        }

        g.hidden[l].W = cache.layer_in[l].transpose() * dz;
        g.hidden[l].b = dz.colwise().sum().transpose();
        dcur = dz * state.hidden[l].W.transpose();
    }
    return g;
}

CombinedLoss combined_loss(const NetworkState& state, const ForwardResult& fwd,
                           const std::vector<double>& batch_times,
                           const std::vector<std::uint8_t>& batch_events,
                           const LabelMatrix& labels, const std::vector<std::size_t>& batch_rows,
                           const TrainConfig& cfg) {
    CombinedLoss out;

    Eigen::VectorXd grad_s1 = Eigen::VectorXd::Zero(fwd.s1.size());
    if (cfg.efron_weight != 0.0) {
        const EfronBatchResult ef =
            efron_batch_loss(fwd.s1, batch_times, batch_events, state.arch.s1_mode);
        out.efron = ef.loss;
        out.efron_skipped = ef.skipped;
        grad_s1 = cfg.efron_weight * ef.grad_s1;
    }

    Eigen::MatrixXd grad_s2 = Eigen::MatrixXd::Zero(fwd.s2.rows(), fwd.s2.cols());
    if (cfg.lambda_rank != 0.0) {
        const RankingResult rk = ranking_loss(fwd.s2, labels, batch_rows, cfg.rank_orientation);
        out.rank = rk.loss;
        out.acceptable_pairs = rk.acceptable_pairs;
        grad_s2 = cfg.lambda_rank * rk.grad_s2;
    }

    out.grads = backward(state, fwd.cache, grad_s1, grad_s2);

    // L1/L2 penalties on weight matrices (biases and BN parameters excluded)
    if (cfg.l1 != 0.0 || cfg.l2 != 0.0) {
        auto ws = weight_matrices(const_cast<NetworkState&>(state));
        auto gs = weight_matrices(out.grads);
        for (std::size_t k = 0; k < ws.size(); ++k) {
            const Eigen::MatrixXd& W = *ws[k];
            out.penalty += cfg.l1 * W.array().abs().sum() + cfg.l2 * W.array().square().sum();
            *gs[k] += cfg.l1 * W.array().sign().matrix() + 2.0 * cfg.l2 * W;
        }
    }

    out.total = cfg.efron_weight * out.efron + cfg.lambda_rank * out.rank + out.penalty;
    return out;
}

double clip_gradients(Gradients& grads, double clip_norm) {
    if (clip_norm <= 0.0) throw InvalidInput("clip_gradients: clip_norm must be positive");
    double sq = 0.0;
    for (const auto& span : trainable_spans(grads))
        for (std::size_t i = 0; i < span.n; ++i) sq += span.data[i] * span.data[i];
    const double norm = std::sqrt(sq);
    if (norm > clip_norm) {
        const double scale = clip_norm / norm;
        for (auto& span : trainable_spans(grads))
            for (std::size_t i = 0; i < span.n; ++i) span.data[i] *= scale;
    }
    return norm;
}

AdamState init_adam(const NetworkState& state) {
    AdamState a;
    a.m = make_zero_grads(state);
    a.v = make_zero_grads(state);
    a.step = 0;
    return a;
}

void adam_step(NetworkState& state, AdamState& adam, const Gradients& grads,
               double learning_rate) {
    auto gs = trainable_spans(const_cast<Gradients&>(grads));
    for (const auto& span : gs)
        for (std::size_t i = 0; i < span.n; ++i)
            if (!std::isfinite(span.data[i]))
                throw NumericError("adam_step: non-finite gradient, step rejected");

    adam.step += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));

    auto ps = trainable_spans(state);
    auto ms = trainable_spans(adam.m);
    auto vs = trainable_spans(adam.v);
    for (std::size_t k = 0; k < ps.size(); ++k) {
        for (std::size_t i = 0; i < ps[k].n; ++i) {
            const double gi = gs[k].data[i];
            double& m = ms[k].data[i];
            double& v = vs[k].data[i];
            m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * gi;
            v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * gi * gi;
            ps[k].data[i] -= learning_rate * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
        }
    }
}

namespace {

Eigen::MatrixXd dataset_matrix(const SurvivalDataset& ds) {
    Eigen::MatrixXd X(ds.size(), ds.feature_count());
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < ds.feature_count(); ++k)
            X(i, k) = ds.records[i].features[k];
    return X;
}

}  // namespace

std::pair<NetworkState, TrainHistory> train(const SurvivalDataset& train_ds,
                                            const SurvivalDataset& val_ds,
                                            const Architecture& arch, const TrainConfig& cfg) {
    if (cfg.batch_size < 2)
        throw InvalidInput("train: batch_size must be >= 2 (pairwise losses need pairs)");
    if (cfg.learning_rate <= 0.0) throw InvalidInput("train: learning_rate must be positive");
    if (val_ds.records.empty()) throw InvalidInput("train: validation split is empty");
    if (admissible_pairs(val_ds.times(), val_ds.events()).empty())
        throw InvalidInput("train: validation split has no admissible pair");

    const LabelMatrix labels = survival_labels(train_ds, train_ds.unit_length);
    const Eigen::MatrixXd X = dataset_matrix(train_ds);
    const Eigen::MatrixXd Xval = dataset_matrix(val_ds);
    const std::vector<double> times = train_ds.times();
    const std::vector<std::uint8_t> events = train_ds.events();
    const std::vector<double> val_times = val_ds.times();
    const std::vector<std::uint8_t> val_events = val_ds.events();

    NetworkState state = init_network(arch, cfg.seed);
    AdamState adam = init_adam(state);
    auto shuffle_rng = make_rng(cfg.seed, 0x5A0FF1E);
    auto dropout_rng = make_rng(cfg.seed, 0xD80);

    TrainHistory hist;
    NetworkState best = state;
    double best_c = -1.0;
    int best_epoch = 0;

    std::vector<std::size_t> order(train_ds.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        seeded_shuffle(order, shuffle_rng);

        EpochStats stats;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            if (end - start < 2) break;  // a trailing singleton has no pairs
            const std::vector<std::size_t> rows(order.begin() + start, order.begin() + end);

            Eigen::MatrixXd Xb(rows.size(), X.cols());
            std::vector<double> bt(rows.size());
            std::vector<std::uint8_t> be(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                Xb.row(r) = X.row(rows[r]);
                bt[r] = times[rows[r]];
                be[r] = events[rows[r]];
            }

            ForwardResult fwd = forward(state, Xb, true, &dropout_rng);
            CombinedLoss cl = combined_loss(state, fwd, bt, be, labels, rows, cfg);
            if (!std::isfinite(cl.total)) {
                hist.aborted = true;
                hist.abort_reason = "non-finite training loss at epoch " + std::to_string(epoch);
                hist.chosen_epoch = best_epoch;
                hist.best_val_cindex = best_c;
                return {best_epoch > 0 ? best : state, hist};
            }
            if (cl.efron_skipped) ++hist.skipped_batches;

            clip_gradients(cl.grads, cfg.clip_norm);
            adam_step(state, adam, cl.grads, cfg.learning_rate);
            update_running_stats(state, fwd.cache, cfg.bn_momentum);

            stats.efron_loss += cl.efron;
            stats.rank_loss += cl.rank;
            stats.penalty += cl.penalty;
            ++n_batches;
        }
        if (n_batches > 0) {
            stats.efron_loss /= static_cast<double>(n_batches);
            stats.rank_loss /= static_cast<double>(n_batches);
            stats.penalty /= static_cast<double>(n_batches);
        }

        const Eigen::VectorXd val_s1 = predict_s1_all(state, Xval);
        std::vector<double> val_scores(val_s1.data(), val_s1.data() + val_s1.size());
        stats.val_cindex = concordance_index(val_times, val_events, val_scores);
        hist.epochs.push_back(stats);

        if (stats.val_cindex > best_c) {
            best_c = stats.val_cindex;
            best_epoch = epoch;
            best = state;
        }
        if (epoch - best_epoch >= cfg.patience) break;
    }

    hist.chosen_epoch = best_epoch;
    hist.best_val_cindex = best_c;
    return {best, hist};
}

Prediction predict(const NetworkState& state, const std::vector<double>& features) {
    if (static_cast<int>(features.size()) != state.arch.input_dim)
        throw InvalidInput("predict: feature length mismatch");
    Eigen::MatrixXd X(1, features.size());
    for (std::size_t k = 0; k < features.size(); ++k) X(0, k) = features[k];
    const ForwardResult r = forward(state, X, false);
    Prediction p;
    p.s1 = r.s1[0];
    p.s2.assign(r.s2.data(), r.s2.data() + r.s2.cols());
    return p;
}

namespace {

// Row-block parallel eval-mode forward for large cohorts; blocks are fixed
// so outputs do not depend on the thread count.
template <typename Fill>
void blocked_eval(const NetworkState& state, const Eigen::MatrixXd& X, Fill&& fill) {
    const Eigen::Index n = X.rows();
    constexpr Eigen::Index kBlock = 512;
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(dynamic) if (blocks > 1)
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index lo = b * kBlock;
        const Eigen::Index hi = std::min(n, lo + kBlock);
        const ForwardResult r = forward(state, X.middleRows(lo, hi - lo), false);
        fill(lo, r);
    }
}

}  // namespace

Eigen::VectorXd predict_s1_all(const NetworkState& state, const Eigen::MatrixXd& X) {
    Eigen::VectorXd out(X.rows());
    blocked_eval(state, X, [&](Eigen::Index lo, const ForwardResult& r) {
        out.segment(lo, r.s1.size()) = r.s1;
    });
    return out;
}

Eigen::MatrixXd predict_s2_all(const NetworkState& state, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), state.arch.horizon_T);
    blocked_eval(state, X, [&](Eigen::Index lo, const ForwardResult& r) {
        out.middleRows(lo, r.s2.rows()) = r.s2;
    });
    return out;
}

// ---------------------------------------------------------------------------
// serialization: versioned plain-text parameter manifest

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> vals;
    vals.reserve(m.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) vals.push_back(m(r, c));
    j["values"] = vals;  // row-major
    return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto vals = j.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(vals.size()) != m.size())
        throw ParseError("network manifest: value count does not match shape");
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = vals[k++];
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
    const auto vals = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "relu";
}

Activation activation_from(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    throw ParseError("network manifest: unknown activation '" + s + "'");
}

}  // namespace

namespace {

json network_to_json(const NetworkState& state) {
    json j;
    j["format_version"] = 1;
    json arch;
    arch["input_dim"] = state.arch.input_dim;
    arch["horizon_T"] = state.arch.horizon_T;
    arch["s1_mode"] = state.arch.s1_mode == S1Mode::LogHazard ? "log-hazard" : "hazard";
    arch["hidden"] = json::array();
    for (const auto& h : state.arch.hidden) {
        json hl;
        hl["width"] = h.width;
        hl["activation"] = activation_name(h.activation);
        hl["dropout"] = h.dropout;
        hl["batch_norm"] = h.batch_norm;
        arch["hidden"].push_back(hl);
    }
    j["architecture"] = arch;

    j["hidden"] = json::array();
    for (std::size_t l = 0; l < state.hidden.size(); ++l) {
        json layer;
        layer["W"] = matrix_to_json(state.hidden[l].W);
        layer["b"] = vector_to_json(state.hidden[l].b);
        if (state.bn[l].gamma.size() > 0) {
            layer["bn"] = {{"gamma", vector_to_json(state.bn[l].gamma)},
                           {"beta", vector_to_json(state.bn[l].beta)},
                           {"running_mean", vector_to_json(state.bn[l].running_mean)},
                           {"running_var", vector_to_json(state.bn[l].running_var)}};
        }
        j["hidden"].push_back(layer);
    }
    j["bottleneck"] = {{"W", matrix_to_json(state.bottleneck.W)},
                       {"b", vector_to_json(state.bottleneck.b)}};
    j["head"] = {{"W", matrix_to_json(state.head.W)}, {"b", vector_to_json(state.head.b)}};
    return j;
}

NetworkState network_from_json(const json& j) {
    if (j.at("format_version").get<int>() != 1)
        throw ParseError("load_network: unsupported format version");

    NetworkState s;
    const json& arch = j.at("architecture");
    s.arch.input_dim = arch.at("input_dim").get<int>();
    s.arch.horizon_T = arch.at("horizon_T").get<int>();
    s.arch.s1_mode =
        arch.at("s1_mode").get<std::string>() == "hazard" ? S1Mode::Hazard : S1Mode::LogHazard;
    for (const auto& hl : arch.at("hidden")) {
        HiddenLayerSpec spec;
        spec.width = hl.at("width").get<int>();
        spec.activation = activation_from(hl.at("activation").get<std::string>());
        spec.dropout = hl.at("dropout").get<double>();
        spec.batch_norm = hl.at("batch_norm").get<bool>();
        s.arch.hidden.push_back(spec);
    }

    for (const auto& layer : j.at("hidden")) {
        DenseParams d;
        d.W = matrix_from_json(layer.at("W"));
        d.b = vector_from_json(layer.at("b"));
        s.hidden.push_back(std::move(d));
        BatchNormParams bn;
        if (layer.contains("bn")) {
            bn.gamma = vector_from_json(layer.at("bn").at("gamma"));
            bn.beta = vector_from_json(layer.at("bn").at("beta"));
            bn.running_mean = vector_from_json(layer.at("bn").at("running_mean"));
            bn.running_var = vector_from_json(layer.at("bn").at("running_var"));
        }
        s.bn.push_back(std::move(bn));
    }
    s.bottleneck.W = matrix_from_json(j.at("bottleneck").at("W"));
    s.bottleneck.b = vector_from_json(j.at("bottleneck").at("b"));
    s.head.W = matrix_from_json(j.at("head").at("W"));
    s.head.b = vector_from_json(j.at("head").at("b"));
    return s;
}

}  // namespace

void save_network(const NetworkState& state, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("save_network: cannot open " + path);
    out << network_to_json(state).dump(2) << "\n";
}

NetworkState load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("load_network: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return network_from_json(j);
}

std::string network_to_json_string(const NetworkState& state) {
    return network_to_json(state).dump();
}

NetworkState network_from_json_string(const std::string& body) {
    try {
        return network_from_json(json::parse(body));
    } catch (const json::exception& e) {
        throw ParseError(std::string("network manifest: ") + e.what());
    }
}

}  // namespace surv
