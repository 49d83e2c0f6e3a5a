#include <cmath>

#include "doctest.h"
#include "reference.hpp"
#include "surv/cox.hpp"
#include "surv/metrics.hpp"
#include "surv/net.hpp"
#include "test_util.hpp"

using namespace surv;

namespace {

// flattened views over the trainable tensors, mirrored for state and grads
template <typename S>
std::vector<double*> flat_params(S& s) {
    std::vector<double*> out;
    auto add = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
    };
    auto addv = [&](Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.data() + i);
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

Architecture small_arch(int input_dim, int horizon, bool bn, double dropout,
                        S1Mode mode = S1Mode::LogHazard) {
    Architecture arch;
    arch.input_dim = input_dim;
    arch.hidden = {{5, Activation::Relu, dropout, bn}, {4, Activation::Tanh, 0.0, bn}};
    arch.horizon_T = horizon;
    arch.s1_mode = mode;
    return arch;
}

struct Batch {
    Eigen::MatrixXd X;
    std::vector<double> times;
    std::vector<std::uint8_t> events;
    LabelMatrix labels;
    std::vector<std::size_t> rows;
};

Batch small_batch(std::uint64_t seed, std::size_t n, int input_dim, int horizon) {
    auto ds = testutil::random_dataset(seed, n, input_dim);
    ds.horizon_T = horizon;
    Batch b;
    b.X.resize(n, input_dim);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < input_dim; ++k) b.X(i, k) = ds.records[i].features[k];
    b.times = ds.times();
    b.events = ds.events();
    b.labels = survival_labels(ds, 1.0);
    b.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) b.rows[i] = i;
    return b;
}

}  // namespace

TEST_CASE("forward constant network") {
    Architecture arch;
    arch.input_dim = 3;
    arch.hidden = {{4, Activation::Relu, 0.0, false}};
    arch.horizon_T = 5;
    NetworkState s = init_network(arch, 1);
    for (auto& h : s.hidden) {
        h.W.setZero();
        h.b.setZero();
    }
    s.bottleneck.W.setZero();
    s.head.W.setZero();
    s.head.b.setConstant(0.3);

    Eigen::MatrixXd X = Eigen::MatrixXd::Random(6, 3);
    const ForwardResult r = forward(s, X, false);
    for (Eigen::Index i = 0; i < 6; ++i) {
        CHECK(r.s1[i] == 0.0);
        for (int t = 0; t < 5; ++t)
            CHECK(r.s2(i, t) == doctest::Approx(1.0 / (1.0 + std::exp(-0.3))).epsilon(1e-15));
    }
}

TEST_CASE("forward eval mode is deterministic") {
    NetworkState s = init_network(small_arch(4, 6, true, 0.3), 7);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 4);
    const ForwardResult a = forward(s, X, false);
    const ForwardResult b = forward(s, X, false);
    CHECK((a.s1 - b.s1).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.s2 - b.s2).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("train mode with dropout 0 and no BN equals eval mode") {
    NetworkState s = init_network(small_arch(4, 6, false, 0.0), 3);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 4);
    auto rng = make_rng(1);
    const ForwardResult a = forward(s, X, true, &rng);
    const ForwardResult b = forward(s, X, false);
    CHECK((a.s1 - b.s1).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.s2 - b.s2).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("efron_batch_loss tied example and degenerate single record") {
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(3);
    const auto r = efron_batch_loss(s1, {1, 1, 2}, {1, 1, 1}, S1Mode::LogHazard);
    CHECK(!r.skipped);
    CHECK(r.loss == doctest::Approx(std::log(6.0)).epsilon(1e-12));

    Eigen::VectorXd one(1);
    one << 2.7;
    const auto single = efron_batch_loss(one, {3}, {1}, S1Mode::LogHazard);
    CHECK(single.loss == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("efron_batch_loss skip signal without events") {
    Eigen::VectorXd s1 = Eigen::VectorXd::Random(4);
    const auto r = efron_batch_loss(s1, {1, 2, 3, 4}, {0, 0, 0, 0}, S1Mode::LogHazard);
    CHECK(r.skipped);
    CHECK(r.loss == 0.0);
    CHECK(r.grad_s1.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("efron_batch_loss gradient matches finite differences in both modes") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto data = testutil::random_survival(seed, 12);
        auto rng = make_rng(seed, 0x5EED);
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::VectorXd s1(12);
        for (int i = 0; i < 12; ++i) s1[i] = g(rng);

        for (S1Mode mode : {S1Mode::LogHazard, S1Mode::Hazard}) {
            const auto res = efron_batch_loss(s1, data.times, data.events, mode);
            std::vector<double> x(s1.data(), s1.data() + s1.size());
            const auto fd = surv::ref::finite_diff(
                [&](const std::vector<double>& v) {
                    Eigen::Map<const Eigen::VectorXd> vv(v.data(), 12);
                    return efron_batch_loss(vv, data.times, data.events, mode).loss;
                },
                x, 1e-6);
            std::vector<double> got(res.grad_s1.data(), res.grad_s1.data() + 12);
            CHECK(surv::ref::max_relative_error(got, fd) < 1e-6);
        }
    }
}

TEST_CASE("ranking_loss spec examples") {
    // two records, one threshold
    LabelMatrix lm;
    lm.rows = 2;
    lm.horizon = 1;
    lm.labels = {1, 0};
    lm.mask = {1, 1};

    Eigen::MatrixXd s2(2, 1);
    s2 << 1.0, 0.0;  // exact margin
    CHECK(ranking_loss(s2, lm, {0, 1}).loss == 0.0);

    s2 << 0.5, 0.5;  // zero separation
    const auto r = ranking_loss(s2, lm, {0, 1});
    CHECK(r.loss == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.acceptable_pairs == 1);

    // all censored at bin 0: nothing observable
    LabelMatrix hidden;
    hidden.rows = 2;
    hidden.horizon = 3;
    hidden.labels.assign(6, 0);
    hidden.mask.assign(6, 0);
    const auto none = ranking_loss(s2.replicate(1, 3), hidden, {0, 1});
    CHECK(none.loss == 0.0);
    CHECK(none.acceptable_pairs == 0);
}

TEST_CASE("ranking_loss matches naive reference and flips orientation") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Batch b = small_batch(seed, 10, 2, 6);
        Eigen::MatrixXd s2 = (Eigen::MatrixXd::Random(10, 6).array() + 1.0) / 2.0;
        const auto fwd = ranking_loss(s2, b.labels, b.rows, RankOrientation::SurvivorMinusEvent);
        CHECK(fwd.loss == doctest::Approx(surv::ref::ranking_loss(s2, b.labels, b.rows, true))
                              .epsilon(1e-12));
        const auto rev = ranking_loss(s2, b.labels, b.rows, RankOrientation::EventMinusSurvivor);
        CHECK(rev.loss == doctest::Approx(surv::ref::ranking_loss(s2, b.labels, b.rows, false))
                              .epsilon(1e-12));
    }
}

TEST_CASE("ranking_loss gradient matches finite differences") {
    Batch b = small_batch(5, 8, 2, 5);
    Eigen::MatrixXd s2 = (Eigen::MatrixXd::Random(8, 5).array() + 1.0) / 2.0;
    const auto res = ranking_loss(s2, b.labels, b.rows);
    REQUIRE(res.acceptable_pairs > 0);

    std::vector<double> x(s2.data(), s2.data() + s2.size());
    const auto fd = surv::ref::finite_diff(
        [&](const std::vector<double>& v) {
            Eigen::Map<const Eigen::MatrixXd> m(v.data(), 8, 5);
            return ranking_loss(m, b.labels, b.rows).loss;
        },
        x, 1e-6);
    std::vector<double> got(res.grad_s2.data(), res.grad_s2.data() + res.grad_s2.size());
    CHECK(surv::ref::max_relative_error(got, fd) < 1e-6);
}

TEST_CASE("ranking_loss is symmetric under batch permutation") {
    Batch b = small_batch(8, 9, 2, 5);
    Eigen::MatrixXd s2 = (Eigen::MatrixXd::Random(9, 5).array() + 1.0) / 2.0;
    const double base = ranking_loss(s2, b.labels, b.rows).loss;

    std::vector<std::size_t> perm{3, 1, 4, 0, 2, 8, 6, 7, 5};
    Eigen::MatrixXd s2p(9, 5);
    std::vector<std::size_t> rows_p(9);
    for (std::size_t i = 0; i < 9; ++i) {
        s2p.row(i) = s2.row(perm[i]);
        rows_p[i] = b.rows[perm[i]];
    }
    CHECK(ranking_loss(s2p, b.labels, rows_p).loss == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("backward zero upstream gives zero parameter gradients") {
    NetworkState s = init_network(small_arch(3, 4, true, 0.0), 2);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(6, 3);
    const ForwardResult r = forward(s, X, true);
    const Gradients g = backward(s, r.cache, Eigen::VectorXd::Zero(6),
                                 Eigen::MatrixXd::Zero(6, 4));
    Gradients& gm = const_cast<Gradients&>(g);
    for (double* p : flat_params(gm)) CHECK(*p == 0.0);
}

TEST_CASE("backward single linear layer closed form") {
    // identity hidden stack: s1 = x . w + b, ds1 upstream delta
    Architecture arch;
    arch.input_dim = 3;
    arch.horizon_T = 2;
    arch.s1_mode = S1Mode::LogHazard;
    NetworkState s = init_network(arch, 3);

    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 3);
    const ForwardResult r = forward(s, X, false);
    Eigen::VectorXd delta = Eigen::VectorXd::Random(5);
    const Gradients g = backward(s, r.cache, delta, Eigen::MatrixXd::Zero(5, 2));
    const Eigen::MatrixXd expected = X.transpose() * delta;
    CHECK((g.bottleneck.W - expected).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(g.bottleneck.b[0] == doctest::Approx(delta.sum()).epsilon(1e-12));
}

TEST_CASE("combined loss with lambda 0 equals the Efron component alone") {
    Batch b = small_batch(4, 10, 3, 6);
    NetworkState s = init_network(small_arch(3, 6, false, 0.0), 11);
    const ForwardResult fwd = forward(s, b.X, true);

    TrainConfig cfg;
    cfg.lambda_rank = 0.0;
    cfg.efron_weight = 1.0;
    const CombinedLoss cl = combined_loss(s, fwd, b.times, b.events, b.labels, b.rows, cfg);
    const auto ef = efron_batch_loss(fwd.s1, b.times, b.events, s.arch.s1_mode);
    CHECK(cl.total == doctest::Approx(ef.loss).epsilon(1e-15));
    CHECK(cl.rank == 0.0);
}

TEST_CASE("combined loss end-to-end gradient vs finite differences") {
    struct Case {
        bool bn;
        double dropout;
        S1Mode mode;
        double l1, l2, lambda;
    };
    for (const Case& c : {Case{false, 0.0, S1Mode::LogHazard, 0.0, 0.0, 1.0},
                          Case{true, 0.0, S1Mode::Hazard, 1e-3, 1e-3, 0.7},
                          Case{true, 0.4, S1Mode::LogHazard, 0.0, 1e-3, 1.3}}) {
        Batch b = small_batch(17, 6, 3, 5);
        NetworkState s = init_network(small_arch(3, 5, c.bn, c.dropout, c.mode), 23);

        TrainConfig cfg;
        cfg.lambda_rank = c.lambda;
        cfg.l1 = c.l1;
        cfg.l2 = c.l2;

        // every evaluation replays the same dropout masks
        auto loss_at = [&](NetworkState& state) {
            auto rng = make_rng(99, 0xD20);
            const ForwardResult fwd = forward(state, b.X, true, &rng);
            return combined_loss(state, fwd, b.times, b.events, b.labels, b.rows, cfg);
        };

        const CombinedLoss cl = loss_at(s);
        Gradients grads = cl.grads;
        std::vector<double*> gp = flat_params(grads);
        std::vector<double*> sp = flat_params(s);
        REQUIRE(gp.size() == sp.size());

        std::vector<double> analytic(gp.size()), numeric(gp.size());
        const double h = 1e-5;
        for (std::size_t k = 0; k < sp.size(); ++k) {
            analytic[k] = *gp[k];
            const double keep = *sp[k];
            *sp[k] = keep + h;
            const double hi = loss_at(s).total;
            *sp[k] = keep - h;
            const double lo = loss_at(s).total;
            *sp[k] = keep;
            numeric[k] = (hi - lo) / (2.0 * h);
        }
        CHECK(surv::ref::norm_relative_error(analytic, numeric) < 1e-5);
    }
}

TEST_CASE("clip_gradients branches") {
    NetworkState s = init_network(small_arch(3, 4, false, 0.0), 5);
    const ForwardResult r = forward(s, Eigen::MatrixXd::Random(4, 3), true);
    Gradients g = backward(s, r.cache, Eigen::VectorXd::Ones(4), Eigen::MatrixXd::Ones(4, 4));

    Gradients small = g;
    const double norm = clip_gradients(small, 1e9);  // identity branch
    for (std::size_t k = 0; k < flat_params(small).size(); ++k)
        CHECK(*flat_params(small)[k] == *flat_params(g)[k]);

    Gradients halved = g;
    clip_gradients(halved, norm / 2.0);  // exact halving
    for (std::size_t k = 0; k < flat_params(halved).size(); ++k)
        CHECK(*flat_params(halved)[k] == doctest::Approx(*flat_params(g)[k] / 2.0).epsilon(1e-12));

    double sq = 0.0;
    for (double* p : flat_params(halved)) sq += *p * *p;
    CHECK(std::sqrt(sq) <= norm / 2.0 + 1e-9);
}

TEST_CASE("adam_step properties") {
    NetworkState s = init_network(small_arch(2, 3, false, 0.0), 9);
    NetworkState before = s;
    AdamState adam = init_adam(s);

    // zero gradient at zero moments leaves parameters unchanged
    ForwardResult r = forward(s, Eigen::MatrixXd::Random(3, 2), true);
    Gradients zero = backward(s, r.cache, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(3, 3));
    adam_step(s, adam, zero, 0.1);
    for (std::size_t k = 0; k < flat_params(s).size(); ++k)
        CHECK(*flat_params(s)[k] == *flat_params(before)[k]);

    // constant gradient drives per-parameter steps toward lr * sign(g)
    Gradients constant = zero;
    for (double* p : flat_params(constant)) *p = 2.5;
    NetworkState t = before;
    AdamState a2 = init_adam(t);
    double prev = *flat_params(t)[0];
    double step = 0.0;
    for (int i = 0; i < 2000; ++i) {
        adam_step(t, a2, constant, 0.01);
        step = prev - *flat_params(t)[0];
        prev = *flat_params(t)[0];
    }
    CHECK(step == doctest::Approx(0.01).epsilon(1e-3));

    // non-finite gradients are rejected
    Gradients bad = zero;
    *flat_params(bad)[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(t, a2, bad, 0.01), NumericError);
}

TEST_CASE("train stops after one epoch with patience 0 and picks the argmax epoch") {
    auto train_ds = testutil::random_dataset(31, 60, 3);
    auto val_ds = testutil::random_dataset(32, 30, 3);
    Architecture arch = small_arch(3, std::max(train_ds.horizon_T, val_ds.horizon_T), false, 0.0);
    train_ds.horizon_T = val_ds.horizon_T = arch.horizon_T;

    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 16;
    cfg.max_epochs = 50;
    cfg.patience = 0;
    auto [state, hist] = train(train_ds, val_ds, arch, cfg);
    CHECK(hist.epochs.size() == 1);
    CHECK(hist.chosen_epoch == 1);

    cfg.patience = 5;
    auto [state2, hist2] = train(train_ds, val_ds, arch, cfg);
    double best = -1.0;
    int argmax = 0;
    for (std::size_t e = 0; e < hist2.epochs.size(); ++e) {
        if (hist2.epochs[e].val_cindex > best) {
            best = hist2.epochs[e].val_cindex;
            argmax = static_cast<int>(e) + 1;
        }
    }
    CHECK(hist2.chosen_epoch == argmax);
    CHECK(hist2.best_val_cindex == best);
}

TEST_CASE("train learns a monotone synthetic signal") {
    // event time decreases deterministically in feature 0
    auto build = [](std::uint64_t seed, std::size_t n) {
        auto rng = make_rng(seed, 0x3A11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<SurvivalRecord> recs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = u(rng);
            recs[i].features = {x, u(rng)};
            recs[i].observed_time = std::floor(10.0 * (1.0 - x)) + 1.0;
            recs[i].event = true;
        }
        return make_dataset(std::move(recs), {"x0", "x1"}, 1.0);
    };
    auto train_ds = build(1, 256);
    auto val_ds = build(2, 96);
    auto test_ds = build(3, 96);
    const int horizon = std::max({train_ds.horizon_T, val_ds.horizon_T, test_ds.horizon_T});
    train_ds.horizon_T = val_ds.horizon_T = test_ds.horizon_T = horizon;

    Architecture arch;
    arch.input_dim = 2;
    arch.hidden = {{16, Activation::Relu, 0.0, false}};
    arch.horizon_T = horizon;

    TrainConfig cfg;
    cfg.learning_rate = 3e-3;
    cfg.batch_size = 64;
    cfg.lambda_rank = 1.0;
    cfg.max_epochs = 60;
    cfg.patience = 10;
    auto [state, hist] = train(train_ds, val_ds, arch, cfg);

    Eigen::MatrixXd Xtest(test_ds.size(), 2);
    for (std::size_t i = 0; i < test_ds.size(); ++i)
        for (int k = 0; k < 2; ++k) Xtest(i, k) = test_ds.records[i].features[k];
    const Eigen::VectorXd s1 = predict_s1_all(state, Xtest);
    std::vector<double> risk(s1.data(), s1.data() + s1.size());
    CHECK(concordance_index(test_ds.times(), test_ds.events(), risk) > 0.9);
}

TEST_CASE("training is bitwise reproducible under a fixed seed") {
    auto train_ds = testutil::random_dataset(41, 50, 3);
    auto val_ds = testutil::random_dataset(42, 25, 3);
    const int horizon = std::max(train_ds.horizon_T, val_ds.horizon_T);
    train_ds.horizon_T = val_ds.horizon_T = horizon;
    Architecture arch = small_arch(3, horizon, true, 0.2);

    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 16;
    cfg.max_epochs = 8;
    cfg.patience = 8;
    cfg.seed = 77;

    auto [s1, h1] = train(train_ds, val_ds, arch, cfg);
    auto [s2, h2] = train(train_ds, val_ds, arch, cfg);
    auto p1 = flat_params(s1), p2 = flat_params(s2);
    REQUIRE(p1.size() == p2.size());
    for (std::size_t k = 0; k < p1.size(); ++k) CHECK(*p1[k] == *p2[k]);
    REQUIRE(h1.epochs.size() == h2.epochs.size());
    for (std::size_t e = 0; e < h1.epochs.size(); ++e)
        CHECK(h1.epochs[e].val_cindex == h2.epochs[e].val_cindex);
}

TEST_CASE("train validates its preconditions") {
    auto train_ds = testutil::random_dataset(51, 20, 2);
    auto val_ds = testutil::random_dataset(52, 10, 2);
    Architecture arch = small_arch(2, train_ds.horizon_T, false, 0.0);
    TrainConfig cfg;
    cfg.batch_size = 1;
    CHECK_THROWS_AS(train(train_ds, val_ds, arch, cfg), InvalidInput);

    cfg.batch_size = 8;
    SurvivalDataset no_pairs = val_ds;
    for (auto& r : no_pairs.records) r.event = false;
    no_pairs = make_dataset(no_pairs.records, no_pairs.feature_names, 1.0);
    CHECK_THROWS_AS(train(train_ds, no_pairs, arch, cfg), InvalidInput);
}

TEST_CASE("predict is deterministic with s2 in the open unit interval") {
    NetworkState s = init_network(small_arch(4, 7, true, 0.25), 13);
    auto rng = make_rng(5, 0xF00D);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = u(rng);
        const Prediction a = predict(s, x);
        const Prediction b = predict(s, x);
        CHECK(a.s1 == b.s1);
        for (std::size_t t = 0; t < a.s2.size(); ++t) {
            CHECK(a.s2[t] == b.s2[t]);
            CHECK(a.s2[t] > 0.0);
            CHECK(a.s2[t] < 1.0);
        }
    }
    CHECK_THROWS_AS(predict(s, {1.0}), InvalidInput);
}

TEST_CASE("network forward agrees with the plain-loop reference") {
    Architecture arch;
    arch.input_dim = 4;
    arch.hidden = {{6, Activation::Relu, 0.0, false}, {3, Activation::Tanh, 0.0, false}};
    arch.horizon_T = 5;
    NetworkState s = init_network(arch, 77);

    auto rng = make_rng(6, 0xFACE);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> rows(40, std::vector<double>(4));
    Eigen::MatrixXd X(40, 4);
    for (int i = 0; i < 40; ++i)
        for (int k = 0; k < 4; ++k) {
            rows[i][k] = u(rng);
            X(i, k) = rows[i][k];
        }

    std::vector<double> ref_s1;
    std::vector<std::vector<double>> ref_s2;
    surv::ref::dense_forward(s, rows, ref_s1, ref_s2);

    const Eigen::VectorXd s1 = predict_s1_all(s, X);
    const Eigen::MatrixXd s2 = predict_s2_all(s, X);
    for (int i = 0; i < 40; ++i) {
        CHECK(s1[i] == doctest::Approx(ref_s1[i]).epsilon(1e-12));
        for (int t = 0; t < 5; ++t)
            CHECK(s2(i, t) == doctest::Approx(ref_s2[i][t]).epsilon(1e-12));
    }
}

TEST_CASE("network manifest round-trips exactly") {
    NetworkState s = init_network(small_arch(3, 4, true, 0.1), 33);
    const std::string body = network_to_json_string(s);
    const NetworkState loaded = network_from_json_string(body);

    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 3);
    const ForwardResult a = forward(s, X, false);
    const ForwardResult b = forward(loaded, X, false);
    CHECK((a.s1 - b.s1).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.s2 - b.s2).lpNorm<Eigen::Infinity>() == 0.0);
}
