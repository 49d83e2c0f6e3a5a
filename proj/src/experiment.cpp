#include "surv/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "surv/km.hpp"
#include "surv/labels.hpp"
#include "surv/metrics.hpp"
#include "surv/svg.hpp"

namespace surv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& body) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << body;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

Eigen::MatrixXd dataset_matrix(const SurvivalDataset& ds) {
    Eigen::MatrixXd X(ds.size(), ds.feature_count());
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < ds.feature_count(); ++k)
            X(i, k) = ds.records[i].features[k];
    return X;
}

std::vector<std::size_t> sorted_union(const std::vector<std::size_t>& a,
                                      const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Cox: return "cox";
        case ModelKind::MlpEfron: return "mlp-efron";
        case ModelKind::MlpRank: return "mlp-rank";
        case ModelKind::MlpEfronRank: return "mlp-efron-rank";
    }
    return "cox";
}

ModelKind model_kind_from(const std::string& name) {
    if (name == "cox") return ModelKind::Cox;
    if (name == "mlp-efron") return ModelKind::MlpEfron;
    if (name == "mlp-rank") return ModelKind::MlpRank;
    if (name == "mlp-efron-rank") return ModelKind::MlpEfronRank;
    throw InvalidInput("unknown model kind '" + name + "'");
}

PreparedData prepare(const DatasetSpec& spec, const std::string& spec_file,
                     const std::array<double, 3>& fractions, std::uint64_t seed) {
    PreparedData prep;
    prep.spec = spec;
    prep.fractions = fractions;

    const std::string resolved = resolve_data_path(spec, spec_file);
    if (!fs::exists(resolved))
        throw InvalidInput("dataset file not found: " + resolved +
                           " (download the CSV named in the spec; see README)");
    FeatureTable raw_table = load_csv(spec, resolved);
    if (raw_table.rows() == 0) throw SchemaError(spec.name + ": no rows after filtering");

    FeatureTable table = drop_sparse_features(raw_table, spec.drop_threshold, &prep.dropped);

    std::vector<int> bins(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i)
        bins[i] = discretize_time(table.times[i], spec.time_unit_length);
    prep.split = stratified_split(bins, table.events, fractions, seed);

    prep.imputer = fit_impute(table, prep.split.train);
    table = impute(table, prep.imputer);
    prep.encoder = fit_encode(table, prep.split.train);

    std::vector<std::size_t> all_rows(table.rows());
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const Eigen::MatrixXd X = encode(table, prep.encoder, all_rows);

    std::vector<SurvivalRecord> records(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        records[i].features.assign(X.row(i).data(), X.row(i).data() + X.cols());
        // Eigen row expressions are not contiguous; copy explicitly
        for (Eigen::Index k = 0; k < X.cols(); ++k) records[i].features[k] = X(i, k);
        records[i].observed_time = table.times[i];
        records[i].event = table.events[i] != 0;
    }
    prep.full = make_dataset(std::move(records), prep.encoder.encoded_names,
                             spec.time_unit_length);

    const long n = static_cast<long>(table.rows());
    long events = 0;
    std::set<double> unique_times(table.times.begin(), table.times.end());
    for (auto e : table.events) events += e != 0;
    prep.fingerprint.rows = n;
    prep.fingerprint.censored_pct =
        100.0 * static_cast<double>(n - events) / static_cast<double>(n);
    prep.fingerprint.unique_times = static_cast<long>(unique_times.size());

    if (spec.expected_rows && *spec.expected_rows != n)
        throw SchemaError(spec.name + ": fingerprint mismatch, expected " +
                          std::to_string(*spec.expected_rows) + " rows, got " +
                          std::to_string(n));
    if (spec.expected_censored_pct &&
        std::abs(*spec.expected_censored_pct - prep.fingerprint.censored_pct) > 0.5)
        throw SchemaError(spec.name + ": fingerprint mismatch, expected " +
                          std::to_string(*spec.expected_censored_pct) + "% censored, got " +
                          std::to_string(prep.fingerprint.censored_pct) + "%");
    return prep;
}

namespace {

json fingerprint_json(const Fingerprint& fp) {
    return {{"rows", fp.rows},
            {"censored_pct", fp.censored_pct},
            {"unique_times", fp.unique_times}};
}

json split_json(const SplitIndices& split, const std::array<double, 3>& fractions) {
    return {{"seed", split.seed},
            {"fractions", fractions},
            {"train", split.train},
            {"validation", split.validation},
            {"test", split.test},
            {"merged_cells", split.merged_cells}};
}

}  // namespace

void write_prep_artifacts(const PreparedData& prep, const std::string& out_dir) {
    fs::create_directories(out_dir);

    // encoded matrix as CSV: encoded features, then time and event
    std::string body;
    for (const auto& name : prep.encoder.encoded_names) body += csv_escape(name) + ",";
    body += "time,event\n";
    for (const auto& rec : prep.full.records) {
        for (double v : rec.features) body += fmt17(v) + ",";
        body += fmt17(rec.observed_time) + "," + (rec.event ? "1" : "0") + "\n";
    }
    write_text(out_dir + "/encoded.csv", body);

    json manifest;
    manifest["dataset"] = prep.spec.name;
    manifest["fingerprint"] = fingerprint_json(prep.fingerprint);
    manifest["time_unit_length"] = prep.spec.time_unit_length;
    manifest["horizon_T"] = prep.full.horizon_T;
    manifest["feature_names"] = prep.encoder.encoded_names;
    manifest["dropped_features"] = json::array();
    for (const auto& d : prep.dropped)
        manifest["dropped_features"].push_back(
            {{"name", d.name}, {"missing_fraction", d.missing_fraction}});
    manifest["warnings"] = prep.encoder.warnings;

    json scaling = json::object(), categories = json::object(), medians = json::object(),
         modes = json::object();
    for (std::size_t f = 0; f < prep.encoder.source.size(); ++f) {
        const auto& src = prep.encoder.source[f];
        if (src.kind == FeatureKind::Continuous) {
            scaling[src.name] = {{"min", prep.encoder.mins[f]}, {"max", prep.encoder.maxs[f]}};
            medians[src.name] = prep.imputer.medians[f];
        } else {
            categories[src.name] = prep.encoder.categories[f];
            modes[src.name] = prep.imputer.modes[f];
        }
    }
    manifest["scaling"] = scaling;
    manifest["categories"] = categories;
    manifest["imputation"] = {{"medians", medians}, {"modes", modes}};
    manifest["split"] = split_json(prep.split, prep.fractions);
    write_json(out_dir + "/manifest.json", manifest);
}

// ---------------------------------------------------------------------------
// config files

namespace {

HiddenLayerSpec hidden_from_json(const json& j) {
    HiddenLayerSpec h;
    h.width = j.value("width", 32);
    const std::string act = j.value("activation", std::string("relu"));
    if (act == "relu")
        h.activation = Activation::Relu;
    else if (act == "tanh")
        h.activation = Activation::Tanh;
    else if (act == "identity")
        h.activation = Activation::Identity;
    else
        throw ParseError("unknown activation '" + act + "'");
    h.dropout = j.value("dropout", 0.0);
    h.batch_norm = j.value("batch_norm", false);
    return h;
}

json hidden_to_json(const HiddenLayerSpec& h) {
    const char* act = h.activation == Activation::Relu
                          ? "relu"
                          : (h.activation == Activation::Tanh ? "tanh" : "identity");
    return {{"width", h.width},
            {"activation", act},
            {"dropout", h.dropout},
            {"batch_norm", h.batch_norm}};
}

TrainConfig train_from_json(const json& j) {
    TrainConfig t;
    t.learning_rate = j.value("learning_rate", 1e-5);
    t.batch_size = j.value("batch_size", 32);
    t.lambda_rank = j.value("lambda_rank", 1.0);
    t.l1 = j.value("l1", 0.0);
    t.l2 = j.value("l2", 0.0);
    t.clip_norm = j.value("clip_norm", 5.0);
    t.max_epochs = j.value("max_epochs", 200);
    t.patience = j.value("patience", 10);
    t.seed = j.value("seed", 0);
    const std::string orient = j.value("rank_orientation", std::string("survivor-minus-event"));
    if (orient == "survivor-minus-event")
        t.rank_orientation = RankOrientation::SurvivorMinusEvent;
    else if (orient == "event-minus-survivor")
        t.rank_orientation = RankOrientation::EventMinusSurvivor;
    else
        throw ParseError("unknown rank_orientation '" + orient + "'");
    return t;
}

json train_to_json(const TrainConfig& t) {
    return {{"learning_rate", t.learning_rate},
            {"batch_size", t.batch_size},
            {"lambda_rank", t.lambda_rank},
            {"l1", t.l1},
            {"l2", t.l2},
            {"clip_norm", t.clip_norm},
            {"max_epochs", t.max_epochs},
            {"patience", t.patience},
            {"seed", t.seed},
            {"rank_orientation", t.rank_orientation == RankOrientation::SurvivorMinusEvent
                                     ? "survivor-minus-event"
                                     : "event-minus-survivor"}};
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    const json j = read_json(path);
    ExperimentConfig cfg;
    try {
        cfg.spec_path = j.at("spec").get<std::string>();
        cfg.model = model_kind_from(j.value("model", std::string("cox")));
        if (j.contains("fractions")) {
            const auto f = j.at("fractions").get<std::vector<double>>();
            if (f.size() != 3) throw ParseError(path + ": fractions must have 3 entries");
            cfg.fractions = {f[0], f[1], f[2]};
        }
        cfg.split_seed = j.value("split_seed", 1);
        cfg.splits = j.value("splits", 1);
        if (j.contains("architecture")) {
            const json& arch = j.at("architecture");
            cfg.s1_mode = arch.value("s1_mode", std::string("log-hazard")) == "hazard"
                              ? S1Mode::Hazard
                              : S1Mode::LogHazard;
            if (arch.contains("hidden")) {
                cfg.hidden.clear();
                for (const auto& h : arch.at("hidden")) cfg.hidden.push_back(hidden_from_json(h));
            }
        }
        if (j.contains("train")) cfg.train = train_from_json(j.at("train"));
        if (j.contains("cox")) {
            cfg.cox.tolerance = j.at("cox").value("tolerance", 1e-8);
            cfg.cox.max_iters = j.at("cox").value("max_iters", 100);
            cfg.cox.l2 = j.at("cox").value("l2", 0.0);
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return cfg;
}

namespace {

json experiment_config_json(const ExperimentConfig& cfg) {
    json arch;
    arch["s1_mode"] = cfg.s1_mode == S1Mode::Hazard ? "hazard" : "log-hazard";
    arch["hidden"] = json::array();
    for (const auto& h : cfg.hidden) arch["hidden"].push_back(hidden_to_json(h));
    return {{"spec", cfg.spec_path},
            {"model", model_kind_name(cfg.model)},
            {"fractions", cfg.fractions},
            {"split_seed", cfg.split_seed},
            {"splits", cfg.splits},
            {"architecture", arch},
            {"train", train_to_json(cfg.train)},
            {"cox",
             {{"tolerance", cfg.cox.tolerance},
              {"max_iters", cfg.cox.max_iters},
              {"l2", cfg.cox.l2}}}};
}

TrainConfig apply_kind(TrainConfig t, ModelKind kind) {
    switch (kind) {
        case ModelKind::Cox:
            break;
        case ModelKind::MlpEfron:
            t.efron_weight = 1.0;
            t.lambda_rank = 0.0;
            break;
        case ModelKind::MlpRank:
            t.efron_weight = 0.0;
            if (t.lambda_rank <= 0.0)
                throw InvalidInput("mlp-rank needs lambda_rank > 0");
            break;
        case ModelKind::MlpEfronRank:
            t.efron_weight = 1.0;  // lambda_rank 0 degenerates to mlp-efron
            break;
    }
    return t;
}

void write_km_csv(const KMCurve& km, const std::string& path) {
    std::string body = "time,survival,at_risk,events\n";
    for (std::size_t i = 0; i < km.times.size(); ++i)
        body += fmt17(km.times[i]) + "," + fmt17(km.survival[i]) + "," +
                std::to_string(km.at_risk[i]) + "," + std::to_string(km.events[i]) + "\n";
    write_text(path, body);
}

void write_auroc_csv(const std::vector<std::optional<double>>& series, const std::string& path) {
    std::string header, row;
    for (std::size_t t = 0; t < series.size(); ++t) {
        header += (t ? "," : "") + ("t" + std::to_string(t));
        row += t ? "," : "";
        if (series[t]) row += fmt17(*series[t]);  // gaps stay empty
    }
    write_text(path, header + "\n" + row + "\n");
}

void write_history_csv(const TrainHistory& hist, const std::string& path) {
    std::string body = "epoch,efron_loss,rank_loss,penalty,val_cindex\n";
    for (std::size_t e = 0; e < hist.epochs.size(); ++e) {
        const auto& s = hist.epochs[e];
        body += std::to_string(e + 1) + "," + fmt17(s.efron_loss) + "," + fmt17(s.rank_loss) +
                "," + fmt17(s.penalty) + "," + fmt17(s.val_cindex) + "\n";
    }
    write_text(path, body);
}

std::vector<std::vector<double>> scores_per_threshold_from_s2(const Eigen::MatrixXd& s2) {
    std::vector<std::vector<double>> out(s2.cols());
    for (Eigen::Index t = 0; t < s2.cols(); ++t) {
        out[t].resize(s2.rows());
        for (Eigen::Index r = 0; r < s2.rows(); ++r) out[t][r] = s2(r, t);
    }
    return out;
}

std::vector<std::vector<double>> scores_per_threshold_from_risk(const std::vector<double>& risk,
                                                                int horizon) {
    std::vector<double> survival_score(risk.size());
    for (std::size_t i = 0; i < risk.size(); ++i) survival_score[i] = -risk[i];
    return std::vector<std::vector<double>>(horizon, survival_score);
}

}  // namespace

void save_model_artifact(const ModelArtifact& artifact, const std::string& path) {
    json j;
    j["kind"] = model_kind_name(artifact.kind);
    j["dataset"] = artifact.dataset;
    j["split_seed"] = artifact.split_seed;
    j["fractions"] = artifact.fractions;
    j["feature_names"] = artifact.feature_names;
    if (artifact.kind == ModelKind::Cox) {
        json coef = json::object();
        for (std::size_t k = 0; k < artifact.feature_names.size(); ++k)
            coef[artifact.feature_names[k]] = artifact.cox.theta[static_cast<Eigen::Index>(k)];
        j["cox"] = {{"coefficients", coef},
                    {"final_nll", artifact.cox.final_nll},
                    {"iterations", artifact.cox.iterations},
                    {"converged", artifact.cox.converged},
                    {"l2", artifact.cox.l2_penalty}};
    } else {
        j["network"] = json::parse(network_to_json_string(artifact.net));
    }
    write_json(path, j);
}

ModelArtifact load_model_artifact(const std::string& path) {
    const json j = read_json(path);
    ModelArtifact artifact;
    artifact.kind = model_kind_from(j.at("kind").get<std::string>());
    artifact.dataset = j.at("dataset").get<std::string>();
    artifact.split_seed = j.at("split_seed").get<std::uint64_t>();
    const auto f = j.at("fractions").get<std::vector<double>>();
    artifact.fractions = {f.at(0), f.at(1), f.at(2)};
    artifact.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (artifact.kind == ModelKind::Cox) {
        const json& coef = j.at("cox").at("coefficients");
        artifact.cox.theta.resize(static_cast<Eigen::Index>(artifact.feature_names.size()));
        for (std::size_t k = 0; k < artifact.feature_names.size(); ++k)
            artifact.cox.theta[static_cast<Eigen::Index>(k)] =
                coef.at(artifact.feature_names[k]).get<double>();
        artifact.cox.feature_names = artifact.feature_names;
        artifact.cox.final_nll = j.at("cox").at("final_nll").get<double>();
        artifact.cox.iterations = j.at("cox").at("iterations").get<int>();
        artifact.cox.converged = j.at("cox").at("converged").get<bool>();
        artifact.cox.l2_penalty = j.at("cox").at("l2").get<double>();
    } else {
        artifact.net = network_from_json_string(j.at("network").dump());
    }
    return artifact;
}

MetricReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t_start = std::chrono::steady_clock::now();
    const DatasetSpec spec = load_dataset_spec(cfg.spec_path);

    MetricReport report;
    report.dataset = spec.name;
    report.model = cfg.model;

    for (int k = 0; k < cfg.splits; ++k) {
        const std::uint64_t seed = cfg.split_seed + static_cast<std::uint64_t>(k);
        const PreparedData prep = prepare(spec, cfg.spec_path, cfg.fractions, seed);
        if (k == 0) report.fingerprint = prep.fingerprint;
        const std::string dir = out_dir + "/split_" + std::to_string(seed);
        write_prep_artifacts(prep, dir + "/prep");

        const SurvivalDataset train_ds = subset(prep.full, prep.split.train);
        const SurvivalDataset val_ds = subset(prep.full, prep.split.validation);
        const SurvivalDataset test_ds = subset(prep.full, prep.split.test);
        const Eigen::MatrixXd Xtest = dataset_matrix(test_ds);
        const std::vector<double> test_times = test_ds.times();
        const std::vector<std::uint8_t> test_events = test_ds.events();

        SplitMetrics sm;
        sm.seed = seed;
        ModelArtifact artifact;
        artifact.kind = cfg.model;
        artifact.dataset = spec.name;
        artifact.split_seed = seed;
        artifact.fractions = cfg.fractions;
        artifact.feature_names = prep.encoder.encoded_names;

        std::vector<std::optional<double>> auroc;
        const LabelMatrix test_labels = survival_labels(test_ds, spec.time_unit_length);

        if (cfg.model == ModelKind::Cox) {
            const SurvivalDataset fit_ds =
                subset(prep.full, sorted_union(prep.split.train, prep.split.validation));
            const CoxModel model = fit_cox(fit_ds, cfg.cox);
            sm.converged = model.converged;
            std::vector<double> risk(test_ds.size());
            for (std::size_t i = 0; i < test_ds.size(); ++i)
                risk[i] = predict_risk(model, test_ds.records[i].features);
            sm.test_cindex = concordance_index(test_times, test_events, risk);
            auroc = censored_auroc_series(
                test_labels, scores_per_threshold_from_risk(risk, prep.full.horizon_T));
            artifact.cox = model;
        } else {
            Architecture arch;
            arch.input_dim = static_cast<int>(prep.full.feature_count());
            arch.hidden = cfg.hidden;
            arch.horizon_T = prep.full.horizon_T;
            arch.s1_mode = cfg.s1_mode;
            const TrainConfig tc = apply_kind(cfg.train, cfg.model);

            auto [state, hist] = train(train_ds, val_ds, arch, tc);
            sm.converged = !hist.aborted;
            sm.failure = hist.abort_reason;
            sm.chosen_epoch = hist.chosen_epoch;

            const Eigen::VectorXd s1 = predict_s1_all(state, Xtest);
            std::vector<double> risk(s1.data(), s1.data() + s1.size());
            sm.test_cindex = concordance_index(test_times, test_events, risk);

            const Eigen::MatrixXd s2 = predict_s2_all(state, Xtest);
            std::vector<double> neg_mean_s2(s2.rows());
            for (Eigen::Index r = 0; r < s2.rows(); ++r) neg_mean_s2[r] = -s2.row(r).mean();
            sm.test_cindex_mean_s2 = concordance_index(test_times, test_events, neg_mean_s2);

            std::vector<std::vector<double>> s2_rows(s2.rows());
            for (Eigen::Index r = 0; r < s2.rows(); ++r)
                s2_rows[r].assign(s2.row(r).begin(), s2.row(r).end());
            sm.s2_monotonicity_violation_rate = monotonicity_violation_rate(s2_rows);

            auroc = censored_auroc_series(test_labels, scores_per_threshold_from_s2(s2));

            // population mean survival curve and per-record median survival
            std::string mean_body = "t,mean_s2\n";
            for (Eigen::Index t = 0; t < s2.cols(); ++t)
                mean_body += std::to_string(t) + "," + fmt17(s2.col(t).mean()) + "\n";
            write_text(dir + "/mean_survival.csv", mean_body);
            std::string med_body = "record,median_bin\n";
            for (Eigen::Index r = 0; r < s2.rows(); ++r) {
                const auto med = median_survival(s2_rows[static_cast<std::size_t>(r)]);
                med_body += std::to_string(r) + "," + (med ? std::to_string(*med) : "") + "\n";
            }
            write_text(dir + "/median_survival.csv", med_body);
            write_history_csv(hist, dir + "/history.csv");
            artifact.net = state;
        }

        write_km_csv(kaplan_meier(prep.full), dir + "/km.csv");
        write_auroc_csv(auroc, dir + "/auroc.csv");
        save_model_artifact(artifact, dir + "/model.json");

        json m;
        m["seed"] = seed;
        m["model"] = model_kind_name(cfg.model);
        m["test_cindex"] = sm.test_cindex;
        if (sm.test_cindex_mean_s2) m["test_cindex_mean_s2"] = *sm.test_cindex_mean_s2;
        if (sm.s2_monotonicity_violation_rate)
            m["s2_monotonicity_violation_rate"] = *sm.s2_monotonicity_violation_rate;
        m["chosen_epoch"] = sm.chosen_epoch;
        m["converged"] = sm.converged;
        if (!sm.failure.empty()) m["failure"] = sm.failure;
        m["fingerprint"] = fingerprint_json(prep.fingerprint);
        write_json(dir + "/metrics.json", m);

        report.splits.push_back(sm);
    }

    double mean = 0.0;
    for (const auto& s : report.splits) mean += s.test_cindex;
    mean /= static_cast<double>(report.splits.size());
    double sq = 0.0;
    for (const auto& s : report.splits) sq += (s.test_cindex - mean) * (s.test_cindex - mean);
    report.cindex_mean = mean;
    report.cindex_sd = report.splits.size() > 1
                           ? std::sqrt(sq / static_cast<double>(report.splits.size() - 1))
                           : 0.0;

    json r;
    r["dataset"] = report.dataset;
    r["model"] = model_kind_name(report.model);
    r["fingerprint"] = fingerprint_json(report.fingerprint);
    r["config"] = experiment_config_json(cfg);
    r["cindex_mean"] = report.cindex_mean;
    r["cindex_sd"] = report.cindex_sd;
    r["splits"] = json::array();
    for (const auto& s : report.splits) {
        json sj = {{"seed", s.seed}, {"test_cindex", s.test_cindex}, {"converged", s.converged}};
        if (s.test_cindex_mean_s2) sj["test_cindex_mean_s2"] = *s.test_cindex_mean_s2;
        if (s.s2_monotonicity_violation_rate)
            sj["s2_monotonicity_violation_rate"] = *s.s2_monotonicity_violation_rate;
        r["splits"].push_back(sj);
    }
    write_json(out_dir + "/report.json", r);

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

// ---------------------------------------------------------------------------
// random search

SearchSpace load_search_space(const std::string& path) {
    const json j = read_json(path);
    SearchSpace s;
    try {
        if (j.contains("widths")) s.widths = j.at("widths").get<std::vector<int>>();
        if (j.contains("depths")) s.depths = j.at("depths").get<std::vector<int>>();
        if (j.contains("dropouts")) s.dropouts = j.at("dropouts").get<std::vector<double>>();
        if (j.contains("batch_sizes"))
            s.batch_sizes = j.at("batch_sizes").get<std::vector<int>>();
        if (j.contains("clip_norms"))
            s.clip_norms = j.at("clip_norms").get<std::vector<double>>();
        auto range = [&](const char* key, std::array<double, 2>& dst) {
            if (!j.contains(key)) return;
            const auto v = j.at(key).get<std::vector<double>>();
            if (v.size() != 2) throw ParseError(path + ": range needs 2 entries");
            dst = {v[0], v[1]};
        };
        range("learning_rate_range", s.learning_rate_range);
        range("lambda_rank_range", s.lambda_rank_range);
        range("l1_range", s.l1_range);
        range("l2_range", s.l2_range);
        s.try_batch_norm = j.value("try_batch_norm", true);
        s.try_hazard_mode = j.value("try_hazard_mode", true);
        s.max_epochs = j.value("max_epochs", 80);
        s.patience = j.value("patience", 10);
        s.budget = j.value("budget", 30);
        s.master_seed = j.value("master_seed", 0);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return s;
}

std::pair<std::vector<HiddenLayerSpec>, TrainConfig> sample_trial(const SearchSpace& space,
                                                                  std::uint64_t trial_index) {
    auto rng = make_rng(space.master_seed, 0x5EA2C4, trial_index + 1);
    auto pick_int = [&](const std::vector<int>& v) { return v[rng() % v.size()]; };
    auto pick_dbl = [&](const std::vector<double>& v) { return v[rng() % v.size()]; };
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto log_uniform = [&](const std::array<double, 2>& r) {
        return std::exp(std::log(r[0]) + u(rng) * (std::log(r[1]) - std::log(r[0])));
    };

    const int depth = pick_int(space.depths);
    const int width = pick_int(space.widths);
    const double dropout = pick_dbl(space.dropouts);
    const bool bn = space.try_batch_norm && (rng() % 2 == 0);

    std::vector<HiddenLayerSpec> hidden;
    for (int d = 0; d < depth; ++d)
        hidden.push_back({width, Activation::Relu, dropout, bn});

    TrainConfig t;
    t.learning_rate = log_uniform(space.learning_rate_range);
    t.batch_size = pick_int(space.batch_sizes);
    t.lambda_rank = log_uniform(space.lambda_rank_range);
    t.l1 = u(rng) < 0.5 ? 0.0 : log_uniform(space.l1_range);
    t.l2 = u(rng) < 0.5 ? 0.0 : log_uniform(space.l2_range);
    t.clip_norm = pick_dbl(space.clip_norms);
    t.max_epochs = space.max_epochs;
    t.patience = space.patience;
    t.seed = mix_seed(space.master_seed, 0x7221A1, trial_index + 1);
    // s1 mode rides along in TrainConfig's seed draw order; applied by caller
    return {hidden, t};
}

SearchResult run_search(ModelKind kind, const SearchSpace& space, const std::string& spec_path,
                        const std::array<double, 3>& fractions, std::uint64_t split_seed,
                        int workers, const std::string& out_dir) {
    if (space.budget < 1) throw InvalidInput("search: trial budget must be >= 1");
    if (kind == ModelKind::Cox) throw InvalidInput("search: only mlp kinds are searchable");

    const DatasetSpec spec = load_dataset_spec(spec_path);
    const PreparedData prep = prepare(spec, spec_path, fractions, split_seed);
    const SurvivalDataset train_ds = subset(prep.full, prep.split.train);
    const SurvivalDataset val_ds = subset(prep.full, prep.split.validation);

    SearchResult result;
    result.trials.resize(space.budget);

    if (workers < 1) workers = 1;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (int i = 0; i < space.budget; ++i) {
        TrialOutcome& trial = result.trials[i];
        trial.index = i;
        auto [hidden, tc] = sample_trial(space, static_cast<std::uint64_t>(i));
        auto rng = make_rng(space.master_seed, 0x51D0DE, static_cast<std::uint64_t>(i) + 1);
        const S1Mode mode =
            space.try_hazard_mode && (rng() % 2 == 1) ? S1Mode::Hazard : S1Mode::LogHazard;
        trial.hidden = hidden;
        trial.s1_mode = mode;
        try {
            trial.train = apply_kind(tc, kind);
            Architecture arch;
            arch.input_dim = static_cast<int>(prep.full.feature_count());
            arch.hidden = hidden;
            arch.horizon_T = prep.full.horizon_T;
            arch.s1_mode = mode;
            auto [state, hist] = train(train_ds, val_ds, arch, trial.train);
            if (hist.aborted) {
                trial.failed = true;
                trial.error = hist.abort_reason;
            } else {
                trial.val_cindex = hist.best_val_cindex;
            }
        } catch (const std::exception& e) {
            trial.failed = true;
            trial.error = e.what();
        }
    }

    std::string body = "trial,val_cindex,status,config\n";
    for (const auto& t : result.trials) {
        json cj;
        cj["s1_mode"] = t.s1_mode == S1Mode::Hazard ? "hazard" : "log-hazard";
        cj["hidden"] = json::array();
        for (const auto& h : t.hidden) cj["hidden"].push_back(hidden_to_json(h));
        cj["train"] = train_to_json(t.train);
        body += std::to_string(t.index) + "," + (t.failed ? "" : fmt17(t.val_cindex)) + "," +
                (t.failed ? "failed: " + t.error : "ok") + "," + csv_escape(cj.dump()) + "\n";
    }
    fs::create_directories(out_dir);
    write_text(out_dir + "/trials.csv", body);

    for (const auto& t : result.trials) {
        if (t.failed) continue;
        if (result.best_index < 0 || t.val_cindex > result.trials[result.best_index].val_cindex)
            result.best_index = t.index;
    }
    if (result.best_index < 0)
        throw NumericError("search: all " + std::to_string(space.budget) +
                           " trials failed (see trials.csv)");

    const TrialOutcome& best = result.trials[result.best_index];
    result.best_config.spec_path = spec_path;
    result.best_config.model = kind;
    result.best_config.fractions = fractions;
    result.best_config.split_seed = split_seed;
    result.best_config.splits = 1;
    result.best_config.hidden = best.hidden;
    result.best_config.s1_mode = best.s1_mode;
    result.best_config.train = best.train;
    write_json(out_dir + "/best_config.json", experiment_config_json(result.best_config));
    return result;
}

// ---------------------------------------------------------------------------
// curves + vimp over a saved artifact

namespace {

PreparedData reprepare_for(const ModelArtifact& artifact, const std::string& spec_path) {
    const DatasetSpec spec = load_dataset_spec(spec_path);
    PreparedData prep = prepare(spec, spec_path, artifact.fractions, artifact.split_seed);
    if (prep.encoder.encoded_names != artifact.feature_names)
        throw SchemaError("model artifact was built from different encoded features than '" +
                          spec.name + "' produces now");
    return prep;
}

}  // namespace

void cmd_curves(const std::string& model_path, const std::string& spec_path,
                const std::string& out_dir, bool svg) {
    const ModelArtifact artifact = load_model_artifact(model_path);
    const PreparedData prep = reprepare_for(artifact, spec_path);
    const SurvivalDataset test_ds = subset(prep.full, prep.split.test);
    const LabelMatrix labels = survival_labels(test_ds, prep.spec.time_unit_length);
    const Eigen::MatrixXd Xtest = dataset_matrix(test_ds);

    fs::create_directories(out_dir);
    const KMCurve km = kaplan_meier(prep.full);
    write_km_csv(km, out_dir + "/km.csv");

    std::vector<std::optional<double>> auroc;
    if (artifact.kind == ModelKind::Cox) {
        std::vector<double> risk(test_ds.size());
        for (std::size_t i = 0; i < test_ds.size(); ++i)
            risk[i] = predict_risk(artifact.cox, test_ds.records[i].features);
        auroc = censored_auroc_series(
            labels, scores_per_threshold_from_risk(risk, prep.full.horizon_T));
    } else {
        const Eigen::MatrixXd s2 = predict_s2_all(artifact.net, Xtest);
        auroc = censored_auroc_series(labels, scores_per_threshold_from_s2(s2));

        std::string mean_body = "t,mean_s2\n";
        for (Eigen::Index t = 0; t < s2.cols(); ++t)
            mean_body += std::to_string(t) + "," + fmt17(s2.col(t).mean()) + "\n";
        write_text(out_dir + "/mean_survival.csv", mean_body);

        std::string med_body = "record,median_bin\n";
        for (Eigen::Index r = 0; r < s2.rows(); ++r) {
            std::vector<double> row(s2.row(r).begin(), s2.row(r).end());
            const auto med = median_survival(row);
            med_body += std::to_string(r) + "," + (med ? std::to_string(*med) : "") + "\n";
        }
        write_text(out_dir + "/median_survival.csv", med_body);

        if (svg) {
            SvgSeries mean_series{"mean survival", {}};
            for (Eigen::Index t = 0; t < s2.cols(); ++t)
                mean_series.points.push_back({static_cast<double>(t), s2.col(t).mean()});
            write_svg_lines(out_dir + "/mean_survival.svg", "Mean predicted survival",
                            {mean_series});
        }
    }
    write_auroc_csv(auroc, out_dir + "/auroc.csv");

    if (svg) {
        SvgSeries km_series{"KM", {}};
        km_series.points.push_back({0.0, 1.0});
        for (std::size_t i = 0; i < km.times.size(); ++i)
            km_series.points.push_back({km.times[i], km.survival[i]});
        write_svg_lines(out_dir + "/km.svg", "Kaplan-Meier", {km_series});

        SvgSeries auroc_series{"censored AUROC", {}};
        for (std::size_t t = 0; t < auroc.size(); ++t)
            if (auroc[t]) auroc_series.points.push_back({static_cast<double>(t), *auroc[t]});
        write_svg_lines(out_dir + "/auroc.svg", "Per-threshold AUROC", {auroc_series});
    }
}

void cmd_vimp(const std::string& model_path, const std::string& spec_path,
              const std::string& out_dir, const VimpConfig& vimp_cfg) {
    const ModelArtifact artifact = load_model_artifact(model_path);
    const PreparedData prep = reprepare_for(artifact, spec_path);
    const SurvivalDataset test_ds = subset(prep.full, prep.split.test);
    const Eigen::MatrixXd Xtest = dataset_matrix(test_ds);

    RiskScorer scorer;
    if (artifact.kind == ModelKind::Cox) {
        const Eigen::VectorXd theta = artifact.cox.theta;
        scorer = [theta](const Eigen::MatrixXd& X) {
            const Eigen::VectorXd r = X * theta;
            return std::vector<double>(r.data(), r.data() + r.size());
        };
    } else {
        const NetworkState net = artifact.net;
        scorer = [net](const Eigen::MatrixXd& X) {
            const Eigen::VectorXd s1 = predict_s1_all(net, X);
            return std::vector<double>(s1.data(), s1.data() + s1.size());
        };
    }

    const VimpReport report = vimp_report(scorer, Xtest, test_ds.times(), test_ds.events(),
                                          prep.encoder.encoded_names,
                                          prep.encoder.encoded_is_indicator, vimp_cfg);

    std::string body = "feature,baseline_error,perturbed_error_mean,perturbed_error_sd,vimp\n";
    for (const auto& e : report.entries)
        body += csv_escape(e.feature) + "," + fmt17(e.baseline_error) + "," +
                fmt17(e.perturbed_error_mean) + "," + fmt17(e.perturbed_error_sd) + "," +
                fmt17(e.vimp) + "\n";
    fs::create_directories(out_dir);
    write_text(out_dir + "/vimp.csv", body);

    json meta = {{"split", report.split},
                 {"epsilon", report.config.epsilon},
                 {"flip_prob", report.config.flip_prob},
                 {"repetitions", report.config.repetitions},
                 {"seed", report.config.seed}};
    write_json(out_dir + "/vimp_meta.json", meta);
}

}  // namespace surv
