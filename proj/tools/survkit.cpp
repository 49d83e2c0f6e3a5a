// survkit: dataset prep, model fitting/training, evaluation, curve emission,
// variable importance and hyperparameter random search for right-censored
// survival benchmarks.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "surv/experiment.hpp"

namespace {

// exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::array<double, 3> parse_fractions(const std::vector<double>& f) {
    if (f.empty()) return {0.6, 0.2, 0.2};
    if (f.size() != 3) throw surv::InvalidInput("--fractions needs exactly 3 values");
    return {f[0], f[1], f[2]};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"survkit - survival analysis benchmark toolkit"};
    app.require_subcommand(1);

    std::string spec_path, config_path, model_path, out_dir = "out";
    std::uint64_t seed = 1;
    int workers = 2, splits = 0, budget = 0;
    std::vector<double> fractions;
    bool svg = false;

    auto* prep = app.add_subcommand("prep", "ingest + preprocess a dataset spec");
    prep->add_option("--spec", spec_path, "dataset spec JSON")->required();
    prep->add_option("--seed", seed, "split seed");
    prep->add_option("--fractions", fractions, "train/val/test fractions")->expected(3);
    prep->add_option("--out", out_dir, "output directory");

    auto* run = app.add_subcommand("run", "fit/train one model config and evaluate");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--seed", seed, "override split seed");
    run->add_option("--splits", splits, "repeated split seeds (default from config)");
    run->add_option("--out", out_dir, "output directory");

    auto* search = app.add_subcommand("search", "hyperparameter random search");
    search->add_option("--spec", spec_path, "dataset spec JSON")->required();
    std::string kind_name = "mlp-efron-rank", space_path;
    search->add_option("--model", kind_name, "mlp-efron | mlp-rank | mlp-efron-rank");
    search->add_option("--config", space_path, "search space JSON (defaults if omitted)");
    search->add_option("--seed", seed, "split seed");
    search->add_option("--budget", budget, "trial budget (overrides space)");
    search->add_option("--workers", workers, "parallel trial workers");
    search->add_option("--fractions", fractions, "train/val/test fractions")->expected(3);
    search->add_option("--out", out_dir, "output directory");

    auto* curves = app.add_subcommand("curves", "emit KM / survival / AUROC curves");
    curves->add_option("--model", model_path, "model artifact JSON")->required();
    curves->add_option("--spec", spec_path, "dataset spec JSON")->required();
    curves->add_option("--out", out_dir, "output directory");
    curves->add_flag("--svg", svg, "also render SVG line plots");

    auto* vimp = app.add_subcommand("vimp", "perturbation variable importance");
    vimp->add_option("--model", model_path, "model artifact JSON")->required();
    vimp->add_option("--spec", spec_path, "dataset spec JSON")->required();
    vimp->add_option("--out", out_dir, "output directory");
    surv::VimpConfig vimp_cfg;
    vimp->add_option("--seed", vimp_cfg.seed, "perturbation seed");
    vimp->add_option("--epsilon", vimp_cfg.epsilon, "continuous noise scale");
    vimp->add_option("--flip-prob", vimp_cfg.flip_prob, "indicator flip probability");
    vimp->add_option("--repetitions", vimp_cfg.repetitions, "perturbation repetitions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (prep->parsed()) {
            const surv::DatasetSpec spec = surv::load_dataset_spec(spec_path);
            const surv::PreparedData data =
                surv::prepare(spec, spec_path, parse_fractions(fractions), seed);
            surv::write_prep_artifacts(data, out_dir);
            std::printf("%s: %ld rows, %.1f%% censored, %ld unique times -> %s\n",
                        spec.name.c_str(), data.fingerprint.rows, data.fingerprint.censored_pct,
                        data.fingerprint.unique_times, out_dir.c_str());
        } else if (run->parsed()) {
            surv::ExperimentConfig cfg = surv::load_experiment_config(config_path);
            if (run->count("--seed")) cfg.split_seed = seed;
            if (splits > 0) cfg.splits = splits;
            const surv::MetricReport report = surv::run_experiment(cfg, out_dir);
            std::printf("%s %s: test C-index %.4f", report.dataset.c_str(),
                        surv::model_kind_name(report.model).c_str(), report.cindex_mean);
            if (report.splits.size() > 1) std::printf(" +- %.4f", report.cindex_sd);
            std::printf(" (%zu split%s, %.1fs)\n", report.splits.size(),
                        report.splits.size() == 1 ? "" : "s", report.wall_seconds);
        } else if (search->parsed()) {
            surv::SearchSpace space =
                space_path.empty() ? surv::SearchSpace{} : surv::load_search_space(space_path);
            if (budget > 0) space.budget = budget;
            const surv::SearchResult res =
                surv::run_search(surv::model_kind_from(kind_name), space, spec_path,
                                 parse_fractions(fractions), seed, workers, out_dir);
            const auto& best = res.trials[res.best_index];
            std::printf("search done: best trial %d, validation C-index %.4f -> %s\n",
                        best.index, best.val_cindex, (out_dir + "/best_config.json").c_str());
        } else if (curves->parsed()) {
            surv::cmd_curves(model_path, spec_path, out_dir, svg);
            std::printf("curves written to %s\n", out_dir.c_str());
        } else if (vimp->parsed()) {
            surv::cmd_vimp(model_path, spec_path, out_dir, vimp_cfg);
            std::printf("vimp written to %s\n", out_dir.c_str());
        }
    } catch (const surv::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const surv::UndefinedMetric& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return 0;
}
