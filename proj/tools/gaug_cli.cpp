#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaug/experiment.hpp"
#include "gaug/metrics.hpp"
#include "gaug/plots.hpp"
#include "gaug/store_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::optional<std::string> out_dir;
};

gaug::ExperimentConfig load_with_overrides(const std::string& path, const Globals& g) {
    auto cfg = gaug::load_config(path);
    if (g.seed) {
        cfg.training.seed = *g.seed;
        cfg.gan.config.seed = *g.seed;
    }
    return cfg;
}

fs::path output_dir(const gaug::ExperimentConfig& cfg, const std::string& config_path, const Globals& g) {
    if (g.out_dir) return *g.out_dir;
    const fs::path p(cfg.output_dir);
    return p.is_absolute() ? p : fs::path(config_path).parent_path() / p;
}

void write_json(const fs::path& path, const json& j) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) throw gaug::Error("failed writing " + path.string());
}

void print_summary(const json& report) {
    const auto& m = report.at("metrics");
    std::printf("top1 %.4f\n", m.at("global").at("top1").get<double>());
    std::printf("%6s %8s %10s %14s %8s\n", "class", "count", "fid", "nn_corruption", "top1");
    for (const auto& row : m.at("per_class")) {
        auto cell = [&](const char* key) -> std::string {
            if (!row.contains(key)) return "-";
            if (row[key].is_null()) return "n/a";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", row[key].get<double>());
            return buf;
        };
        std::printf("%6d %8zu %10s %14s %8s\n", row.at("class").get<int>(), row.at("count").get<std::size_t>(),
                    cell("fid").c_str(), cell("nn_corruption").c_str(), cell("top1").c_str());
    }
    for (const auto& [name, v] : m.at("ris").items()) std::printf("ris %-18s %.4f\n", name.c_str(), v.get<double>());
    for (const auto& [name, c] : m.at("correlations").items()) {
        std::printf("%-24s spearman %s pearson %s\n", name.c_str(), c.at("spearman").dump().c_str(),
                    c.at("pearson").dump().c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generator-conditioned data augmentation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "override training and GAN seeds");
    app.add_option("--workers", g.workers, "worker threads for index building")->check(CLI::PositiveNumber);
    std::string out_dir;
    auto* out_opt = app.add_option("--out-dir", out_dir, "output directory (overrides the config)");
    app.set_version_flag("--version", std::string("gaug ") + gaug::kToolkitVersion +
                                          " (embeddings GAUGEMB1 v1, index GAUGIDX1 v1, gan checkpoint v" +
                                          std::to_string(gaug::kGanCheckpointVersion) + ")");

    std::string data_path, emb_path, in_path, idx_path, config_path, checkpoint, run_dir;
    std::size_t k = 0;

    auto* embed = app.add_subcommand("embed", "extract embeddings for the dataset described by a config");
    embed->add_option("data", data_path, "experiment config naming the dataset and extractor")->required();
    embed->add_option("out", emb_path, "output embedding file")->required();

    auto* index = app.add_subcommand("index", "build the k-NN neighborhood index of an embedding file");
    index->add_option("in", in_path, "embedding file")->required()->check(CLI::ExistingFile);
    index->add_option("--k", k, "neighborhood size")->required()->check(CLI::PositiveNumber);
    index->add_option("out", idx_path, "output index file")->required();

    auto* gan_train = app.add_subcommand("gan-train", "train the toy IC-GAN and write a checkpoint");
    gan_train->add_option("config", config_path)->required();
    auto* train = app.add_subcommand("train", "run the full experiment");
    train->add_option("config", config_path)->required();
    auto* eval = app.add_subcommand("eval", "evaluate a saved classifier");
    eval->add_option("config", config_path)->required();
    eval->add_option("--checkpoint", checkpoint, "classifier checkpoint")->required()->check(CLI::ExistingFile);
    auto* metrics = app.add_subcommand("metrics", "dataset and generator metrics without a classifier");
    metrics->add_option("config", config_path)->required();
    auto* report = app.add_subcommand("report", "regenerate CSV and plots from a run directory");
    report->add_option("run-dir", run_dir)->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) g.seed = seed_value;
    if (*out_opt) g.out_dir = out_dir;

    try {
        if (*embed) {
            const auto cfg = gaug::load_config(data_path);
            const auto train_set = gaug::make_dataset(cfg.dataset, gaug::Split::Train);
            const auto extractor = gaug::make_extractor(cfg.extractor, train_set.front().sample.shape());
            const auto store = gaug::extract_embeddings(train_set, extractor);
            gaug::persist_store(store, emb_path);
            std::printf("wrote %zu embeddings of dim %zu to %s\n", store.count(), store.dim(), emb_path.c_str());
        } else if (*index) {
            const auto store = gaug::load_store(in_path);
            const auto idx = gaug::build_neighborhoods(store, k, g.workers);
            gaug::persist_index(idx, idx_path);
            std::printf("wrote %zu neighborhoods of size %zu to %s\n", idx.count(), idx.k(), idx_path.c_str());
        } else if (*gan_train) {
            auto cfg = load_with_overrides(config_path, g);
            cfg.gan.checkpoint.reset();
            const auto data = gaug::prepare_data(cfg, g.workers);
            const auto gan = gaug::obtain_gan(cfg, data);
            const fs::path dir = output_dir(cfg, config_path, g);
            fs::create_directories(dir);
            gaug::save_gan_checkpoint(gan, dir / "gan_checkpoint.json");
            const auto& last = gan.trace.back();
            std::printf("trained %d steps; final loss_D %.4f loss_G %.4f; wrote %s\n", gan.meta.steps,
                        last.discriminator, last.generator, (dir / "gan_checkpoint.json").c_str());
        } else if (*train) {
            gaug::RunOptions opt;
            opt.seed = g.seed;
            opt.workers = g.workers;
            if (g.out_dir) opt.out_dir = fs::path(*g.out_dir);
            const auto result = gaug::run_experiment(fs::path(config_path), opt);
            print_summary(result.report);
            std::printf("outputs in %s\n", result.out_dir.c_str());
        } else if (*eval) {
            const auto cfg = load_with_overrides(config_path, g);
            const auto base = fs::path(config_path).parent_path();
            const auto data = gaug::prepare_data(cfg, g.workers);
            const auto model = gaug::load_classifier(checkpoint);
            std::optional<gaug::GeneratorAdapter> gen;
            if (cfg.metrics.fid_on) {
                const auto gan = gaug::obtain_gan(cfg, data, base);
                gen = gaug::with_noise_classes(gan.adapter(), {cfg.gan.noise_classes.begin(), cfg.gan.noise_classes.end()});
            }
            gaug::EvaluationInputs in;
            in.data = &data;
            in.generator = gen ? &*gen : nullptr;
            in.truncation = cfg.policy.truncation;
            in.seed = cfg.training.seed;
            const auto m = gaug::evaluate(model, in, cfg.metrics);
            const fs::path dir = output_dir(cfg, config_path, g);
            json out{{"checkpoint", checkpoint}, {"metrics", m.to_json()}};
            write_json(dir / "eval_report.json", out);
            gaug::write_text_file(dir / "per_class.csv", m.per_class_csv());
            print_summary(out);
        } else if (*metrics) {
            const auto cfg = load_with_overrides(config_path, g);
            const auto data = gaug::prepare_data(cfg, g.workers);
            json out;
            const auto corruption = gaug::nn_corruption(*data.index, *data.store->labels());
            for (const auto& [cls, v] : corruption) out["nn_corruption"][std::to_string(cls)] = v;
            if (cfg.gan.enabled || cfg.gan.checkpoint) {
                const auto gan = gaug::obtain_gan(cfg, data, fs::path(config_path).parent_path());
                const auto gen =
                    gaug::with_noise_classes(gan.adapter(), {cfg.gan.noise_classes.begin(), cfg.gan.noise_classes.end()});
                for (const auto& [cls, f] : gaug::compute_class_fid(data, gen, cfg.policy.truncation, cfg.training.seed)) {
                    out["fid"][std::to_string(cls)] = f.fid ? json(*f.fid) : json(nullptr);
                }
            }
            const fs::path dir = output_dir(cfg, config_path, g);
            write_json(dir / "metrics.json", out);
            std::printf("%s\n", out.dump(2).c_str());
        } else if (*report) {
            print_summary(gaug::rebuild_report_outputs(run_dir));
        }
    } catch (const gaug::StageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.stage() == "config" ? 2 : 1;
    } catch (const gaug::ConfigError& e) {
        std::fprintf(stderr, "error: invalid config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
