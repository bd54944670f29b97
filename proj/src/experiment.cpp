#include "gaug/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "gaug/metrics.hpp"
#include "gaug/plots.hpp"
#include "gaug/store_io.hpp"

namespace gaug {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const Dataset& eval_split(const ExperimentData& data) { return data.test.empty() ? data.train : data.test; }

Pipeline single_transform(TransformKind kind, Shape shape) {
    switch (kind) {
        case TransformKind::HFlip: return {{Transform::hflip(1.0)}};
        case TransformKind::RRCrop: return {{Transform::rrcrop(shape.height, shape.width)}};
        case TransformKind::ColorJitter: return {{Transform::color_jitter(1.0)}};
        case TransformKind::RandomErase: return {{Transform::random_erase(1.0)}};
        case TransformKind::RandAugmentLite: return {{Transform::randaugment_lite(1.0)}};
        case TransformKind::Resize: break;
    }
    throw InvalidArgument("no single-transform pipeline for this kind");
}

void write_plots(const std::filesystem::path& dir, const json& report, std::vector<std::string>& written) {
    std::map<std::string, std::vector<double>> curves;
    for (const auto& e : report.at("epochs")) {
        curves["train loss"].push_back(e.at("loss").get<double>());
        if (!e.at("test_top1").is_null()) curves["test top-1"].push_back(e.at("test_top1").get<double>());
    }
    write_text_file(dir / "loss_curves.svg", line_svg(curves, {"Classifier training", "epoch", "value"}));
    written.push_back("loss_curves.svg");

    if (report.contains("gan") && !report["gan"].is_null()) {
        std::map<std::string, std::vector<double>> gan_curves{
            {"loss_D", report["gan"].at("loss_discriminator").get<std::vector<double>>()},
            {"loss_G", report["gan"].at("loss_generator").get<std::vector<double>>()}};
        write_text_file(dir / "gan_losses.svg", line_svg(gan_curves, {"Toy IC-GAN training", "step", "loss"}));
        written.push_back("gan_losses.svg");
    }

    std::vector<ScatterPoint> points;
    for (const auto& row : report.at("metrics").at("per_class")) {
        if (!row.contains("fid") || row["fid"].is_null() || !row.contains("top1") || row["top1"].is_null()) continue;
        points.push_back({row["fid"].get<double>(), row["top1"].get<double>(), std::to_string(row["class"].get<int>())});
    }
    if (!points.empty()) {
        write_text_file(dir / "fid_vs_top1.svg", scatter_svg(points, {"Per-class FID vs per-class accuracy", "FID", "top-1"}));
        written.push_back("fid_vs_top1.svg");
    }
}

std::map<int, double> defined_fids(const std::map<int, ClassFid>& fids) {
    std::map<int, double> out;
    for (const auto& [cls, f] : fids) {
        if (f.fid) out[cls] = *f.fid;
    }
    return out;
}

}  // namespace

ExperimentData prepare_data(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentData data;
    data.train = make_dataset(cfg.dataset, Split::Train);
    data.test = make_dataset(cfg.dataset, Split::Test);
    validate_dataset(data.train);
    data.num_classes = static_cast<std::size_t>(cfg.dataset.classes);
    data.extractor = make_extractor(cfg.extractor, data.train.front().sample.shape());
    data.store.emplace(extract_embeddings(data.train, data.extractor));
    data.index.emplace(build_neighborhoods(*data.store, cfg.policy.k, workers));
    data.soft_labels.emplace(soft_labels(*data.index, *data.store->labels(), data.num_classes));
    return data;
}

GeneratorAdapter with_noise_classes(GeneratorAdapter base, std::set<int> noise_classes) {
    if (!base.class_conditional && !noise_classes.empty()) {
        throw InvalidArgument("noise classes need a class-conditional generator");
    }
    auto inner = base.fn;
    const Shape shape = base.output_shape;
    base.fn = [inner, shape, classes = std::move(noise_classes)](std::span<const double> z, std::span<const float> h,
                                                                 std::optional<int> cls) {
        if (!cls || !classes.count(*cls)) return inner(z, h, cls);
        std::uint64_t seed = static_cast<std::uint64_t>(*cls);
        for (double v : z) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, &v, sizeof bits);
            seed = mix_seed(seed ^ bits);
        }
        Rng rng(seed);
        Sample out(shape);
        for (auto& v : out.values()) v = static_cast<float>(uniform01(rng));
        return out;
    };
    return base;
}

TrainedIcGan obtain_gan(const ExperimentConfig& cfg, const ExperimentData& data, const std::filesystem::path& base_dir) {
    ToyGanConfig gc = cfg.gan.config;
    gc.num_classes = gc.class_conditional ? static_cast<int>(data.num_classes) : 0;
    if (cfg.gan.checkpoint) {
        CheckpointMeta expected;
        expected.latent_dim = gc.latent_dim;
        expected.conditioning_dim = data.store->dim();
        expected.class_conditional = gc.class_conditional;
        expected.num_classes = gc.num_classes;
        return load_gan_checkpoint(resolve(base_dir, *cfg.gan.checkpoint), expected);
    }
    return train_icgan(data.train, *data.store, *data.index, gc);
}

std::map<int, ClassFid> compute_class_fid(const ExperimentData& data, const GeneratorAdapter& generator,
                                          const TruncationPolicy& truncation, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xf1d));
    return per_class_fid(data.train, *data.store, generator, data.extractor, truncation, rng);
}

MetricsReport evaluate(const ClassifierAdapter& model, const EvaluationInputs& inputs, const MetricsConfig& metrics) {
    if (!inputs.data) throw InvalidArgument("evaluate needs data");
    const ExperimentData& data = *inputs.data;
    const Dataset& split = eval_split(data);
    const std::vector<Sample> xs = samples_of(split);
    const std::vector<int> ys = labels_of(split);
    const Eigen::MatrixXd logits = model.predict_logits(xs);

    MetricsReport report;
    report.global["top1"] = top1_accuracy(logits, ys);
    const auto per_class_top1 = per_class_accuracy(logits, ys);
    for (int y : ys) ++report.per_class[y].count;
    for (auto& [cls, m] : report.per_class) m.values["top1"] = per_class_top1.at(cls);

    if (metrics.nn_corruption_on) {
        const auto corruption = nn_corruption(*data.index, *data.store->labels());
        for (auto& [cls, m] : report.per_class) {
            const auto it = corruption.find(cls);
            m.values["nn_corruption"] = it == corruption.end() ? std::nullopt : std::optional<double>(it->second);
        }
        report.correlations.emplace("nn_corruption_vs_top1", Correlation{});
    }
    if (metrics.fid_on) {
        std::map<int, ClassFid> computed;
        const std::map<int, ClassFid>* fids = inputs.precomputed_fid;
        if (!fids) {
            if (!inputs.generator) throw InvalidArgument("FID needs a generator");
            computed = compute_class_fid(data, *inputs.generator, inputs.truncation, inputs.seed);
            fids = &computed;
        }
        for (auto& [cls, m] : report.per_class) {
            const auto it = fids->find(cls);
            m.values["fid"] = it == fids->end() ? std::nullopt : it->second.fid;
        }
        report.correlations.emplace("fid_vs_top1", Correlation{});
    }
    for (auto& [name, corr] : report.correlations) {
        const std::string metric = name.substr(0, name.size() - std::strlen("_vs_top1"));
        std::map<int, double> x, y;
        for (const auto& [cls, m] : report.per_class) {
            const auto& v = m.values.at(metric);
            const auto& t = m.values.at("top1");
            if (v && t) {
                x[cls] = *v;
                y[cls] = *t;
            }
        }
        if (x.size() >= 3) corr = correlate(x, y);
    }

    if (metrics.ris_on) {
        const Shape shape = split.front().sample.shape();
        const std::size_t objects = std::min<std::size_t>(split.size(), static_cast<std::size_t>(metrics.ris_objects));
        for (TransformKind kind : {TransformKind::HFlip, TransformKind::RRCrop, TransformKind::ColorJitter,
                                   TransformKind::RandomErase, TransformKind::RandAugmentLite}) {
            const Pipeline pipeline = single_transform(kind, shape);
            std::vector<Eigen::MatrixXd> reps;
            for (std::size_t o = 0; o < objects; ++o) {
                Rng rng(derive_seed(inputs.seed, 0x815, static_cast<std::uint64_t>(kind), o));
                std::vector<Sample> views;
                for (int v = 0; v < metrics.ris_views; ++v) views.push_back(apply_pipeline(pipeline, split[o].sample, rng));
                reps.push_back(model.predict_logits(views));
            }
            report.ris[to_string(kind)] = top_k_ris(reps, metrics.top_k, metrics.q);
        }
    }
    return report;
}

json strip_timings(json report) {
    report.erase("timings");
    return report;
}

RunResult run_experiment(const ExperimentConfig& cfg_in, const RunOptions& options) {
    ExperimentConfig cfg = cfg_in;
    if (options.seed) {
        cfg.training.seed = *options.seed;
        cfg.gan.config.seed = *options.seed;
    }
    const std::filesystem::path out_dir = options.out_dir ? *options.out_dir : resolve(options.base_dir, cfg.output_dir);

    json report;
    report["toolkit_version"] = kToolkitVersion;
    report["config_snapshot"] = cfg.source_text;
    report["seeds"] = {{"dataset", cfg.dataset.seed},
                       {"extractor", cfg.extractor.seed},
                       {"training", cfg.training.seed},
                       {"gan", cfg.gan.config.seed},
                       {"override", options.seed ? json(*options.seed) : json(nullptr)}};
    json timings = json::object();
    std::vector<std::string> completed;
    std::vector<std::string> written;
    std::string current = "setup";

    auto write_status = [&](const json& status) {
        std::ofstream out(out_dir / "status.json");
        out << status.dump(2) << '\n';
    };
    auto stage = [&](const std::string& name, const std::function<void()>& body) {
        current = name;
        const auto t0 = std::chrono::steady_clock::now();
        body();
        timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        completed.push_back(name);
    };

    try {
        std::filesystem::create_directories(out_dir);
        ExperimentData data;
        std::optional<TrainedIcGan> gan;
        std::optional<GeneratorAdapter> generator;
        std::optional<std::map<int, ClassFid>> fids;
        AugmentationPolicy policy = cfg.policy;
        std::optional<LinearClassifier> model;

        stage("embed", [&] {
            data.train = make_dataset(cfg.dataset, Split::Train);
            data.test = make_dataset(cfg.dataset, Split::Test);
            validate_dataset(data.train);
            data.num_classes = static_cast<std::size_t>(cfg.dataset.classes);
            data.extractor = make_extractor(cfg.extractor, data.train.front().sample.shape());
            data.store.emplace(extract_embeddings(data.train, data.extractor));
            persist_store(*data.store, out_dir / "embeddings.gemb");
            written.push_back("embeddings.gemb");
        });
        stage("index", [&] {
            data.index.emplace(build_neighborhoods(*data.store, cfg.policy.k, options.workers));
            data.soft_labels.emplace(soft_labels(*data.index, *data.store->labels(), data.num_classes));
            persist_index(*data.index, out_dir / "neighbors.gidx");
            written.push_back("neighbors.gidx");
        });
        report["gan"] = nullptr;
        if (cfg.gan.enabled || cfg.gan.checkpoint) {
            stage("gan", [&] {
                gan = obtain_gan(cfg, data, options.base_dir);
                if (!cfg.gan.checkpoint) {
                    save_gan_checkpoint(*gan, out_dir / "gan_checkpoint.json");
                    written.push_back("gan_checkpoint.json");
                }
                generator = with_noise_classes(gan->adapter(), {cfg.gan.noise_classes.begin(), cfg.gan.noise_classes.end()});
                json g{{"steps", gan->meta.steps}, {"loss_discriminator", json::array()}, {"loss_generator", json::array()}};
                for (const auto& s : gan->trace) {
                    g["loss_discriminator"].push_back(s.discriminator);
                    g["loss_generator"].push_back(s.generator);
                }
                report["gan"] = g;
            });
        }
        report["allowed_classes"] = nullptr;
        if (generator && (cfg.metrics.fid_on || policy.fid_threshold)) {
            stage("fid", [&] {
                fids = compute_class_fid(data, *generator, policy.truncation, cfg.training.seed);
                if (policy.fid_threshold) {
                    apply_fid_filter(policy, defined_fids(*fids), *policy.fid_threshold);
                    report["allowed_classes"] = *policy.allowed_classes;
                }
            });
        }
        std::vector<EpochRecord> epochs;
        stage("train", [&] {
            model.emplace(data.train.front().sample.size(), data.num_classes);
            TrainInputs in;
            in.train = &data.train;
            in.test = &data.test;
            in.store = &*data.store;
            in.soft_labels = &*data.soft_labels;
            in.generator = generator ? &*generator : nullptr;
            in.num_classes = data.num_classes;
            epochs = train_classifier(*model, in, policy, cfg.training);
            save_classifier(*model, out_dir / "classifier.json");
            written.push_back("classifier.json");
        });
        report["epochs"] = json::array();
        for (const auto& e : epochs) {
            report["epochs"].push_back({{"epoch", e.epoch},
                                        {"learning_rate", e.learning_rate},
                                        {"loss", e.loss},
                                        {"train_top1", e.train_top1},
                                        {"test_top1", optional_json(e.test_top1)},
                                        {"generated", e.generated},
                                        {"mixed_batches", e.mixed_batches}});
        }
        stage("evaluate", [&] {
            EvaluationInputs in;
            in.data = &data;
            in.generator = generator ? &*generator : nullptr;
            in.precomputed_fid = fids ? &*fids : nullptr;
            in.truncation = policy.truncation;
            in.seed = cfg.training.seed;
            MetricsReport metrics = evaluate(*model, in, cfg.metrics);
            report["metrics"] = metrics.to_json();
            write_text_file(out_dir / "per_class.csv", metrics.per_class_csv());
            written.push_back("per_class.csv");
        });
        stage("report", [&] {
            write_plots(out_dir, report, written);
            report["timings"] = timings;
            std::ofstream out(out_dir / "report.json");
            out << report.dump(2) << '\n';
            if (!out) throw Error("failed writing report.json");
            written.push_back("report.json");
        });
        report["timings"] = timings;
        write_status({{"status", "complete"}, {"completed_stages", completed}, {"outputs", written}});
        return {report, out_dir};
    } catch (const std::exception& e) {
        try {
            write_status({{"status", "failed"},
                          {"failed_stage", current},
                          {"error", e.what()},
                          {"completed_stages", completed},
                          {"partial_outputs", written}});
        } catch (...) {
        }
        throw StageError(current, e.what());
    }
}

RunResult run_experiment(const std::filesystem::path& config_path, RunOptions options) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        throw StageError("config", e.what());
    }
    if (options.base_dir.empty()) options.base_dir = config_path.parent_path();
    return run_experiment(cfg, options);
}

json rebuild_report_outputs(const std::filesystem::path& run_dir) {
    std::ifstream in(run_dir / "report.json");
    if (!in) throw Error("no report.json in " + run_dir.string());
    json report;
    try {
        in >> report;
    } catch (const json::exception& e) {
        throw Error(std::string("report.json is not valid JSON: ") + e.what());
    }
    const MetricsReport metrics = MetricsReport::from_json(report.at("metrics"));
    write_text_file(run_dir / "per_class.csv", metrics.per_class_csv());
    std::vector<std::string> written;
    write_plots(run_dir, report, written);
    return report;
}

double toy_contrastive_loss(std::span<const ViewSet> views, const Extractor& extractor, double temperature) {
    if (views.empty()) throw InvalidArgument("contrastive loss needs at least one view set");
    if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
    const auto n = static_cast<Eigen::Index>(views.size());
    Eigen::MatrixXd a, b;
    for (Eigen::Index i = 0; i < n; ++i) {
        const ViewSet& v = views[static_cast<std::size_t>(i)];
        v.validate();
        const auto fa = extractor(v.main_views[0]);
        const auto fb = extractor(v.main_views[1]);
        if (i == 0) {
            a.resize(n, static_cast<Eigen::Index>(fa.size()));
            b.resize(n, static_cast<Eigen::Index>(fb.size()));
        }
        a.row(i) = Eigen::Map<const Eigen::VectorXf>(fa.data(), static_cast<Eigen::Index>(fa.size())).cast<double>().transpose();
        b.row(i) = Eigen::Map<const Eigen::VectorXf>(fb.data(), static_cast<Eigen::Index>(fb.size())).cast<double>().transpose();
        const double na = a.row(i).norm(), nb = b.row(i).norm();
        if (na == 0.0 || nb == 0.0) throw NumericalError("zero feature vector in contrastive loss");
        a.row(i) /= na;
        b.row(i) /= nb;
    }
    const Eigen::MatrixXd logits = (a * b.transpose()) / temperature;
    return soft_cross_entropy(logits, Eigen::MatrixXd::Identity(n, n));
}

}  // namespace gaug
