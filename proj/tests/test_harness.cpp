#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaug/classifier.hpp"
#include "gaug/config.hpp"
#include "gaug/experiment.hpp"
#include "gaug/metrics.hpp"
#include "gaug/toy_data.hpp"

using namespace gaug;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gaug_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmallConfig = R"({
  "dataset": {"generator": "cluster_images", "n": 200, "n_test": 100, "classes": 4, "shape": [1, 3, 3], "seed": 2},
  "policy": {"p_g": 0.0, "k": 5},
  "training": {"epochs": 3, "batch_size": 32, "learning_rate": 0.5, "seed": 1},
  "metrics": {"nn_corruption_on": true, "ris_on": true, "K": 3},
  "output_dir": "out"
})";

const char* kGanConfig = R"({
  "dataset": {"generator": "cluster_images", "n": 200, "n_test": 100, "classes": 4, "shape": [1, 3, 3], "seed": 2},
  "policy": {"p_g": 0.5, "k": 5, "fid_threshold": 1e9, "pipeline_real": [{"kind": "hflip", "p": 0.5}]},
  "training": {"epochs": 2, "batch_size": 32, "learning_rate": 0.5, "label_smoothing": 0.1, "seed": 1},
  "gan": {"enabled": true, "steps": 30, "batch_size": 16, "latent_dim": 4, "hidden": 8, "class_conditional": true, "noise_classes": [3]},
  "metrics": {"fid_on": true, "nn_corruption_on": true, "ris_on": false},
  "output_dir": "out"
})";

// Returns large logits for the true class, found by exact sample lookup.
class OracleClassifier final : public ClassifierAdapter {
public:
    explicit OracleClassifier(const Dataset& ds, std::size_t classes) : ds_(ds), classes_(classes) {}
    std::size_t num_classes() const override { return classes_; }
    Eigen::MatrixXd predict_logits(std::span<const Sample> xs) const override {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(classes_));
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (const auto& inst : ds_)
                if (inst.sample == xs[i]) out(static_cast<Eigen::Index>(i), *inst.label) = 10.0;
        return out;
    }
    double loss_and_gradient(std::span<const Sample>, const Eigen::MatrixXd&, std::span<double>) const override { return 0; }
    std::span<double> parameters() override { return {}; }
    std::span<const double> parameters() const override { return {}; }

private:
    const Dataset& ds_;
    std::size_t classes_;
};

}  // namespace

TEST_CASE("config parsing rejects unknown keys and invalid values") {
    CHECK_NOTHROW(parse_config(kSmallConfig));
    CHECK_THROWS_AS(parse_config(R"({"datset": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"training": {"epochs": 1, "lr": 0.1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"policy": {"p_g": 1.3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"training": {"epochs": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"training": {"label_smoothing": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"training": {"lr_milestones": [5, 3]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"policy": {"p_g": 0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"gan": {"checkpoint": "/nonexistent/gan.json"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"dataset": {"n": "many"}})"), ConfigError);
    const auto cfg = parse_config(kSmallConfig);
    CHECK(cfg.source_text == kSmallConfig);
    CHECK(cfg.policy.pipeline_generated == cfg.policy.pipeline_real);
}

TEST_CASE("config serialization reparses to the same settings") {
    const auto cfg = parse_config(kGanConfig);
    const auto again = parse_config(cfg.to_json().dump());
    CHECK(again.to_json() == cfg.to_json());
}

TEST_CASE("label smoothing stays row-stochastic and s = 0 is the identity") {
    Rng rng(1);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(20, 6);
    for (int i = 0; i < 20; ++i) {
        double total = 0;
        for (int c = 0; c < 6; ++c) total += (y(i, c) = uniform01(rng));
        y.row(i) /= total;
    }
    CHECK(smooth_labels(y, 0.0) == y);
    for (double s : {0.1, 0.5, 0.9}) {
        const auto z = smooth_labels(y, s);
        for (int i = 0; i < 20; ++i) CHECK(std::abs(z.row(i).sum() - 1.0) < 1e-12);
        CHECK(z.minCoeff() >= s / 6 - 1e-15);
    }
    CHECK_THROWS_AS(smooth_labels(y, 1.0), InvalidArgument);
}

TEST_CASE("step schedule is nonincreasing and changes exactly at milestones") {
    TrainingConfig cfg;
    cfg.learning_rate = 0.4;
    cfg.batch_size = 64;
    cfg.reference_batch = 256;
    cfg.lr_milestones = {3, 6, 9, 10};
    cfg.lr_decay = 0.1;
    CHECK(learning_rate_at(cfg, 0) == 0.4 * 64 / 256);
    for (int e = 1; e < 12; ++e) {
        const double prev = learning_rate_at(cfg, e - 1), now = learning_rate_at(cfg, e);
        CHECK(now <= prev);
        const bool milestone = std::count(cfg.lr_milestones.begin(), cfg.lr_milestones.end(), e) > 0;
        CHECK((now < prev) == milestone);
    }
}

TEST_CASE("cross-entropy limits and gradient") {
    Eigen::MatrixXd logits(2, 3), targets = Eigen::MatrixXd::Zero(2, 3);
    logits << 800, 0, 0, 0, 0, 800;
    targets(0, 0) = 1;
    targets(1, 2) = 1;
    CHECK(soft_cross_entropy(logits, targets) == doctest::Approx(0.0));
    CHECK(soft_cross_entropy(Eigen::MatrixXd::Zero(2, 3), targets) == doctest::Approx(std::log(3.0)).epsilon(1e-14));

    Rng rng(2);
    LinearClassifier model(5, 3);
    for (auto& p : model.parameters()) p = standard_normal(rng);
    std::vector<Sample> xs;
    for (int i = 0; i < 6; ++i) {
        Sample s(Shape{1, 1, 5});
        for (auto& v : s.values()) v = static_cast<float>(uniform01(rng));
        xs.push_back(s);
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Constant(6, 3, 0.2);
    t.col(1).setConstant(0.6);
    std::vector<double> grad(model.parameters().size(), 0.0);
    model.loss_and_gradient(xs, t, grad);
    for (std::size_t p = 0; p < grad.size(); ++p) {
        std::vector<double> dummy(grad.size());
        const double saved = model.parameters()[p];
        model.parameters()[p] = saved + 1e-6;
        const double up = model.loss_and_gradient(xs, t, dummy);
        model.parameters()[p] = saved - 1e-6;
        const double down = model.loss_and_gradient(xs, t, dummy);
        model.parameters()[p] = saved;
        CHECK(grad[p] == doctest::Approx((up - down) / 2e-6).epsilon(1e-6));
    }
}

TEST_CASE("zero epochs returns the initial model and an empty trace") {
    auto cfg = parse_config(kSmallConfig);
    cfg.training.epochs = 0;
    const auto data = prepare_data(cfg);
    LinearClassifier model(9, 4);
    TrainInputs in{&data.train, &data.test, &*data.store, &*data.soft_labels, nullptr, 4};
    CHECK(train_classifier(model, in, cfg.policy, cfg.training).empty());
    for (double p : model.parameters()) CHECK(p == 0.0);
}

TEST_CASE("linear classifier reaches 0.95 on the separable 10-class toy set") {
    const auto cfg = parse_config(R"({
      "dataset": {"generator": "cluster_images", "n": 2000, "n_test": 1000, "classes": 10, "shape": [1, 4, 4], "seed": 5, "cluster_std": 0.05},
      "policy": {"p_g": 0.0, "k": 10},
      "training": {"epochs": 30, "batch_size": 64, "learning_rate": 0.4, "lr_milestones": [20, 25], "seed": 3}
    })");
    const auto data = prepare_data(cfg);
    LinearClassifier model(16, 10);
    TrainInputs in{&data.train, &data.test, &*data.store, &*data.soft_labels, nullptr, 10};
    const auto trace = train_classifier(model, in, cfg.policy, cfg.training);
    REQUIRE(trace.size() == 30);
    CHECK(trace.back().loss < trace.front().loss);
    CHECK(*trace.back().test_top1 >= 0.95);
}

TEST_CASE("non-finite loss aborts with epoch and batch") {
    auto cfg = parse_config(kSmallConfig);
    cfg.training.learning_rate = 1e300;
    cfg.training.momentum = 0.0;
    const auto data = prepare_data(cfg);
    LinearClassifier model(9, 4);
    TrainInputs in{&data.train, nullptr, &*data.store, &*data.soft_labels, nullptr, 4};
    try {
        train_classifier(model, in, cfg.policy, cfg.training);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("epoch 0 batch") != std::string::npos);
    }
}

TEST_CASE("evaluate: oracle, accuracy-only and full key sets") {
    const auto cfg = parse_config(kSmallConfig);
    const auto data = prepare_data(cfg);
    const OracleClassifier oracle(data.test, 4);
    EvaluationInputs in;
    in.data = &data;
    MetricsConfig off;
    const auto r = evaluate(oracle, in, off);
    CHECK(r.global.at("top1") == 1.0);
    CHECK(r.ris.empty());
    CHECK(r.correlations.empty());
    std::size_t total = 0;
    for (const auto& [cls, m] : r.per_class) {
        total += m.count;
        CHECK(m.values.size() == 1);
        CHECK(m.values.count("top1") == 1);
    }
    CHECK(total == data.test.size());

    const auto gcfg = parse_config(kGanConfig);
    const auto gdata = prepare_data(gcfg);
    const auto gan = obtain_gan(gcfg, gdata);
    const auto gen = gan.adapter();
    LinearClassifier model(9, 4);
    EvaluationInputs full;
    full.data = &gdata;
    full.generator = &gen;
    MetricsConfig all{true, true, true, 3, 0.5, 4, 10};
    const auto j = evaluate(model, full, all).to_json();
    for (const auto& row : j["per_class"]) {
        std::set<std::string> keys;
        for (const auto& [k, _] : row.items()) keys.insert(k);
        CHECK(keys == std::set<std::string>{"class", "count", "fid", "nn_corruption", "top1"});
    }
    std::set<std::string> ris, corr;
    for (const auto& [k, _] : j["ris"].items()) ris.insert(k);
    for (const auto& [k, _] : j["correlations"].items()) corr.insert(k);
    CHECK(ris == std::set<std::string>{"color_jitter", "erase", "hflip", "randaugment_lite", "rrcrop"});
    CHECK(corr == std::set<std::string>{"fid_vs_top1", "nn_corruption_vs_top1"});
}

TEST_CASE("run_experiment writes outputs and is deterministic") {
    const fs::path dir = scratch("determinism");
    {
        std::ofstream(dir / "config.json") << kGanConfig;
    }
    RunOptions opt;
    opt.out_dir = dir / "a";
    const auto a = run_experiment(dir / "config.json", opt);
    opt.out_dir = dir / "b";
    opt.workers = 1;
    const auto b = run_experiment(dir / "config.json", opt);
    for (const char* f : {"report.json", "per_class.csv", "loss_curves.svg", "fid_vs_top1.svg", "gan_losses.svg",
                          "classifier.json", "embeddings.gemb", "neighbors.gidx", "gan_checkpoint.json", "status.json"}) {
        CHECK_MESSAGE(fs::exists(dir / "a" / f), f);
    }
    CHECK(strip_timings(a.report) == strip_timings(b.report));
    CHECK(strip_timings(nlohmann::json::parse(read_file(dir / "a" / "report.json"))).dump() ==
          strip_timings(nlohmann::json::parse(read_file(dir / "b" / "report.json"))).dump());
    CHECK(read_file(dir / "a" / "per_class.csv") == read_file(dir / "b" / "per_class.csv"));
    CHECK(a.report.at("config_snapshot").get<std::string>() == read_file(dir / "config.json"));
    CHECK(a.report.contains("timings"));

    // the snapshot reproduces the run
    const auto snap = parse_config(a.report.at("config_snapshot").get<std::string>());
    opt.out_dir = dir / "c";
    CHECK(strip_timings(run_experiment(snap, opt).report) == strip_timings(a.report));

    opt.out_dir = dir / "d";
    opt.workers = 3;
    CHECK(strip_timings(run_experiment(dir / "config.json", opt).report) == strip_timings(a.report));

    opt.out_dir = dir / "e";
    opt.seed = 99;
    CHECK_FALSE(strip_timings(run_experiment(dir / "config.json", opt).report) == strip_timings(a.report));
}

TEST_CASE("zero-epoch experiment with metrics off") {
    const fs::path dir = scratch("zero");
    std::ofstream(dir / "config.json") << R"({"dataset": {"n": 50, "n_test": 20, "classes": 5}, "policy": {"k": 3},
                                            "training": {"epochs": 0}, "output_dir": "run"})";
    const auto r = run_experiment(dir / "config.json");
    CHECK(r.report.at("epochs").empty());
    CHECK(fs::exists(dir / "run" / "report.json"));
    CHECK(nlohmann::json::parse(read_file(dir / "run" / "status.json")).at("status") == "complete");
    const auto rebuilt = rebuild_report_outputs(dir / "run");
    CHECK(rebuilt.at("metrics") == r.report.at("metrics"));
}

TEST_CASE("stage failures name the stage and flag partial outputs") {
    const fs::path dir = scratch("failure");
    std::ofstream(dir / "config.json") << R"({"dataset": {"n": 50, "n_test": 20, "classes": 5}, "policy": {"k": 3},
                                            "training": {"epochs": 4, "batch_size": 10, "learning_rate": 1e300, "momentum": 0},
                                            "output_dir": "run"})";
    try {
        run_experiment(dir / "config.json");
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "train");
    }
    const auto status = nlohmann::json::parse(read_file(dir / "run" / "status.json"));
    CHECK(status.at("status") == "failed");
    CHECK(status.at("failed_stage") == "train");
    CHECK(status.at("partial_outputs").size() == 2);

    std::ofstream(dir / "bad.json") << R"({"policy": {"p_g": 1.3}})";
    try {
        run_experiment(dir / "bad.json");
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "config");
    }
}

TEST_CASE("classifier checkpoint round trip") {
    Rng rng(3);
    LinearClassifier m(4, 3);
    for (auto& p : m.parameters()) p = standard_normal(rng);
    const fs::path dir = scratch("ckpt");
    save_classifier(m, dir / "c.json");
    const auto back = load_classifier(dir / "c.json");
    CHECK(std::equal(back.parameters().begin(), back.parameters().end(), m.parameters().begin()));
    std::ofstream(dir / "bad.json") << R"({"format": "other"})";
    CHECK_THROWS(load_classifier(dir / "bad.json"));
}

TEST_CASE("noise classes replace the generator output deterministically") {
    GeneratorAdapter base;
    base.latent_dim = 2;
    base.conditioning_dim = 1;
    base.class_conditional = true;
    base.output_shape = {1, 2, 2};
    base.fn = [](std::span<const double>, std::span<const float>, std::optional<int>) { return Sample(Shape{1, 2, 2}, 0.5f); };
    const auto wrapped = with_noise_classes(base, {1});
    const std::vector<float> h{1.0f};
    const std::vector<double> z{0.1, 0.2}, z2{0.1, 0.3};
    CHECK(generate(wrapped, h, z, 0) == Sample(Shape{1, 2, 2}, 0.5f));
    const Sample n1 = generate(wrapped, h, z, 1);
    CHECK_FALSE(n1 == Sample(Shape{1, 2, 2}, 0.5f));
    CHECK(generate(wrapped, h, z, 1) == n1);
    CHECK_FALSE(generate(wrapped, h, z2, 1) == n1);
    base.class_conditional = false;
    CHECK_THROWS_AS(with_noise_classes(base, {1}), InvalidArgument);
}

TEST_CASE("contrastive toy loss over view sets") {
    const auto cfg = parse_config(kSmallConfig);
    const auto data = prepare_data(cfg);
    Rng rng(4);
    std::vector<ViewSet> same, shuffled;
    for (int i = 0; i < 8; ++i) same.push_back(make_views(data.train[i], Pipeline{}, 0, Pipeline{}, rng));
    const double aligned = toy_contrastive_loss(same, data.extractor);
    shuffled = same;
    for (int i = 0; i < 8; ++i) shuffled[i].main_views[1] = same[(i + 1) % 8].main_views[1];
    CHECK(aligned < toy_contrastive_loss(shuffled, data.extractor));
    CHECK(std::isfinite(aligned));
    CHECK_THROWS_AS(toy_contrastive_loss(std::vector<ViewSet>{}, data.extractor), InvalidArgument);
}

TEST_CASE("grouped cluster prototypes stay within the group spread") {
    const Shape s{1, 3, 3};
    const auto plain = make_cluster_images(40, 4, s, 0.05, 9, Split::Train);
    CHECK(samples_of(make_cluster_images(40, 4, s, 0.05, 9, Split::Train, 1, 0.3)) == samples_of(plain));

    const auto grouped = make_cluster_images(12, 6, s, 0.0, 9, Split::Train, 3, 0.1);
    for (int c = 0; c < 6; ++c) {
        const auto& x = grouped[static_cast<std::size_t>(c)].sample;
        const auto& first = grouped[static_cast<std::size_t>(c - c % 3)].sample;
        const auto& prev = grouped[static_cast<std::size_t>(c == 0 ? 0 : c - 1)].sample;
        CHECK(grouped[static_cast<std::size_t>(c + 6)].sample == x);
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (c % 3) CHECK(std::abs(x.values()[j] - prev.values()[j]) <= 0.1f + 1e-6f);
            CHECK(std::abs(x.values()[j] - first.values()[j]) <= 0.2f + 1e-6f);
        }
    }
    CHECK_FALSE(grouped[0].sample == grouped[3].sample);
    CHECK_THROWS_AS(make_cluster_images(10, 2, s, 0.0, 1, Split::Train, 0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(parse_config(R"({"dataset": {"group_size": 0}})"), ConfigError);
}
