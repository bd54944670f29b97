#include "gaug/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace gaug {

namespace {

using nlohmann::json;

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

DatasetSpec parse_dataset(const json& j) {
    only_keys(j, {"generator", "n", "n_test", "classes", "shape", "seed", "cluster_std", "group_size", "group_spread"},
              "dataset");
    DatasetSpec d;
    read(j, "generator", d.generator);
    read(j, "n", d.n);
    read(j, "n_test", d.n_test);
    read(j, "classes", d.classes);
    if (j.contains("shape")) {
        const auto s = j["shape"].get<std::vector<int>>();
        if (s.size() != 3) throw ConfigError("dataset.shape must be [C, H, W]");
        d.shape = {s[0], s[1], s[2]};
    }
    read(j, "seed", d.seed);
    read(j, "cluster_std", d.cluster_std);
    read(j, "group_size", d.group_size);
    read(j, "group_spread", d.group_spread);
    return d;
}

ExtractorSpec parse_extractor(const json& j) {
    only_keys(j, {"kind", "dim", "seed"}, "extractor");
    ExtractorSpec e;
    read(j, "kind", e.kind);
    read(j, "dim", e.dim);
    read(j, "seed", e.seed);
    return e;
}

TrainingConfig parse_training(const json& j) {
    only_keys(j, {"epochs", "batch_size", "learning_rate", "reference_batch", "lr_milestones", "lr_decay",
                  "momentum", "weight_decay", "label_smoothing", "seed"},
              "training");
    TrainingConfig t;
    read(j, "epochs", t.epochs);
    read(j, "batch_size", t.batch_size);
    read(j, "learning_rate", t.learning_rate);
    read(j, "reference_batch", t.reference_batch);
    read(j, "lr_milestones", t.lr_milestones);
    read(j, "lr_decay", t.lr_decay);
    read(j, "momentum", t.momentum);
    read(j, "weight_decay", t.weight_decay);
    read(j, "label_smoothing", t.label_smoothing);
    read(j, "seed", t.seed);
    return t;
}

GanSection parse_gan(const json& j) {
    only_keys(j, {"enabled", "steps", "batch_size", "lr_generator", "lr_discriminator", "latent_dim", "hidden",
                  "loss_variant", "seed", "class_conditional", "checkpoint", "noise_classes"},
              "gan");
    GanSection g;
    read(j, "enabled", g.enabled);
    auto& c = g.config;
    read(j, "steps", c.steps);
    read(j, "batch_size", c.batch_size);
    read(j, "lr_generator", c.lr_generator);
    read(j, "lr_discriminator", c.lr_discriminator);
    read(j, "latent_dim", c.latent_dim);
    read(j, "hidden", c.hidden);
    if (j.contains("loss_variant")) c.loss_variant = loss_variant_from_string(j["loss_variant"].get<std::string>());
    read(j, "seed", c.seed);
    read(j, "class_conditional", c.class_conditional);
    if (j.contains("checkpoint") && !j["checkpoint"].is_null()) g.checkpoint = j["checkpoint"].get<std::string>();
    read(j, "noise_classes", g.noise_classes);
    return g;
}

MetricsConfig parse_metrics(const json& j) {
    only_keys(j, {"fid_on", "nn_corruption_on", "ris_on", "K", "q", "ris_views", "ris_objects"}, "metrics");
    MetricsConfig m;
    read(j, "fid_on", m.fid_on);
    read(j, "nn_corruption_on", m.nn_corruption_on);
    read(j, "ris_on", m.ris_on);
    read(j, "K", m.top_k);
    read(j, "q", m.q);
    read(j, "ris_views", m.ris_views);
    read(j, "ris_objects", m.ris_objects);
    return m;
}

}  // namespace

void ExperimentConfig::validate(const std::filesystem::path& base_dir) const {
    const std::set<std::string> generators{"cluster_images", "vector_clusters", "gaussian_mixture_2d"};
    if (!generators.count(dataset.generator)) throw ConfigError("unknown dataset.generator '" + dataset.generator + "'");
    if (dataset.n < 1) throw ConfigError("dataset.n must be >= 1");
    if (dataset.classes < 1) throw ConfigError("dataset.classes must be >= 1");
    if (dataset.shape.channels < 1 || dataset.shape.height < 1 || dataset.shape.width < 1) {
        throw ConfigError("dataset.shape must be positive");
    }
    if (!(dataset.cluster_std >= 0.0)) throw ConfigError("dataset.cluster_std must be >= 0");
    if (dataset.group_size < 1) throw ConfigError("dataset.group_size must be >= 1");
    if (!(dataset.group_spread >= 0.0)) throw ConfigError("dataset.group_spread must be >= 0");
    if (extractor.kind != "random_projection" && extractor.kind != "centered_identity") {
        throw ConfigError("unknown extractor.kind '" + extractor.kind + "'");
    }
    if (extractor.dim < 1) throw ConfigError("extractor.dim must be >= 1");
    try {
        policy.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("policy: ") + e.what());
    }
    if (policy.k > dataset.n) throw ConfigError("policy.k exceeds dataset.n");
    if (training.epochs < 0) throw ConfigError("training.epochs must be >= 0");
    if (training.batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
    if (!(training.learning_rate > 0.0)) throw ConfigError("training.learning_rate must be > 0");
    if (training.reference_batch < 1) throw ConfigError("training.reference_batch must be >= 1");
    for (std::size_t i = 1; i < training.lr_milestones.size(); ++i) {
        if (training.lr_milestones[i] <= training.lr_milestones[i - 1]) {
            throw ConfigError("training.lr_milestones must be strictly increasing");
        }
    }
    if (!(training.lr_decay > 0.0 && training.lr_decay <= 1.0)) throw ConfigError("training.lr_decay must be in (0,1]");
    if (!(training.momentum >= 0.0 && training.momentum < 1.0)) throw ConfigError("training.momentum must be in [0,1)");
    if (!(training.weight_decay >= 0.0)) throw ConfigError("training.weight_decay must be >= 0");
    if (!(training.label_smoothing >= 0.0 && training.label_smoothing < 1.0)) {
        throw ConfigError("training.label_smoothing must be in [0,1)");
    }
    if (gan.enabled || gan.checkpoint) {
        try {
            gan.config.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("gan: ") + e.what());
        }
    }
    if (gan.checkpoint) {
        const std::filesystem::path p = std::filesystem::path(*gan.checkpoint).is_absolute()
                                            ? std::filesystem::path(*gan.checkpoint)
                                            : base_dir / *gan.checkpoint;
        if (!std::filesystem::exists(p)) throw ConfigError("gan.checkpoint does not exist: " + p.string());
    }
    for (int c : gan.noise_classes) {
        if (c < 0 || c >= dataset.classes) throw ConfigError("gan.noise_classes entry out of range");
    }
    const bool have_generator = gan.enabled || gan.checkpoint.has_value();
    if (policy.p_g > 0.0 && !have_generator) throw ConfigError("policy.p_g > 0 requires gan.enabled or gan.checkpoint");
    if (metrics.fid_on && !have_generator) throw ConfigError("metrics.fid_on requires a generator");
    if (metrics.top_k < 1) throw ConfigError("metrics.K must be >= 1");
    if (!(metrics.q >= 0.0 && metrics.q <= 1.0)) throw ConfigError("metrics.q must be in [0,1]");
    if (metrics.ris_views < 2 || metrics.ris_objects < 1) throw ConfigError("metrics.ris_views >= 2 and ris_objects >= 1 required");
}

nlohmann::json ExperimentConfig::to_json() const {
    json j;
    j["dataset"] = {{"generator", dataset.generator},
                    {"n", dataset.n},
                    {"n_test", dataset.n_test},
                    {"classes", dataset.classes},
                    {"shape", {dataset.shape.channels, dataset.shape.height, dataset.shape.width}},
                    {"seed", dataset.seed},
                    {"cluster_std", dataset.cluster_std},
                    {"group_size", dataset.group_size},
                    {"group_spread", dataset.group_spread}};
    j["extractor"] = {{"kind", extractor.kind}, {"dim", extractor.dim}, {"seed", extractor.seed}};
    j["policy"] = gaug::to_json(policy);
    j["training"] = {{"epochs", training.epochs},
                     {"batch_size", training.batch_size},
                     {"learning_rate", training.learning_rate},
                     {"reference_batch", training.reference_batch},
                     {"lr_milestones", training.lr_milestones},
                     {"lr_decay", training.lr_decay},
                     {"momentum", training.momentum},
                     {"weight_decay", training.weight_decay},
                     {"label_smoothing", training.label_smoothing},
                     {"seed", training.seed}};
    const auto& c = gan.config;
    j["gan"] = {{"enabled", gan.enabled},
                {"steps", c.steps},
                {"batch_size", c.batch_size},
                {"lr_generator", c.lr_generator},
                {"lr_discriminator", c.lr_discriminator},
                {"latent_dim", c.latent_dim},
                {"hidden", c.hidden},
                {"loss_variant", to_string(c.loss_variant)},
                {"seed", c.seed},
                {"class_conditional", c.class_conditional},
                {"checkpoint", gan.checkpoint ? json(*gan.checkpoint) : json(nullptr)},
                {"noise_classes", gan.noise_classes}};
    j["metrics"] = {{"fid_on", metrics.fid_on},       {"nn_corruption_on", metrics.nn_corruption_on},
                    {"ris_on", metrics.ris_on},       {"K", metrics.top_k},
                    {"q", metrics.q},                 {"ris_views", metrics.ris_views},
                    {"ris_objects", metrics.ris_objects}};
    j["output_dir"] = output_dir;
    return j;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        only_keys(j, {"dataset", "extractor", "policy", "training", "gan", "metrics", "output_dir"}, "config");
        if (j.contains("dataset")) cfg.dataset = parse_dataset(j["dataset"]);
        if (j.contains("extractor")) cfg.extractor = parse_extractor(j["extractor"]);
        if (j.contains("policy")) {
            try {
                cfg.policy = policy_from_json(j["policy"]);
            } catch (const InvalidArgument& e) {
                throw ConfigError(std::string("policy: ") + e.what());
            }
        }
        if (j.contains("training")) cfg.training = parse_training(j["training"]);
        if (j.contains("gan")) cfg.gan = parse_gan(j["gan"]);
        if (j.contains("metrics")) cfg.metrics = parse_metrics(j["metrics"]);
        if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config has a field of the wrong type: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    cfg.gan.config.num_classes = cfg.gan.config.class_conditional ? cfg.dataset.classes : 0;
    cfg.source_text = text;
    cfg.validate(base_dir);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

}  // namespace gaug
