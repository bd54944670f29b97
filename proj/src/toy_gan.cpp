#include "gaug/toy_gan.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace gaug {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void append_one_hot(std::vector<double>& v, std::optional<int> num_classes, std::optional<int> cls) {
    if (!num_classes) {
        if (cls) throw GenerationError(GenerationErrorCode::ConditioningMismatch,
                                       "class supplied to an unconditional network");
        return;
    }
    if (!cls) throw GenerationError(GenerationErrorCode::ConditioningMismatch,
                                    "class-conditional network requires a class");
    if (*cls < 0 || *cls >= *num_classes) throw InvalidArgument("class label out of range");
    const std::size_t base = v.size();
    v.resize(base + static_cast<std::size_t>(*num_classes), 0.0);
    v[base + static_cast<std::size_t>(*cls)] = 1.0;
}

std::vector<double> to_double(std::span<const float> v) { return {v.begin(), v.end()}; }

}  // namespace

const char* to_string(LossVariant v) {
    return v == LossVariant::Saturating ? "saturating" : "non_saturating";
}

LossVariant loss_variant_from_string(const std::string& s) {
    if (s == "saturating") return LossVariant::Saturating;
    if (s == "non_saturating") return LossVariant::NonSaturating;
    throw InvalidArgument("unknown loss variant '" + s + "'");
}

void ToyGanConfig::validate() const {
    if (steps < 0) throw InvalidArgument("gan.steps must be >= 0");
    if (batch_size < 1) throw InvalidArgument("gan.batch_size must be >= 1");
    if (!(lr_generator > 0.0) || !(lr_discriminator > 0.0)) {
        throw InvalidArgument("gan learning rates must be > 0");
    }
    if (latent_dim < 1) throw InvalidArgument("gan.latent_dim must be >= 1");
    if (hidden < 1) throw InvalidArgument("gan.hidden must be >= 1");
    if (class_conditional && num_classes < 1) {
        throw InvalidArgument("class-conditional gan needs num_classes >= 1");
    }
}

ToyGenerator::ToyGenerator(std::size_t latent_dim, std::size_t conditioning_dim,
                           std::optional<int> num_classes, Shape output_shape, std::size_t hidden)
    : latent_dim_(latent_dim),
      conditioning_dim_(conditioning_dim),
      num_classes_(num_classes),
      output_shape_(output_shape),
      net_({latent_dim + conditioning_dim + static_cast<std::size_t>(num_classes.value_or(0)),
            hidden, output_shape.numel()}) {}

std::vector<double> ToyGenerator::input(std::span<const double> z, std::span<const double> h,
                                        std::optional<int> cls) const {
    if (z.size() != latent_dim_ || h.size() != conditioning_dim_) {
        throw GenerationError(GenerationErrorCode::DimensionMismatch, "generator input dimensions");
    }
    std::vector<double> in(z.begin(), z.end());
    in.insert(in.end(), h.begin(), h.end());
    append_one_hot(in, num_classes_, cls);
    return in;
}

std::vector<double> ToyGenerator::forward(std::span<const double> z, std::span<const double> h,
                                          std::optional<int> cls, Mlp::Cache* cache) const {
    return net_.forward(input(z, h, cls), cache);
}

ToyDiscriminator::ToyDiscriminator(std::size_t sample_dim, std::size_t conditioning_dim,
                                   std::optional<int> num_classes, std::size_t hidden)
    : sample_dim_(sample_dim),
      conditioning_dim_(conditioning_dim),
      num_classes_(num_classes),
      net_({sample_dim + conditioning_dim + static_cast<std::size_t>(num_classes.value_or(0)),
            hidden, 1}) {}

std::vector<double> ToyDiscriminator::input(std::span<const double> x, std::span<const double> h,
                                            std::optional<int> cls) const {
    if (x.size() != sample_dim_ || h.size() != conditioning_dim_) {
        throw GenerationError(GenerationErrorCode::DimensionMismatch, "discriminator input dimensions");
    }
    std::vector<double> in(x.begin(), x.end());
    in.insert(in.end(), h.begin(), h.end());
    append_one_hot(in, num_classes_, cls);
    return in;
}

double ToyDiscriminator::logit(std::span<const double> x, std::span<const double> h,
                               std::optional<int> cls, Mlp::Cache* cache) const {
    return net_.forward(input(x, h, cls), cache)[0];
}

double discriminator_loss(const ToyGenerator& g, const ToyDiscriminator& d, const GanBatch& batch,
                          std::span<double> grad_d) {
    const std::size_t n = batch.size();
    if (n == 0) throw InvalidArgument("empty GAN batch");
    const double inv = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    Mlp::Cache cache;
    for (std::size_t b = 0; b < n; ++b) {
        const auto& h = batch.conditioning[b];
        const auto cls = batch.classes[b];
        const double real_logit = d.logit(batch.real[b], h, cls, grad_d.empty() ? nullptr : &cache);
        loss += softplus(-real_logit);
        if (!grad_d.empty()) {
            const double g_out = -logistic(-real_logit) * inv;
            d.net().backward(cache, std::span<const double>(&g_out, 1), grad_d);
        }
        const std::vector<double> fake = g.forward(batch.latent[b], h, cls);
        const double fake_logit = d.logit(fake, h, cls, grad_d.empty() ? nullptr : &cache);
        loss += softplus(fake_logit);
        if (!grad_d.empty()) {
            const double g_out = logistic(fake_logit) * inv;
            d.net().backward(cache, std::span<const double>(&g_out, 1), grad_d);
        }
    }
    return loss * inv;
}

double generator_loss(const ToyGenerator& g, const ToyDiscriminator& d, const GanBatch& batch,
                      LossVariant variant, std::span<double> grad_g) {
    const std::size_t n = batch.size();
    if (n == 0) throw InvalidArgument("empty GAN batch");
    const double inv = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    Mlp::Cache g_cache;
    Mlp::Cache d_cache;
    std::vector<double> d_scratch(grad_g.empty() ? 0 : d.net().num_params());
    for (std::size_t b = 0; b < n; ++b) {
        const auto& h = batch.conditioning[b];
        const auto cls = batch.classes[b];
        const bool track = !grad_g.empty();
        const std::vector<double> fake = g.forward(batch.latent[b], h, cls, track ? &g_cache : nullptr);
        const double a = d.logit(fake, h, cls, track ? &d_cache : nullptr);
        double da = 0.0;
        if (variant == LossVariant::NonSaturating) {
            loss += softplus(-a);
            da = -logistic(-a) * inv;
        } else {
            loss -= softplus(a);
            da = -logistic(a) * inv;
        }
        if (track) {
            const std::vector<double> d_in = d.net().backward(d_cache, std::span<const double>(&da, 1),
                                                              d_scratch);
            const std::span<const double> d_fake(d_in.data(), d.sample_dim());
            g.net().backward(g_cache, d_fake, grad_g);
        }
    }
    return loss * inv;
}

ToyGanState ToyGanState::create(const ToyGanConfig& cfg, std::size_t conditioning_dim,
                                Shape sample_shape) {
    cfg.validate();
    const std::optional<int> classes =
        cfg.class_conditional ? std::optional<int>(cfg.num_classes) : std::nullopt;
    ToyGanState s{
        ToyGenerator(cfg.latent_dim, conditioning_dim, classes, sample_shape, cfg.hidden),
        ToyDiscriminator(sample_shape.numel(), conditioning_dim, classes, cfg.hidden),
        {},
        {},
    };
    Rng init(derive_seed(cfg.seed, 0x1417));
    s.generator.net().init(init);
    s.discriminator.net().init(init);
    s.opt_generator = Adam(s.generator.net().num_params(), cfg.lr_generator, cfg.adam_beta1);
    s.opt_discriminator = Adam(s.discriminator.net().num_params(), cfg.lr_discriminator, cfg.adam_beta1);
    return s;
}

GanBatch draw_gan_batch(const Dataset& dataset, const EmbeddingStore& store,
                        const NeighborhoodIndex& index, const ToyGanConfig& cfg,
                        std::size_t latent_dim, Rng& rng) {
    if (store.count() != dataset.size() || index.count() != dataset.size()) {
        throw InvalidArgument("dataset, store and index sizes differ");
    }
    GanBatch batch;
    std::uniform_int_distribution<std::size_t> pick(0, store.count() - 1);
    for (int b = 0; b < cfg.batch_size; ++b) {
        const std::size_t i = pick(rng);
        const std::uint32_t j = sample_neighbor(index, i, rng);
        const auto& real = dataset[j].sample.raw();
        batch.real.emplace_back(real.begin(), real.end());
        batch.conditioning.push_back(to_double(store.row(i)));
        batch.latent.push_back(sample_latent(latent_dim, TruncationPolicy::disabled(), rng));
        if (cfg.class_conditional) {
            if (!dataset[i].label) throw InvalidArgument("class-conditional gan needs labels");
            batch.classes.push_back(dataset[i].label);
        } else {
            batch.classes.push_back(std::nullopt);
        }
        batch.ids.push_back(static_cast<std::uint32_t>(i));
    }
    return batch;
}

StepLosses icgan_train_step(ToyGanState& state, const Dataset& dataset, const EmbeddingStore& store,
                            const NeighborhoodIndex& index, const ToyGanConfig& cfg, Rng& rng,
                            int step_number) {
    const GanBatch batch =
        draw_gan_batch(dataset, store, index, cfg, state.generator.latent_dim(), rng);

    std::vector<double> grad_d(state.discriminator.net().num_params(), 0.0);
    const double loss_d = discriminator_loss(state.generator, state.discriminator, batch, grad_d);
    auto fail = [&](const char* which, double value) {
        std::ostringstream msg;
        msg << "non-finite " << which << " loss (" << value << ") at step " << step_number
            << ", batch ids:";
        for (auto id : batch.ids) msg << ' ' << id;
        throw GanTrainingError(msg.str());
    };
    if (!std::isfinite(loss_d)) fail("discriminator", loss_d);
    state.opt_discriminator.step(state.discriminator.net().params(), grad_d);

    std::vector<double> grad_g(state.generator.net().num_params(), 0.0);
    const double loss_g =
        generator_loss(state.generator, state.discriminator, batch, cfg.loss_variant, grad_g);
    if (!std::isfinite(loss_g)) fail("generator", loss_g);
    state.opt_generator.step(state.generator.net().params(), grad_g);
    return {loss_d, loss_g};
}

GeneratorAdapter TrainedIcGan::adapter() const {
    auto g = std::make_shared<const ToyGenerator>(generator);
    GeneratorAdapter a;
    a.latent_dim = generator.latent_dim();
    a.conditioning_dim = generator.conditioning_dim();
    a.class_conditional = generator.num_classes().has_value();
    a.output_shape = generator.output_shape();
    a.fn = [g](std::span<const double> z, std::span<const float> h, std::optional<int> cls) {
        const std::vector<double> out = g->forward(z, to_double(h), cls);
        return Sample(g->output_shape(), std::vector<float>(out.begin(), out.end()));
    };
    return a;
}

DiscriminatorAdapter TrainedIcGan::discriminator_adapter() const {
    auto d = std::make_shared<const ToyDiscriminator>(discriminator);
    const bool cc = meta.class_conditional;
    if (cc) {
        throw InvalidArgument("discriminator adapter is only defined for unconditional models");
    }
    return DiscriminatorAdapter{[d](const Sample& x, std::span<const float> h) {
        const auto& raw = x.raw();
        return d->logit(std::vector<double>(raw.begin(), raw.end()), to_double(h), std::nullopt);
    }};
}

TrainedIcGan train_icgan(const Dataset& dataset, const EmbeddingStore& store,
                         const NeighborhoodIndex& index, const ToyGanConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw InvalidArgument("train_icgan: empty dataset");
    ToyGanState state = ToyGanState::create(cfg, store.dim(), dataset.front().sample.shape());
    Rng rng(derive_seed(cfg.seed, 0x57e9));
    TrainedIcGan out;
    out.trace.reserve(static_cast<std::size_t>(cfg.steps));
    for (int step = 0; step < cfg.steps; ++step) {
        out.trace.push_back(icgan_train_step(state, dataset, store, index, cfg, rng, step));
    }
    out.generator = std::move(state.generator);
    out.discriminator = std::move(state.discriminator);
    out.meta = CheckpointMeta{kGanCheckpointVersion,
                              cfg.latent_dim,
                              store.dim(),
                              cfg.class_conditional,
                              cfg.class_conditional ? cfg.num_classes : 0,
                              cfg.seed,
                              cfg.steps};
    return out;
}

void save_gan_checkpoint(const TrainedIcGan& gan, const std::filesystem::path& path) {
    const auto& shape = gan.generator.output_shape();
    nlohmann::json j;
    j["format"] = "gaug-toy-icgan";
    j["version"] = gan.meta.version;
    j["latent_dim"] = gan.meta.latent_dim;
    j["conditioning_dim"] = gan.meta.conditioning_dim;
    j["class_conditional"] = gan.meta.class_conditional;
    j["num_classes"] = gan.meta.num_classes;
    j["seed"] = gan.meta.seed;
    j["steps"] = gan.meta.steps;
    j["output_shape"] = {shape.channels, shape.height, shape.width};
    j["generator_layers"] = gan.generator.net().layer_sizes();
    j["discriminator_layers"] = gan.discriminator.net().layer_sizes();
    const auto gp = gan.generator.net().params();
    const auto dp = gan.discriminator.net().params();
    j["generator_params"] = std::vector<double>(gp.begin(), gp.end());
    j["discriminator_params"] = std::vector<double>(dp.begin(), dp.end());
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << j.dump(1) << '\n';
}

TrainedIcGan load_gan_checkpoint(const std::filesystem::path& path,
                                 const std::optional<CheckpointMeta>& expected) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read checkpoint " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed checkpoint " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "gaug-toy-icgan") {
            throw Error("not a toy IC-GAN checkpoint: " + path.string());
        }
        CheckpointMeta meta;
        meta.version = j.at("version").get<int>();
        if (meta.version != kGanCheckpointVersion) {
            throw Error("checkpoint version " + std::to_string(meta.version) + " unsupported");
        }
        meta.latent_dim = j.at("latent_dim").get<std::size_t>();
        meta.conditioning_dim = j.at("conditioning_dim").get<std::size_t>();
        meta.class_conditional = j.at("class_conditional").get<bool>();
        meta.num_classes = j.at("num_classes").get<int>();
        meta.seed = j.at("seed").get<std::uint64_t>();
        meta.steps = j.at("steps").get<int>();
        if (expected) {
            auto mismatch = [&](const char* field) {
                throw Error(std::string("checkpoint ") + field + " does not match the configured policy");
            };
            if (meta.latent_dim != expected->latent_dim) mismatch("latent_dim");
            if (meta.conditioning_dim != expected->conditioning_dim) mismatch("conditioning_dim");
            if (meta.class_conditional != expected->class_conditional) mismatch("class_conditional");
            if (meta.num_classes != expected->num_classes) mismatch("num_classes");
        }
        const auto shape_v = j.at("output_shape").get<std::vector<int>>();
        if (shape_v.size() != 3) throw Error("checkpoint output_shape must have 3 entries");
        const Shape shape{shape_v[0], shape_v[1], shape_v[2]};
        const auto g_layers = j.at("generator_layers").get<std::vector<std::size_t>>();
        const auto d_layers = j.at("discriminator_layers").get<std::vector<std::size_t>>();
        if (g_layers.size() != 3 || d_layers.size() != 3) throw Error("unexpected network depth");
        const std::optional<int> classes =
            meta.class_conditional ? std::optional<int>(meta.num_classes) : std::nullopt;
        TrainedIcGan gan;
        gan.meta = meta;
        gan.generator = ToyGenerator(meta.latent_dim, meta.conditioning_dim, classes, shape, g_layers[1]);
        gan.discriminator =
            ToyDiscriminator(shape.numel(), meta.conditioning_dim, classes, d_layers[1]);
        if (gan.generator.net().layer_sizes() != g_layers ||
            gan.discriminator.net().layer_sizes() != d_layers) {
            throw Error("checkpoint layer sizes inconsistent with its meta fields");
        }
        const auto gp = j.at("generator_params").get<std::vector<double>>();
        const auto dp = j.at("discriminator_params").get<std::vector<double>>();
        if (gp.size() != gan.generator.net().num_params() ||
            dp.size() != gan.discriminator.net().num_params()) {
            throw Error("checkpoint parameter count mismatch");
        }
        std::copy(gp.begin(), gp.end(), gan.generator.net().params().begin());
        std::copy(dp.begin(), dp.end(), gan.discriminator.net().params().begin());
        return gan;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace gaug
