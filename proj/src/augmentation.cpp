#include "gaug/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gaug/error.hpp"

namespace gaug {

void AugmentationPolicy::validate() const {
    if (!(p_g >= 0.0 && p_g <= 1.0)) throw InvalidArgument("p_G must be in [0,1]");
    if (truncation.sigma && !(*truncation.sigma > 0.0)) throw InvalidArgument("truncation sigma must be > 0");
    if (k < 1) throw InvalidArgument("neighborhood size k must be >= 1");
    pipeline_real.validate();
    pipeline_generated.validate();
    if (fid_threshold && !(*fid_threshold > 0.0)) throw InvalidArgument("fid_threshold must be > 0");
    if (fid_threshold.has_value() != allowed_classes.has_value()) {
        throw InvalidArgument("allowed_classes must be present exactly when fid_threshold is set");
    }
    if (mixing) mixing->validate();
}

void apply_fid_filter(AugmentationPolicy& policy, const std::map<int, double>& per_class_fid,
                      double threshold) {
    policy.fid_threshold = threshold;
    policy.allowed_classes = fid_filter(per_class_fid, threshold);
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
            allowed.end()) {
            throw InvalidArgument(std::string("unknown key '") + key + "' in " + where);
        }
    }
}

}  // namespace

nlohmann::json to_json(const AugmentationPolicy& policy) {
    nlohmann::json j;
    j["p_g"] = policy.p_g;
    j["truncation"] = policy.truncation.sigma ? nlohmann::json(*policy.truncation.sigma) : nlohmann::json(nullptr);
    j["k"] = policy.k;
    j["pipeline_real"] = to_json(policy.pipeline_real);
    j["pipeline_generated"] = to_json(policy.pipeline_generated);
    j["fid_threshold"] = policy.fid_threshold ? nlohmann::json(*policy.fid_threshold) : nlohmann::json(nullptr);
    j["use_soft_labels"] = policy.use_soft_labels;
    if (policy.mixing) {
        j["mixing"] = {{"switch_prob", policy.mixing->switch_prob},
                       {"mixup_prob", policy.mixing->mixup_prob},
                       {"mixup_alpha", policy.mixing->mixup_alpha},
                       {"cutmix_alpha", policy.mixing->cutmix_alpha}};
    } else {
        j["mixing"] = nullptr;
    }
    return j;
}

AugmentationPolicy policy_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("policy must be a JSON object");
    reject_unknown_keys(j, {"p_g", "truncation", "k", "pipeline_real", "pipeline_generated",
                            "fid_threshold", "use_soft_labels", "mixing"},
                        "policy");
    try {
        AugmentationPolicy p;
        p.p_g = j.value("p_g", 0.0);
        if (j.contains("truncation")) {
            p.truncation = j["truncation"].is_null() ? TruncationPolicy::disabled()
                                                     : TruncationPolicy::at(j["truncation"].get<double>());
        }
        p.k = j.value("k", kDefaultNeighborhoodSize);
        if (j.contains("pipeline_real")) p.pipeline_real = pipeline_from_json(j["pipeline_real"]);
        p.pipeline_generated = j.contains("pipeline_generated")
                                   ? pipeline_from_json(j["pipeline_generated"])
                                   : p.pipeline_real;
        if (j.contains("fid_threshold") && !j["fid_threshold"].is_null()) {
            p.fid_threshold = j["fid_threshold"].get<double>();
            p.allowed_classes = std::set<int>{};  // populated once per-class FIDs are known
        }
        p.use_soft_labels = j.value("use_soft_labels", true);
        if (j.contains("mixing") && !j["mixing"].is_null()) {
            const auto& m = j["mixing"];
            reject_unknown_keys(m, {"switch_prob", "mixup_prob", "mixup_alpha", "cutmix_alpha"}, "policy.mixing");
            MixingConfig cfg;
            cfg.switch_prob = m.value("switch_prob", cfg.switch_prob);
            cfg.mixup_prob = m.value("mixup_prob", cfg.mixup_prob);
            cfg.mixup_alpha = m.value("mixup_alpha", cfg.mixup_alpha);
            cfg.cutmix_alpha = m.value("cutmix_alpha", cfg.cutmix_alpha);
            p.mixing = cfg;
        }
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed policy: ") + e.what());
    }
}

SoftLabelTable::SoftLabelTable(std::size_t rows, std::size_t classes, std::vector<double> values)
    : rows_(rows), classes_(classes), values_(std::move(values)) {
    if (values_.size() != rows_ * classes_) throw InvalidArgument("soft label table size mismatch");
}

SoftLabelTable soft_labels(const NeighborhoodIndex& index, std::span<const std::uint32_t> labels,
                           std::size_t num_classes) {
    if (labels.size() != index.count()) {
        throw InvalidArgument("soft_labels: labels must cover all instances");
    }
    for (std::uint32_t l : labels) {
        if (l >= num_classes) throw InvalidArgument("soft_labels: label exceeds class count");
    }
    const std::size_t n = index.count();
    const double k = static_cast<double>(index.k());
    std::vector<double> values(n * num_classes, 0.0);
    std::vector<std::size_t> tally(num_classes);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(tally.begin(), tally.end(), 0);
        for (std::uint32_t j : index.row(i)) ++tally[labels[j]];
        for (std::size_t c = 0; c < num_classes; ++c) {
            values[i * num_classes + c] = static_cast<double>(tally[c]) / k;
        }
    }
    return SoftLabelTable(n, num_classes, std::move(values));
}

std::vector<std::size_t> select_augmented_indices(std::size_t batch_size, double p_g, Rng& rng) {
    if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
    if (!(p_g >= 0.0 && p_g <= 1.0)) throw InvalidArgument("p_G must be in [0,1]");
    const auto count = std::min(
        batch_size, static_cast<std::size_t>(std::ceil(static_cast<double>(batch_size) * p_g)));
    std::vector<std::size_t> pool(batch_size);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, batch_size - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::set<int> fid_filter(const std::map<int, double>& per_class_fid, double threshold) {
    std::set<int> allowed;
    for (const auto& [cls, fid] : per_class_fid) {
        if (!std::isfinite(fid) || fid < 0.0) {
            throw InvalidArgument("fid_filter: FID values must be finite and nonnegative");
        }
        if (fid < threshold) allowed.insert(cls);
    }
    return allowed;
}

AugmentStreams AugmentStreams::derive(std::uint64_t seed, std::uint64_t worker,
                                      std::uint64_t batch_index) {
    return AugmentStreams{Rng(derive_seed(seed, worker, batch_index, 1)),
                          Rng(derive_seed(seed, worker, batch_index, 2)),
                          Rng(derive_seed(seed, worker, batch_index, 3)),
                          Rng(derive_seed(seed, worker, batch_index, 4))};
}

namespace {

void write_one_hot(LabeledBatch& batch, std::size_t b, const Instance& inst) {
    if (batch.num_classes == 0) return;
    if (!inst.label) throw InvalidArgument("labels required to build a labeled batch");
    if (static_cast<std::size_t>(*inst.label) >= batch.num_classes) {
        throw InvalidArgument("label exceeds class count");
    }
    batch.label(b)[static_cast<std::size_t>(*inst.label)] = 1.0;
}

const Instance& lookup(const Dataset& dataset, std::uint32_t id) {
    if (id >= dataset.size()) throw InvalidArgument("batch id " + std::to_string(id) + " not in dataset");
    return dataset[id];
}

}  // namespace

LabeledBatch plain_batch(std::span<const std::uint32_t> ids, const Dataset& dataset,
                         const Pipeline& pipeline_real, std::size_t num_classes, Rng& transform_rng) {
    LabeledBatch batch;
    batch.ids.assign(ids.begin(), ids.end());
    batch.num_classes = num_classes;
    batch.labels.assign(ids.size() * num_classes, 0.0);
    batch.augmented_mask.assign(ids.size(), false);
    for (std::size_t b = 0; b < ids.size(); ++b) {
        const Instance& inst = lookup(dataset, ids[b]);
        batch.samples.push_back(apply_pipeline(pipeline_real, inst.sample, transform_rng));
        write_one_hot(batch, b, inst);
    }
    return batch;
}

LabeledBatch da_icgan_augment_batch(std::span<const std::uint32_t> ids, const Dataset& dataset,
                                    const AugmentationPolicy& policy, const GeneratorAdapter* adapter,
                                    const EmbeddingStore& store, const SoftLabelTable* soft_table,
                                    std::size_t num_classes, AugmentStreams& streams) {
    policy.validate();
    if (ids.empty()) throw InvalidArgument("empty batch");
    if (policy.p_g > 0.0) {
        if (adapter == nullptr) throw InvalidArgument("p_G > 0 requires a generator adapter");
        if (adapter->conditioning_dim != store.dim()) {
            throw GenerationError(GenerationErrorCode::DimensionMismatch,
                                  "adapter conditioning dim " + std::to_string(adapter->conditioning_dim) +
                                      " differs from store dim " + std::to_string(store.dim()));
        }
        if (policy.use_soft_labels) {
            if (soft_table == nullptr) throw InvalidArgument("use_soft_labels requires a soft label table");
            if (soft_table->classes() != num_classes) {
                throw InvalidArgument("soft label table class count differs from the batch class count");
            }
        }
    }
    for (std::uint32_t id : ids) {
        if (id >= store.count()) throw InvalidArgument("no embedding row for batch id " + std::to_string(id));
    }

    const std::vector<std::size_t> selected = select_augmented_indices(ids.size(), policy.p_g, streams.gate);
    std::vector<bool> use_generator(ids.size(), false);
    for (std::size_t b : selected) {
        const Instance& inst = lookup(dataset, ids[b]);
        bool allowed = true;
        if (policy.allowed_classes) {
            allowed = inst.label.has_value() && policy.allowed_classes->count(*inst.label) > 0;
        }
        use_generator[b] = allowed;
    }

    LabeledBatch batch;
    batch.ids.assign(ids.begin(), ids.end());
    batch.num_classes = num_classes;
    batch.labels.assign(ids.size() * num_classes, 0.0);
    batch.augmented_mask = use_generator;
    for (std::size_t b = 0; b < ids.size(); ++b) {
        const std::uint32_t id = ids[b];
        const Instance& inst = lookup(dataset, id);
        if (!use_generator[b]) {
            batch.samples.push_back(apply_pipeline(policy.pipeline_real, inst.sample, streams.transform));
            write_one_hot(batch, b, inst);
            continue;
        }
        const std::vector<double> z = sample_latent(adapter->latent_dim, policy.truncation, streams.latent);
        const std::optional<int> cls = adapter->class_conditional ? inst.label : std::nullopt;
        const Sample generated = generate(*adapter, store.row(id), z, cls);
        batch.samples.push_back(apply_pipeline(policy.pipeline_generated, generated, streams.transform));
        if (policy.use_soft_labels && num_classes > 0) {
            const auto row = soft_table->row(id);
            std::copy(row.begin(), row.end(), batch.label(b).begin());
        } else {
            write_one_hot(batch, b, inst);
        }
    }
    if (policy.mixing) apply_batch_mixing(batch, *policy.mixing, streams.mix);
    return batch;
}

void apply_batch_mixing(LabeledBatch& batch, const MixingConfig& cfg, Rng& rng) {
    cfg.validate();
    const MixChoice choice = cutmixup_select(rng, cfg);
    batch.mixing = choice;
    const std::size_t n = batch.size();
    if (choice == MixChoice::None || n < 2) return;
    const std::vector<Sample> samples = batch.samples;
    const std::vector<double> labels = batch.labels;
    const std::size_t c = batch.num_classes;
    auto label_of = [&](std::size_t b) { return std::span<const double>(labels).subspan(b * c, c); };
    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t partner = (b + 1) % n;
        MixResult r = choice == MixChoice::CutMix
                          ? cutmix(samples[b], samples[partner], label_of(b), label_of(partner), rng,
                                   cfg.cutmix_alpha)
                          : mixup(samples[b], samples[partner], label_of(b), label_of(partner),
                                  beta(rng, cfg.mixup_alpha, cfg.mixup_alpha));
        batch.samples[b] = std::move(r.sample);
        std::copy(r.label.begin(), r.label.end(), batch.label(b).begin());
    }
}

}  // namespace gaug
