#include "gaug/ssl_views.hpp"

#include "gaug/error.hpp"

namespace gaug {

const char* to_string(ViewProvenance p) {
    switch (p) {
        case ViewProvenance::Real: return "real";
        case ViewProvenance::Generated: return "generated";
        case ViewProvenance::Neighbor: return "neighbor";
    }
    return "unknown";
}

void ViewSet::validate() const {
    if (main_views.size() < 2) throw InvalidArgument("a view set needs at least two main views");
    if (provenance.size() != total()) throw InvalidArgument("provenance length differs from view count");
    for (const auto& v : main_views) {
        if (v.shape() != main_views.front().shape()) throw InvalidArgument("main views differ in shape");
    }
    for (const auto& v : small_views) {
        if (v.shape() != small_views.front().shape()) throw InvalidArgument("small views differ in shape");
    }
}

ViewSet make_views(const Instance& x, const Pipeline& pipeline, int n_small,
                   const Pipeline& small_pipeline, Rng& rng) {
    if (n_small < 0) throw InvalidArgument("n_small must be >= 0");
    ViewSet views;
    for (int v = 0; v < 2; ++v) views.main_views.push_back(apply_pipeline(pipeline, x.sample, rng));
    for (int v = 0; v < n_small; ++v) {
        views.small_views.push_back(apply_pipeline(small_pipeline, x.sample, rng));
    }
    views.provenance.assign(views.total(), ViewProvenance::Real);
    views.validate();
    return views;
}

ViewSet substitute_generated_view(ViewSet views, const Instance& x, const AugmentationPolicy& policy,
                                  const GeneratorAdapter& adapter, const EmbeddingStore& store,
                                  const Pipeline& pipeline_generated, Rng& rng) {
    if (views.main_views.size() < 2) throw InvalidArgument("substitution needs at least two main views");
    if (!(policy.p_g >= 0.0 && policy.p_g <= 1.0)) throw InvalidArgument("p_G must be in [0,1]");
    if (x.id >= store.count()) throw InvalidArgument("no embedding row for id " + std::to_string(x.id));
    if (!bernoulli(rng, policy.p_g)) return views;
    const std::vector<double> z = sample_latent(adapter.latent_dim, policy.truncation, rng);
    const std::optional<int> cls = adapter.class_conditional ? x.label : std::nullopt;
    const Sample generated = generate(adapter, store.row(x.id), z, cls);
    views.main_views[0] = apply_pipeline(pipeline_generated, generated, rng);
    views.provenance[0] = ViewProvenance::Generated;
    views.validate();
    return views;
}

ViewSet swav_nn_pair(const Instance& x, const NeighborhoodIndex& index, const Dataset& dataset,
                     double p_g, const Pipeline& pipeline, Rng& rng) {
    if (x.id >= index.count()) throw InvalidArgument("index does not cover id " + std::to_string(x.id));
    if (!(p_g >= 0.0 && p_g <= 1.0)) throw InvalidArgument("p_G must be in [0,1]");
    ViewSet views;
    views.provenance = {ViewProvenance::Real, ViewProvenance::Real};
    if (bernoulli(rng, p_g)) {
        const std::uint32_t j = sample_neighbor(index, x.id, rng);
        if (j >= dataset.size()) throw InvalidArgument("neighbor id outside the dataset");
        views.main_views.push_back(apply_pipeline(pipeline, dataset[j].sample, rng));
        views.provenance[0] = ViewProvenance::Neighbor;
    } else {
        views.main_views.push_back(apply_pipeline(pipeline, x.sample, rng));
    }
    views.main_views.push_back(apply_pipeline(pipeline, x.sample, rng));
    views.validate();
    return views;
}

}  // namespace gaug
