#pragma once

#include <vector>

#include "gaug/augmentation.hpp"
#include "gaug/generative.hpp"
#include "gaug/neighborhood_index.hpp"
#include "gaug/transforms.hpp"

namespace gaug {

enum class ViewProvenance { Real, Generated, Neighbor };

const char* to_string(ViewProvenance p);

/// Positive views of one instance: >= 2 main views at one resolution, optional small views
/// at another. `provenance` lists main views first, then small views.
struct ViewSet {
    std::vector<Sample> main_views;
    std::vector<Sample> small_views;
    std::vector<ViewProvenance> provenance;

    std::size_t total() const { return main_views.size() + small_views.size(); }
    /// Throws if fewer than two main views, shapes differ within a group, or provenance is short.
    void validate() const;
};

/// Two independent draws of `pipeline`, then `n_small` draws of `small_pipeline`.
ViewSet make_views(const Instance& x, const Pipeline& pipeline, int n_small,
                   const Pipeline& small_pipeline, Rng& rng);

/// With probability p_g (one Bernoulli draw), main view 1 becomes
/// pipeline_generated(G(z, h_i)). Main view 2 and the small views are never touched.
ViewSet substitute_generated_view(ViewSet views, const Instance& x, const AugmentationPolicy& policy,
                                  const GeneratorAdapter& adapter, const EmbeddingStore& store,
                                  const Pipeline& pipeline_generated, Rng& rng);

/// Main view 1 comes from a uniformly drawn neighbor with probability p_g, otherwise from x_i;
/// main view 2 always comes from x_i.
ViewSet swav_nn_pair(const Instance& x, const NeighborhoodIndex& index, const Dataset& dataset,
                     double p_g, const Pipeline& pipeline, Rng& rng);

}  // namespace gaug
