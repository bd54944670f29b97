#include <doctest.h>

#include <cmath>
#include <limits>

#include "gaug/augmentation.hpp"
#include "gaug/mixing.hpp"
#include "gaug/transforms.hpp"

using namespace gaug;

namespace {

Sample random_sample(Rng& rng, Shape s) {
    Sample x(s);
    for (auto& v : x.values()) v = static_cast<float>(uniform01(rng));
    return x;
}

Dataset labeled_dataset(Rng& rng, std::size_t n, int classes, Shape s) {
    Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        ds.push_back({static_cast<std::uint32_t>(i), random_sample(rng, s), static_cast<int>(i % classes)});
    }
    return ds;
}

EmbeddingStore store_for(const Dataset& ds) {
    return extract_embeddings(ds, [](const Sample& s) {
        std::vector<float> v(s.values().begin(), s.values().end());
        for (auto& x : v) x += 0.01f;
        return v;
    });
}

// Generator output = conditioning h reshaped, plus the first latent coordinate.
GeneratorAdapter oracle_adapter(Shape s, bool class_conditional = false) {
    GeneratorAdapter a;
    a.latent_dim = 2;
    a.conditioning_dim = s.numel();
    a.class_conditional = class_conditional;
    a.output_shape = s;
    a.fn = [s](std::span<const double> z, std::span<const float> h, std::optional<int>) {
        Sample out(s);
        for (std::size_t i = 0; i < h.size(); ++i) out.values()[i] = static_cast<float>(0.5 * h[i] + 0.1 * z[0]);
        return out;
    };
    return a;
}

Pipeline standard_pipeline(Shape s) {
    return {{Transform::rrcrop(s.height, s.width), Transform::hflip(), Transform::color_jitter(),
             Transform::random_erase()}};
}

}  // namespace

TEST_CASE("hflip mirrors the width axis and is an involution") {
    const Sample x(Shape{1, 1, 2}, std::vector<float>{0.2f, 0.7f});
    CHECK(hflip(x) == Sample(Shape{1, 1, 2}, std::vector<float>{0.7f, 0.2f}));
    Rng rng(1);
    const Sample y = random_sample(rng, {3, 5, 4});
    const Pipeline flip{{Transform::hflip(1.0)}};
    CHECK(apply_pipeline(flip, apply_pipeline(flip, y, rng), rng) == y);
}

TEST_CASE("empty pipeline is the identity") {
    Rng rng(2);
    const Sample x = random_sample(rng, {2, 3, 3});
    CHECK(apply_pipeline(Pipeline{}, x, rng) == x);
}

TEST_CASE("bilinear resize uses half-pixel centers") {
    const Sample x(Shape{1, 1, 2}, std::vector<float>{0.0f, 1.0f});
    const Sample up = resize_bilinear(x, 1, 4);
    const std::vector<float> want{0.0f, 0.25f, 0.75f, 1.0f};
    for (int i = 0; i < 4; ++i) CHECK(up.values()[i] == doctest::Approx(want[i]).epsilon(1e-7));
    CHECK(resize_bilinear(x, 1, 2) == x);
}

TEST_CASE("rrcrop with degenerate ranges equals resize") {
    Rng rng(3), a(4), b(4);
    for (int t = 0; t < 20; ++t) {
        RRCropParams p;
        p.scale = {1.0, 1.0};
        p.ratio = {1.0, 1.0};
        p.out_height = 5;
        p.out_width = 5;
        const Sample sq = random_sample(rng, {3, 7, 7});
        CHECK(rrcrop(sq, p, a) == resize_bilinear(sq, 5, 5));
        CHECK(apply_transform(Transform{1.0, ResizeParams{5, 5}}, sq, b) == resize_bilinear(sq, 5, 5));
    }
}

TEST_CASE("pipelines are deterministic given the seed") {
    Rng data(5);
    const Sample x = random_sample(data, {3, 8, 8});
    const Pipeline p{{Transform::hflip(1.0), Transform::rrcrop(8, 8)}};
    Rng a(77), b(77);
    CHECK(apply_pipeline(p, x, a) == apply_pipeline(p, x, b));
}

TEST_CASE("random erase fires with its probability") {
    Rng rng(6);
    const Sample x(Shape{1, 8, 8}, 0.5f);
    const Pipeline p{{Transform::random_erase(0.25)}};
    int erased = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) erased += !(apply_pipeline(p, x, rng) == x);
    CHECK(std::abs(erased / static_cast<double>(trials) - 0.25) < 0.01);
}

TEST_CASE("every transform keeps [0,1] values and the configured shape") {
    Rng rng(7);
    const Shape s{3, 6, 5};
    const std::vector<Transform> all{Transform::hflip(1.0), Transform::rrcrop(4, 4), Transform::color_jitter(),
                                     Transform::random_erase(1.0), Transform::randaugment_lite(),
                                     Transform::resize(3, 7)};
    for (int t = 0; t < 200; ++t) {
        const Sample x = random_sample(rng, s);
        for (const auto& tr : all) {
            const Sample y = apply_pipeline(Pipeline{{tr}}, x, rng);
            Shape want = s;
            if (const auto* p = std::get_if<RRCropParams>(&tr.params)) want = {3, p->out_height, p->out_width};
            if (const auto* p = std::get_if<ResizeParams>(&tr.params)) want = {3, p->out_height, p->out_width};
            CHECK(y.shape() == want);
            for (float v : y.values()) {
                CHECK(v >= 0.0f);
                CHECK(v <= 1.0f);
            }
        }
    }
}

TEST_CASE("illegal transform parameters are rejected") {
    CHECK_THROWS_AS(Transform::random_erase(0.25, {0.3, 0.1}), InvalidArgument);
    RandAugmentLiteParams ra;
    ra.magnitude = -1.0;
    CHECK_THROWS_AS(Transform::randaugment_lite(1.0, ra), InvalidArgument);
    CHECK_THROWS_AS(Transform::hflip(1.5), InvalidArgument);
    CHECK_THROWS_AS(Transform::rrcrop(0, 4), InvalidArgument);
}

TEST_CASE("transform JSON round trips and rejects unknown keys") {
    const Pipeline p{{Transform::rrcrop(4, 4, {0.08, 1.0}), Transform::hflip(), Transform::color_jitter(),
                      Transform::random_erase(0.25, {0.02, 0.33}), Transform::randaugment_lite(),
                      Transform::resize(2, 3)}};
    CHECK(pipeline_from_json(to_json(p)) == p);
    const auto j = to_json(Transform::random_erase(0.25, {0.02, 0.33}));
    CHECK(j.at("p").get<double>() == 0.25);
    CHECK(j.at("area").get<std::vector<double>>() == std::vector<double>{0.02, 0.33});
    auto bad = j;
    bad["colour"] = 1;
    CHECK_THROWS_AS(transform_from_json(bad), InvalidArgument);
}

TEST_CASE("soft labels follow the neighborhood histogram") {
    const NeighborhoodIndex index(4, {0, 1, 2, 3, 1, 0, 2, 3, 2, 0, 1, 3, 3, 0, 1, 2});
    const std::vector<std::uint32_t> labels{0, 0, 1, 2};
    const auto table = soft_labels(index, labels, 3);
    CHECK(std::vector<double>(table.row(0).begin(), table.row(0).end()) == std::vector<double>{0.5, 0.25, 0.25});

    const NeighborhoodIndex pure(2, {0, 1, 1, 0});
    const auto one_hot = soft_labels(pure, std::vector<std::uint32_t>{3, 3}, 5);
    CHECK(std::vector<double>(one_hot.row(1).begin(), one_hot.row(1).end()) == std::vector<double>{0, 0, 0, 1, 0});
    CHECK_THROWS_AS(soft_labels(pure, std::vector<std::uint32_t>{3}, 5), InvalidArgument);
    CHECK_THROWS_AS(soft_labels(pure, std::vector<std::uint32_t>{3, 3}, 3), InvalidArgument);
}

TEST_CASE("soft labels match a per-row counting oracle") {
    Rng rng(8);
    const std::size_t n = 500, k = 50, C = 7;
    std::vector<std::uint32_t> neighbors;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint32_t> ids(n);
        std::iota(ids.begin(), ids.end(), 0u);
        std::shuffle(ids.begin(), ids.end(), rng);
        neighbors.insert(neighbors.end(), ids.begin(), ids.begin() + k);
    }
    std::vector<std::uint32_t> labels(n);
    for (auto& l : labels) l = static_cast<std::uint32_t>(uniform_int(rng, 0, C - 1));
    const NeighborhoodIndex index(k, neighbors);
    const auto table = soft_labels(index, labels, C);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> tally(C, 0);
        for (std::size_t r = 0; r < k; ++r) ++tally[labels[neighbors[i * k + r]]];
        double sum = 0;
        for (std::size_t c = 0; c < C; ++c) {
            CHECK(table.row(i)[c] == static_cast<double>(tally[c]) / k);
            sum += table.row(i)[c];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("gate selects exactly ceil(B * p_g) indices uniformly") {
    Rng rng(9);
    CHECK(select_augmented_indices(64, 0.5, rng).size() == 32);
    CHECK(select_augmented_indices(10, 0.33, rng).size() == 4);
    CHECK(select_augmented_indices(10, 0.0, rng).empty());
    CHECK(select_augmented_indices(10, 1.0, rng).size() == 10);
    std::vector<int> hits(16, 0);
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
        const auto s = select_augmented_indices(16, 0.25, rng);
        CHECK(std::is_sorted(s.begin(), s.end()));
        for (auto b : s) ++hits[b];
    }
    for (int h : hits) CHECK(std::abs(h / static_cast<double>(draws) - 0.25) < 0.01);
}

TEST_CASE("fid_filter keeps classes strictly below the threshold") {
    const std::map<int, double> fids{{0, 40.0}, {1, 150.0}, {2, 149.9}};
    CHECK(fid_filter(fids, 150.0) == std::set<int>{0, 2});
    CHECK(fid_filter(fids, std::numeric_limits<double>::infinity()) == std::set<int>{0, 1, 2});
    CHECK(fid_filter(fids, 10.0).empty());
}

TEST_CASE("p_g = 0 reproduces the gate-free loader bit-exactly") {
    Rng rng(10);
    const Shape s{3, 6, 6};
    const auto ds = labeled_dataset(rng, 40, 4, s);
    const auto store = store_for(ds);
    const auto adapter = oracle_adapter(s);
    AugmentationPolicy policy;
    policy.p_g = 0.0;
    policy.pipeline_real = standard_pipeline(s);
    policy.pipeline_generated = policy.pipeline_real;
    std::vector<std::uint32_t> ids{3, 17, 5, 22, 9, 0, 39, 12};
    for (std::uint64_t batch = 0; batch < 20; ++batch) {
        auto streams = AugmentStreams::derive(42, 1, batch);
        auto plain_streams = AugmentStreams::derive(42, 1, batch);
        const auto got = da_icgan_augment_batch(ids, ds, policy, &adapter, store, nullptr, 4, streams);
        const auto want = plain_batch(ids, ds, policy.pipeline_real, 4, plain_streams.transform);
        CHECK(got.samples == want.samples);
        CHECK(got.labels == want.labels);
        CHECK(std::none_of(got.augmented_mask.begin(), got.augmented_mask.end(), [](bool b) { return b; }));
    }
}

TEST_CASE("p_g = 1 with identity pipelines returns generator outputs and soft labels") {
    Rng rng(11);
    const Shape s{1, 2, 2};
    const auto ds = labeled_dataset(rng, 30, 3, s);
    const auto store = store_for(ds);
    const auto index = build_neighborhoods(store, 5);
    std::vector<std::uint32_t> labels;
    for (const auto& x : ds) labels.push_back(static_cast<std::uint32_t>(*x.label));
    const auto table = soft_labels(index, labels, 3);
    const auto adapter = oracle_adapter(s);
    AugmentationPolicy policy;
    policy.p_g = 1.0;
    policy.k = 5;
    const std::vector<std::uint32_t> ids{1, 2, 3, 4, 5, 6};
    auto streams = AugmentStreams::derive(3, 0, 0);
    auto replay = AugmentStreams::derive(3, 0, 0);
    const auto batch = da_icgan_augment_batch(ids, ds, policy, &adapter, store, &table, 3, streams);
    for (std::size_t b = 0; b < ids.size(); ++b) {
        CHECK(batch.augmented_mask[b]);
        const auto z = sample_latent(2, policy.truncation, replay.latent);
        Sample want = generate(adapter, store.row(ids[b]), z);
        want.clamp01();
        CHECK(batch.samples[b] == want);
        CHECK(std::equal(table.row(ids[b]).begin(), table.row(ids[b]).end(), batch.label(b).begin()));
    }
    CHECK_THROWS_AS(da_icgan_augment_batch(ids, ds, policy, &adapter, store, nullptr, 3, streams), InvalidArgument);
    auto wrong = adapter;
    wrong.conditioning_dim = 7;
    CHECK_THROWS_AS(da_icgan_augment_batch(ids, ds, policy, &wrong, store, &table, 3, streams), GenerationError);
}

TEST_CASE("filtered classes revert to the real path") {
    Rng rng(12);
    const Shape s{1, 2, 2};
    Dataset ds;
    for (std::uint32_t i = 0; i < 16; ++i) ds.push_back({i, random_sample(rng, s), i < 8 ? 7 : 2});
    const auto store = store_for(ds);
    const auto adapter = oracle_adapter(s);
    AugmentationPolicy policy;
    policy.p_g = 1.0;
    policy.use_soft_labels = false;
    apply_fid_filter(policy, {{2, 10.0}, {7, 300.0}}, kDefaultFidThreshold);
    CHECK(*policy.allowed_classes == std::set<int>{2});
    const std::vector<std::uint32_t> sevens{0, 1, 2, 3, 4, 5, 6, 7};
    auto streams = AugmentStreams::derive(5, 0, 0);
    const auto batch = da_icgan_augment_batch(sevens, ds, policy, &adapter, store, nullptr, 8, streams);
    CHECK(std::none_of(batch.augmented_mask.begin(), batch.augmented_mask.end(), [](bool b) { return b; }));
    for (std::size_t b = 0; b < 8; ++b) CHECK(batch.samples[b] == ds[sevens[b]].sample);

    policy.p_g = 0.5;
    const std::vector<std::uint32_t> mixed{0, 8, 1, 9, 2, 10, 3, 11};
    for (std::uint64_t i = 0; i < 50; ++i) {
        auto st = AugmentStreams::derive(6, 0, i);
        auto gate = AugmentStreams::derive(6, 0, i).gate;
        const auto sel = select_augmented_indices(8, 0.5, gate);
        const auto reverted = std::count_if(sel.begin(), sel.end(), [&](std::size_t b) { return *ds[mixed[b]].label == 7; });
        const auto out = da_icgan_augment_batch(mixed, ds, policy, &adapter, store, nullptr, 8, st);
        CHECK(std::count(out.augmented_mask.begin(), out.augmented_mask.end(), true) ==
              static_cast<long>(sel.size()) - reverted);
    }
}

TEST_CASE("cutmix label weights equal realized pixel fractions") {
    const Sample a(Shape{1, 4, 4}, 0.0f), b(Shape{1, 4, 4}, 1.0f);
    const std::vector<double> ya{1, 0}, yb{0, 1};
    const auto quarter = cutmix_box(a, b, ya, yb, CropBox{0, 0, 2, 2});
    CHECK(quarter.label == std::vector<double>{0.75, 0.25});
    const auto none = cutmix_box(a, b, ya, yb, CropBox{1, 1, 0, 0});
    CHECK(none.sample == a);
    CHECK(none.label == ya);

    Rng rng(13);
    for (int t = 0; t < 1000; ++t) {
        const int h = uniform_int(rng, 1, 12), w = uniform_int(rng, 1, 12);
        const Sample x(Shape{2, h, w}, 0.0f), y(Shape{2, h, w}, 1.0f);
        const auto r = cutmix(x, y, ya, yb, rng);
        double pasted = 0;
        for (float v : r.sample.values()) pasted += v;
        const double frac = pasted / static_cast<double>(r.sample.size());
        CHECK(r.label[1] == frac);
        CHECK(r.label[0] == 1.0 - frac);
        CHECK(r.label[0] + r.label[1] == 1.0);
    }
}

TEST_CASE("mixup is a convex combination") {
    const Sample a(Shape{1, 1, 1}, 0.0f), b(Shape{1, 1, 1}, 1.0f);
    const std::vector<double> ya{1, 0}, yb{0, 1};
    const auto one = mixup(a, b, ya, yb, 1.0);
    CHECK(one.sample == a);
    CHECK(one.label == ya);
    const auto half = mixup(a, b, ya, yb, 0.5);
    CHECK(half.sample.values()[0] == 0.5f);
    CHECK(half.label == std::vector<double>{0.5, 0.5});
    CHECK_THROWS_AS(mixup(a, b, ya, yb, 1.2), InvalidArgument);
    CHECK_THROWS_AS(mixup(a, Sample(Shape{1, 1, 2}), ya, yb, 0.5), InvalidArgument);

    Rng rng(14);
    const Sample x = random_sample(rng, {2, 3, 3}), y = random_sample(rng, {2, 3, 3});
    for (int i = 0; i <= 20; ++i) {
        const double lam = i / 20.0;
        const auto r = mixup(x, y, ya, yb, lam);
        for (std::size_t p = 0; p < x.size(); ++p) {
            const double want = lam * x.values()[p] + (1 - lam) * y.values()[p];
            CHECK(std::abs(r.sample.values()[p] - want) <= 1e-7);
        }
    }
}

TEST_CASE("cutmixup selection frequencies") {
    Rng rng(15), replay(15);
    std::map<MixChoice, int> counts;
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) {
        const auto c = cutmixup_select(rng);
        ++counts[c];
        if (i < 1000) CHECK(cutmixup_select(replay) == c);
    }
    CHECK(std::abs(counts[MixChoice::CutMix] / double(draws) - 0.5) < 0.005);
    CHECK(std::abs(counts[MixChoice::MixUp] / double(draws) - 0.4) < 0.005);
    CHECK(std::abs(counts[MixChoice::None] / double(draws) - 0.1) < 0.005);
}

TEST_CASE("mixing keeps batch labels row-stochastic") {
    Rng rng(16);
    const Shape s{1, 4, 4};
    const auto ds = labeled_dataset(rng, 20, 4, s);
    const auto store = store_for(ds);
    const auto index = build_neighborhoods(store, 3);
    std::vector<std::uint32_t> labels;
    for (const auto& x : ds) labels.push_back(static_cast<std::uint32_t>(*x.label));
    const auto table = soft_labels(index, labels, 4);
    const auto adapter = oracle_adapter(s);
    AugmentationPolicy policy;
    policy.p_g = 0.5;
    policy.k = 3;
    policy.mixing = MixingConfig{};
    const std::vector<std::uint32_t> ids{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::set<MixChoice> seen;
    for (std::uint64_t i = 0; i < 60; ++i) {
        auto st = AugmentStreams::derive(1, 0, i);
        const auto batch = da_icgan_augment_batch(ids, ds, policy, &adapter, store, &table, 4, st);
        REQUIRE(batch.mixing.has_value());
        seen.insert(*batch.mixing);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            double sum = 0;
            for (double v : batch.label(b)) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
    CHECK(seen.size() == 3);
}

TEST_CASE("policy JSON: defaults, round trip, validation") {
    auto j = nlohmann::json::parse(R"({"p_g": 0.5, "pipeline_real": [{"kind": "hflip", "p": 0.5}]})");
    const auto p = policy_from_json(j);
    CHECK(p.pipeline_generated == p.pipeline_real);
    CHECK(p.k == kDefaultNeighborhoodSize);
    CHECK(*p.truncation.sigma == kInstanceConditionedSigma);
    CHECK(policy_from_json(to_json(p)).pipeline_real == p.pipeline_real);

    auto with_threshold = nlohmann::json::parse(R"({"p_g": 0.5, "fid_threshold": 150, "truncation": null})");
    const auto q = policy_from_json(with_threshold);
    CHECK(q.allowed_classes.has_value());
    CHECK_FALSE(q.truncation.enabled());

    CHECK_THROWS_AS(policy_from_json(nlohmann::json::parse(R"({"p_g": 1.3})")), InvalidArgument);
    CHECK_THROWS_AS(policy_from_json(nlohmann::json::parse(R"({"p_G": 0.3})")), InvalidArgument);
}
