#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "gaug/fid.hpp"
#include "gaug/metrics.hpp"
#include "gaug/report.hpp"
#include "oracles.hpp"

using namespace gaug;

namespace {

Eigen::MatrixXd gaussian_draws(Rng& rng, int n, const Eigen::VectorXd& mean, double std) {
    Eigen::MatrixXd m(n, mean.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < mean.size(); ++j) m(i, j) = mean(j) + std * standard_normal(rng);
    return m;
}

// Denman-Beavers iteration for the principal square root.
Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& a) {
    Eigen::MatrixXd y = a, z = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    for (int i = 0; i < 100; ++i) {
        const Eigen::MatrixXd yi = y.inverse(), zi = z.inverse();
        y = 0.5 * (y + zi);
        z = 0.5 * (z + yi);
    }
    return y;
}

double fid_oracle(const GaussianStats& a, const GaussianStats& b) {
    return (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() -
           2.0 * sqrtm(a.covariance * b.covariance).trace();
}

GaussianStats stats(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) { return {mean, cov, 100}; }

Eigen::MatrixXd random_spd(Rng& rng, int d) {
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = standard_normal(rng);
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

Eigen::MatrixXd random_logits(Rng& rng, int b, int c) {
    Eigen::MatrixXd m(b, c);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = static_cast<double>(uniform_int(rng, 0, 4));  // ties on purpose
    return m;
}

std::size_t brute_argmax(const Eigen::MatrixXd& m, int row) {
    std::size_t best = 0;
    for (int c = 1; c < m.cols(); ++c)
        if (m(row, c) > m(row, static_cast<int>(best))) best = static_cast<std::size_t>(c);
    return best;
}

}  // namespace

TEST_CASE("gaussian_stats examples") {
    Eigen::MatrixXd two(2, 2);
    two << 0, 0, 2, 0;
    const auto s = gaussian_stats(two);
    CHECK(s.mean(0) == 1.0);
    CHECK(s.mean(1) == 0.0);
    CHECK(s.covariance(0, 0) == 2.0);
    CHECK(s.covariance(0, 1) == 0.0);
    CHECK(s.covariance(1, 1) == 0.0);
    CHECK(s.count == 2);

    const auto same = gaussian_stats(Eigen::MatrixXd::Constant(5, 3, 0.7));
    CHECK(same.covariance.isZero(0.0));
    CHECK_THROWS_AS(gaussian_stats(Eigen::MatrixXd::Zero(1, 3)), InvalidArgument);
}

TEST_CASE("gaussian_stats matches the two-pass formula") {
    Rng rng(1);
    Eigen::MatrixXd x(500, 8);
    for (int i = 0; i < 500; ++i)
        for (int j = 0; j < 8; ++j) x(i, j) = standard_normal(rng) * (j + 1) + j;
    const auto s = gaussian_stats(x);
    for (int a = 0; a < 8; ++a) {
        double m = 0;
        for (int i = 0; i < 500; ++i) m += x(i, a);
        m /= 500;
        CHECK(std::abs(s.mean(a) - m) < 1e-12);
        for (int b = 0; b < 8; ++b) {
            double mb = 0, c = 0;
            for (int i = 0; i < 500; ++i) mb += x(i, b);
            mb /= 500;
            for (int i = 0; i < 500; ++i) c += (x(i, a) - m) * (x(i, b) - mb);
            c /= 499;
            CHECK(std::abs(s.covariance(a, b) - c) < 1e-10);
        }
    }
}

TEST_CASE("fid closed-form examples") {
    const Eigen::Vector2d zero(0, 0), shifted(3, 4);
    const auto a = stats(zero, Eigen::Matrix2d::Identity());
    const auto b = stats(shifted, 4.0 * Eigen::Matrix2d::Identity());
    CHECK(fid(a, a) == 0.0);
    CHECK(std::abs(fid(a, b) - 27.0) < 1e-10);
    CHECK(std::abs(fid(b, a) - 27.0) < 1e-10);
    CHECK_THROWS_AS(fid(a, stats(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity())), InvalidArgument);
}

TEST_CASE("fid matches a Denman-Beavers oracle on random covariances") {
    Rng rng(2);
    for (int t = 0; t < 30; ++t) {
        const int d = uniform_int(rng, 1, 8);
        Eigen::VectorXd ma(d), mb(d);
        for (int i = 0; i < d; ++i) {
            ma(i) = standard_normal(rng);
            mb(i) = standard_normal(rng);
        }
        const auto a = stats(ma, random_spd(rng, d));
        const auto b = stats(mb, random_spd(rng, d));
        const double want = fid_oracle(a, b);
        CHECK(std::abs(fid(a, b) - want) <= 1e-8 * std::max(1.0, want));
        CHECK(std::abs(fid(a, b) - fid(b, a)) <= 1e-8 * std::max(1.0, want));
        CHECK(fid(a, b) >= 0.0);
    }
}

TEST_CASE("fid of sample statistics approaches the closed form") {
    Rng rng(3);
    const auto a = gaussian_stats(gaussian_draws(rng, 10000, Eigen::Vector2d(0, 0), 1.0));
    const auto b = gaussian_stats(gaussian_draws(rng, 10000, Eigen::Vector2d(3, 4), 2.0));
    CHECK(std::abs(fid(a, b) / 27.0 - 1.0) < 0.05);
}

TEST_CASE("fid is invariant under a shared rotation") {
    Rng rng(4);
    const int d = 6;
    Eigen::MatrixXd xa(300, d), xb(300, d);
    for (int i = 0; i < 300; ++i)
        for (int j = 0; j < d; ++j) {
            xa(i, j) = standard_normal(rng) * (1 + j);
            xb(i, j) = standard_normal(rng) + 0.3 * j;
        }
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = standard_normal(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    const double base = fid(gaussian_stats(xa), gaussian_stats(xb));
    const double rotated = fid(gaussian_stats(xa * q), gaussian_stats(xb * q));
    CHECK(std::abs(rotated - base) <= 1e-6 * base);
}

TEST_CASE("fid rejects strongly indefinite covariances") {
    Eigen::Matrix2d bad;
    bad << 1, 0, 0, -1;
    CHECK_THROWS_AS(fid(stats(Eigen::Vector2d::Zero(), bad), stats(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity())),
                    NumericalError);
}

namespace {

Dataset class_dataset(Rng& rng, int classes, int per_class, std::size_t dim) {
    Dataset ds;
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            Sample s(Shape{static_cast<int>(dim), 1, 1});
            for (auto& v : s.values()) v = static_cast<float>(0.1 * c + 0.05 * uniform01(rng));
            ds.push_back({static_cast<std::uint32_t>(ds.size()), s, c});
        }
    return ds;
}

Extractor flat_features() {
    return [](const Sample& s) {
        std::vector<float> v(s.values().begin(), s.values().end());
        v.push_back(1.0f);
        return v;
    };
}

}  // namespace

TEST_CASE("per_class_fid with an identity generator is zero everywhere") {
    Rng rng(5);
    const auto ds = class_dataset(rng, 4, 30, 3);
    const auto store = extract_embeddings(ds, flat_features());
    GeneratorAdapter identity;
    identity.latent_dim = 1;
    identity.conditioning_dim = 4;
    identity.output_shape = {3, 1, 1};
    identity.fn = [](std::span<const double>, std::span<const float> h, std::optional<int>) {
        return Sample(Shape{3, 1, 1}, std::vector<float>(h.begin(), h.begin() + 3));
    };
    const auto fids = per_class_fid(ds, store, identity, flat_features(), TruncationPolicy::at(1.0), rng);
    REQUIRE(fids.size() == 4);
    for (const auto& [cls, f] : fids) {
        REQUIRE(f.fid.has_value());
        CHECK(std::abs(*f.fid) < 1e-10);
        CHECK(f.real_count == 30);
        CHECK(f.generated_count == f.real_count);
    }
}

TEST_CASE("a noise class has the largest per-class FID; singletons are missing") {
    Rng rng(6);
    auto ds = class_dataset(rng, 5, 40, 3);
    Sample lonely(Shape{3, 1, 1}, 0.5f);
    ds.push_back({static_cast<std::uint32_t>(ds.size()), lonely, 5});
    const auto store = extract_embeddings(ds, flat_features());
    GeneratorAdapter g;
    g.latent_dim = 3;
    g.conditioning_dim = 4;
    g.class_conditional = true;
    g.output_shape = {3, 1, 1};
    g.fn = [](std::span<const double> z, std::span<const float> h, std::optional<int> cls) {
        Sample s(Shape{3, 1, 1});
        for (int i = 0; i < 3; ++i)
            s.values()[i] = static_cast<float>(*cls == 2 ? 0.5 + 0.5 * z[i] : h[i] + 0.01 * z[i]);
        return s;
    };
    const auto fids = per_class_fid(ds, store, g, flat_features(), TruncationPolicy::at(1.0), rng);
    CHECK_FALSE(fids.at(5).fid.has_value());
    CHECK(fids.at(5).real_count == 1);
    for (int c = 0; c < 5; ++c)
        if (c != 2) CHECK(*fids.at(2).fid > *fids.at(c).fid);
}

TEST_CASE("top-1 accuracy, tie rule and enumeration") {
    Eigen::MatrixXd one_hot = Eigen::MatrixXd::Zero(3, 3);
    const std::vector<int> labels{2, 0, 1};
    for (int i = 0; i < 3; ++i) one_hot(i, labels[i]) = 1;
    CHECK(top1_accuracy(one_hot, labels) == 1.0);
    CHECK(top1_accuracy(Eigen::MatrixXd::Zero(4, 5), std::vector<int>(4, 0)) == 1.0);

    Rng rng(7);
    const auto logits = random_logits(rng, 1000, 6);
    std::vector<int> ys(1000);
    for (auto& y : ys) y = uniform_int(rng, 0, 5);
    int correct = 0;
    std::map<int, std::pair<int, int>> grouped;
    for (int i = 0; i < 1000; ++i) {
        const bool ok = brute_argmax(logits, i) == static_cast<std::size_t>(ys[i]);
        correct += ok;
        grouped[ys[i]].first += ok;
        ++grouped[ys[i]].second;
    }
    CHECK(top1_accuracy(logits, ys) == correct / 1000.0);
    const auto per = per_class_accuracy(logits, ys);
    for (const auto& [c, g] : grouped) CHECK(per.at(c) == static_cast<double>(g.first) / g.second);
}

TEST_CASE("per-class accuracy examples") {
    Eigen::MatrixXd logits(4, 2);
    logits << 0, 1, 0, 1, 0, 1, 0, 1;
    const auto per = per_class_accuracy(logits, std::vector<int>{0, 0, 1, 1});
    CHECK(per.at(0) == 0.0);
    CHECK(per.at(1) == 1.0);
    CHECK(per.size() == 2);
}

TEST_CASE("one-to-multi accuracy") {
    Rng rng(8);
    const auto logits = random_logits(rng, 1000, 5);
    std::vector<int> ys(1000);
    std::vector<std::set<int>> singletons, all, random_sets;
    int correct = 0;
    for (int i = 0; i < 1000; ++i) {
        ys[i] = uniform_int(rng, 0, 4);
        singletons.push_back({ys[i]});
        all.push_back({0, 1, 2, 3, 4});
        std::set<int> s;
        for (int c = 0; c < 5; ++c)
            if (bernoulli(rng, 0.4)) s.insert(c);
        if (s.empty()) s.insert(uniform_int(rng, 0, 4));
        correct += s.count(static_cast<int>(brute_argmax(logits, i)));
        random_sets.push_back(s);
    }
    CHECK(one_to_multi_accuracy(logits, singletons) == top1_accuracy(logits, ys));
    CHECK(one_to_multi_accuracy(logits, all) == 1.0);
    CHECK(one_to_multi_accuracy(logits, random_sets) == correct / 1000.0);
    random_sets[3].clear();
    CHECK_THROWS_AS(one_to_multi_accuracy(logits, random_sets), InvalidArgument);
}

TEST_CASE("RIS examples") {
    const std::vector<Eigen::MatrixXd> same(3, Eigen::MatrixXd::Constant(4, 10, 0.3));
    CHECK(top_k_ris(same, 25, 0.5) == 1.0);
    Rng rng(9);
    std::vector<Eigen::MatrixXd> objects;
    for (int o = 0; o < 3; ++o) objects.push_back(Eigen::MatrixXd::Random(5, 10));
    CHECK_NOTHROW(top_k_ris(objects, 25, 0.5));
    CHECK(top_k_ris(objects, 25, 0.5) == top_k_ris(objects, 10, 0.5));
    CHECK_THROWS_AS(top_k_ris(std::vector<Eigen::MatrixXd>{}, 25, 0.5), InvalidArgument);
    CHECK_THROWS_AS(top_k_ris(std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(1, 3)}, 25, 0.5), InvalidArgument);
}

TEST_CASE("RIS matches the definition on hand-specified and random rows") {
    std::vector<std::vector<std::vector<double>>> hand{{{1, 0, 3}, {2, 0, 1}}, {{0, 5, 2}, {1, 5, 2}}};
    std::vector<Eigen::MatrixXd> as_eigen;
    for (const auto& o : hand) {
        Eigen::MatrixXd m(static_cast<int>(o.size()), 3);
        for (std::size_t r = 0; r < o.size(); ++r)
            for (int f = 0; f < 3; ++f) m(static_cast<int>(r), f) = o[r][f];
        as_eigen.push_back(m);
    }
    CHECK(top_k_ris(as_eigen, 2, 0.5) == oracle::ris(hand, 2, 0.5));

    Rng rng(10);
    for (int t = 0; t < 20; ++t) {
        const int objs = uniform_int(rng, 1, 4), rows = uniform_int(rng, 2, 5), d = uniform_int(rng, 1, 6);
        const std::size_t K = static_cast<std::size_t>(uniform_int(rng, 1, 8));
        const double q = uniform01(rng);
        std::vector<std::vector<std::vector<double>>> ref(objs);
        std::vector<Eigen::MatrixXd> mats;
        for (int o = 0; o < objs; ++o) {
            Eigen::MatrixXd m(rows, d);
            for (int r = 0; r < rows; ++r) {
                std::vector<double> row;
                for (int f = 0; f < d; ++f) {
                    m(r, f) = uniform_int(rng, 0, 3);
                    row.push_back(m(r, f));
                }
                ref[o].push_back(row);
            }
            mats.push_back(m);
        }
        const double got = top_k_ris(mats, K, q);
        CHECK(got == oracle::ris(ref, K, q));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("quantile interpolates linearly") {
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({4, 1, 3}, 0.0) == 1.0);
    CHECK(quantile({4, 1, 3}, 1.0) == 4.0);
    CHECK_THROWS_AS(quantile({}, 0.5), InvalidArgument);
}

TEST_CASE("correlate examples") {
    std::map<int, double> x, y, down;
    for (int i = 0; i < 6; ++i) {
        x[i] = i * 1.5;
        y[i] = 2 * x[i] + 1;
        down[i] = -std::exp(x[i]);
    }
    const auto c = correlate(x, y);
    CHECK(*c.pearson == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*c.spearman == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*correlate(x, down).spearman == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_THROWS_AS(correlate({{0, 1.0}, {1, 2.0}}, {{0, 1.0}, {1, 2.0}, {2, 3.0}}), InvalidArgument);
    const auto flat = correlate(x, {{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}});
    CHECK_FALSE(flat.spearman.has_value());
    CHECK_FALSE(flat.pearson.has_value());
}

TEST_CASE("correlate matches a rank-then-Pearson oracle and ignores monotone maps") {
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        std::map<int, double> x, y, y_cubed;
        for (int k = 0; k < 60; ++k) {
            if (k < 50 || bernoulli(rng, 0.5)) x[k] = uniform_int(rng, 0, 20);
            if (k >= 5) y[k] = standard_normal(rng);
        }
        for (const auto& [k, v] : y) y_cubed[k] = v * v * v + 3;
        std::vector<double> xs, ys;
        for (const auto& [k, v] : x)
            if (y.count(k)) {
                xs.push_back(v);
                ys.push_back(y.at(k));
            }
        const auto c = correlate(x, y);
        CHECK(*c.pearson == doctest::Approx(oracle::pearson(xs, ys)).epsilon(1e-12));
        CHECK(*c.spearman == doctest::Approx(oracle::pearson(oracle::ranks(xs), oracle::ranks(ys))).epsilon(1e-12));
        CHECK(*correlate(x, y_cubed).spearman == doctest::Approx(*c.spearman).epsilon(1e-12));
    }
    const std::vector<double> tied{3, 1, 3, 2};
    CHECK(average_ranks(tied) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("metrics report serialization") {
    MetricsReport r;
    r.global["top1"] = 0.75;
    r.per_class[1] = {3, {{"top1", 1.0}, {"fid", std::nullopt}, {"nn_corruption", 0.25}}};
    r.per_class[0] = {5, {{"top1", 0.6}, {"fid", 12.5}, {"nn_corruption", 0.0}}};
    r.ris["hflip"] = 0.9;
    r.correlations["fid_vs_top1"] = Correlation{-0.5, std::nullopt};
    const auto j = r.to_json();
    CHECK(j["per_class"][0]["class"] == 0);
    CHECK(j["per_class"][1]["fid"].is_null());
    CHECK(j["correlations"]["fid_vs_top1"]["pearson"].is_null());
    const auto back = MetricsReport::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(r.per_class_csv() == "class,fid,nn_corruption,top1\n0,12.5,0,0.59999999999999998\n1,,0.25,1\n");

    r.global["bad"] = std::nan("");
    CHECK_THROWS(r.to_json());
}
