#include "gaug/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gaug/error.hpp"

namespace gaug {

namespace {

void check_logits(const Eigen::MatrixXd& logits, std::size_t rows) {
    if (logits.rows() < 1) throw InvalidArgument("accuracy needs at least one row");
    if (logits.cols() < 2) throw InvalidArgument("accuracy needs at least two classes");
    if (static_cast<std::size_t>(logits.rows()) != rows) {
        throw InvalidArgument("logit rows differ from label count");
    }
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

std::size_t argmax_row(const Eigen::MatrixXd& logits, Eigen::Index row) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
        if (logits(row, c) > logits(row, best)) best = c;
    }
    return static_cast<std::size_t>(best);
}

double top1_accuracy(const Eigen::MatrixXd& logits, std::span<const int> labels) {
    check_logits(logits, labels.size());
    std::size_t correct = 0;
    for (std::size_t b = 0; b < labels.size(); ++b) {
        if (static_cast<int>(argmax_row(logits, static_cast<Eigen::Index>(b))) == labels[b]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double one_to_multi_accuracy(const Eigen::MatrixXd& logits, std::span<const std::set<int>> label_sets) {
    check_logits(logits, label_sets.size());
    std::size_t correct = 0;
    for (std::size_t b = 0; b < label_sets.size(); ++b) {
        if (label_sets[b].empty()) throw InvalidArgument("empty label set at row " + std::to_string(b));
        const int pred = static_cast<int>(argmax_row(logits, static_cast<Eigen::Index>(b)));
        if (label_sets[b].count(pred)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(label_sets.size());
}

std::map<int, double> per_class_accuracy(const Eigen::MatrixXd& logits, std::span<const int> labels) {
    check_logits(logits, labels.size());
    std::map<int, std::pair<std::size_t, std::size_t>> tally;  // correct, total
    for (std::size_t b = 0; b < labels.size(); ++b) {
        auto& t = tally[labels[b]];
        if (static_cast<int>(argmax_row(logits, static_cast<Eigen::Index>(b))) == labels[b]) ++t.first;
        ++t.second;
    }
    std::map<int, double> out;
    for (const auto& [cls, t] : tally) out[cls] = static_cast<double>(t.first) / static_cast<double>(t.second);
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgument("quantile of an empty set");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must be in [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double top_k_ris(std::span<const Eigen::MatrixXd> objects, std::size_t top_k, double firing_quantile) {
    if (objects.empty()) throw InvalidArgument("RIS needs at least one object");
    const Eigen::Index d = objects.front().cols();
    if (d < 1) throw InvalidArgument("RIS needs at least one feature");
    for (const auto& o : objects) {
        if (o.rows() < 2) throw InvalidArgument("RIS needs at least two transformed rows per object");
        if (o.cols() != d) throw InvalidArgument("RIS objects differ in feature dimension");
    }
    if (top_k < 1) throw InvalidArgument("RIS top-K must be >= 1");

    std::vector<double> threshold(static_cast<std::size_t>(d));
    for (Eigen::Index f = 0; f < d; ++f) {
        std::vector<double> pooled;
        for (const auto& o : objects)
            for (Eigen::Index r = 0; r < o.rows(); ++r) pooled.push_back(o(r, f));
        threshold[static_cast<std::size_t>(f)] = quantile(std::move(pooled), firing_quantile);
    }

    const std::size_t keep = std::min(top_k, static_cast<std::size_t>(d));
    double total = 0.0;
    for (const auto& o : objects) {
        std::vector<std::size_t> fires(static_cast<std::size_t>(d), 0);
        for (Eigen::Index f = 0; f < d; ++f)
            for (Eigen::Index r = 0; r < o.rows(); ++r)
                if (o(r, f) >= threshold[static_cast<std::size_t>(f)]) ++fires[static_cast<std::size_t>(f)];
        std::vector<std::size_t> order(static_cast<std::size_t>(d));
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fires[a] > fires[b]; });
        std::size_t fired = 0;
        for (std::size_t i = 0; i < keep; ++i) fired += fires[order[i]];
        total += static_cast<double>(fired) / (static_cast<double>(keep) * static_cast<double>(o.rows()));
    }
    return total / static_cast<double>(objects.size());
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

Correlation correlate(const std::map<int, double>& x, const std::map<int, double>& y) {
    std::vector<double> xs, ys;
    for (const auto& [key, value] : x) {
        auto it = y.find(key);
        if (it == y.end()) continue;
        xs.push_back(value);
        ys.push_back(it->second);
    }
    if (xs.size() < 3) {
        throw InvalidArgument("correlate needs at least 3 shared keys, got " + std::to_string(xs.size()));
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw InvalidArgument("correlate: non-finite value");
    }
    Correlation c;
    c.pearson = pearson(xs, ys);
    c.spearman = pearson(average_ranks(xs), average_ranks(ys));
    return c;
}

}  // namespace gaug
