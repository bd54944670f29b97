#include "gaug/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gaug/metrics.hpp"

namespace gaug {

LinearClassifier::LinearClassifier(std::size_t input_dim, std::size_t num_classes)
    : input_dim_(input_dim), num_classes_(num_classes), params_(num_classes * input_dim + num_classes, 0.0) {
    if (input_dim == 0 || num_classes == 0) throw InvalidArgument("classifier dimensions must be positive");
}

Eigen::MatrixXd LinearClassifier::features(std::span<const Sample> xs) const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(input_dim_));
    for (std::size_t r = 0; r < xs.size(); ++r) {
        if (xs[r].size() != input_dim_) throw InvalidArgument("classifier input has the wrong size");
        const auto v = xs[r].values();
        for (std::size_t c = 0; c < input_dim_; ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
    return x;
}

Eigen::MatrixXd LinearClassifier::predict_logits(std::span<const Sample> xs) const {
    const auto C = static_cast<Eigen::Index>(num_classes_);
    const auto D = static_cast<Eigen::Index>(input_dim_);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(params_.data(), C, D);
    Eigen::Map<const Eigen::RowVectorXd> b(params_.data() + C * D, C);
    Eigen::MatrixXd logits = features(xs) * w.transpose();
    logits.rowwise() += b;
    return logits;
}

double LinearClassifier::loss_and_gradient(std::span<const Sample> xs, const Eigen::MatrixXd& targets,
                                           std::span<double> grad) const {
    if (grad.size() != params_.size()) throw InvalidArgument("gradient buffer has the wrong size");
    const auto C = static_cast<Eigen::Index>(num_classes_);
    const auto D = static_cast<Eigen::Index>(input_dim_);
    const Eigen::MatrixXd x = features(xs);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(params_.data(), C, D);
    Eigen::Map<const Eigen::RowVectorXd> b(params_.data() + C * D, C);
    Eigen::MatrixXd logits = x * w.transpose();
    logits.rowwise() += b;
    Eigen::MatrixXd g;
    const double loss = soft_cross_entropy(logits, targets, &g);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw(grad.data(), C, D);
    Eigen::Map<Eigen::RowVectorXd> gb(grad.data() + C * D, C);
    gw += g.transpose() * x;
    gb += g.colwise().sum();
    return loss;
}

nlohmann::json LinearClassifier::to_json() const {
    return {{"format", "gaug-linear-classifier"},
            {"version", 1},
            {"input_dim", input_dim_},
            {"num_classes", num_classes_},
            {"params", params_}};
}

LinearClassifier LinearClassifier::from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != "gaug-linear-classifier" || j.value("version", 0) != 1) {
        throw InvalidArgument("not a linear classifier checkpoint");
    }
    LinearClassifier m(j.at("input_dim").get<std::size_t>(), j.at("num_classes").get<std::size_t>());
    auto p = j.at("params").get<std::vector<double>>();
    if (p.size() != m.params_.size()) throw InvalidArgument("classifier checkpoint has the wrong parameter count");
    m.params_ = std::move(p);
    return m;
}

void save_classifier(const LinearClassifier& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << model.to_json().dump() << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

LinearClassifier load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("classifier checkpoint is not valid JSON: ") + e.what());
    }
    return LinearClassifier::from_json(j);
}

double soft_cross_entropy(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets,
                          Eigen::MatrixXd* grad_logits) {
    if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
        throw InvalidArgument("logits and targets differ in shape");
    }
    if (logits.rows() == 0) throw InvalidArgument("empty batch");
    const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    const Eigen::MatrixXd shifted = logits.colwise() - row_max;
    const Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log().matrix();
    const Eigen::MatrixXd log_p = shifted.colwise() - lse;
    const double n = static_cast<double>(logits.rows());
    const double loss = -(targets.array() * log_p.array()).sum() / n;
    if (grad_logits) *grad_logits = (log_p.array().exp().matrix() - targets) / n;
    return loss;
}

Eigen::MatrixXd smooth_labels(const Eigen::MatrixXd& targets, double smoothing) {
    if (!(smoothing >= 0.0 && smoothing < 1.0)) throw InvalidArgument("label smoothing must be in [0,1)");
    const double c = static_cast<double>(targets.cols());
    return ((1.0 - smoothing) * targets.array() + smoothing / c).matrix();
}

double learning_rate_at(const TrainingConfig& cfg, int epoch) {
    double lr = cfg.learning_rate * static_cast<double>(cfg.batch_size) / static_cast<double>(cfg.reference_batch);
    for (int m : cfg.lr_milestones) {
        if (m <= epoch) lr *= cfg.lr_decay;
    }
    return lr;
}

SgdMomentum::SgdMomentum(std::size_t n, double momentum, double weight_decay)
    : momentum_(momentum), weight_decay_(weight_decay), velocity_(n, 0.0) {}

void SgdMomentum::step(std::span<double> params, std::span<const double> grad, double lr) {
    if (params.size() != velocity_.size() || grad.size() != velocity_.size()) {
        throw InvalidArgument("optimizer size mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i] + weight_decay_ * params[i];
        velocity_[i] = momentum_ * velocity_[i] + g;
        params[i] -= lr * velocity_[i];
    }
}

std::vector<int> labels_of(const Dataset& dataset) {
    std::vector<int> out;
    out.reserve(dataset.size());
    for (const auto& inst : dataset) {
        if (!inst.label) throw InvalidArgument("dataset is unlabeled");
        out.push_back(*inst.label);
    }
    return out;
}

std::vector<Sample> samples_of(const Dataset& dataset) {
    std::vector<Sample> out;
    out.reserve(dataset.size());
    for (const auto& inst : dataset) out.push_back(inst.sample);
    return out;
}

std::vector<EpochRecord> train_classifier(ClassifierAdapter& model, const TrainInputs& inputs,
                                          const AugmentationPolicy& policy, const TrainingConfig& cfg) {
    if (!inputs.train || inputs.train->empty()) throw InvalidArgument("training set is empty");
    if (inputs.num_classes != model.num_classes()) throw InvalidArgument("class count differs from the model");
    const bool generative = policy.p_g > 0.0;
    if (generative && (!inputs.generator || !inputs.store)) {
        throw InvalidArgument("p_g > 0 needs a generator and an embedding store");
    }
    const auto& train = *inputs.train;
    const std::size_t n = train.size();
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

    std::optional<std::vector<Sample>> test_x;
    std::vector<int> test_y;
    if (inputs.test && !inputs.test->empty()) {
        test_x = samples_of(*inputs.test);
        test_y = labels_of(*inputs.test);
    }

    SgdMomentum opt(model.parameters().size(), cfg.momentum, cfg.weight_decay);
    std::vector<double> grad(model.parameters().size());
    std::vector<std::uint32_t> order(n);
    std::vector<EpochRecord> records;
    std::uint64_t batch_counter = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.learning_rate = learning_rate_at(cfg, epoch);
        std::iota(order.begin(), order.end(), 0u);
        Rng shuffle_rng(derive_seed(cfg.seed, 0x5e11, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t seen = 0;
        std::size_t batch_in_epoch = 0;
        for (std::size_t start = 0; start < n; start += bs, ++batch_in_epoch, ++batch_counter) {
            const std::span<const std::uint32_t> ids(order.data() + start, std::min(bs, n - start));
            auto streams = AugmentStreams::derive(cfg.seed, 0, batch_counter);
            LabeledBatch batch = inputs.store
                                     ? da_icgan_augment_batch(ids, train, policy, inputs.generator, *inputs.store,
                                                              inputs.soft_labels, inputs.num_classes, streams)
                                     : plain_batch(ids, train, policy.pipeline_real, inputs.num_classes, streams.transform);
            const auto B = static_cast<Eigen::Index>(batch.size());
            const auto C = static_cast<Eigen::Index>(inputs.num_classes);
            Eigen::MatrixXd targets(B, C);
            for (Eigen::Index b = 0; b < B; ++b) {
                const auto row = batch.label(static_cast<std::size_t>(b));
                for (Eigen::Index c = 0; c < C; ++c) targets(b, c) = row[static_cast<std::size_t>(c)];
            }
            if (cfg.label_smoothing > 0.0) targets = smooth_labels(targets, cfg.label_smoothing);

            std::fill(grad.begin(), grad.end(), 0.0);
            const double loss = model.loss_and_gradient(batch.samples, targets, grad);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "non-finite training loss at epoch " << epoch << " batch " << batch_in_epoch;
                throw TrainingError(msg.str());
            }
            const Eigen::MatrixXd logits = model.predict_logits(batch.samples);
            for (Eigen::Index b = 0; b < B; ++b) {
                Eigen::Index t = 0;
                targets.row(b).maxCoeff(&t);
                if (argmax_row(logits, b) == static_cast<std::size_t>(t)) ++correct;
            }
            opt.step(model.parameters(), grad, rec.learning_rate);
            loss_sum += loss * static_cast<double>(B);
            seen += static_cast<std::size_t>(B);
            rec.generated += static_cast<std::size_t>(std::count(batch.augmented_mask.begin(), batch.augmented_mask.end(), true));
            if (batch.mixing && *batch.mixing != MixChoice::None) ++rec.mixed_batches;
        }
        rec.loss = loss_sum / static_cast<double>(seen);
        rec.train_top1 = static_cast<double>(correct) / static_cast<double>(seen);
        if (test_x) rec.test_top1 = top1_accuracy(model.predict_logits(*test_x), test_y);
        records.push_back(rec);
    }
    return records;
}

}  // namespace gaug
