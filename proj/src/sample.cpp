#include "gaug/sample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaug/error.hpp"

namespace gaug {

Sample::Sample(Shape shape, float fill) : shape_(shape), data_(shape.numel(), fill) {
    if (shape.channels <= 0 || shape.height <= 0 || shape.width <= 0) {
        throw InvalidArgument("sample shape must be positive in every axis");
    }
}

Sample::Sample(Shape shape, std::vector<float> values) : shape_(shape), data_(std::move(values)) {
    if (shape.channels <= 0 || shape.height <= 0 || shape.width <= 0) {
        throw InvalidArgument("sample shape must be positive in every axis");
    }
    if (data_.size() != shape.numel()) {
        throw InvalidArgument("sample data size " + std::to_string(data_.size()) +
                              " does not match shape volume " + std::to_string(shape.numel()));
    }
}

bool Sample::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

void Sample::clamp01() {
    for (float& v : data_) v = std::clamp(v, 0.0f, 1.0f);
}

void validate_dataset(const Dataset& dataset) {
    if (dataset.empty()) throw InvalidArgument("dataset is empty");
    const bool labeled = dataset.front().label.has_value();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Instance& inst = dataset[i];
        if (inst.id != i) {
            throw InvalidArgument("instance at position " + std::to_string(i) + " has id " +
                                  std::to_string(inst.id));
        }
        if (inst.label.has_value() != labeled) {
            throw InvalidArgument("labels must be present for all instances or for none (id " +
                                  std::to_string(i) + ")");
        }
        if (inst.label && *inst.label < 0) {
            throw InvalidArgument("negative label at id " + std::to_string(i));
        }
        if (!inst.sample.all_finite()) {
            throw InvalidArgument("non-finite sample at id " + std::to_string(i));
        }
    }
}

int infer_num_classes(const Dataset& dataset) {
    int classes = 0;
    for (const auto& inst : dataset) {
        if (inst.label) classes = std::max(classes, *inst.label + 1);
    }
    return classes;
}

}  // namespace gaug
