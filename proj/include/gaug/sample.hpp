#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gaug {

/// Channels-first sample shape.
struct Shape {
    int channels = 0;
    int height = 0;
    int width = 0;

    std::size_t numel() const {
        return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
               static_cast<std::size_t>(width);
    }
    bool operator==(const Shape&) const = default;
};

/// Dense C×H×W float array. Values of dataset samples live in [0,1].
class Sample {
public:
    Sample() = default;
    explicit Sample(Shape shape, float fill = 0.0f);
    Sample(Shape shape, std::vector<float> values);

    const Shape& shape() const { return shape_; }
    int channels() const { return shape_.channels; }
    int height() const { return shape_.height; }
    int width() const { return shape_.width; }
    std::size_t size() const { return data_.size(); }

    float& at(int c, int y, int x) { return data_[offset(c, y, x)]; }
    float at(int c, int y, int x) const { return data_[offset(c, y, x)]; }

    std::span<float> values() { return data_; }
    std::span<const float> values() const { return data_; }
    std::vector<float>& raw() { return data_; }
    const std::vector<float>& raw() const { return data_; }

    bool all_finite() const;
    void clamp01();

    bool operator==(const Sample&) const = default;

private:
    std::size_t offset(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * static_cast<std::size_t>(shape_.height) +
                static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(shape_.width) +
               static_cast<std::size_t>(x);
    }

    Shape shape_{};
    std::vector<float> data_;
};

/// A dataset entry. Ids are positions in the owning dataset.
struct Instance {
    std::uint32_t id = 0;
    Sample sample;
    std::optional<int> label;
};

using Dataset = std::vector<Instance>;

/// Throws unless ids are 0..N-1 in order, samples are finite, and labels are all-or-none.
void validate_dataset(const Dataset& dataset);

/// Number of classes implied by the labels (max label + 1), 0 if unlabeled.
int infer_num_classes(const Dataset& dataset);

}  // namespace gaug
