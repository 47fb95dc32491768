#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "faceattr/error.hpp"

namespace faceattr {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

inline std::size_t shape_volume(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

/// Dense row-major n-dimensional array.
///
/// Training runs in 32-bit (`Tensor`), gradient verification in 64-bit
/// (`TensorD`). Extents are positive except that a leading batch extent of 0
/// is allowed to represent an empty batch.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;

    explicit BasicTensor(Shape shape, T fill = T{})
        : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {}

    BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_volume(shape_) != data_.size()) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string(shape_));
        }
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    const T& at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    T& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    const T& at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    /// Same data under a new shape of equal volume.
    BasicTensor reshaped(Shape shape) const& { return BasicTensor(std::move(shape), data_); }
    BasicTensor reshaped(Shape shape) && { return BasicTensor(std::move(shape), std::move(data_)); }

    /// Copy of slice `index` along the leading axis.
    BasicTensor slice(std::size_t index) const {
        Shape inner(shape_.begin() + 1, shape_.end());
        const std::size_t n = shape_volume(inner);
        auto first = data_.begin() + static_cast<std::ptrdiff_t>(index * n);
        return BasicTensor(std::move(inner), std::vector<T>(first, first + static_cast<std::ptrdiff_t>(n)));
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
    }

    template <typename U>
    BasicTensor<U> cast() const {
        return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

    BasicTensor& operator+=(const BasicTensor& other) {
        require_same_shape(other, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }

    BasicTensor& operator*=(T scale) {
        for (auto& v : data_) v *= scale;
        return *this;
    }

    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

    void require_same_shape(const BasicTensor& other, const char* context) const {
        if (shape_ != other.shape_) {
            throw ShapeError(std::string(context) + ": shape " + shape_string(shape_) + " vs " +
                             shape_string(other.shape_));
        }
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Stacks equally shaped tensors along a new leading axis.
template <typename T>
BasicTensor<T> stack(std::span<const BasicTensor<T>> items, const Shape& item_shape) {
    Shape shape{items.size()};
    shape.insert(shape.end(), item_shape.begin(), item_shape.end());
    std::vector<T> data;
    data.reserve(shape_volume(shape));
    for (const auto& item : items) {
        if (item.shape() != item_shape) {
            throw ShapeError("stack: item shape " + shape_string(item.shape()) + ", expected " +
                             shape_string(item_shape));
        }
        data.insert(data.end(), item.values().begin(), item.values().end());
    }
    return BasicTensor<T>(std::move(shape), std::move(data));
}

} // namespace faceattr
