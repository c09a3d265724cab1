#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace frostnet {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array of doubles with an explicit shape (rank 1 to 3 in practice).
class NumericArray {
public:
    NumericArray() = default;
    explicit NumericArray(Shape shape, double fill = 0.0);
    NumericArray(Shape shape, std::vector<double> values);

    static NumericArray vector(std::initializer_list<double> values);
    static NumericArray matrix(std::initializer_list<std::initializer_list<double>> rows);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    /// Same data, new shape; element count must match.
    NumericArray reshaped(Shape shape) const;

    void fill(double value);
    NumericArray& operator+=(const NumericArray& other);
    NumericArray& operator*=(double factor);

    bool all_finite() const noexcept;

    friend bool operator==(const NumericArray& a, const NumericArray& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    Shape shape_;
    std::vector<double> data_;
};

NumericArray operator+(NumericArray a, const NumericArray& b);
NumericArray operator*(NumericArray a, double factor);

/// Throws std::invalid_argument naming `what` when `array` does not have `expected` rank.
void require_rank(const NumericArray& array, std::size_t expected, const std::string& what);
/// Throws std::domain_error when any element is NaN or infinite.
void require_finite(const NumericArray& array, const std::string& what);

}  // namespace frostnet
