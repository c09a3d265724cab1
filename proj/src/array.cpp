#include "frostnet/array.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace frostnet {

std::string shape_to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << " x ";
        out << shape[i];
    }
    out << ']';
    return out.str();
}

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

NumericArray::NumericArray(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
    if (std::find(shape_.begin(), shape_.end(), std::size_t{0}) != shape_.end())
        throw std::invalid_argument("array shape " + shape_to_string(shape_) +
                                    " has a zero dimension");
}

NumericArray::NumericArray(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (shape_size(shape_) != data_.size())
        throw std::invalid_argument("array shape " + shape_to_string(shape_) + " holds " +
                                    std::to_string(shape_size(shape_)) + " values, got " +
                                    std::to_string(data_.size()));
}

NumericArray NumericArray::vector(std::initializer_list<double> values) {
    return NumericArray({values.size()}, std::vector<double>(values));
}

NumericArray NumericArray::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) throw std::invalid_argument("matrix needs at least one row");
    const std::size_t cols = rows.begin()->size();
    std::vector<double> flat;
    flat.reserve(rows.size() * cols);
    for (const auto& row : rows) {
        if (row.size() != cols) throw std::invalid_argument("ragged matrix literal");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return NumericArray({rows.size(), cols}, std::move(flat));
}

std::size_t NumericArray::dim(std::size_t axis) const {
    if (axis >= shape_.size())
        throw std::out_of_range("axis " + std::to_string(axis) + " out of range for shape " +
                                shape_to_string(shape_));
    return shape_[axis];
}

NumericArray NumericArray::reshaped(Shape shape) const {
    return NumericArray(std::move(shape), data_);
}

void NumericArray::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

NumericArray& NumericArray::operator+=(const NumericArray& other) {
    if (shape_ != other.shape_)
        throw std::invalid_argument("cannot add " + shape_to_string(other.shape_) + " to " +
                                    shape_to_string(shape_));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

NumericArray& NumericArray::operator*=(double factor) {
    for (double& v : data_) v *= factor;
    return *this;
}

bool NumericArray::all_finite() const noexcept {
    // v - v is 0 for finite v and NaN otherwise; a plain sum vectorizes where isfinite does not.
    double probe = 0.0;
    for (double v : data_) probe += v - v;
    return probe == 0.0;
}

NumericArray operator+(NumericArray a, const NumericArray& b) { return a += b; }
NumericArray operator*(NumericArray a, double factor) { return a *= factor; }

void require_rank(const NumericArray& array, std::size_t expected, const std::string& what) {
    if (array.rank() != expected)
        throw std::invalid_argument(what + ": expected rank " + std::to_string(expected) +
                                    ", got shape " + shape_to_string(array.shape()));
}

void require_finite(const NumericArray& array, const std::string& what) {
    if (!array.all_finite()) throw std::domain_error(what + ": non-finite value");
}

}  // namespace frostnet
