#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "tsf/errors.hpp"

namespace tsf {

using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Trailing-dimension broadcast: shapes are right-aligned, extents must match
// or be 1. Throws ShapeError when they cannot be reconciled.
Shape broadcast_shape(const Shape& a, const Shape& b);

// Dense row-major 64-bit real array. `grad` is empty unless the tensor has
// been prepared for differentiation (see ensure_grad); when present it always
// matches `data` in length.
struct Tensor {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;

    Tensor() = default;
    Tensor(Shape s, std::vector<double> values);

    static Tensor zeros(Shape s);
    static Tensor full(Shape s, double value);
    static Tensor scalar(double value);
    static Tensor row(std::initializer_list<double> values);

    std::size_t numel() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }

    void ensure_grad();
    void zero_grad();
    bool tracks_grad() const { return !grad.empty(); }

    bool all_finite() const;

    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }
};

}  // namespace tsf
