#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace ayn {

/// Dense row-major array of 64-bit floats with an optional gradient
/// buffer of the same shape. This is the substrate every model
/// component operates on; learnable tensors carry an engaged grad.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::optional<std::vector<double>> grad;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor vector(std::initializer_list<double> values);
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Tensor scalar(double value);
    static Tensor identity(std::size_t n);

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    bool is_vector() const { return shape.size() == 1; }
    bool is_scalar() const { return data.size() == 1 && shape.size() <= 1; }
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }

    double& at(std::size_t r, std::size_t c) { return data[r * shape.at(1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * shape.at(1) + c]; }

    /// Allocate (or re-zero) the gradient buffer.
    void ensure_grad();
    void zero_grad();
    bool has_grad() const { return grad.has_value(); }

    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

/// Throws Error("invalid-value") unless every entry of t is finite.
void require_finite(const Tensor& t, const std::string& context);

}  // namespace ayn
