#include "ayn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "ayn/error.hpp"

namespace ayn {

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (shape_numel(shape) != data.size()) {
        throw Error("shape", "tensor data length " + std::to_string(data.size()) +
                                 " does not match shape " + shape_to_string(shape));
    }
    for (std::size_t extent : shape) {
        if (extent == 0) {
            throw Error("shape", "zero extent in shape " + shape_to_string(shape));
        }
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::vector<double> data(shape_numel(shape), 0.0);
    return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::vector(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::identity(std::size_t n) {
    Tensor t = zeros({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data[i * n + i] = 1.0;
    return t;
}

void Tensor::ensure_grad() {
    if (!grad) {
        grad.emplace(data.size(), 0.0);
    } else if (grad->size() != data.size()) {
        grad->assign(data.size(), 0.0);
    }
}

void Tensor::zero_grad() {
    ensure_grad();
    std::fill(grad->begin(), grad->end(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t extent : shape) n *= extent;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << 'x';
        out << shape[i];
    }
    out << ']';
    return out.str();
}

void require_finite(const Tensor& t, const std::string& context) {
    if (!t.all_finite()) {
        throw Error("invalid-value", context + ": non-finite value in tensor");
    }
}

}  // namespace ayn
