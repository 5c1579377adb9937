#include "ayn/math.hpp"

#include <algorithm>
#include <cmath>

#include "ayn/error.hpp"

namespace ayn {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Tensor apply_nonlinearity(Nonlinearity kind, const Tensor& x) {
    require_finite(x, "apply_nonlinearity");
    Tensor out = x;
    out.grad.reset();
    for (double& v : out.data) {
        v = kind == Nonlinearity::sigmoid ? sigmoid(v) : std::tanh(v);
    }
    return out;
}

Tensor l2_normalize(const Tensor& x) {
    if (!x.is_vector()) {
        throw Error("shape", "l2_normalize expects a vector, got " + shape_to_string(x.shape));
    }
    double sq = 0.0;
    for (double v : x.data) sq += v * v;
    Tensor out = x;
    out.grad.reset();
    double norm = std::sqrt(sq);
    if (norm < 1e-12) {
        std::fill(out.data.begin(), out.data.end(), 0.0);
        return out;
    }
    for (double& v : out.data) v /= norm;
    return out;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - m);
        denom += probs[i];
    }
    for (double& p : probs) p /= denom;
    return probs;
}

double cross_entropy_value(const Tensor& logits, std::size_t target) {
    if (!logits.is_vector()) {
        throw Error("shape", "cross_entropy expects a logit vector");
    }
    if (target >= logits.numel()) {
        throw Error("range", "cross_entropy target index " + std::to_string(target) +
                                 " out of range for " + std::to_string(logits.numel()) + " classes");
    }
    double m = *std::max_element(logits.data.begin(), logits.data.end());
    double sum = 0.0;
    for (double v : logits.data) sum += std::exp(v - m);
    return m + std::log(sum) - logits.data[target];
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw Error("shape", "dot: length mismatch " + std::to_string(a.size()) + " vs " +
                                 std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Tensor matvec_value(const Tensor& w, const Tensor& v) {
    if (w.rank() != 2 || !v.is_vector() || w.cols() != v.numel()) {
        throw Error("shape", "matvec_value: " + shape_to_string(w.shape) + " times " + shape_to_string(v.shape));
    }
    const std::size_t m = w.rows();
    const std::size_t n = w.cols();
    Tensor out = Tensor::zeros({m});
    for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        const double* wr = w.data.data() + r * n;
        for (std::size_t c = 0; c < n; ++c) acc += wr[c] * v.data[c];
        out.data[r] = acc;
    }
    return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    double na = std::sqrt(dot(a, a));
    double nb = std::sqrt(dot(b, b));
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace ayn
