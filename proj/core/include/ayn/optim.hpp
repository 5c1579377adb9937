#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ayn/tensor.hpp"

namespace ayn {

enum class OptimizerKind { adam, sgd_momentum };

OptimizerKind optimizer_kind_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double momentum = 0.9;  // sgd_momentum only
};

/// Holds per-parameter moment buffers. The parameter list must be the
/// same (count and shapes) on every step; buffers are sized lazily on
/// the first call.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config);

    /// Applies one update in-place from each tensor's grad buffer, which
    /// must be allocated (a backward pass must have run). Grads are left
    /// untouched; callers zero them explicitly.
    void step(std::span<Tensor* const> params);

    const OptimizerConfig& config() const { return config_; }
    std::uint64_t steps_taken() const { return t_; }

private:
    OptimizerConfig config_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_;  // adam first moment / sgd velocity
    std::vector<std::vector<double>> v_;  // adam second moment
};

}  // namespace ayn
