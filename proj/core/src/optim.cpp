#include "ayn/optim.hpp"

#include <cmath>

#include "ayn/error.hpp"

namespace ayn {

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "adam") return OptimizerKind::adam;
    if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::sgd_momentum;
    throw Error("invalid-value", "unknown optimizer '" + name + "' (expected adam or sgd_momentum)");
}

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::adam ? "adam" : "sgd_momentum";
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
    if (!(config_.learning_rate > 0.0)) throw Error("invalid-value", "optimizer: learning_rate must be positive");
    if (config_.kind == OptimizerKind::adam) {
        if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0) || !(config_.beta2 >= 0.0 && config_.beta2 < 1.0)) {
            throw Error("invalid-value", "optimizer: betas must lie in [0, 1)");
        }
        if (!(config_.epsilon > 0.0)) throw Error("invalid-value", "optimizer: epsilon must be positive");
    }
}

void Optimizer::step(std::span<Tensor* const> params) {
    if (m_.empty()) {
        m_.resize(params.size());
        for (std::size_t p = 0; p < params.size(); ++p) m_[p].assign(params[p]->data.size(), 0.0);
        if (config_.kind == OptimizerKind::adam) {
            v_.resize(params.size());
            for (std::size_t p = 0; p < params.size(); ++p) v_[p].assign(params[p]->data.size(), 0.0);
        }
    } else if (m_.size() != params.size()) {
        throw Error("state", "optimizer: parameter count changed between steps");
    }

    ++t_;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        if (!t.has_grad()) throw Error("state", "optimizer: parameter has no gradient buffer");
        if (t.data.size() != m_[p].size()) throw Error("state", "optimizer: parameter shape changed between steps");
        const auto& g = *t.grad;
        for (double x : g) {
            if (!std::isfinite(x)) throw Error("invalid-value", "optimizer: non-finite gradient");
        }

        if (config_.kind == OptimizerKind::adam) {
            const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
            for (std::size_t i = 0; i < g.size(); ++i) {
                m_[p][i] = config_.beta1 * m_[p][i] + (1.0 - config_.beta1) * g[i];
                v_[p][i] = config_.beta2 * v_[p][i] + (1.0 - config_.beta2) * g[i] * g[i];
                const double mhat = m_[p][i] / bc1;
                const double vhat = v_[p][i] / bc2;
                t.data[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
            }
        } else {
            for (std::size_t i = 0; i < g.size(); ++i) {
                m_[p][i] = config_.momentum * m_[p][i] + g[i];
                t.data[i] -= config_.learning_rate * m_[p][i];
            }
        }
    }
}

}  // namespace ayn
