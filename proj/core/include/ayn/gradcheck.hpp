#pragma once

#include <functional>
#include <span>

#include "ayn/tensor.hpp"

namespace ayn {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_param = 0;   // index into the params span
    std::size_t worst_coord = 0;   // flat index within that tensor
    double analytic = 0.0;
    double numeric = 0.0;
};

/// Compares analytic gradients against central finite differences.
///
/// `loss(true)` must evaluate the objective and accumulate gradients into
/// each tensor's grad buffer; `loss(false)` must evaluate the objective
/// only. The callable has to be deterministic: the check first evaluates
/// it twice and fails if the two values differ at all. `step` must be
/// positive. Relative error uses max(|analytic|, |numeric|, 1e-8) as the
/// denominator.
GradCheckResult finite_difference_check(std::span<Tensor* const> params,
                                        const std::function<double(bool compute_grads)>& loss,
                                        double step);

}  // namespace ayn
