#include "ayn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ayn/error.hpp"

namespace ayn {

GradCheckResult finite_difference_check(std::span<Tensor* const> params,
                                        const std::function<double(bool)>& loss,
                                        double step) {
    if (!(step > 0.0)) throw Error("invalid-value", "finite_difference_check: step must be positive");

    const double first = loss(false);
    const double second = loss(false);
    if (first != second) {
        throw Error("nondeterministic",
                    "finite_difference_check: objective is not deterministic; two evaluations differ");
    }

    for (Tensor* t : params) {
        t->ensure_grad();
        t->zero_grad();
    }
    loss(true);

    std::vector<std::vector<double>> analytic(params.size());
    for (std::size_t p = 0; p < params.size(); ++p) analytic[p] = *params[p]->grad;

    GradCheckResult result;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p];
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            const double saved = t.data[i];
            t.data[i] = saved + step;
            const double plus = loss(false);
            t.data[i] = saved - step;
            const double minus = loss(false);
            t.data[i] = saved;

            const double numeric = (plus - minus) / (2.0 * step);
            const double a = analytic[p][i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.worst_param = p;
                result.worst_coord = i;
                result.analytic = a;
                result.numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace ayn
