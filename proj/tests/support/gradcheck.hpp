#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "core/matrix.hpp"

namespace aka::testing {

// Central finite differences against analytic gradients. `forward` must
// recompute the scalar loss from the current parameter values on every call.
struct GradCheck {
    double max_rel_err = 0.0;
    int checked = 0;

    static double rel_err(double analytic, double numeric) {
        const double denom = std::max(std::abs(analytic), std::abs(numeric));
        if (denom < 1e-6) return std::abs(analytic - numeric) < 1e-7 ? 0.0 : 1.0;
        return std::abs(analytic - numeric) / denom;
    }

    void check_param(const std::function<double()>& forward, Matrix& param,
                     const Matrix& analytic_grad, double h = 1e-5) {
        for (size_t i = 0; i < param.size(); ++i) {
            const double orig = param.raw()[i];
            param.raw()[i] = orig + h;
            const double fp = forward();
            param.raw()[i] = orig - h;
            const double fm = forward();
            param.raw()[i] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            max_rel_err = std::max(max_rel_err, rel_err(analytic_grad.raw()[i], numeric));
            ++checked;
        }
    }
};

}  // namespace aka::testing
