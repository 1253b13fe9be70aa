#include "focalcount/grad_check.hpp"

#include <cmath>
#include <string>

#include "focalcount/errors.hpp"

namespace focalcount {

namespace {

double scalar_eval(const ScalarFn& f, const Tensor& x) {
    Tensor out = f(x);
    if (out.size() != 1) {
        throw contract_error("grad_check: f must return a scalar, got " +
                             shape_string(out.shape()));
    }
    return out.at(0);
}

} // namespace

double grad_check(const ScalarFn& f, const Tensor& x, const Tensor& analytic_grad, double h) {
    if (!(h >= 1e-7 && h <= 1e-3)) {
        throw contract_error("grad_check: h must be in [1e-7, 1e-3], got " + std::to_string(h));
    }
    if (!analytic_grad.same_shape(x)) {
        throw dimension_error("grad_check: analytic gradient shape " +
                              shape_string(analytic_grad.shape()) + " does not match x " +
                              shape_string(x.shape()));
    }
    require_finite(analytic_grad, "grad_check analytic gradient");

    Tensor probe = x;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe.at(i);
        probe.at(i) = orig + h;
        const double up = scalar_eval(f, probe);
        probe.at(i) = orig - h;
        const double down = scalar_eval(f, probe);
        probe.at(i) = orig;

        const double central = (up - down) / (2.0 * h);
        if (!std::isfinite(central)) {
            throw finite_value_error("grad_check: non-finite central difference at flat index " +
                                     std::to_string(i));
        }
        const double a = analytic_grad.at(i);
        const double rel = std::fabs(a - central) / (std::fabs(a) + std::fabs(central) + 1e-12);
        if (rel > worst) worst = rel;
    }
    return worst;
}

} // namespace focalcount
