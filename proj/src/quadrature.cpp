#include "htwk/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace htwk::quad {

double integrate(const Integrand& f, double a, double b, double rel_tol) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, rel_tol, &err);
}

ImproperResult integrate_to_infinity(const Integrand& f, const PanelOptions& opt) {
    ImproperResult r;
    double acc = integrate(f, 0.0, opt.x0, opt.rel_tol);
    double lo = opt.x0;
    double prev = -1.0;
    int small_run = 0;
    int stall_run = 0;
    for (int k = 0; k < opt.max_panels; ++k) {
        double hi = lo * opt.ratio;
        if (!std::isfinite(hi)) break;
        double c = integrate(f, lo, hi, opt.rel_tol);
        acc += c;
        r.panels = k + 1;
        r.last_panel = c;

        if (prev >= 0.0 && c > 0.0 && c >= prev) {
            if (++stall_run >= opt.stall_panels) {
                r.value = acc;
                r.finite = false;
                return r;
            }
        } else {
            stall_run = 0;
        }

        if (std::abs(c) <= opt.rel_tol * std::abs(acc) || c == 0.0) {
            if (++small_run >= opt.settle_panels) {
                // Geometric extrapolation of what the remaining panels add.
                if (prev > 0.0 && c > 0.0 && c < prev) {
                    double rho = c / prev;
                    acc += c * rho / (1.0 - rho);
                }
                r.value = acc;
                r.finite = true;
                return r;
            }
        } else {
            small_run = 0;
        }
        prev = c;
        lo = hi;
    }
    r.value = acc;
    r.finite = false;
    return r;
}

}  // namespace htwk::quad
