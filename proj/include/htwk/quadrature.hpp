#pragma once

#include <functional>

namespace htwk::quad {

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const Integrand& f, double a, double b, double rel_tol = 1e-12);

/// Settings for integrals over [0, inf) cut into geometric panels
/// [x0 r^k, x0 r^(k+1)].
struct PanelOptions {
    double x0 = 1.0;         ///< end of the leading finite panel [0, x0]
    double ratio = 2.0;
    double rel_tol = 1e-12;  ///< a panel is negligible below rel_tol * accumulated
    int settle_panels = 3;   ///< consecutive negligible panels before stopping
    int stall_panels = 8;    ///< consecutive non-decreasing panels => divergent
    int max_panels = 1000;
};

struct ImproperResult {
    double value = 0.0;  ///< sum including the geometric tail extrapolation
    bool finite = false;
    int panels = 0;
    double last_panel = 0.0;
};

/// Integrates f over [0, inf). On divergence `finite` is false and `value`
/// holds the partial sum. Integrands must be nonnegative for the decay test
/// to be meaningful.
ImproperResult integrate_to_infinity(const Integrand& f, const PanelOptions& opt = {});

}  // namespace htwk::quad
