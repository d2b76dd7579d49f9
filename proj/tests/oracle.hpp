#pragma once

// Test-only oracles, independent of the library paths they check.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

// Inverse standard-normal CDF by long-double bisection on erfcl.
// Accurate to ~1e-14 absolute; used as the reference for normal_quantile.
inline double normal_quantile_ref(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p outside (0,1)");
    const auto cdf = [](long double x) -> long double {
        return 0.5L * erfcl(-x / sqrtl(2.0L));
    };
    long double lo = -40.0L, hi = 40.0L;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        if (cdf(mid) < static_cast<long double>(p)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return static_cast<double>(0.5L * (lo + hi));
}

// Adaptive Simpson quadrature.
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double eps = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, eps, 60);
}

} // namespace oracle
