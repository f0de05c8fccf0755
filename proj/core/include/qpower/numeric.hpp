#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace qpower {

// Exponential integral E1(x) for x > 0: power series below 1, continued
// fraction above. Relative error ~1e-15 over the whole range.
double expint_e1(double x);

// phi1(s) = s - 1 + e^{-s}, phi2(s) = 1 - e^{-s}(1 + s). Both lose all
// significant digits for small s when written naively; series are used
// below s = 0.1. phi2(+inf) = 1.
double phi1(double s);
double phi2(double s);

// ∫_0^∞ e^{-x} f(x) dx, evaluated as ∫_0^1 f(-ln u) du with tanh-sinh
// quadrature. Endpoint singularities of f at x = 0 are tolerated.
double integrate_exp_weight(const std::function<double(double)>& f, double rtol);

class NeumaierSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    NeumaierSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Bisection on the sign of f between lo (f < 0) and hi (f >= 0), down to
// adjacent doubles. Geometric midpoints are used while hi/lo is large so a
// bracket spanning many decades costs O(log log) extra steps, not O(decades).
// Returns the final (lo, hi) pair.
template <class F>
std::pair<double, double> sign_bisect(F&& f, double lo, double hi, int max_iter = 400) {
    for (int it = 0; it < max_iter; ++it) {
        double mid;
        if (lo > 0.0 && hi > 4.0 * lo)
            mid = std::sqrt(lo) * std::sqrt(hi);
        else
            mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return {lo, hi};
}

// Root of a continuous f on [a, b] with f(a), f(b) of opposite sign:
// regula falsi with the Illinois modification, falling back to bisection
// when the interpolant stalls. Stops when |f| <= ftol or the bracket width
// falls below xtol * max(1, |x|).
template <class F>
double illinois_root(F&& f, double a, double b, double fa, double fb, double xtol, double ftol,
                     int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    int side = 0;
    double x = a;
    for (int it = 0; it < max_iter; ++it) {
        x = (a * fb - b * fa) / (fb - fa);
        if (!(x > std::min(a, b) && x < std::max(a, b)) || it % 8 == 7) x = 0.5 * (a + b);
        const double fx = f(x);
        if (std::fabs(fx) <= ftol) return x;
        if ((fx > 0.0) == (fb > 0.0)) {
            b = x;
            fb = fx;
            if (side == 1) fa *= 0.5;
            side = 1;
        } else {
            a = x;
            fa = fx;
            if (side == -1) fb *= 0.5;
            side = -1;
        }
        if (std::fabs(b - a) <= xtol * std::max(1.0, std::fabs(x))) break;
    }
    return std::fabs(fa) < std::fabs(fb) ? a : b;
}

// Golden-section minimisation of a unimodal f on [a, b].
template <class F>
double golden_section_minimize(F&& f, double a, double b, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

}  // namespace qpower
