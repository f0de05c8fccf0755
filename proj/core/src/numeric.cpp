#include "qpower/numeric.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace qpower {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

double e1_series(double x) {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    double term = 1.0;
    NeumaierSum sum;
    for (int k = 1; k < 200; ++k) {
        term *= -x / k;
        const double contrib = term / k;
        sum += contrib;
        if (std::fabs(contrib) < 1e-18 * std::fabs(sum.value())) break;
    }
    return -kEulerGamma - std::log(x) - sum.value();
}

double e1_continued_fraction(double x) {
    // Modified Lentz evaluation of E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

}  // namespace

double expint_e1(double x) {
    if (x < 0.0 || std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    if (x > 745.0) return 0.0;
    return x <= 1.0 ? e1_series(x) : e1_continued_fraction(x);
}

double phi1(double s) {
    if (std::isinf(s)) return s;
    if (s < 0.1) {
        // sum_{k>=2} (-s)^k / k!
        double term = s * s / 2.0;
        NeumaierSum sum;
        for (int k = 2; k < 40; ++k) {
            sum += term;
            if (std::fabs(term) < 1e-18 * std::fabs(sum.value())) break;
            term *= -s / (k + 1);
        }
        return sum.value();
    }
    return s + std::expm1(-s);
}

double phi2(double s) {
    if (std::isinf(s)) return 1.0;
    if (s < 0.1) {
        // sum_{k>=2} (-1)^k s^k (k - 1) / k!
        double power_over_fact = s * s / 2.0;  // s^k / k!
        NeumaierSum sum;
        for (int k = 2; k < 40; ++k) {
            const double term = ((k % 2 == 0) ? 1.0 : -1.0) * power_over_fact * (k - 1);
            sum += term;
            if (std::fabs(term) < 1e-18 * std::fabs(sum.value())) break;
            power_over_fact *= s / (k + 1);
        }
        return sum.value();
    }
    return -std::expm1(-s) - s * std::exp(-s);
}

double integrate_exp_weight(const std::function<double(double)>& f, double rtol) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto g = [&f](double u, double complement) {
        // Near u = 1 the integrator passes complement = 1 - u (positive),
        // which keeps x = -ln u accurate as x -> 0. Near u = 0 it is -u.
        const double x =
            (complement > 0.0 && complement < 0.5) ? -std::log1p(-complement) : -std::log(u);
        return f(x);
    };
    return integrator.integrate(g, 0.0, 1.0, rtol);
}

}  // namespace qpower
