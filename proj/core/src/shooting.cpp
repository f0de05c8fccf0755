#include "shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpower/numeric.hpp"

namespace qpower::detail {

LevelTerms level_terms(double p, double pL, const Multipliers& m) {
    LevelTerms t;
    const double d = p - pL;
    if (!(d > 0.0)) return t;
    if (m.mu > 0.0) {
        const double s = 1.0 / (m.mu * d) - m.lambda / m.mu;
        if (!(s > 0.0)) return t;
        t.s = s;
        t.A = -m.lambda * std::expm1(-s) + m.mu * phi2(s);
        t.g = m.mu * d * phi1(s);
    } else {
        if (!(m.lambda * d < 1.0)) return t;
        t.unbounded = true;
        t.s = std::numeric_limits<double>::infinity();
        t.A = m.lambda;
        t.g = 1.0 - m.lambda * d;
    }
    t.valid = t.A > 0.0;
    return t;
}

Shot shoot(double p1, double pL, const Multipliers& m, double c, std::size_t L,
           std::vector<double>* levels) {
    if (levels) {
        levels->clear();
        levels->push_back(p1);
    }
    double p = p1;
    double v = c / p1;
    double g_prev = 0.0;  // fhat_0 = 1
    for (std::size_t j = 1; j < L; ++j) {
        const LevelTerms t = level_terms(p, pL, m);
        if (!t.valid) return {ShotStatus::TooSlow, j, 0.0, 0.0};
        const double R = (c / (p * p)) * (t.g - g_prev) / t.A;
        if (j + 1 == L) {
            const double residual =
                pL > 0.0 ? std::exp(-v) * (1.0 - R) - std::exp(-c / pL) : 1.0 - R;
            return {ShotStatus::Complete, j, residual, R};
        }
        if (!(R > 0.0)) return {ShotStatus::TooSlow, j, 0.0, R};
        if (!(R < 1.0)) return {ShotStatus::TooFast, j, 0.0, R};
        v -= std::log1p(-R);
        const double next = c / v;
        if (!(next > pL)) return {ShotStatus::TooFast, j, 0.0, R};
        p = next;
        g_prev = t.g;
        if (levels) levels->push_back(p);
    }
    return {ShotStatus::TooSlow, L, 0.0, 0.0};  // unreachable for L >= 2
}

double shot_sign_value(const Shot& shot) {
    switch (shot.status) {
        case ShotStatus::TooFast: return -1.0;
        case ShotStatus::TooSlow: return 1.0;
        case ShotStatus::Complete: break;
    }
    return shot.residual;
}

double search_scale(const Multipliers& m, const SystemConfig& cfg) {
    return std::max({cfg.p_av(), cfg.q_av(), 1.0 / (m.lambda + m.mu)});
}

std::optional<double> match_first_level(double pL, const Multipliers& m, const SystemConfig& cfg,
                                        double scale) {
    const double c = cfg.c();
    const std::size_t L = cfg.levels();
    auto value = [&](double p1) { return shot_sign_value(shoot(p1, pL, m, c, L)); };

    double lo = pL > 0.0 ? pL * (1.0 + 1e-12) : 1e-9 * c;
    if (!(value(lo) < 0.0)) return std::nullopt;

    double hi;
    if (m.lambda > 0.0) {
        hi = pL + (1.0 / m.lambda) * (1.0 - 1e-15);
        if (value(hi) < 0.0) return std::nullopt;
    } else {
        hi = std::max(100.0 * scale, 2.0 * pL);
        int k = 0;
        while (value(hi) < 0.0) {
            lo = hi;
            hi *= 4.0;
            if (++k > 60) return std::nullopt;
        }
    }

    const auto [a, b] = sign_bisect(value, lo, hi);
    // Prefer the completed run with the smaller terminal mismatch.
    std::optional<double> best;
    double best_abs = std::numeric_limits<double>::infinity();
    for (double p1 : {a, b}) {
        const Shot shot = shoot(p1, pL, m, c, L);
        if (shot.status == ShotStatus::Complete && std::fabs(shot.residual) < best_abs) {
            best = p1;
            best_abs = std::fabs(shot.residual);
        }
    }
    return best;
}

std::optional<PowerCodebook> codebook_for_last_level(double pL, const Multipliers& m,
                                                     const SystemConfig& cfg, double scale) {
    const auto p1 = match_first_level(pL, m, cfg, scale);
    if (!p1) return std::nullopt;
    PowerCodebook cb;
    const Shot shot = shoot(*p1, pL, m, cfg.c(), cfg.levels(), &cb.levels);
    if (shot.status != ShotStatus::Complete) return std::nullopt;
    cb.levels.push_back(pL);
    if (!cb.is_valid()) return std::nullopt;
    return cb;
}

double last_level_residual(const PowerCodebook& cb, const Multipliers& m, double c) {
    const std::size_t L = cb.size();
    const double pL = cb.last();
    NeumaierSum sum;
    double prev = std::exp(-c / cb(1));
    LevelTerms t;
    for (std::size_t j = 1; j < L; ++j) {
        t = level_terms(cb(j), pL, m);
        if (!t.valid) return std::numeric_limits<double>::quiet_NaN();
        const double next = cb(j + 1) > 0.0 ? std::exp(-c / cb(j + 1)) : 0.0;
        sum += (prev - next) * t.A;
        prev = next;
    }
    if (pL > 0.0) sum += prev * (c / (pL * pL)) * (1.0 - t.g);
    sum += -(m.lambda + m.mu);
    return sum.value();
}

}  // namespace qpower::detail
