#pragma once

// Forward recursion of the stationarity conditions and the shooting
// problems built on it. Internal to the library.

#include <cstddef>
#include <optional>
#include <vector>

#include "qpower/model.hpp"
#include "qpower/quantizer.hpp"

namespace qpower::detail {

// Per-level quantities at power p with last level pL:
//   s  = 1/(mu d) - lambda/mu with d = p - pL (unbounded when mu = 0),
//   A  = lambda (1 - e^{-s}) + mu phi2(s),
//   g  = 1 - fhat = 1 - d (lambda + mu (1 - e^{-s})) = mu d phi1(s).
// The last form follows from d (lambda + mu s) = 1 and avoids cancellation.
struct LevelTerms {
    bool valid = false;
    double s = 0.0;
    bool unbounded = false;
    double A = 0.0;
    double g = 0.0;
};

LevelTerms level_terms(double p, double pL, const Multipliers& m);

enum class ShotStatus { TooFast = -1, Complete = 0, TooSlow = 1 };

struct Shot {
    ShotStatus status = ShotStatus::Complete;
    std::size_t index = 0;  // failing equation index, or L-1 when complete
    double residual = 0.0;  // terminal mismatch, meaningful when complete
    double ratio = 0.0;     // R_{L-1}
};

// Runs the recursion v_{j+1} = v_j - ln(1 - R_j) from p1 for j = 1..L-2
// and evaluates R_{L-1}. With pL > 0 the residual is
// e^{-v_{L-1}} (1 - R_{L-1}) - e^{-c/pL}; with pL = 0 it is 1 - R_{L-1}.
// `levels`, when given, receives p_1..p_{L-1} (as far as the run got).
Shot shoot(double p1, double pL, const Multipliers& m, double c, std::size_t L,
           std::vector<double>* levels = nullptr);

// Negative when p1 is too small, positive when too large; continuous in
// p1 near the matching value.
double shot_sign_value(const Shot& shot);

// p1 whose run closes the terminal condition for the given pL. `scale`
// seeds the geometric search for an upper bracket when lambda = 0.
std::optional<double> match_first_level(double pL, const Multipliers& m, const SystemConfig& cfg,
                                        double scale);

// Full codebook p_1..p_{L-1}, pL for the given pL, or nothing when the
// shooting problem has no solution.
std::optional<PowerCodebook> codebook_for_last_level(double pL, const Multipliers& m,
                                                     const SystemConfig& cfg, double scale);

// Stationarity in p_L: sum_j Delta_j A_j + e^{-c/pL} (c/pL^2) fhat_{L-1} - (lambda + mu).
// The middle term is dropped when pL = 0. NaN when a level is invalid.
double last_level_residual(const PowerCodebook& cb, const Multipliers& m, double c);

double search_scale(const Multipliers& m, const SystemConfig& cfg);

}  // namespace qpower::detail
