#pragma once

#include <functional>
#include <vector>

namespace keyrate {

// Outcome of a noise-rate maximization.
struct OptimizationResult {
    std::vector<double> argmax;  // one entry per optimized noise rate
    double value = 0.0;          // objective at argmax (bits per signal)
    long evaluations = 0;        // objective calls spent
    bool converged = true;       // false if refinement failed to settle
};

// Outcome of a bit-error-threshold search.
struct ThresholdResult {
    double p_max = 0.0;       // center of the final bracket
    double half_width = 0.0;  // half the final bracket width
    std::vector<double> q_at_threshold;  // optimal noise at the last positive point
    long evaluations = 0;     // optimized-rate calls spent
};

// Maximize f over q in [lo, hi] (subset of [0, 1/2]): 51-point coarse grid,
// then golden-section refinement in the bracket around the best grid point
// down to |dq| <= 1e-6. Grid ties within 1e-14 resolve to the smaller q.
// Deterministic. If refinement fails to settle, the best coarse-grid point
// is returned with converged = false.
OptimizationResult maximize_over_noise(const std::function<double(double)>& f,
                                       double lo, double hi);

// Warm-started variant: scans a short grid in a window of radius ~0.06
// around `hint` first and falls back to the full coarse grid whenever the
// window's best point touches the window edge. Same result contract.
OptimizationResult maximize_over_noise(const std::function<double(double)>& f,
                                       double lo, double hi, double hint);

// Two-rate variant for (q, Q) surfaces: 21x21 coarse grid on the box, then
// coordinate-wise golden-section sweeps to |d| <= 1e-5 per coordinate.
OptimizationResult maximize_over_noise_2d(const std::function<double(double, double)>& f,
                                          double lo1, double hi1, double lo2, double hi2);

// Warm-started two-rate variant (window search around the hint point first).
// Whenever the window search ends nonpositive it falls back to the full
// search, so a stale hint can never turn a positive maximum into a reported
// nonpositive one — threshold bisection depends on that sign.
OptimizationResult maximize_over_noise_2d(const std::function<double(double, double)>& f,
                                          double lo1, double hi1, double lo2, double hi2,
                                          double hint1, double hint2);

// Bisect for the largest p with a positive optimized rate. rate_opt must
// return the noise-maximized rate at p (with its argmax); the caller
// supplies a valid bracket with rate_opt(p_lo).value > 0 > rate_opt(p_hi).value,
// otherwise std::invalid_argument. The bracket is narrowed to the requested
// half-width (default 1e-5; must be positive and finite); p_max is the final
// bracket center and q_at_threshold is the argmax at the last bracket point
// with a positive rate. Thresholds of nearby blocklengths can differ by only
// a few 1e-8, so callers that compare thresholds should pass a half-width of
// about 1e-9 to keep the reported centers ordered.
ThresholdResult find_threshold(const std::function<OptimizationResult(double)>& rate_opt,
                               double p_lo, double p_hi, double half_width = 1e-5);

}  // namespace keyrate
