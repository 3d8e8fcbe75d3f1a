#pragma once

#include <Eigen/Dense>

#include "keyrate/bb84.hpp"
#include "keyrate/optimize.hpp"

namespace keyrate {

// The 6-state channel at bit-error rate p: the symmetric attack fixes
// {p_uv} = {1-(3/2)p, p/2, p/2, p/2}, giving conditional phase-error
// probabilities P(v=1|u=0) = p' = p/(2(1-p)) and P(v=1|u=1) = 1/2.
struct SixStateChannel {
    double p = 0.0;
    double p_prime = 0.0;

    BitPhaseDistribution joint() const {
        return {1.0 - 1.5 * p, 0.5 * p, 0.5 * p, 0.5 * p};
    }
    double phase_given_u0() const { return p_prime; }
    double phase_given_u1() const { return 0.5; }
};

// Requires 0 <= p < 2/3 (nonnegativity of the channel distribution).
SixStateChannel sixstate_channel(double p);

// The attacker state on an error-free position:
// gamma = (1-q)[phi'+] + q[phi'-] with |phi'+-> = sqrt(p')|0> +- sqrt(1-p')|1>.
Eigen::Matrix2d sixstate_gamma(double p, double q);

// The attacker's information per block: the u-binomial sum of per-weight
// sector entropies minus the conditional entropies u h(q) + (m-u) S(gamma).
// The inner two-branch mixtures are evaluated sector by sector with the
// k-dependence reduced to a single scalar (the odd-checkerboard damping
// factor), so each (sector, |2k-u|) eigenproblem is solved once per call.
// For m > 200 the u-sum drops terms with binomial mass below 1e-15 (total
// discarded mass below m * 1e-15).
double mutual_info_xe_sixstate(int m, double p, double q);

// Secret-key rate in bits per signal (unclamped).
double rate_sixstate(int m, double p, double q);

// The q = 0 rate in its four-outcome closed form; independent route kept
// for cross-validation against rate_sixstate(m, p, 0). Requires p < 2/3.
double lo_rate(int m, double p);

// Maximize rate_sixstate over q in [0, 1/2]; argmax holds {q*}.
OptimizationResult rate_sixstate_opt(int m, double p);
// Warm-started variant used by threshold scans.
OptimizationResult rate_sixstate_opt(int m, double p, double q_hint);

}  // namespace keyrate
