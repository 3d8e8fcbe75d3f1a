#pragma once

#include <Eigen/Dense>

#include <vector>

#include "keyrate/optimize.hpp"

namespace keyrate {

// Joint distribution of one signal's bit flip u and phase flip v.
struct BitPhaseDistribution {
    double p00 = 1.0;  // P(u=0, v=0)
    double p10 = 0.0;  // P(u=1, v=0)
    double p11 = 0.0;  // P(u=1, v=1)
    double p01 = 0.0;  // P(u=0, v=1)

    double bit_error() const { return p10 + p11; }
    // P(v=1 | u); an impossible branch conditions to 0.
    double phase_given_u0() const {
        const double pu0 = p00 + p01;
        return pu0 > 0.0 ? p01 / pu0 : 0.0;
    }
    double phase_given_u1() const {
        const double pu1 = p10 + p11;
        return pu1 > 0.0 ? p11 / pu1 : 0.0;
    }
};

// The BB84 attack family at bit-error rate p with correlation parameter t:
// {p00, p10, p11, p01} = {1-2p+t, p-t, t, p-t}. Requires 0 <= p <= 1/2 and
// t in [max(0, 2p-1), p] so all four entries are nonnegative.
BitPhaseDistribution bb84_family(double p, double t);

// Effective bit-error rate after flipping key bits at rate q.
double p_tilde(double p, double q);

// Per-class syndrome statistics of the length-m repetition block at
// effective error rate p_tilde. Classes are indexed by the syndrome weight
// s in {0, ..., m-1}; each class holds C(m-1, s) syndromes. mass0/mass1 are
// the total masses C(m-1, s) * P(l_x, s) of the logical outcomes, computed
// in log space so they stay representable for all m <= 1024;
// cond1 = P(l_x = 1 | s). Sum of all masses is 1.
struct SyndromeWeightTable {
    int m = 0;
    double p_tilde = 0.0;
    std::vector<double> mass0;  // size m
    std::vector<double> mass1;  // size m
    std::vector<double> cond1;  // size m
};

SyndromeWeightTable syndrome_table(int m, double p_tilde);

// Bob's information about the key bit per block: 1 - sum_s P(s) h(P(l_x|s)).
// Protocol-independent (depends only on p_tilde).
double mutual_info_xy(int m, double p_tilde);

// The attacker's information per block:
// S(1/2 rho^{xm} + 1/2 (Z rho Z)^{xm}) - m S(rho) for rho = rho_pq,
// the attack state at independent bit/phase errors (t = p^2). Evaluated
// sector by sector; a parity splitting halves each sector's eigenproblem
// (the mixture's sectors are invariant under the diagonal sign flip, so
// even- and odd-index subspaces decouple).
double mutual_info_xe_bb84(int m, double p, double q);

// Secret-key rate in bits per signal. Unclamped: negative values are
// meaningful to threshold searches; display clamping is the CLI's job.
double rate_bb84(int m, double p, double q);

// Maximize rate_bb84 over q in [0, 1/2]; argmax holds {q*}.
OptimizationResult rate_bb84_opt(int m, double p);
// Warm-started variant used by threshold scans.
OptimizationResult rate_bb84_opt(int m, double p, double q_hint);

// The attack state rho_pq = (1-q)[phi+] + q[phi-] with
// |phi+-> = sqrt(1-p)|0> +- sqrt(p)|1>.
Eigen::Matrix2d bb84_state(double p, double q);

}  // namespace keyrate
