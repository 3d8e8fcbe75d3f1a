#pragma once

#include <vector>

#include "keyrate/optimize.hpp"

namespace keyrate {

// Two-level preprocessing: noise q then inner blocks of m1, noise Q on the
// inner key bits then an outer block of m2.
struct IteratedParams {
    int m1 = 1;
    int m2 = 1;
    double q = 0.0;
    double big_q = 0.0;  // the second-level noise rate Q
};

// Combined flip rate of the two noise layers: q(1-Q) + (1-q)Q.
double q_tot(const IteratedParams& params);

// One compressed class of Bob-side outcomes. The joint mass of (key error
// L, inner syndrome weights, outer syndrome) depends on the outer syndrome
// vector only through its weight and on the inner weights only through
// their multisets within the unflipped group (the key block plus the
// blocks agreeing with it) and the flipped group.
struct IteratedSyndromeClass {
    int outer_weight = 0;              // S in {0, ..., m2-1}
    std::vector<int> same_weights;     // sorted, size m2 - S
    std::vector<int> flip_weights;     // sorted, size S
    double mass0 = 0.0;                // total class mass with L = 0
    double mass1 = 0.0;                // total class mass with L = 1
};

struct IteratedSyndromeDistribution {
    int m1 = 0;
    int m2 = 0;
    std::vector<IteratedSyndromeClass> classes;  // deterministic order
    double total_mass() const;                   // 1 within 1e-12
};

// Compose the inner syndrome table with the second noise layer and the
// outer block. Throws std::invalid_argument when the compressed class count
// would exceed ~2e6 (combinatorial budget guard).
IteratedSyndromeDistribution iterated_syndrome_distribution(const IteratedParams& params,
                                                            double p);

// Bob's information per super-block: 1 - sum over classes of mass * h(cond).
double mutual_info_xy_iterated(const IteratedParams& params, double p);

// The attacker's information per super-block:
// S(1/2 A^{xm2} + 1/2 B^{xm2}) - m2 S(A) with
// A = (1-Q) rho_pq^{xm1} + Q (Z rho_pq Z)^{xm1} and B its Z-conjugate.
// The first term is evaluated densely; the mixture is supported on the
// even-parity checkerboard, so the even- and odd-popcount index sectors are
// eigensolved separately. S(A) goes through the sector decomposition at the
// qubit level. Requires m1 * m2 <= 13 (dense dimension cap 2^13).
double mutual_info_xe_iterated(const IteratedParams& params, double p);

// Secret-key rate in bits per signal (unclamped): (I_XY - I_XE)/(m1 m2).
double rate_iterated(const IteratedParams& params, double p);

// Maximize over (q, Q) in [0, 1/2]^2; argmax holds {q*, Q*}.
OptimizationResult rate_iterated_opt(int m1, int m2, double p);
// Warm-started variant used by threshold scans.
OptimizationResult rate_iterated_opt(int m1, int m2, double p, double q_hint,
                                     double big_q_hint);

}  // namespace keyrate
