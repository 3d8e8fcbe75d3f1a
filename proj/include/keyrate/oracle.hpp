#pragma once

#include <vector>

#include "keyrate/bb84.hpp"
#include "keyrate/schur.hpp"
#include "keyrate/sixstate.hpp"

// Brute-force reference implementations. Everything here recomputes its
// quantity from the defining state constructions on explicit 2^m-dimensional
// registers, deliberately sharing no formulas with the production paths, so
// that agreement between the two routes is evidence rather than tautology.
// Costs are exponential in m; the preconditions cap sizes so the full
// validation suite stays under a minute.
namespace keyrate {
namespace oracle {

// The dual bases of the repetition block: xi_i = e_1 + e_{i+1} (i < m),
// xi_m = e_1; eta_i = e_{i+1} (i < m), eta_m = all-ones. Satisfies
// xi_i . eta_j = delta_ij over GF(2).
struct CatCodeBasis {
    int m = 0;
    std::vector<std::vector<int>> xi;   // m vectors of m bits
    std::vector<std::vector<int>> eta;  // m vectors of m bits
};

CatCodeBasis cat_code_basis(int m);

// S(sum_t w_t rho_t^{xm}) by explicit Kronecker powers. Requires 2^m <= 4096.
double dense_mixture_entropy(const std::vector<MixtureTerm>& terms, int m);

// Bob's information by exhaustive enumeration of the 2^m error vectors,
// each decomposed against the cat-code basis into (l_x, syndrome vector).
// Requires m <= 6.
double enumerate_xy(int m, double p_tilde);

// The attacker's information by explicit construction of the conditional
// states: for each bit-error pattern u, the phase register holds the
// dephased pure state built from P(v|u), conjugated by Z^{xm} when the key
// bit is 1. Requires m <= 4.
double eve_mutual_info(int m, const BitPhaseDistribution& joint, double q);
double eve_mutual_info(int m, const SixStateChannel& channel, double q);

// Max over the t-grid of I(X:E)(t) - I(X:E)(t = p^2) for the BB84 family;
// nonpositive (within tolerance) when independent errors are the
// attacker's best choice. Requires m <= 3.
double independent_error_check(int m, double p, double q,
                               const std::vector<double>& t_grid);

// Both sides of the two-level scheme by brute force: I(X:Y) from exhaustive
// enumeration of all inner error vectors and second-layer flip vectors;
// I(X:E) from dense 2^(m1 m2)-dimensional entropies. Requires m1, m2 <= 3.
struct IteratedCheck {
    double i_xy = 0.0;
    double i_xe = 0.0;
};

IteratedCheck iterated_enumeration_check(int m1, int m2, double p, double q,
                                         double big_q);

// Brute-force BB84 rate at independent errors: combines enumerate_xy and
// eve_mutual_info. Requires m <= 4.
double full_rate_check(int m, double p, double q);

}  // namespace oracle
}  // namespace keyrate
