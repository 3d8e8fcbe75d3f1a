#pragma once

#include <Eigen/Dense>
#include <gmpxx.h>

#include <vector>

namespace keyrate {

// One irreducible collective-spin sector of m qubits.
struct SchurBlock {
    int two_j = 0;                   // twice the spin label; same parity as m
    int dim = 0;                     // 2j + 1
    mpz_class multiplicity;          // exact number of copies of this sector
    double log2_multiplicity = 0.0;  // log2(multiplicity), for log-space weights
};

struct BlockStructure {
    int m = 0;
    std::vector<SchurBlock> blocks;  // ordered by descending two_j
};

// Decompose (C^2)^{\otimes m} into collective-spin sectors. Requires
// 1 <= m <= 1024. Multiplicities are exact integers computed as a difference
// of binomial coefficients; sum(multiplicity * dim) == 2^m exactly.
BlockStructure block_structure(int m);

// Angle diagonalizing a real symmetric 2x2 matrix [[a, b], [b, d]]:
// theta = atan2(2b, a - d), in (-pi, pi], and 0 for the fully degenerate
// case. With R(theta) = [[cos(theta/2), -sin(theta/2)],
//                        [sin(theta/2),  cos(theta/2)]],
// R(theta)^T rho R(theta) is diagonal with the larger eigenvalue first.
// Throws std::invalid_argument if the matrix is not symmetric.
double rotation_angle(const Eigen::Matrix2d& rho);

// The (two_j+1)-dimensional sector of R(theta)^{\otimes m}, an orthogonal
// matrix. Row/column index i carries the weight label 2k = -two_j + 2i
// (ascending), in which basis the generator has ladder entries
// (Jp)_{i+1,i} = sqrt((i+1)(two_j - i)); the defining two_j = 1 case
// reproduces R(theta) above. The generator's eigensystem is cached per
// two_j, so repeated calls at different angles cost two matrix products
// each. Requires two_j >= 0. Thread-safe.
Eigen::MatrixXd wigner_block(int two_j, double theta);

// Diagonal entries of the spin-two_j sector of diag(lambda1, lambda2)^{\otimes m}:
// entry i = lambda1^{two_j - i} * lambda2^i * (lambda1*lambda2)^{(m - two_j)/2},
// i.e. the larger eigenvalue dominates the i = 0 end. Requires
// lambda1 >= lambda2 >= 0, 0 <= two_j <= m, two_j == m (mod 2).
Eigen::VectorXd diagonal_block(int two_j, double lambda1, double lambda2, int m);

// One component of a mixture of tensor-power states.
struct MixtureTerm {
    double weight = 0.0;    // nonnegative; weights must sum to <= 1 + 1e-12
    Eigen::Matrix2d state;  // real symmetric, PSD, unit trace
};

// Von Neumann entropy, in bits, of sum_t weight_t * state_t^{\otimes m}:
// sum over sectors of multiplicity times the entropy of
// sum_t weight_t * wigner_block(j, theta_t) diagonal_block(j, l1_t, l2_t, m)
// wigner_block(j, theta_t)^T. Each sector is assembled in a rescaled frame
// and reweighted in log space, so the result stays finite-precision-safe
// for all supported m (1 <= m <= 1024). Subnormalized mixtures (weights
// summing to less than 1) are allowed; the entropy is then the unnormalized
// -tr[M log2 M]. States must be real symmetric (complex-valued states are
// outside this routine's domain and are rejected at the binding layer).
double mixture_entropy(const std::vector<MixtureTerm>& terms, int m);

}  // namespace keyrate
