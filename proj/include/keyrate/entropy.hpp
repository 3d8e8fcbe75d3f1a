// Scalar entropy functions and dense Hermitian eigendecomposition.
// All entropies are in bits (log base 2) so that key rates land in [0, 1].
#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>

namespace keyrate {

// Raised when an eigensolver fails to converge or a state violates positivity
// beyond tolerance. The CLI maps this to exit code 3.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary entropy h(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0.
// Accepts x in [0, 1] with 1e-12 slack (clamped); throws std::domain_error
// beyond that.
double binary_entropy(double x);

// Shannon entropy -sum p_i log2 p_i of a (possibly subnormalized) probability
// vector. Entries in [-1e-12, 0) are treated as exact zeros; entries below
// -1e-12 throw std::domain_error. The input is never renormalized: entropies
// of orthogonally supported subnormalized blocks must add up correctly.
double shannon_entropy(std::span<const double> p);

// Eigendecomposition of a real symmetric / complex Hermitian matrix with
// eigenvalues sorted descending: a = vectors * diag(values) * vectors^adjoint.
// The input must equal its adjoint within 1e-12 (relative to its largest
// entry); it is symmetrized before solving. Non-convergence raises
// numerical_error.
struct EighResult {
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXd eigenvectors;  // columns
};
struct EighResultComplex {
    Eigen::VectorXd eigenvalues;   // descending (real: input is Hermitian)
    Eigen::MatrixXcd eigenvectors;
};
EighResult eigh(const Eigen::MatrixXd& a);
EighResultComplex eigh(const Eigen::MatrixXcd& a);

// Eigenvalues only (descending); cheaper than eigh when vectors are unused.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a);
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& a);

// -sum lambda_i log2 lambda_i over a spectrum. Values in [-1e-10, 0) are
// clipped to zero; anything below -1e-10 raises numerical_error (a malformed
// state, not roundoff). Terms are accumulated in descending eigenvalue order
// so results are bit-stable across runs and thread counts.
double entropy_from_eigenvalues(std::span<const double> eigenvalues);

// Von Neumann entropy S(a) = -tr a log2 a of a positive semidefinite operator
// with trace <= 1 + 1e-10 (subnormalized operators are accepted; trace above
// that throws std::invalid_argument).
double von_neumann_entropy(const Eigen::MatrixXd& a);
double von_neumann_entropy(const Eigen::MatrixXcd& a);

}  // namespace keyrate
