#include "keyrate/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef KEYRATE_HAVE_LAPACKE
#include <complex>
#define lapack_complex_double std::complex<double>
#define lapack_complex_float std::complex<float>
#include <lapacke.h>
#endif

namespace keyrate {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr double kEigenvalueClip = 1e-10;

// LAPACK's divide-and-conquer driver wins above this dimension; below it the
// call overhead dominates and Eigen's solver is used.
constexpr int kLapackCutoff = 32;

void check_hermitian(double max_asym, double max_abs, int dim) {
    if (max_asym > kDomainSlack * std::max(1.0, max_abs)) {
        throw std::invalid_argument(
            "eigh: matrix of dimension " + std::to_string(dim) +
            " deviates from Hermitian by " + std::to_string(max_asym));
    }
}

void sort_descending(Eigen::VectorXd& values) {
    std::sort(values.data(), values.data() + values.size(), std::greater<double>());
}

// Reverse LAPACK/Eigen ascending output into descending order, reordering the
// eigenvector columns to match.
template <typename MatrixType>
void reverse_pairs(Eigen::VectorXd& values, MatrixType& vectors) {
    values.reverseInPlace();
    vectors = vectors.rowwise().reverse().eval();
}

}  // namespace

double binary_entropy(double x) {
    if (x < -kDomainSlack || x > 1.0 + kDomainSlack) {
        throw std::domain_error("binary_entropy: argument " + std::to_string(x) +
                                " outside [0, 1]");
    }
    x = std::clamp(x, 0.0, 1.0);
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

double shannon_entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v < -kDomainSlack) {
            throw std::domain_error("shannon_entropy: negative entry " + std::to_string(v));
        }
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

double entropy_from_eigenvalues(std::span<const double> eigenvalues) {
    std::vector<double> sorted(eigenvalues.begin(), eigenvalues.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double h = 0.0;
    for (double v : sorted) {
        if (v < -kEigenvalueClip) {
            throw numerical_error("entropy_from_eigenvalues: eigenvalue " +
                                  std::to_string(v) + " below -1e-10");
        }
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

EighResult eigh(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0 || a.cols() != n) throw std::invalid_argument("eigh: matrix must be square");
    check_hermitian((a - a.transpose()).cwiseAbs().maxCoeff(), a.cwiseAbs().maxCoeff(), n);
    Eigen::MatrixXd sym = 0.5 * (a + a.transpose());

    EighResult out;
#ifdef KEYRATE_HAVE_LAPACKE
    if (n >= kLapackCutoff) {
        out.eigenvalues.resize(n);
        out.eigenvectors = std::move(sym);
        int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                  out.eigenvectors.data(), n, out.eigenvalues.data());
        if (info != 0) throw numerical_error("dsyevd failed, info=" + std::to_string(info));
        reverse_pairs(out.eigenvalues, out.eigenvectors);
        return out;
    }
#endif
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw numerical_error("eigh: eigensolver did not converge (dim " + std::to_string(n) + ")");
    }
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
    reverse_pairs(out.eigenvalues, out.eigenvectors);
    return out;
}

EighResultComplex eigh(const Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0 || a.cols() != n) throw std::invalid_argument("eigh: matrix must be square");
    check_hermitian((a - a.adjoint()).cwiseAbs().maxCoeff(), a.cwiseAbs().maxCoeff(), n);
    Eigen::MatrixXcd herm = 0.5 * (a + a.adjoint());

    EighResultComplex out;
#ifdef KEYRATE_HAVE_LAPACKE
    if (n >= kLapackCutoff) {
        out.eigenvalues.resize(n);
        out.eigenvectors = std::move(herm);
        int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                  out.eigenvectors.data(), n, out.eigenvalues.data());
        if (info != 0) throw numerical_error("zheevd failed, info=" + std::to_string(info));
        reverse_pairs(out.eigenvalues, out.eigenvectors);
        return out;
    }
#endif
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
    if (solver.info() != Eigen::Success) {
        throw numerical_error("eigh: eigensolver did not converge (dim " + std::to_string(n) + ")");
    }
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
    reverse_pairs(out.eigenvalues, out.eigenvectors);
    return out;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0 || a.cols() != n) throw std::invalid_argument("eigenvalues: matrix must be square");
    Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
#ifdef KEYRATE_HAVE_LAPACKE
    if (n >= kLapackCutoff) {
        Eigen::VectorXd values(n);
        int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, sym.data(), n, values.data());
        if (info != 0) throw numerical_error("dsyevd failed, info=" + std::to_string(info));
        sort_descending(values);
        return values;
    }
#endif
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw numerical_error("eigenvalues: solver did not converge (dim " + std::to_string(n) + ")");
    }
    Eigen::VectorXd values = solver.eigenvalues();
    sort_descending(values);
    return values;
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0 || a.cols() != n) throw std::invalid_argument("eigenvalues: matrix must be square");
    Eigen::MatrixXcd herm = 0.5 * (a + a.adjoint());
#ifdef KEYRATE_HAVE_LAPACKE
    if (n >= kLapackCutoff) {
        Eigen::VectorXd values(n);
        int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, herm.data(), n, values.data());
        if (info != 0) throw numerical_error("zheevd failed, info=" + std::to_string(info));
        sort_descending(values);
        return values;
    }
#endif
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw numerical_error("eigenvalues: solver did not converge (dim " + std::to_string(n) + ")");
    }
    Eigen::VectorXd values = solver.eigenvalues();
    sort_descending(values);
    return values;
}

namespace {

double entropy_with_trace_check(Eigen::VectorXd values) {
    double trace = values.sum();
    if (trace > 1.0 + 1e-10) {
        throw std::invalid_argument("von_neumann_entropy: trace " + std::to_string(trace) +
                                    " exceeds 1 + 1e-10");
    }
    return entropy_from_eigenvalues({values.data(), static_cast<size_t>(values.size())});
}

}  // namespace

double von_neumann_entropy(const Eigen::MatrixXd& a) {
    return entropy_with_trace_check(symmetric_eigenvalues(a));
}

double von_neumann_entropy(const Eigen::MatrixXcd& a) {
    return entropy_with_trace_check(hermitian_eigenvalues(a));
}

}  // namespace keyrate
