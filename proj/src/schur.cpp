#include "keyrate/schur.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "keyrate/entropy.hpp"

#ifdef KEYRATE_HAVE_LAPACKE
#include <complex>
#define lapack_complex_double std::complex<double>
#define lapack_complex_float std::complex<float>
#include <lapacke.h>
#endif

namespace keyrate {

namespace {

constexpr double kSymTol = 1e-12;

}  // namespace

BlockStructure block_structure(int m) {
    if (m < 1 || m > 1024) {
        throw std::invalid_argument("block_structure: m must be in [1, 1024], got " +
                                    std::to_string(m));
    }
    BlockStructure out;
    out.m = m;
    out.blocks.reserve(static_cast<size_t>(m / 2 + 1));
    for (int two_j = m; two_j >= 0; two_j -= 2) {
        const unsigned long n_low = static_cast<unsigned long>((m - two_j) / 2);
        SchurBlock block;
        block.two_j = two_j;
        block.dim = two_j + 1;
        mpz_bin_uiui(block.multiplicity.get_mpz_t(), static_cast<unsigned long>(m), n_low);
        if (n_low >= 1) {
            mpz_class lower;
            mpz_bin_uiui(lower.get_mpz_t(), static_cast<unsigned long>(m), n_low - 1);
            block.multiplicity -= lower;
        }
        long exp2 = 0;
        const double mantissa = mpz_get_d_2exp(&exp2, block.multiplicity.get_mpz_t());
        block.log2_multiplicity = std::log2(mantissa) + static_cast<double>(exp2);
        out.blocks.push_back(std::move(block));
    }
    return out;
}

double rotation_angle(const Eigen::Matrix2d& rho) {
    const double scale = rho.cwiseAbs().maxCoeff();
    if (std::abs(rho(0, 1) - rho(1, 0)) > kSymTol * std::max(1.0, scale)) {
        throw std::invalid_argument("rotation_angle: matrix is not symmetric");
    }
    const double off_twice = rho(0, 1) + rho(1, 0);
    const double diag_gap = rho(0, 0) - rho(1, 1);
    if (off_twice == 0.0 && diag_gap == 0.0) return 0.0;
    return std::atan2(off_twice, diag_gap);
}

namespace {

// Eigensystem of the real symmetric tridiagonal matrix T with zero diagonal
// and off-diagonal entries c_i = sqrt((i+1)(two_j - i)). The rotation sector
// at any angle is assembled from this theta-independent factorization:
// conjugating the antisymmetric generator by diag(i^a) turns it into i*T, so
//   exp((theta/2)(Jp - Jm))_{ab} = Re[ i^{b-a} (C + iS)_{ab} ]
// with C = V cos((theta/2) L) V^T and S = V sin((theta/2) L) V^T.
struct GeneratorBasis {
    Eigen::VectorXd evals;
    Eigen::MatrixXd evecs;
};

const GeneratorBasis& generator_basis(int two_j) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const GeneratorBasis>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(two_j);
    if (it != cache.end()) return *it->second;

    const int d = two_j + 1;
    auto basis = std::make_unique<GeneratorBasis>();
    if (d == 1) {
        basis->evals = Eigen::VectorXd::Zero(1);
        basis->evecs = Eigen::MatrixXd::Identity(1, 1);
    } else {
        Eigen::VectorXd off(d - 1);
        for (int i = 0; i + 1 < d; ++i) {
            off[i] = std::sqrt(static_cast<double>(i + 1) * static_cast<double>(two_j - i));
        }
#ifdef KEYRATE_HAVE_LAPACKE
        basis->evals = Eigen::VectorXd::Zero(d);
        basis->evecs.resize(d, d);
        int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', d, basis->evals.data(), off.data(),
                                  basis->evecs.data(), d);
        if (info != 0) {
            throw numerical_error("dstevd failed for sector two_j=" + std::to_string(two_j) +
                                  ", info=" + std::to_string(info));
        }
#else
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i + 1 < d; ++i) {
            t(i + 1, i) = off[i];
            t(i, i + 1) = off[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
        if (solver.info() != Eigen::Success) {
            throw numerical_error("generator eigensolve did not converge, two_j=" +
                                  std::to_string(two_j));
        }
        basis->evals = solver.eigenvalues();
        basis->evecs = solver.eigenvectors();
#endif
    }
    const GeneratorBasis& ref = *basis;
    cache.emplace(two_j, std::move(basis));
    return ref;
}

}  // namespace

Eigen::MatrixXd wigner_block(int two_j, double theta) {
    if (two_j < 0) {
        throw std::invalid_argument("wigner_block: two_j must be nonnegative, got " +
                                    std::to_string(two_j));
    }
    const int d = two_j + 1;
    const GeneratorBasis& basis = generator_basis(two_j);
    const Eigen::ArrayXd phases = (0.5 * theta) * basis.evals.array();
    const Eigen::MatrixXd cos_part =
        basis.evecs * phases.cos().matrix().asDiagonal() * basis.evecs.transpose();
    const Eigen::MatrixXd sin_part =
        basis.evecs * phases.sin().matrix().asDiagonal() * basis.evecs.transpose();

    Eigen::MatrixXd block(d, d);
    for (int col = 0; col < d; ++col) {
        for (int row = 0; row < d; ++row) {
            switch ((col - row) & 3) {
                case 0: block(row, col) = cos_part(row, col); break;
                case 1: block(row, col) = -sin_part(row, col); break;
                case 2: block(row, col) = -cos_part(row, col); break;
                default: block(row, col) = sin_part(row, col); break;
            }
        }
    }
    return block;
}

Eigen::VectorXd diagonal_block(int two_j, double lambda1, double lambda2, int m) {
    if (two_j < 0 || two_j > m || ((m - two_j) & 1) != 0) {
        throw std::invalid_argument("diagonal_block: need 0 <= two_j <= m with matching parity");
    }
    if (lambda2 < -kSymTol || lambda1 < lambda2 - kSymTol) {
        throw std::invalid_argument("diagonal_block: need lambda1 >= lambda2 >= 0");
    }
    lambda2 = std::max(lambda2, 0.0);
    lambda1 = std::max(lambda1, lambda2);
    const double shared = std::pow(lambda1 * lambda2, (m - two_j) / 2);
    Eigen::VectorXd diag(two_j + 1);
    for (int i = 0; i <= two_j; ++i) {
        diag[i] = shared * std::pow(lambda1, two_j - i) * std::pow(lambda2, i);
    }
    return diag;
}

namespace {

struct PreparedTerm {
    double weight = 0.0;
    double lambda1 = 0.0;
    double ratio = 0.0;  // lambda2 / lambda1
    double theta = 0.0;
    double log2_l1 = 0.0;
    double log2_l2 = 0.0;  // -inf for pure states
};

PreparedTerm prepare_term(const MixtureTerm& term) {
    if (!(term.weight >= 0.0)) {
        throw std::invalid_argument("mixture_entropy: weights must be nonnegative");
    }
    const Eigen::Matrix2d& rho = term.state;
    PreparedTerm prep;
    prep.weight = term.weight;
    prep.theta = rotation_angle(rho);  // also validates symmetry
    const double trace = rho(0, 0) + rho(1, 1);
    if (std::abs(trace - 1.0) > 1e-9) {
        throw std::invalid_argument("mixture_entropy: states must have unit trace");
    }
    const double gap = std::hypot(rho(0, 0) - rho(1, 1), rho(0, 1) + rho(1, 0));
    double l1 = 0.5 * trace + 0.5 * gap;
    double l2 = 0.5 * trace - 0.5 * gap;
    if (l2 < -kSymTol) {
        throw std::invalid_argument("mixture_entropy: state is not positive semidefinite");
    }
    l2 = std::max(l2, 0.0);
    prep.lambda1 = l1;
    prep.ratio = l2 / l1;  // l1 >= trace/2 = 1/2 > 0
    prep.log2_l1 = std::log2(l1);
    prep.log2_l2 = std::log2(l2);  // -inf when l2 == 0
    return prep;
}

}  // namespace

double mixture_entropy(const std::vector<MixtureTerm>& terms, int m) {
    if (terms.empty()) {
        throw std::invalid_argument("mixture_entropy: at least one term required");
    }
    double weight_sum = 0.0;
    std::vector<PreparedTerm> prepared;
    prepared.reserve(terms.size());
    for (const MixtureTerm& term : terms) {
        PreparedTerm prep = prepare_term(term);
        weight_sum += prep.weight;
        if (prep.weight > 0.0) prepared.push_back(prep);
    }
    if (weight_sum > 1.0 + 1e-12) {
        throw std::invalid_argument("mixture_entropy: weights sum to " +
                                    std::to_string(weight_sum) + " > 1");
    }
    if (prepared.empty()) return 0.0;

    const BlockStructure structure = block_structure(m);
    double total = 0.0;
    for (const SchurBlock& block : structure.blocks) {
        const int two_j = block.two_j;
        const int d = block.dim;

        // Per-sector scale of each term: the largest diagonal entry of its
        // diagonal_block, folded out so the assembled matrix has O(1) norm.
        // log2_scale_t = log2(w_t) + ((m+two_j)/2) log2(l1) + ((m-two_j)/2) log2(l2).
        double log2_ref = -std::numeric_limits<double>::infinity();
        std::vector<double> log2_scale(prepared.size());
        for (size_t t = 0; t < prepared.size(); ++t) {
            const PreparedTerm& pt = prepared[t];
            log2_scale[t] = std::log2(pt.weight) + 0.5 * (m + two_j) * pt.log2_l1 +
                            (m == two_j ? 0.0 : 0.5 * (m - two_j) * pt.log2_l2);
            log2_ref = std::max(log2_ref, log2_scale[t]);
        }
        // Contributions below ~2^-200 of the total are beyond double precision.
        if (!(block.log2_multiplicity + log2_ref > -200.0)) continue;

        Eigen::MatrixXd assembled = Eigen::MatrixXd::Zero(d, d);
        for (size_t t = 0; t < prepared.size(); ++t) {
            const PreparedTerm& pt = prepared[t];
            const double rel = std::exp2(log2_scale[t] - log2_ref);
            if (rel == 0.0) continue;
            Eigen::VectorXd core(d);
            double entry = 1.0;
            for (int i = 0; i < d; ++i) {
                core[i] = entry;
                entry *= pt.ratio;
            }
            const Eigen::MatrixXd rot = wigner_block(two_j, pt.theta);
            assembled.noalias() += (rel * rot) * core.asDiagonal() * rot.transpose();
        }

        const Eigen::VectorXd mu = symmetric_eigenvalues(assembled);
        const double block_entropy =
            entropy_from_eigenvalues({mu.data(), static_cast<size_t>(mu.size())});
        double block_trace = 0.0;
        for (int i = 0; i < d; ++i) block_trace += std::max(mu[i], 0.0);
        // S contribution: N_Y * sum(-c*mu log2(c*mu)) with c = 2^log2_ref.
        total += std::exp2(block.log2_multiplicity + log2_ref) *
                 (block_entropy - block_trace * log2_ref);
    }
    return total;
}

}  // namespace keyrate
