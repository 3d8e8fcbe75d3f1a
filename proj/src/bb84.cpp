#include "keyrate/bb84.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "internal_util.hpp"
#include "keyrate/entropy.hpp"
#include "keyrate/optimize.hpp"
#include "keyrate/parallel.hpp"
#include "keyrate/schur.hpp"

namespace keyrate {
namespace {

constexpr double kSlack = 1e-12;

// Blocks whose total log2 weight falls below this bound contribute less than
// ~1e-30 even against the largest possible entropy bracket and are skipped.
constexpr double kLog2Skip = -120.0;

double checked_rate(double x, const char* name, double hi) {
    if (!(x >= -kSlack && x <= hi + kSlack)) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, " +
                                    std::to_string(hi) + "]");
    }
    return std::clamp(x, 0.0, hi);
}

}  // namespace

BitPhaseDistribution bb84_family(double p, double t) {
    p = checked_rate(p, "p", 0.5);
    const double t_lo = std::max(0.0, 2.0 * p - 1.0);
    if (!(t >= t_lo - kSlack && t <= p + kSlack)) {
        throw std::invalid_argument("t must lie in [max(0, 2p-1), p]");
    }
    t = std::clamp(t, t_lo, p);
    return BitPhaseDistribution{1.0 - 2.0 * p + t, p - t, t, p - t};
}

double p_tilde(double p, double q) {
    p = checked_rate(p, "p", 0.5);
    q = checked_rate(q, "q", 0.5);
    // Either rate at exactly 1/2 makes the folded flip unbiased for every
    // value of the other; return the exact fixed point so downstream
    // identities at full randomization hold bitwise.
    if (p == 0.5 || q == 0.5) return 0.5;
    return p * (1.0 - q) + (1.0 - p) * q;
}

SyndromeWeightTable syndrome_table(int m, double p_tilde_in) {
    if (m < 1) throw std::invalid_argument("syndrome_table: m must be >= 1");
    // The class statistics are well defined on all of [0, 1]; rates above 1/2
    // arise for 6-state channels with p > 1/2.
    const double pt = checked_rate(p_tilde_in, "p_tilde", 1.0);

    SyndromeWeightTable table;
    table.m = m;
    table.p_tilde = pt;
    table.mass0.resize(m);
    table.mass1.resize(m);
    table.cond1.resize(m);

    const double log_ratio = (pt == 0.0) ? std::numeric_limits<double>::infinity()
                                         : std::log((1.0 - pt) / pt);
    for (int s = 0; s < m; ++s) {
        const double lc = detail::lchoose(m - 1, s);
        table.mass0[s] = std::exp(lc + detail::wlog(s, pt) + detail::wlog(m - s, 1.0 - pt));
        table.mass1[s] = std::exp(lc + detail::wlog(m - s, pt) + detail::wlog(s, 1.0 - pt));
        const int d = m - 2 * s;
        // P(l_x=1 | s) as a logistic in d * log_ratio; d != 0 keeps the
        // product well defined even when log_ratio is infinite.
        table.cond1[s] = (d == 0) ? 0.5 : 1.0 / (1.0 + std::exp(d * log_ratio));
    }
    return table;
}

double mutual_info_xy(int m, double p_tilde_in) {
    const SyndromeWeightTable table = syndrome_table(m, p_tilde_in);
    // At an unbiased flip every syndrome class has conditional entropy
    // exactly 1, so the information is exactly 0; short-circuiting avoids
    // returning rounding dust from the mass sum, whose sign is meaningless.
    if (p_tilde_in == 0.5) return 0.0;
    double equivocation = 0.0;
    for (int s = 0; s < m; ++s) {
        equivocation += (table.mass0[s] + table.mass1[s]) * binary_entropy(table.cond1[s]);
    }
    return 1.0 - equivocation;
}

Eigen::Matrix2d bb84_state(double p, double q) {
    p = checked_rate(p, "p", 0.5);
    q = checked_rate(q, "q", 0.5);
    const double off = (1.0 - 2.0 * q) * std::sqrt(p * (1.0 - p));
    Eigen::Matrix2d rho;
    rho << 1.0 - p, off, off, p;
    return rho;
}

double mutual_info_xe_bb84(int m, double p, double q) {
    p = checked_rate(p, "p", 0.5);
    q = checked_rate(q, "q", 0.5);
    // Full randomization decouples the key bit from everything, so the
    // adversary information is exactly 0.
    if (q == 0.5) {
        (void)block_structure(m);  // keep the m-domain check
        return 0.0;
    }

    const Eigen::Matrix2d rho = bb84_state(p, q);
    const double gap =
        std::sqrt(std::max(1.0 - 16.0 * p * (1.0 - p) * q * (1.0 - q), 0.0));
    const double l1 = 0.5 * (1.0 + gap);
    const double l2 = 0.5 * (1.0 - gap);
    const double s_rho = binary_entropy(l1);
    const double theta = rotation_angle(rho);
    const double ratio = std::max(l2, 0.0) / l1;  // l1 >= 1/2 > 0 always
    const double log2_l1 = std::log2(l1);
    const double log2_l2 =
        (l2 > 0.0) ? std::log2(l2) : -std::numeric_limits<double>::infinity();

    const BlockStructure structure = block_structure(m);
    std::vector<double> contrib(structure.blocks.size(), 0.0);

    parallel_for(structure.blocks.size(), [&](std::size_t bi) {
        const SchurBlock& blk = structure.blocks[bi];
        const int two_j = blk.two_j;
        const int d = blk.dim;

        // Per-copy scale of this sector's matrix; the sector is assembled at
        // unit leading eigenvalue and the scale reattached in log space.
        const double log2_scale = 0.5 * (m + two_j) * log2_l1 +
                                  (two_j == m ? 0.0 : 0.5 * (m - two_j) * log2_l2);
        const double log2_weight = blk.log2_multiplicity + log2_scale;
        if (!(log2_weight > kLog2Skip)) return;

        // W = wigner * sqrt(core), so the sector of rho^{(x)m} is W W^T.
        Eigen::MatrixXd w = wigner_block(two_j, theta);
        for (int i = 0; i < d; ++i) {
            w.col(i) *= std::pow(ratio, 0.5 * i);
        }

        // Mixing with the sign-flipped copy zeroes every entry connecting
        // even and odd indices, so the spectrum splits into the two
        // parity-diagonal Gram matrices.
        const int n_even = (d + 1) / 2;
        const int n_odd = d / 2;
        const Eigen::MatrixXd w_even = w(Eigen::seqN(0, n_even, 2), Eigen::all);
        std::vector<double> mu;
        mu.reserve(d);
        {
            const Eigen::MatrixXd gram = w_even * w_even.transpose();
            const Eigen::VectorXd ev = symmetric_eigenvalues(gram);
            mu.insert(mu.end(), ev.data(), ev.data() + ev.size());
        }
        if (n_odd > 0) {
            const Eigen::MatrixXd w_odd = w(Eigen::seqN(1, n_odd, 2), Eigen::all);
            const Eigen::MatrixXd gram = w_odd * w_odd.transpose();
            const Eigen::VectorXd ev = symmetric_eigenvalues(gram);
            mu.insert(mu.end(), ev.data(), ev.data() + ev.size());
        }

        const double h = entropy_from_eigenvalues(mu);
        double trace = 0.0;
        for (double v : mu) trace += std::max(v, 0.0);
        contrib[bi] = std::exp2(log2_weight) * (h - trace * log2_scale);
    });

    double s_mix = 0.0;
    for (double c : contrib) s_mix += c;
    return s_mix - m * s_rho;
}

double rate_bb84(int m, double p, double q) {
    const double i_xy = mutual_info_xy(m, p_tilde(p, q));
    const double i_xe = mutual_info_xe_bb84(m, p, q);
    return (i_xy - i_xe) / m;
}

OptimizationResult rate_bb84_opt(int m, double p) {
    return maximize_over_noise([m, p](double q) { return rate_bb84(m, p, q); },
                               0.0, 0.5);
}

OptimizationResult rate_bb84_opt(int m, double p, double q_hint) {
    return maximize_over_noise([m, p](double q) { return rate_bb84(m, p, q); },
                               0.0, 0.5, q_hint);
}

}  // namespace keyrate
