#include "keyrate/sixstate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "internal_util.hpp"
#include "keyrate/entropy.hpp"
#include "keyrate/parallel.hpp"
#include "keyrate/schur.hpp"

namespace keyrate {
namespace {

constexpr double kSlack = 1e-12;
constexpr double kLog2Skip = -120.0;
const double kNegInf = -std::numeric_limits<double>::infinity();

double checked_q(double q) {
    if (!(q >= -kSlack && q <= 0.5 + kSlack)) {
        throw std::invalid_argument("q must lie in [0, 1/2]");
    }
    return std::clamp(q, 0.0, 0.5);
}

}  // namespace

SixStateChannel sixstate_channel(double p) {
    if (!(p >= -kSlack && p < 2.0 / 3.0)) {
        throw std::invalid_argument("p must lie in [0, 2/3) for the 6-state channel");
    }
    p = std::max(p, 0.0);
    SixStateChannel ch;
    ch.p = p;
    ch.p_prime = p / (2.0 * (1.0 - p));
    return ch;
}

Eigen::Matrix2d sixstate_gamma(double p, double q) {
    const SixStateChannel ch = sixstate_channel(p);
    q = checked_q(q);
    const double pp = ch.p_prime;
    const double off = (1.0 - 2.0 * q) * std::sqrt(pp * (1.0 - pp));
    Eigen::Matrix2d g;
    g << pp, off, off, 1.0 - pp;
    return g;
}

double mutual_info_xe_sixstate(int m, double p, double q) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    const SixStateChannel ch = sixstate_channel(p);
    p = ch.p;
    q = checked_q(q);
    // Full randomization decouples the key bit from everything, so the
    // adversary information is exactly 0.
    if (q == 0.5) return 0.0;
    const double pp = ch.p_prime;

    // Spectrum and angle of the error-free-position state gamma.
    const double gap =
        std::sqrt(std::max(1.0 - 16.0 * pp * (1.0 - pp) * q * (1.0 - q), 0.0));
    const double l1 = 0.5 * (1.0 + gap);
    const double l2 = 0.5 * (1.0 - gap);
    const double s_gamma = binary_entropy(l1);
    const double theta = rotation_angle(sixstate_gamma(p, q));
    const double ratio = std::max(l2, 0.0) / l1;
    const double log2_l1 = std::log2(l1);
    const double log2_l2 = (l2 > 0.0) ? std::log2(l2) : kNegInf;
    const double h_q = binary_entropy(q);
    const double log_q_ratio = (q == 0.0) ? std::numeric_limits<double>::infinity()
                                          : std::log((1.0 - q) / q);

    // Binomial weights of the bit-error pattern weight u; above m = 200,
    // weights below 1e-15 are dropped (total discarded mass < m * 1e-15). The
    // same bound prunes the inner flip-weight sum: terms whose joint mass
    // falls below it are skipped identically in both sweeps.
    const double mass_cutoff = (m > 200) ? std::log2(1e-15) : kNegInf;
    std::vector<double> log2_pu(m + 1);
    std::vector<int> kept_u;
    for (int u = 0; u <= m; ++u) {
        log2_pu[u] = detail::log2choose(m, u) + detail::wlog2(u, p) +
                     detail::wlog2(m - u, 1.0 - p);
        if (log2_pu[u] > mass_cutoff) kept_u.push_back(u);
    }

    // Sector data of the (m-u)-qubit tensor factor: the copy count and the
    // per-copy scale, both in log2.
    struct SectorW {
        int two_j;
        double log2_ncore;  // log2 multiplicity + log2 per-copy scale
        double log2_core;   // log2 per-copy scale alone
    };
    std::vector<std::vector<SectorW>> sectors(m + 1);
    for (int u : kept_u) {
        const int n = m - u;
        if (n == 0) continue;
        const BlockStructure bs = block_structure(n);
        sectors[u].reserve(bs.blocks.size());
        for (const SchurBlock& blk : bs.blocks) {
            const int tj = blk.two_j;
            const double log2_core =
                0.5 * (n + tj) * log2_l1 + (tj == n ? 0.0 : 0.5 * (n - tj) * log2_l2);
            sectors[u].push_back({tj, blk.log2_multiplicity + log2_core, log2_core});
        }
    }

    // Half the total weight of the two sign branches at flip pattern weight
    // (u, k), in log2; -inf when the branch pair is impossible (q = 0).
    auto log2_wsum_of = [&](int u, int k) {
        const double la =
            -1.0 + detail::wlog2(k, 1.0 - q) + detail::wlog2(u - k, q);
        const double lb =
            -1.0 + detail::wlog2(u - k, 1.0 - q) + detail::wlog2(k, q);
        return detail::logadd2(la, lb);
    };
    // Damping factor applied to odd-checkerboard sector entries; depends on
    // the flip-weight imbalance |2k - u| only.
    auto tau_of = [&](int abs_delta) -> double {
        if (abs_delta == 0) return 0.0;
        if (q == 0.0) return 1.0;
        return std::tanh(0.5 * abs_delta * log_q_ratio);
    };

    // Sweep 1: mark which (sector, imbalance) eigenproblems carry weight.
    std::vector<std::vector<char>> needed(m + 1, std::vector<char>(m + 1, 0));
    for (int u : kept_u) {
        if (m - u == 0) continue;
        for (int k = 0; k <= u; ++k) {
            const double lw = log2_wsum_of(u, k);
            if (lw == kNegInf) continue;
            const double log2_uk = log2_pu[u] + detail::log2choose(u, k) + lw;
            if (!(log2_uk > mass_cutoff)) continue;
            const int ad = std::abs(2 * k - u);
            for (const SectorW& sw : sectors[u]) {
                if (log2_uk + sw.log2_ncore > kLog2Skip) needed[sw.two_j][ad] = 1;
            }
        }
    }

    // Solve each marked eigenproblem once. Work is grouped by sector so the
    // sector matrix is assembled once and damped per imbalance value.
    struct Group {
        int two_j;
        std::vector<int> deltas;
    };
    std::vector<Group> groups;
    for (int tj = m; tj >= 0; --tj) {
        std::vector<int> ds;
        for (int ad = 0; ad <= m; ++ad) {
            if (needed[tj][ad]) ds.push_back(ad);
        }
        if (!ds.empty()) groups.push_back({tj, std::move(ds)});
    }

    std::vector<std::vector<double>> h_tab(m + 1), t_tab(m + 1);
    for (int tj = 0; tj <= m; ++tj) {
        h_tab[tj].assign(m + 1, 0.0);
        t_tab[tj].assign(m + 1, 0.0);
    }

    parallel_for(groups.size(), [&](std::size_t gi) {
        const Group& g = groups[gi];
        const int tj = g.two_j;
        const int d = tj + 1;
        Eigen::MatrixXd c;
        {
            const Eigen::MatrixXd w = wigner_block(tj, theta);
            Eigen::MatrixXd ws = w;
            for (int i = 0; i < d; ++i) ws.col(i) *= std::pow(ratio, i);
            c.noalias() = ws * w.transpose();
        }
        for (int ad : g.deltas) {
            const double tau = tau_of(ad);
            Eigen::MatrixXd e = c;
            for (int a = 0; a < d; ++a) {
                for (int b = 1 - (a % 2); b < d; b += 2) e(a, b) *= tau;
            }
            const Eigen::VectorXd mu = symmetric_eigenvalues(e);
            h_tab[tj][ad] =
                entropy_from_eigenvalues(std::span<const double>(mu.data(), mu.size()));
            double trace = 0.0;
            for (int i = 0; i < mu.size(); ++i) trace += std::max(mu(i), 0.0);
            t_tab[tj][ad] = trace;
        }
    });

    // Sweep 2: accumulate in a fixed order (u ascending, k ascending, sectors
    // descending), then subtract the conditional entropies.
    double total = 0.0;
    for (int u : kept_u) {
        const int n = m - u;
        for (int k = 0; k <= u; ++k) {
            const double lw = log2_wsum_of(u, k);
            if (lw == kNegInf) continue;
            const double log2_uk = log2_pu[u] + detail::log2choose(u, k) + lw;
            if (!(log2_uk > mass_cutoff)) continue;
            if (n == 0) {
                // Zero-dimensional tensor factor: the branch pair is a scalar.
                total += std::exp2(log2_uk) * (-lw);
                continue;
            }
            const int ad = std::abs(2 * k - u);
            for (const SectorW& sw : sectors[u]) {
                const double log2_w = log2_uk + sw.log2_ncore;
                if (!(log2_w > kLog2Skip)) continue;
                const double log2_c = lw + sw.log2_core;
                total += std::exp2(log2_w) *
                         (h_tab[sw.two_j][ad] - t_tab[sw.two_j][ad] * log2_c);
            }
        }
        total -= std::exp2(log2_pu[u]) * (u * h_q + n * s_gamma);
    }
    return total;
}

double rate_sixstate(int m, double p, double q) {
    const SixStateChannel ch = sixstate_channel(p);
    q = checked_q(q);
    // q = 1/2 folds to an unbiased flip exactly, for every channel.
    const double pt = (q == 0.5) ? 0.5 : ch.p * (1.0 - q) + (1.0 - ch.p) * q;
    const double i_xy = mutual_info_xy(m, pt);
    const double i_xe = mutual_info_xe_sixstate(m, ch.p, q);
    return (i_xy - i_xe) / m;
}

double lo_rate(int m, double p) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    const SixStateChannel ch = sixstate_channel(p);
    p = ch.p;

    const double one_minus_2p = 1.0 - 2.0 * p;
    double equivocation = 0.0;
    for (int s = 0; s <= m - 1; ++s) {
        const double count = std::exp(detail::lchoose(m - 1, s));
        const double base0 =
            std::exp(detail::wlog(s, p) + detail::wlog(m - s, 1.0 - p));
        const double base1 =
            std::exp(detail::wlog(m - s, p) + detail::wlog(s, 1.0 - p));
        // The two logical-phase outcomes interfere only in the error-free
        // syndrome class; elsewhere they are equiprobable.
        const double interference = (s == 0) ? std::pow(one_minus_2p, m) : 0.0;
        double v[4] = {0.5 * (base0 + interference), 0.5 * (base0 - interference),
                       0.5 * base1, 0.5 * base1};
        double tot = 0.0;
        for (double& x : v) {
            if (x < -1e-12) {
                throw numerical_error("negative outcome probability in lo_rate");
            }
            if (x < 0.0) x = 0.0;
            tot += x;
        }
        if (tot <= 0.0) continue;
        const double cond[4] = {v[0] / tot, v[1] / tot, v[2] / tot, v[3] / tot};
        equivocation += count * tot * shannon_entropy(std::span<const double>(cond, 4));
    }
    return (1.0 - equivocation) / m;
}

OptimizationResult rate_sixstate_opt(int m, double p) {
    return maximize_over_noise(
        [m, p](double q) { return rate_sixstate(m, p, q); }, 0.0, 0.5);
}

OptimizationResult rate_sixstate_opt(int m, double p, double q_hint) {
    return maximize_over_noise(
        [m, p](double q) { return rate_sixstate(m, p, q); }, 0.0, 0.5, q_hint);
}

}  // namespace keyrate
