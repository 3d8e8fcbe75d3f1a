#include "keyrate/iterated.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "internal_util.hpp"
#include "keyrate/bb84.hpp"
#include "keyrate/entropy.hpp"
#include "keyrate/schur.hpp"

namespace keyrate {
namespace {

constexpr double kSlack = 1e-12;
constexpr double kClassBudget = 2e6;
constexpr int kDenseQubitCap = 13;

void check_params(const IteratedParams& params) {
    if (params.m1 < 1 || params.m2 < 1) {
        throw std::invalid_argument("block sizes m1, m2 must be >= 1");
    }
    if (!(params.q >= -kSlack && params.q <= 0.5 + kSlack)) {
        throw std::invalid_argument("q must lie in [0, 1/2]");
    }
    if (!(params.big_q >= -kSlack && params.big_q <= 0.5 + kSlack)) {
        throw std::invalid_argument("Q must lie in [0, 1/2]");
    }
}

double clamped(double x) { return std::clamp(x, 0.0, 0.5); }

// ln of the multinomial coefficient size! / prod (run lengths)! of a sorted
// weight list.
double ln_multinomial(const std::vector<int>& sorted) {
    double ln = std::lgamma(static_cast<double>(sorted.size()) + 1.0);
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        ln -= std::lgamma(static_cast<double>(j - i) + 1.0);
        i = j;
    }
    return ln;
}

// Enumerate nondecreasing length-`size` sequences over {0, ..., max_v - 1}
// in lexicographic order.
template <typename Emit>
void enumerate_multisets(int size, int max_v, int min_v, std::vector<int>& buf,
                         const Emit& emit) {
    if (static_cast<int>(buf.size()) == size) {
        emit(buf);
        return;
    }
    for (int v = min_v; v < max_v; ++v) {
        buf.push_back(v);
        enumerate_multisets(size, max_v, v, buf, emit);
        buf.pop_back();
    }
}

double safe_log(double x) {
    return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

}  // namespace

double q_tot(const IteratedParams& params) {
    check_params(params);
    const double q = clamped(params.q);
    const double bq = clamped(params.big_q);
    // Either layer at exactly 1/2 makes the combined flip unbiased for every
    // value of the other layer; return the exact fixed point.
    if (q == 0.5 || bq == 0.5) return 0.5;
    return q * (1.0 - bq) + (1.0 - q) * bq;
}

double IteratedSyndromeDistribution::total_mass() const {
    double total = 0.0;
    for (const IteratedSyndromeClass& cls : classes) total += cls.mass0 + cls.mass1;
    return total;
}

IteratedSyndromeDistribution iterated_syndrome_distribution(const IteratedParams& params,
                                                            double p) {
    check_params(params);
    const int m1 = params.m1;
    const int m2 = params.m2;
    const double q = clamped(params.q);
    const double bq = clamped(params.big_q);

    // Budget guard: number of compressed classes is
    // sum_S multiset_count(m2 - S) * multiset_count(S) over weights s in
    // {0..m1-1}.
    double n_classes = 0.0;
    for (int S = 0; S <= m2 - 1; ++S) {
        const double ms_same = std::exp(detail::lchoose(m2 - S + m1 - 2, m1 - 1));
        const double ms_flip = std::exp(detail::lchoose(S + m1 - 1, m1 - 1));
        n_classes += ms_same * ms_flip;
        if (!(n_classes <= kClassBudget)) {
            throw std::invalid_argument(
                "iterated syndrome class count exceeds the 2e6 budget");
        }
    }

    const SyndromeWeightTable inner = syndrome_table(m1, p_tilde(p, q));

    // Per-block mass of (effective key bit beta, inner weight class s) after
    // the second noise layer flips the inner key bit with probability Q.
    std::vector<double> ln_g0(m1), ln_g1(m1);
    for (int s = 0; s < m1; ++s) {
        ln_g0[s] = safe_log((1.0 - bq) * inner.mass0[s] + bq * inner.mass1[s]);
        ln_g1[s] = safe_log((1.0 - bq) * inner.mass1[s] + bq * inner.mass0[s]);
    }

    IteratedSyndromeDistribution dist;
    dist.m1 = m1;
    dist.m2 = m2;
    dist.classes.reserve(static_cast<std::size_t>(n_classes));

    std::vector<int> same_buf, flip_buf;
    for (int S = 0; S <= m2 - 1; ++S) {
        const double ln_outer = detail::lchoose(m2 - 1, S);
        enumerate_multisets(m2 - S, m1, 0, same_buf, [&](const std::vector<int>& same) {
            const double ln_same = ln_multinomial(same);
            enumerate_multisets(S, m1, 0, flip_buf, [&](const std::vector<int>& flip) {
                const double ln_count = ln_outer + ln_same + ln_multinomial(flip);
                double ln_p0 = ln_count;
                double ln_p1 = ln_count;
                for (int s : same) {
                    ln_p0 += ln_g0[s];
                    ln_p1 += ln_g1[s];
                }
                for (int s : flip) {
                    ln_p0 += ln_g1[s];
                    ln_p1 += ln_g0[s];
                }
                IteratedSyndromeClass cls;
                cls.outer_weight = S;
                cls.same_weights = same;
                cls.flip_weights = flip;
                cls.mass0 = std::exp(ln_p0);
                cls.mass1 = std::exp(ln_p1);
                dist.classes.push_back(std::move(cls));
            });
        });
    }
    return dist;
}

double mutual_info_xy_iterated(const IteratedParams& params, double p) {
    // Unbiased combined flip: the key bit is uniform and independent of the
    // announcement, so the information is exactly 0 (q_tot validates params).
    if (q_tot(params) == 0.5) {
        (void)p_tilde(p, 0.0);  // keep the p-domain check
        return 0.0;
    }
    const IteratedSyndromeDistribution dist = iterated_syndrome_distribution(params, p);
    double equivocation = 0.0;
    for (const IteratedSyndromeClass& cls : dist.classes) {
        const double tot = cls.mass0 + cls.mass1;
        if (tot <= 0.0) continue;
        equivocation += tot * binary_entropy(cls.mass1 / tot);
    }
    return 1.0 - equivocation;
}

double mutual_info_xe_iterated(const IteratedParams& params, double p) {
    check_params(params);
    const int m1 = params.m1;
    const int m2 = params.m2;
    if (m1 * m2 > kDenseQubitCap) {
        throw std::invalid_argument(
            "mutual_info_xe_iterated supports m1 * m2 <= 13 (dense dimension cap)");
    }
    const double q = clamped(params.q);
    const double bq = clamped(params.big_q);
    // Unbiased combined flip decouples the key bit from the adversary.
    if (q_tot(params) == 0.5) {
        (void)p_tilde(p, 0.0);  // keep the p-domain check
        return 0.0;
    }

    const Eigen::Matrix2d rho = bb84_state(p, q);
    Eigen::Matrix2d zrhoz = rho;
    zrhoz(0, 1) = -zrhoz(0, 1);
    zrhoz(1, 0) = -zrhoz(1, 0);

    // S(A) through the sector decomposition of the two-term mixture.
    const double s_a = mixture_entropy({{1.0 - bq, rho}, {bq, zrhoz}}, m1);

    // Dense A: A[a, b] = rho^{xm1}[a, b] * ((1-Q) + Q (-1)^{|a| + |b|}).
    const int dim1 = 1 << m1;
    Eigen::MatrixXd a_mat(dim1, dim1);
    for (int a = 0; a < dim1; ++a) {
        for (int b = a; b < dim1; ++b) {
            double v = 1.0;
            for (int i = 0; i < m1; ++i) {
                v *= rho((a >> i) & 1, (b >> i) & 1);
            }
            const int par = (__builtin_popcount(a) + __builtin_popcount(b)) & 1;
            v *= par ? (1.0 - 2.0 * bq) : 1.0;
            a_mat(a, b) = v;
            a_mat(b, a) = v;
        }
    }

    // 1/2 A^{xm2} + 1/2 B^{xm2} vanishes between indices of unequal popcount
    // parity and equals A^{xm2} elsewhere, so each parity sector is filled
    // directly and eigensolved on its own.
    const int n_tot = m1 * m2;
    const int dim = 1 << n_tot;
    const int mask1 = dim1 - 1;
    std::vector<int> sector[2];
    for (int idx = 0; idx < dim; ++idx) {
        sector[__builtin_popcount(idx) & 1].push_back(idx);
    }

    std::vector<double> spectrum;
    spectrum.reserve(dim);
    for (const std::vector<int>& idxs : sector) {
        const int n = static_cast<int>(idxs.size());
        if (n == 0) continue;
        Eigen::MatrixXd block(n, n);
        for (int r = 0; r < n; ++r) {
            for (int c = r; c < n; ++c) {
                const int alpha = idxs[r];
                const int beta = idxs[c];
                double v = 1.0;
                for (int i = 0; i < m2; ++i) {
                    v *= a_mat((alpha >> (i * m1)) & mask1, (beta >> (i * m1)) & mask1);
                }
                block(r, c) = v;
                block(c, r) = v;
            }
        }
        const Eigen::VectorXd mu = symmetric_eigenvalues(block);
        spectrum.insert(spectrum.end(), mu.data(), mu.data() + mu.size());
    }
    const double s_mix = entropy_from_eigenvalues(spectrum);

    return s_mix - m2 * s_a;
}

double rate_iterated(const IteratedParams& params, double p) {
    const double i_xy = mutual_info_xy_iterated(params, p);
    const double i_xe = mutual_info_xe_iterated(params, p);
    return (i_xy - i_xe) / (params.m1 * params.m2);
}

OptimizationResult rate_iterated_opt(int m1, int m2, double p) {
    return maximize_over_noise_2d(
        [m1, m2, p](double q, double bq) {
            return rate_iterated(IteratedParams{m1, m2, q, bq}, p);
        },
        0.0, 0.5, 0.0, 0.5);
}

OptimizationResult rate_iterated_opt(int m1, int m2, double p, double q_hint,
                                     double big_q_hint) {
    return maximize_over_noise_2d(
        [m1, m2, p](double q, double bq) {
            return rate_iterated(IteratedParams{m1, m2, q, bq}, p);
        },
        0.0, 0.5, 0.0, 0.5, q_hint, big_q_hint);
}

}  // namespace keyrate
