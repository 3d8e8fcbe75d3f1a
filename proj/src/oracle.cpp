#include "keyrate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "keyrate/entropy.hpp"
#include "keyrate/iterated.hpp"

namespace keyrate {
namespace oracle {
namespace {

constexpr double kSlack = 1e-12;

int popcount(int x) { return __builtin_popcount(static_cast<unsigned>(x)); }

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double vn_bits(const Eigen::MatrixXd& rho) {
    const Eigen::VectorXd mu = symmetric_eigenvalues(rho);
    return entropy_from_eigenvalues(std::span<const double>(mu.data(), mu.size()));
}

// Probability of the bit pattern `bits` under iid Bernoulli(p1) per position.
double pattern_prob(int bits, int n, double p1) {
    double prob = 1.0;
    for (int i = 0; i < n; ++i) {
        prob *= ((bits >> i) & 1) ? p1 : 1.0 - p1;
    }
    return prob;
}

int dot_gf2(int bits, const std::vector<int>& v) {
    int acc = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc ^= ((bits >> i) & 1) & v[i];
    }
    return acc;
}

// Shared core of the attacker-information oracles: positions carry
// independent bit errors u_i ~ Bernoulli(pu1) and conditional phase errors
// v_i ~ Bernoulli(c0 / c1 given u_i = 0 / 1). For each u the phase register
// is an explicit pure state dephased at rate q; the key bit conjugates it by
// Z on every position.
double eve_core(int m, double pu1, double c0, double c1, double q) {
    if (m < 1 || m > 4) {
        throw std::invalid_argument("eve oracle supports 1 <= m <= 4");
    }
    if (!(q >= -kSlack && q <= 0.5 + kSlack)) {
        throw std::invalid_argument("q must lie in [0, 1/2]");
    }
    q = std::clamp(q, 0.0, 0.5);
    const double damp = 1.0 - 2.0 * q;
    const int dim = 1 << m;

    double info = 0.0;
    for (int u = 0; u < dim; ++u) {
        const double pu = pattern_prob(u, m, pu1);
        if (pu == 0.0) continue;

        Eigen::VectorXd psi(dim);
        for (int a = 0; a < dim; ++a) {
            double amp = 1.0;
            for (int i = 0; i < m; ++i) {
                const double c = ((u >> i) & 1) ? c1 : c0;
                amp *= std::sqrt(((a >> i) & 1) ? c : 1.0 - c);
            }
            psi(a) = amp;
        }

        Eigen::MatrixXd rho0(dim, dim), rho1(dim, dim);
        for (int a = 0; a < dim; ++a) {
            for (int b = 0; b < dim; ++b) {
                const double v = psi(a) * psi(b) * std::pow(damp, popcount(a ^ b));
                rho0(a, b) = v;
                rho1(a, b) = ((popcount(a) + popcount(b)) & 1) ? -v : v;
            }
        }
        const Eigen::MatrixXd mix = 0.5 * (rho0 + rho1);
        info += pu * (vn_bits(mix) - 0.5 * vn_bits(rho0) - 0.5 * vn_bits(rho1));
    }
    return info;
}

}  // namespace

CatCodeBasis cat_code_basis(int m) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    CatCodeBasis basis;
    basis.m = m;
    basis.xi.assign(m, std::vector<int>(m, 0));
    basis.eta.assign(m, std::vector<int>(m, 0));
    for (int i = 0; i + 1 < m; ++i) {
        basis.xi[i][0] = 1;
        basis.xi[i][i + 1] = 1;
        basis.eta[i][i + 1] = 1;
    }
    basis.xi[m - 1][0] = 1;
    basis.eta[m - 1].assign(m, 1);
    return basis;
}

double dense_mixture_entropy(const std::vector<MixtureTerm>& terms, int m) {
    if (m < 1 || m > 12) {
        throw std::invalid_argument("dense_mixture_entropy supports 1 <= m <= 12");
    }
    const int dim = 1 << m;
    Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(dim, dim);
    double weight_sum = 0.0;
    for (const MixtureTerm& term : terms) {
        if (!(term.weight >= 0.0)) {
            throw std::invalid_argument("mixture weights must be nonnegative");
        }
        weight_sum += term.weight;
        if (term.weight == 0.0) continue;
        if (std::abs(term.state.trace() - 1.0) > 1e-9) {
            throw std::invalid_argument("mixture states must have unit trace");
        }
        Eigen::MatrixXd power = term.state;
        for (int i = 1; i < m; ++i) power = kron(power, term.state);
        mix += term.weight * power;
    }
    if (weight_sum > 1.0 + kSlack) {
        throw std::invalid_argument("mixture weights must sum to at most 1");
    }
    if (terms.empty() || weight_sum == 0.0) return 0.0;
    return vn_bits(mix);
}

double enumerate_xy(int m, double p_tilde) {
    if (m < 1 || m > 6) throw std::invalid_argument("enumerate_xy supports 1 <= m <= 6");
    if (!(p_tilde >= -kSlack && p_tilde <= 1.0 + kSlack)) {
        throw std::invalid_argument("p_tilde must lie in [0, 1]");
    }
    p_tilde = std::clamp(p_tilde, 0.0, 1.0);

    const CatCodeBasis basis = cat_code_basis(m);
    const int dim = 1 << m;
    const int n_syn = 1 << (m - 1);
    std::vector<double> mass0(n_syn, 0.0), mass1(n_syn, 0.0);
    for (int u = 0; u < dim; ++u) {
        const double prob = pattern_prob(u, m, p_tilde);
        const int lx = dot_gf2(u, basis.xi[m - 1]);
        int key = 0;
        for (int i = 0; i + 1 < m; ++i) {
            key |= dot_gf2(u, basis.xi[i]) << i;
        }
        (lx ? mass1 : mass0)[key] += prob;
    }

    double equivocation = 0.0;
    for (int key = 0; key < n_syn; ++key) {
        const double tot = mass0[key] + mass1[key];
        if (tot <= 0.0) continue;
        equivocation += tot * binary_entropy(mass1[key] / tot);
    }
    return 1.0 - equivocation;
}

double eve_mutual_info(int m, const BitPhaseDistribution& joint, double q) {
    const double probs[4] = {joint.p00, joint.p10, joint.p11, joint.p01};
    double sum = 0.0;
    for (double v : probs) {
        if (v < -kSlack) {
            throw std::invalid_argument("joint distribution entries must be nonnegative");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("joint distribution must sum to 1");
    }
    return eve_core(m, joint.bit_error(), joint.phase_given_u0(),
                    joint.phase_given_u1(), q);
}

double eve_mutual_info(int m, const SixStateChannel& channel, double q) {
    return eve_core(m, channel.p, channel.phase_given_u0(), channel.phase_given_u1(),
                    q);
}

double independent_error_check(int m, double p, double q,
                               const std::vector<double>& t_grid) {
    if (m < 1 || m > 3) {
        throw std::invalid_argument("independent_error_check supports 1 <= m <= 3");
    }
    const double base = eve_mutual_info(m, bb84_family(p, p * p), q);
    double worst = -std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        worst = std::max(worst, eve_mutual_info(m, bb84_family(p, t), q) - base);
    }
    return worst;
}

IteratedCheck iterated_enumeration_check(int m1, int m2, double p, double q,
                                         double big_q) {
    if (m1 < 1 || m1 > 3 || m2 < 1 || m2 > 3) {
        throw std::invalid_argument("iterated_enumeration_check supports m1, m2 <= 3");
    }
    const IteratedParams params{m1, m2, q, big_q};
    (void)q_tot(params);  // validates q and Q
    const double pt = p_tilde(p, q);
    const int n = m1 * m2;
    const int dim = 1 << n;
    const int dim_f = 1 << m2;

    IteratedCheck out;

    // Bob's side: every inner error vector and every second-layer flip
    // vector, grouped by the exact view (all inner syndrome vectors plus the
    // outer syndrome vector).
    {
        const int key_bits = m2 * (m1 - 1) + (m2 - 1);
        std::vector<double> mass0(std::size_t{1} << key_bits, 0.0);
        std::vector<double> mass1(std::size_t{1} << key_bits, 0.0);
        for (int e = 0; e < dim; ++e) {
            const double pe = pattern_prob(e, n, pt);
            if (pe == 0.0) continue;
            for (int f = 0; f < dim_f; ++f) {
                const double pf = pattern_prob(f, m2, big_q);
                if (pf == 0.0) continue;

                int key = 0;
                int shift = 0;
                int b_bits = 0;
                for (int i = 0; i < m2; ++i) {
                    const int block = (e >> (i * m1)) & ((1 << m1) - 1);
                    const int first = block & 1;
                    // Inner syndrome: first bit XOR each later bit.
                    const int sigma = (first ? ~block : block) >> 1;
                    key |= (sigma & ((1 << (m1 - 1)) - 1)) << shift;
                    shift += m1 - 1;
                    b_bits |= (first ^ ((f >> i) & 1)) << i;
                }
                const int big_l = b_bits & 1;
                const int outer = ((big_l ? ~b_bits : b_bits) >> 1) & ((1 << (m2 - 1)) - 1);
                key |= outer << shift;

                (big_l ? mass1 : mass0)[key] += pe * pf;
            }
        }
        double equivocation = 0.0;
        for (std::size_t k = 0; k < mass0.size(); ++k) {
            const double tot = mass0[k] + mass1[k];
            if (tot <= 0.0) continue;
            equivocation += tot * binary_entropy(mass1[k] / tot);
        }
        out.i_xy = 1.0 - equivocation;
    }

    // Attacker's side: at independent errors the phase register's state does
    // not depend on the bit-error pattern, so a single dense pair of
    // conditional states suffices. The second noise layer dephases each
    // inner block's parity.
    {
        const double damp_q = 1.0 - 2.0 * std::clamp(q, 0.0, 0.5);
        const double damp_bq = 1.0 - 2.0 * std::clamp(big_q, 0.0, 0.5);
        Eigen::VectorXd psi(dim);
        for (int a = 0; a < dim; ++a) {
            psi(a) = std::sqrt(pattern_prob(a, n, p));
        }
        Eigen::MatrixXd rho0(dim, dim), rho1(dim, dim);
        for (int a = 0; a < dim; ++a) {
            for (int b = 0; b < dim; ++b) {
                double v = psi(a) * psi(b) * std::pow(damp_q, popcount(a ^ b));
                for (int i = 0; i < m2; ++i) {
                    const int mask = ((1 << m1) - 1) << (i * m1);
                    if ((popcount(a & mask) + popcount(b & mask)) & 1) v *= damp_bq;
                }
                rho0(a, b) = v;
                rho1(a, b) = ((popcount(a) + popcount(b)) & 1) ? -v : v;
            }
        }
        const Eigen::MatrixXd mix = 0.5 * (rho0 + rho1);
        out.i_xe = vn_bits(mix) - 0.5 * vn_bits(rho0) - 0.5 * vn_bits(rho1);
    }

    return out;
}

double full_rate_check(int m, double p, double q) {
    if (m < 1 || m > 4) throw std::invalid_argument("full_rate_check supports 1 <= m <= 4");
    const double i_xy = enumerate_xy(m, p_tilde(p, q));
    const double i_xe = eve_mutual_info(m, bb84_family(p, p * p), q);
    return (i_xy - i_xe) / m;
}

}  // namespace oracle
}  // namespace keyrate
