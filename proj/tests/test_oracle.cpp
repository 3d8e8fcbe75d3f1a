#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "keyrate/bb84.hpp"
#include "keyrate/entropy.hpp"
#include "keyrate/iterated.hpp"
#include "keyrate/oracle.hpp"
#include "keyrate/schur.hpp"
#include "keyrate/sixstate.hpp"

using namespace keyrate;

namespace {

int dot_gf2(const std::vector<int>& a, const std::vector<int>& b) {
    int acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc ^= (a[i] & b[i]);
    return acc;
}

}  // namespace

TEST_CASE("encoding basis and its dual satisfy exact biorthogonality") {
    for (int m : {1, 2, 3, 5, 16, 64}) {
        const oracle::CatCodeBasis basis = oracle::cat_code_basis(m);
        REQUIRE(static_cast<int>(basis.xi.size()) == m);
        REQUIRE(static_cast<int>(basis.eta.size()) == m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                CHECK(dot_gf2(basis.xi[i], basis.eta[j]) == (i == j ? 1 : 0));
            }
        }
    }
}

TEST_CASE("dense entropy of simple states") {
    using Term = MixtureTerm;
    Eigen::Matrix2d pure;
    pure << 1.0, 0.0, 0.0, 0.0;
    CHECK(std::abs(oracle::dense_mixture_entropy({Term{1.0, pure}}, 4)) <= 1e-12);

    Eigen::Matrix2d mixed;
    mixed << 0.5, 0.0, 0.0, 0.5;
    CHECK(std::abs(oracle::dense_mixture_entropy({Term{1.0, mixed}}, 3) - 3.0) <= 1e-12);

    CHECK_THROWS_AS(oracle::dense_mixture_entropy({Term{1.0, mixed}}, 13),
                    std::invalid_argument);
}

TEST_CASE("dense entropy agrees with the block-diagonal engine") {
    const Eigen::Matrix2d rho = bb84_state(0.10, 0.20);
    Eigen::Matrix2d conj = rho;
    conj(0, 1) = -conj(0, 1);
    conj(1, 0) = -conj(1, 0);
    const std::vector<MixtureTerm> terms{{0.6, rho}, {0.4, conj}};
    for (int m : {1, 2, 5, 9}) {
        CHECK(std::abs(oracle::dense_mixture_entropy(terms, m) -
                       mixture_entropy(terms, m)) <= 1e-9);
    }
}

TEST_CASE("exhaustive reconciliation information matches the fast formula") {
    CHECK(std::abs(oracle::enumerate_xy(1, 0.23) - (1.0 - binary_entropy(0.23))) <= 1e-14);
    for (int m = 1; m <= 6; ++m) {
        for (double pt : {0.0, 0.11, 0.37, 0.5}) {
            CHECK(std::abs(oracle::enumerate_xy(m, pt) - mutual_info_xy(m, pt)) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(oracle::enumerate_xy(7, 0.1), std::invalid_argument);
}

TEST_CASE("single-qubit adversary information has a closed form") {
    for (double p : {0.03, 0.11, 0.2}) {
        const BitPhaseDistribution d = bb84_family(p, p * p);
        CHECK(std::abs(oracle::eve_mutual_info(1, d, 0.0) - binary_entropy(p)) <= 1e-12);
        CHECK(std::abs(oracle::full_rate_check(1, p, 0.0) -
                       (1.0 - 2.0 * binary_entropy(p))) <= 1e-12);
    }
}

TEST_CASE("adversary information vanishes in degenerate regimes") {
    const BitPhaseDistribution clean{1.0, 0.0, 0.0, 0.0};
    for (int m : {1, 2, 3}) {
        CHECK(std::abs(oracle::eve_mutual_info(m, clean, 0.2)) <= 1e-10);
        CHECK(std::abs(oracle::eve_mutual_info(m, bb84_family(0.1, 0.05), 0.5)) <= 1e-10);
    }
    const SixStateChannel ch = sixstate_channel(0.1);
    CHECK(std::abs(oracle::eve_mutual_info(2, ch, 0.5)) <= 1e-10);
}

TEST_CASE("invalid joint distributions are rejected") {
    const BitPhaseDistribution bad{0.5, 0.5, 0.2, -0.2};
    CHECK_THROWS_AS(oracle::eve_mutual_info(2, bad, 0.0), std::invalid_argument);
}

TEST_CASE("exhaustive paths enforce their size caps") {
    CHECK_THROWS_AS(oracle::eve_mutual_info(5, bb84_family(0.1, 0.05), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle::independent_error_check(4, 0.1, 0.0, {0.05, 0.1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(oracle::full_rate_check(5, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("independent errors maximize the adversary information") {
    const double p = 0.08;
    const double t_lo = std::max(0.0, 2.0 * p - 1.0);
    std::vector<double> t_grid;
    for (int i = 0; i <= 20; ++i) t_grid.push_back(t_lo + (p - t_lo) * i / 20.0);
    for (int m : {1, 2, 3}) {
        CHECK(oracle::independent_error_check(m, p, 0.05, t_grid) <= 1e-9);
    }
}

TEST_CASE("two-level enumeration agrees with the production formulas") {
    const oracle::IteratedCheck ref = oracle::iterated_enumeration_check(2, 2, 0.08, 0.05, 0.07);
    const IteratedParams params{2, 2, 0.05, 0.07};
    CHECK(std::abs(ref.i_xy - mutual_info_xy_iterated(params, 0.08)) <= 1e-10);
    CHECK(std::abs(ref.i_xe - mutual_info_xe_iterated(params, 0.08)) <= 1e-10);
    CHECK_THROWS_AS(oracle::iterated_enumeration_check(4, 3, 0.08, 0.05, 0.07),
                    std::invalid_argument);
}

TEST_CASE("full brute-force rate agrees with the production rate") {
    for (const auto& [m, p, q] : std::vector<std::tuple<int, double, double>>{
             {2, 0.06, 0.0}, {3, 0.10, 0.05}, {4, 0.08, 0.15}}) {
        CHECK(std::abs(oracle::full_rate_check(m, p, q) - rate_bb84(m, p, q)) <= 1e-9);
    }
}
