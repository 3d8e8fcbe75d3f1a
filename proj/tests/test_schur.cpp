#include <cmath>
#include <vector>

#include "doctest.h"
#include "keyrate/entropy.hpp"
#include "keyrate/schur.hpp"

using namespace keyrate;

namespace {

Eigen::Matrix2d symmetric2(double a, double b, double d) {
    Eigen::Matrix2d m;
    m << a, b, b, d;
    return m;
}

}  // namespace

TEST_CASE("sector decomposition of small qubit counts") {
    const BlockStructure one = block_structure(1);
    REQUIRE(one.blocks.size() == 1);
    CHECK(one.blocks[0].two_j == 1);
    CHECK(one.blocks[0].dim == 2);
    CHECK(one.blocks[0].multiplicity == 1);

    const BlockStructure two = block_structure(2);
    REQUIRE(two.blocks.size() == 2);
    CHECK(two.blocks[0].two_j == 2);
    CHECK(two.blocks[0].multiplicity == 1);
    CHECK(two.blocks[1].two_j == 0);
    CHECK(two.blocks[1].multiplicity == 1);

    const BlockStructure three = block_structure(3);
    REQUIRE(three.blocks.size() == 2);
    CHECK(three.blocks[0].two_j == 3);
    CHECK(three.blocks[0].multiplicity == 1);
    CHECK(three.blocks[1].two_j == 1);
    CHECK(three.blocks[1].multiplicity == 2);
}

TEST_CASE("sector dimensions and multiplicities account for every state") {
    for (int m : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 64, 333, 1024}) {
        const BlockStructure bs = block_structure(m);
        mpz_class total = 0;
        int prev_two_j = m + 2;
        for (const SchurBlock& b : bs.blocks) {
            CHECK(b.two_j < prev_two_j);  // strictly descending
            CHECK((b.two_j - m) % 2 == 0);
            CHECK(b.dim == b.two_j + 1);
            CHECK(b.multiplicity > 0);
            prev_two_j = b.two_j;
            total += b.multiplicity * b.dim;
        }
        const mpz_class expected = mpz_class(1) << m;
        CHECK(total == expected);
    }
    CHECK_THROWS_AS(block_structure(0), std::invalid_argument);
    CHECK_THROWS_AS(block_structure(1025), std::invalid_argument);
}

TEST_CASE("log2 multiplicity tracks the exact count") {
    const BlockStructure bs = block_structure(50);
    for (const SchurBlock& b : bs.blocks) {
        const double exact = mpz_get_d(b.multiplicity.get_mpz_t());
        CHECK(std::abs(b.log2_multiplicity - std::log2(exact)) <= 1e-9);
    }
}

TEST_CASE("rotation angle diagonalizes with the larger eigenvalue first") {
    for (const auto& m : {symmetric2(0.9, 0.2, 0.1), symmetric2(0.1, -0.3, 0.6),
                          symmetric2(0.5, 0.0, 0.5), symmetric2(0.3, 0.4, 0.3)}) {
        const double theta = rotation_angle(m);
        const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
        Eigen::Matrix2d r;
        r << c, -s, s, c;
        const Eigen::Matrix2d d = r.transpose() * m * r;
        CHECK(std::abs(d(0, 1)) <= 1e-14);
        CHECK(std::abs(d(1, 0)) <= 1e-14);
        CHECK(d(0, 0) >= d(1, 1) - 1e-14);
    }
    CHECK(rotation_angle(Eigen::Matrix2d::Identity()) == 0.0);
    Eigen::Matrix2d asym;
    asym << 1.0, 0.2, -0.2, 1.0;
    CHECK_THROWS_AS(rotation_angle(asym), std::invalid_argument);
}

TEST_CASE("the two-dimensional rotation sector is the rotation itself") {
    const double theta = 0.77;
    const Eigen::MatrixXd w = wigner_block(1, theta);
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    CHECK((w - r).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("rotation sectors are orthogonal at every size") {
    for (int two_j : {1, 2, 3, 4, 5, 6, 40, 200, 800}) {
        const Eigen::MatrixXd w = wigner_block(two_j, 0.7);
        const Eigen::MatrixXd gram = w * w.transpose();
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(two_j + 1, two_j + 1);
        CHECK((gram - eye).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("rotation sectors compose additively in the angle") {
    for (int two_j : {1, 2, 5, 12, 40}) {
        const Eigen::MatrixXd ab = wigner_block(two_j, 0.3) * wigner_block(two_j, 0.45);
        const Eigen::MatrixXd sum = wigner_block(two_j, 0.75);
        CHECK((ab - sum).cwiseAbs().maxCoeff() <= 1e-9);
        const Eigen::MatrixXd zero = wigner_block(two_j, 0.0);
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(two_j + 1, two_j + 1);
        CHECK((zero - eye).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("negating the angle equals conjugation by the alternating signs") {
    for (int two_j : {1, 2, 3, 4, 5, 6, 7, 8}) {
        const Eigen::MatrixXd plus = wigner_block(two_j, 0.9);
        const Eigen::MatrixXd minus = wigner_block(two_j, -0.9);
        for (int a = 0; a <= two_j; ++a) {
            for (int b = 0; b <= two_j; ++b) {
                const double sign = ((a + b) % 2 == 0) ? 1.0 : -1.0;
                CHECK(std::abs(minus(a, b) - sign * plus(a, b)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("diagonal sectors sum to the full tensor-power trace") {
    const double l1 = 0.9, l2 = 0.3;
    for (int m : {1, 2, 3, 8, 17, 30}) {
        const BlockStructure bs = block_structure(m);
        double total = 0.0;
        for (const SchurBlock& b : bs.blocks) {
            const Eigen::VectorXd diag = diagonal_block(b.two_j, l1, l2, m);
            CHECK(diag.size() == b.two_j + 1);
            // larger eigenvalue dominates the i = 0 end
            for (int i = 0; i + 1 < diag.size(); ++i) CHECK(diag[i] >= diag[i + 1]);
            total += mpz_get_d(b.multiplicity.get_mpz_t()) * diag.sum();
        }
        const double expected = std::pow(l1 + l2, m);
        CHECK(std::abs(total - expected) <= 1e-10 * expected);
    }
    CHECK_THROWS_AS(diagonal_block(2, 0.3, 0.9, 2), std::invalid_argument);  // order
    CHECK_THROWS_AS(diagonal_block(1, 0.9, 0.3, 2), std::invalid_argument);  // parity
}

TEST_CASE("single-term mixtures reduce to tensor-power entropy") {
    Eigen::Matrix2d rho = symmetric2(0.8, 0.25, 0.2);
    for (int m : {1, 2, 7, 40, 100}) {
        const double direct = m * von_neumann_entropy(Eigen::MatrixXd(rho));
        const double sectored = mixture_entropy({{1.0, rho}}, m);
        CHECK(std::abs(sectored - direct) <= 1e-9 * std::max(1.0, direct));
    }
}

TEST_CASE("subnormalized single-term mixtures follow the closed form") {
    Eigen::Matrix2d rho = symmetric2(0.7, 0.1, 0.3);
    const double w = 0.37;
    for (int m : {1, 5, 64}) {
        const double expected =
            w * m * von_neumann_entropy(Eigen::MatrixXd(rho)) - w * std::log2(w);
        const double got = mixture_entropy({{w, rho}}, m);
        CHECK(std::abs(got - expected) <= 1e-9 * std::max(1.0, expected));
    }
}

TEST_CASE("mixture entropy is symmetric in its terms") {
    Eigen::Matrix2d a = symmetric2(0.8, 0.25, 0.2);
    Eigen::Matrix2d b = symmetric2(0.8, -0.25, 0.2);
    for (int m : {1, 3, 9, 33}) {
        const double ab = mixture_entropy({{0.5, a}, {0.5, b}}, m);
        const double ba = mixture_entropy({{0.5, b}, {0.5, a}}, m);
        CHECK(std::abs(ab - ba) <= 1e-11);
    }
}

TEST_CASE("mixture weights beyond unity are rejected") {
    Eigen::Matrix2d rho = symmetric2(0.5, 0.0, 0.5);
    CHECK_THROWS_AS(mixture_entropy({{0.7, rho}, {0.5, rho}}, 2), std::invalid_argument);
}
