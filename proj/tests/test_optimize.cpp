#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "keyrate/entropy.hpp"
#include "keyrate/optimize.hpp"

using namespace keyrate;

namespace {

OptimizationResult eval_point(double q, double v) {
    return OptimizationResult{{q}, v, 1, true};
}

}  // namespace

TEST_CASE("interior quadratic maximum is located precisely") {
    auto f = [](double q) { return -(q - 0.3) * (q - 0.3); };
    const OptimizationResult r = maximize_over_noise(f, 0.0, 0.5);
    CHECK(r.converged);
    REQUIRE(r.argmax.size() == 1);
    CHECK(std::abs(r.argmax[0] - 0.3) <= 1e-6);
    CHECK(r.value <= 0.0);
    CHECK(r.value >= -1e-12);
    CHECK(r.evaluations > 0);
}

TEST_CASE("boundary maxima are found at the interval ends") {
    const OptimizationResult lo = maximize_over_noise([](double q) { return -q; }, 0.0, 0.5);
    CHECK(std::abs(lo.argmax[0] - 0.0) <= 1e-6);
    CHECK(std::abs(lo.value - 0.0) <= 1e-12);

    const OptimizationResult hi = maximize_over_noise([](double q) { return q; }, 0.0, 0.5);
    CHECK(std::abs(hi.argmax[0] - 0.5) <= 1e-6);
    CHECK(std::abs(hi.value - 0.5) <= 1e-12);
}

TEST_CASE("flat objectives break ties toward smaller arguments") {
    const OptimizationResult r = maximize_over_noise([](double) { return 0.25; }, 0.0, 0.5);
    CHECK(std::abs(r.argmax[0] - 0.0) <= 1e-6);
    CHECK(r.value == 0.25);
}

TEST_CASE("degenerate interval evaluates the single point") {
    const OptimizationResult r =
        maximize_over_noise([](double q) { return 1.0 - q; }, 0.2, 0.2);
    CHECK(r.argmax[0] == 0.2);
    CHECK(std::abs(r.value - 0.8) <= 1e-15);
    CHECK_THROWS_AS(maximize_over_noise([](double q) { return q; }, 0.3, 0.2),
                    std::invalid_argument);
}

TEST_CASE("a warm start near the optimum matches the cold search") {
    auto f = [](double q) { return -(q - 0.27) * (q - 0.27); };
    const OptimizationResult cold = maximize_over_noise(f, 0.0, 0.5);
    const OptimizationResult warm = maximize_over_noise(f, 0.0, 0.5, 0.26);
    CHECK(std::abs(warm.argmax[0] - cold.argmax[0]) <= 1e-5);
    CHECK(std::abs(warm.value - cold.value) <= 1e-12);
}

TEST_CASE("a misleading warm start still reaches the global maximum") {
    auto f = [](double q) { return -(q - 0.45) * (q - 0.45); };
    const OptimizationResult r = maximize_over_noise(f, 0.0, 0.5, 0.05);
    CHECK(std::abs(r.argmax[0] - 0.45) <= 1e-5);
    CHECK(r.value >= -1e-9);
}

TEST_CASE("separable two-variable quadratic maximum") {
    auto f = [](double x, double y) {
        return -(x - 0.2) * (x - 0.2) - (y - 0.35) * (y - 0.35);
    };
    const OptimizationResult r = maximize_over_noise_2d(f, 0.0, 0.5, 0.0, 0.5);
    CHECK(r.converged);
    REQUIRE(r.argmax.size() == 2);
    CHECK(std::abs(r.argmax[0] - 0.2) <= 1e-4);
    CHECK(std::abs(r.argmax[1] - 0.35) <= 1e-4);
    CHECK(r.value >= -1e-8);
}

TEST_CASE("correlated two-variable quadratic maximum") {
    auto f = [](double x, double y) {
        const double u = x - 0.25;
        const double v = y - 0.15;
        return -(u * u + 0.6 * u * v + v * v);
    };
    const OptimizationResult r = maximize_over_noise_2d(f, 0.0, 0.5, 0.0, 0.5);
    CHECK(std::abs(r.argmax[0] - 0.25) <= 1e-3);
    CHECK(std::abs(r.argmax[1] - 0.15) <= 1e-3);
    CHECK(r.value >= -1e-6);
}

TEST_CASE("stale two-variable hint cannot hide a positive lobe") {
    // Negative almost everywhere, positive only in a narrow bump far from
    // the hint. A weak local maximum sits exactly at the hint, interior to
    // the warm window, so the window search settles there with a negative
    // value and only the nonpositive fallback can recover the true maximum.
    auto bump = [](double x, double y, double cx, double cy) {
        const double dx = x - cx;
        const double dy = y - cy;
        return std::exp(-(dx * dx + dy * dy) / 1e-3);
    };
    auto f = [&](double x, double y) {
        return bump(x, y, 0.35, 0.10) + 0.1 * bump(x, y, 0.05, 0.45) - 0.5;
    };
    const OptimizationResult warm = maximize_over_noise_2d(f, 0.0, 0.5, 0.0, 0.5,
                                                           0.05, 0.45);
    CHECK(warm.value > 0.4);
    CHECK(std::abs(warm.argmax[0] - 0.35) <= 1e-3);
    CHECK(std::abs(warm.argmax[1] - 0.10) <= 1e-3);

    const OptimizationResult cold = maximize_over_noise_2d(f, 0.0, 0.5, 0.0, 0.5);
    CHECK(warm.value == cold.value);
    CHECK(warm.argmax == cold.argmax);
}

TEST_CASE("root bracketing on a known rate curve") {
    auto rate_opt = [](double p) {
        return eval_point(0.0, 1.0 - 2.0 * binary_entropy(p));
    };
    const ThresholdResult t = find_threshold(rate_opt, 1e-4, 0.25);
    CHECK(std::abs(t.p_max - 0.110028) <= 1e-4);
    CHECK(t.half_width <= 1e-5);
    REQUIRE(t.q_at_threshold.size() == 1);
    CHECK(t.q_at_threshold[0] == 0.0);
    CHECK(t.evaluations > 0);
}

TEST_CASE("root bracketing on a linear rate curve") {
    auto rate_opt = [](double p) { return eval_point(0.1, 0.2 - p); };
    const ThresholdResult t = find_threshold(rate_opt, 0.1, 0.4);
    CHECK(std::abs(t.p_max - 0.2) <= 2e-5);
    CHECK(t.q_at_threshold[0] == 0.1);
}

TEST_CASE("invalid brackets are rejected") {
    auto positive = [](double) { return eval_point(0.0, 0.5); };
    CHECK_THROWS_AS(find_threshold(positive, 0.1, 0.2), std::invalid_argument);
    auto negative = [](double) { return eval_point(0.0, -0.5); };
    CHECK_THROWS_AS(find_threshold(negative, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("bisection honors a caller-chosen half-width") {
    auto rate_opt = [](double p) { return eval_point(0.1, 0.2 - p); };
    const ThresholdResult fine = find_threshold(rate_opt, 0.1, 0.4, 1e-8);
    CHECK(std::abs(fine.p_max - 0.2) <= 2e-8);
    CHECK(fine.half_width <= 1e-8);
    const ThresholdResult coarse = find_threshold(rate_opt, 0.1, 0.4, 1e-3);
    CHECK(coarse.half_width <= 1e-3);
    CHECK(coarse.evaluations < fine.evaluations);

    CHECK_THROWS_AS(find_threshold(rate_opt, 0.1, 0.4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(find_threshold(rate_opt, 0.1, 0.4, -1e-6), std::invalid_argument);
    CHECK_THROWS_AS(
        find_threshold(rate_opt, 0.1, 0.4, std::numeric_limits<double>::quiet_NaN()),
        std::invalid_argument);
}

TEST_CASE("repeated searches are bitwise deterministic") {
    auto f = [](double q) { return std::sin(7.0 * q) - q * q; };
    const OptimizationResult a = maximize_over_noise(f, 0.0, 0.5);
    const OptimizationResult b = maximize_over_noise(f, 0.0, 0.5);
    CHECK(a.evaluations == b.evaluations);
    CHECK(a.argmax[0] == b.argmax[0]);
    CHECK(a.value == b.value);
}
