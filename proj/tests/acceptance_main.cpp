// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Every expected value is produced by an independent reference
// (exhaustive enumeration, dense linear algebra, or a closed form) or is a
// pinned target with an explicit tolerance.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "keyrate/bb84.hpp"
#include "keyrate/entropy.hpp"
#include "keyrate/iterated.hpp"
#include "keyrate/optimize.hpp"
#include "keyrate/oracle.hpp"
#include "keyrate/parallel.hpp"
#include "keyrate/schur.hpp"
#include "keyrate/sixstate.hpp"

using namespace keyrate;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[768];
    std::snprintf(buf, sizeof buf, f, args...);
    return std::string(buf);
}

using ColdBb84 = OptimizationResult (*)(int, double);
using WarmBb84 = OptimizationResult (*)(int, double, double);

// Threshold of an optimized single-round rate with the noise optimum carried
// from one bisection point to the next as a warm start.
ThresholdResult optimized_threshold(ColdBb84 cold, WarmBb84 warm, int m, double lo,
                                    double hi, std::optional<double>& hint) {
    auto ropt = [&](double p) {
        const OptimizationResult r = hint ? warm(m, p, *hint) : cold(m, p);
        // Only a positive result carries a meaningful argmax; past the
        // threshold the maximizer sits on a flat nonpositive plateau and
        // chaining it would poison the windows on the positive side.
        if (r.value > 0.0) hint = r.argmax.at(0);
        return r;
    };
    return find_threshold(ropt, lo, hi);
}

OptimizationResult fixed_point_result(double q, double value) {
    return OptimizationResult{{q}, value, 1, true};
}

Eigen::Matrix2d random_unit_trace_state(std::mt19937& rng,
                                        std::uniform_real_distribution<double>& uni) {
    const double pi = std::acos(-1.0);
    const double lam = uni(rng);
    const double phi = (2.0 * uni(rng) - 1.0) * pi;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    Eigen::Matrix2d rot;
    rot << c, -s, s, c;
    Eigen::Matrix2d diag = Eigen::Matrix2d::Zero();
    diag(0, 0) = lam;
    diag(1, 1) = 1.0 - lam;
    return Eigen::Matrix2d(rot * diag * rot.transpose());
}

// c1: the block-diagonal entropy engine against dense 2^m-dimensional
// diagonalization on random two-term mixtures, normalized and subnormalized.
Outcome c1_block_entropy() {
    std::mt19937 rng(20260817u);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double max_dev = 0.0;
    int cases = 0;
    for (int m = 1; m <= 10; ++m) {
        for (int rep = 0; rep < 10; ++rep) {
            const Eigen::Matrix2d s1 = random_unit_trace_state(rng, uni);
            const Eigen::Matrix2d s2 = random_unit_trace_state(rng, uni);
            const double w1 = 0.2 + 0.6 * uni(rng);
            const double w2 = (rep % 2 == 0) ? (1.0 - w1) : uni(rng) * (1.0 - w1);
            const std::vector<MixtureTerm> terms{{w1, s1}, {w2, s2}};
            const double fast = mixture_entropy(terms, m);
            const double dense = oracle::dense_mixture_entropy(terms, m);
            max_dev = std::max(max_dev, std::abs(fast - dense));
            ++cases;
        }
    }
    const bool pass = cases >= 100 && max_dev <= 1e-9;
    return {pass, fmt("cases=%d max_dev=%.3e tol=1e-9", cases, max_dev)};
}

// c2: every information term against exhaustive enumeration or dense
// adversary states on all shapes small enough to brute-force.
Outcome c2_information_terms() {
    double dev_xy = 0.0;
    for (int m = 1; m <= 6; ++m) {
        for (double pt : {0.0, 0.05, 0.11, 0.25, 0.37, 0.5}) {
            dev_xy = std::max(dev_xy,
                              std::abs(oracle::enumerate_xy(m, pt) - mutual_info_xy(m, pt)));
        }
    }

    double dev_eve_bb84 = 0.0;
    for (int m = 1; m <= 4; ++m) {
        for (const auto& [p, q] : std::vector<std::pair<double, double>>{
                 {0.03, 0.0}, {0.08, 0.10}, {0.11, 0.33}}) {
            const double ref = oracle::eve_mutual_info(m, bb84_family(p, p * p), q);
            dev_eve_bb84 =
                std::max(dev_eve_bb84, std::abs(mutual_info_xe_bb84(m, p, q) - ref));
        }
    }

    double dev_eve_six = 0.0;
    for (int m = 1; m <= 4; ++m) {
        for (const auto& [p, q] :
             std::vector<std::pair<double, double>>{{0.05, 0.0}, {0.12, 0.20}}) {
            const SixStateChannel ch = sixstate_channel(p);
            const double ref = oracle::eve_mutual_info(m, ch, q);
            dev_eve_six =
                std::max(dev_eve_six, std::abs(mutual_info_xe_sixstate(m, p, q) - ref));
        }
    }

    double dev_iter = 0.0;
    for (const auto& [m1, m2] : std::vector<std::pair<int, int>>{
             {2, 2}, {3, 2}, {2, 3}, {3, 3}}) {
        const oracle::IteratedCheck ref =
            oracle::iterated_enumeration_check(m1, m2, 0.08, 0.05, 0.07);
        const IteratedParams params{m1, m2, 0.05, 0.07};
        dev_iter =
            std::max(dev_iter, std::abs(mutual_info_xy_iterated(params, 0.08) - ref.i_xy));
        dev_iter =
            std::max(dev_iter, std::abs(mutual_info_xe_iterated(params, 0.08) - ref.i_xe));
    }

    const bool pass = dev_xy <= 1e-12 && dev_eve_bb84 <= 1e-9 && dev_eve_six <= 1e-9 &&
                      dev_iter <= 1e-9;
    return {pass, fmt("xy=%.3e(1e-12) eve_bb84=%.3e eve_six=%.3e iterated=%.3e(1e-9)",
                      dev_xy, dev_eve_bb84, dev_eve_six, dev_iter)};
}

// c3: single-block threshold without added noise matches the pinned value and
// optimized noise buys a definite improvement.
Outcome c3_single_block_threshold() {
    auto fixed_rate = [](double p) {
        return fixed_point_result(0.0, rate_bb84(1, p, 0.0));
    };
    const ThresholdResult t_fixed = find_threshold(fixed_rate, 1e-4, 0.13);

    std::optional<double> hint;
    const ThresholdResult t_opt =
        optimized_threshold(rate_bb84_opt, rate_bb84_opt, 1, 1e-4, 0.15, hint);

    const double gain = t_opt.p_max - t_fixed.p_max;
    const bool pass = std::abs(t_fixed.p_max - 0.110028) <= 1e-4 && gain >= 0.013;
    return {pass, fmt("fixed=%.6f (target 0.110028+-1e-4) optimized=%.6f gain=%.4f",
                      t_fixed.p_max, t_opt.p_max, gain)};
}

// c4: 400-qubit-block optimized threshold hits the pinned large-block value.
Outcome c4_large_block_threshold() {
    std::optional<double> hint;
    const ThresholdResult t =
        optimized_threshold(rate_bb84_opt, rate_bb84_opt, 400, 0.125, 0.133, hint);
    const bool pass = std::abs(t.p_max - 0.1292) <= 5e-4;
    return {pass, fmt("p_max=%.6f (target 0.1292+-5e-4) q*=%.4f evals=%ld", t.p_max,
                      t.q_at_threshold.at(0), t.evaluations)};
}

// c5: six-state single-block optimized threshold.
Outcome c5_sixstate_single_block() {
    std::optional<double> hint;
    const ThresholdResult t =
        optimized_threshold(rate_sixstate_opt, rate_sixstate_opt, 1, 0.13, 0.15, hint);
    const bool pass = std::abs(t.p_max - 0.1411) <= 5e-4;
    return {pass, fmt("p_max=%.6f (target 0.1411+-5e-4) q*=%.4f", t.p_max,
                      t.q_at_threshold.at(0))};
}

// c6: some block size up to 500 pushes the six-state threshold to 14.54% with
// optimized noise; under time pressure fall back to fixed-noise evaluations,
// which must still clear 14.5%. A positive rate at p proves the threshold
// exceeds p because the rate decreases in p.
Outcome c6_sixstate_reach(double budget_s) {
    const double t_start = now_s();
    const double p_opt = 0.1454;
    const double p_fallback = 0.145;
    // Values this close to zero are indistinguishable from accumulated
    // rounding noise (the dense cross-checks bound it near 1e-13), so a
    // claimed positive rate only counts once it clears this floor.
    const double floor = 1e-10;
    // Added-noise values in the band where randomization pays off at these
    // error rates; a positive rate at any fixed q is a lower bound on the
    // noise-optimized rate, which already settles the criterion at that p.
    const std::vector<double> panel{0.40, 0.45, 0.35, 0.48, 0.30};

    double best_rate = -std::numeric_limits<double>::infinity();
    int best_m = 0;

    // Phase 1: fixed-q probes, strongest blocklengths first.
    for (int m : {500, 350, 250, 150}) {
        if (now_s() - t_start > 0.6 * budget_s) break;
        for (double q : panel) {
            if (now_s() - t_start > 0.6 * budget_s) break;
            const double r = rate_sixstate(m, p_opt, q);
            if (r > best_rate) {
                best_rate = r;
                best_m = m;
            }
            if (r > floor) {
                return {true, fmt("mode=optimized m=%d rate(p=0.1454,q=%.2f)=%.3e "
                                  "(fixed-q lower bound on the optimized rate)",
                                  m, q, r)};
            }
        }
    }

    // Phase 2: optimize the added noise outright, cheap blocklengths first,
    // stopping while the projected cost (cubic in m) still fits the budget.
    std::optional<double> hint;
    double last_cost = 0.0;
    int last_m = 0;
    for (int m : {150, 250, 350, 500}) {
        if (last_m > 0) {
            const double scale = static_cast<double>(m) / last_m;
            if (now_s() - t_start + last_cost * scale * scale * scale > 0.9 * budget_s) {
                break;
            }
        }
        const double t0 = now_s();
        const OptimizationResult r =
            hint ? rate_sixstate_opt(m, p_opt, *hint) : rate_sixstate_opt(m, p_opt);
        last_cost = now_s() - t0;
        last_m = m;
        if (r.value > 0.0) hint = r.argmax.at(0);
        if (r.value > best_rate) {
            best_rate = r.value;
            best_m = m;
        }
        if (r.value > floor) {
            return {true, fmt("mode=optimized m=%d rate(p=0.1454)=%.3e q*=%.4f", m,
                              r.value, r.argmax.at(0))};
        }
    }

    // Phase 3: documented fallback at the relaxed target.
    for (int m : {500, 350, 250, 150}) {
        if (now_s() - t_start > 0.97 * budget_s) break;
        for (double q : panel) {
            if (now_s() - t_start > 0.97 * budget_s) break;
            const double r = rate_sixstate(m, p_fallback, q);
            if (r > best_rate) {
                best_rate = r;
                best_m = m;
            }
            if (r > floor) {
                return {true, fmt("mode=fixed-q m=%d q=%.2f rate(p=0.145)=%.3e", m, q,
                                  r)};
            }
        }
    }
    return {false, fmt("no rate above %.0e at p=0.1454 or p=0.145; best m=%d rate=%.3e",
                       floor, best_m, best_rate)};
}

// c7: with no added noise the six-state closed-form rate has its best
// threshold at block size 5 among {1,3,5,7,9}, and the closed form agrees
// with the general engine at q = 0.
Outcome c7_zero_noise_sweet_spot() {
    std::map<int, double> thresholds;
    for (int m : {1, 3, 5, 7, 9}) {
        auto f = [m](double p) { return fixed_point_result(0.0, lo_rate(m, p)); };
        thresholds[m] = find_threshold(f, 1e-4, 0.16).p_max;
    }
    bool argmax_is_5 = true;
    for (const auto& [m, t] : thresholds) {
        if (m != 5 && t >= thresholds[5]) argmax_is_5 = false;
    }

    double dev = 0.0;
    for (int m = 1; m <= 5; ++m) {
        for (double p : {0.02, 0.06, 0.10, 0.125}) {
            dev = std::max(dev, std::abs(rate_sixstate(m, p, 0.0) - lo_rate(m, p)));
        }
    }
    const bool pass = argmax_is_5 && dev <= 1e-9;
    return {pass, fmt("t(1)=%.5f t(3)=%.5f t(5)=%.5f t(7)=%.5f t(9)=%.5f agree_dev=%.2e",
                      thresholds[1], thresholds[3], thresholds[5], thresholds[7],
                      thresholds[9], dev)};
}

// c8: optimized thresholds never decrease with block size, for both
// protocols.
Outcome c8_monotone_thresholds() {
    const std::vector<int> ms{1, 2, 4, 8, 16, 32, 64};
    double min_diff = 1.0;

    std::vector<double> t_bb84;
    {
        std::optional<double> hint;
        for (int m : ms) {
            t_bb84.push_back(
                optimized_threshold(rate_bb84_opt, rate_bb84_opt, m, 0.10, 0.14, hint)
                    .p_max);
        }
    }
    std::vector<double> t_six;
    {
        std::optional<double> hint;
        for (int m : ms) {
            t_six.push_back(optimized_threshold(rate_sixstate_opt, rate_sixstate_opt, m,
                                                0.13, 0.155, hint)
                                .p_max);
        }
    }
    for (std::size_t i = 1; i < ms.size(); ++i) {
        min_diff = std::min(min_diff, t_bb84[i] - t_bb84[i - 1]);
        min_diff = std::min(min_diff, t_six[i] - t_six[i - 1]);
    }
    const bool pass = min_diff >= -1e-5;
    return {pass, fmt("bb84 %.5f..%.5f sixstate %.5f..%.5f min_step=%.2e (>=-1e-5)",
                      t_bb84.front(), t_bb84.back(), t_six.front(), t_six.back(),
                      min_diff)};
}

// c9: the two-level scheme on a 3x3 split strictly beats the single-round
// scheme on the same 9 qubits, and both of its degenerate shapes reproduce
// the single-round rate exactly.
Outcome c9_two_level_advantage() {
    std::optional<double> hint9;
    const ThresholdResult t9 =
        optimized_threshold(rate_bb84_opt, rate_bb84_opt, 9, 0.10, 0.14, hint9);

    std::optional<std::pair<double, double>> hint2;
    auto iter_opt = [&](double p) {
        const OptimizationResult r = hint2
                                         ? rate_iterated_opt(3, 3, p, hint2->first,
                                                             hint2->second)
                                         : rate_iterated_opt(3, 3, p);
        if (r.value > 0.0) hint2 = std::make_pair(r.argmax.at(0), r.argmax.at(1));
        return r;
    };
    const ThresholdResult t33 = find_threshold(iter_opt, t9.p_max - 0.005, 0.15);
    const double gap = t33.p_max - t9.p_max;

    double dev_outer = 0.0;  // trivial outer level: m2 = 1, Q = 0
    double dev_inner = 0.0;  // trivial inner level: m1 = 1
    for (double p : {0.01, 0.04, 0.07, 0.10, 0.12}) {
        for (double q : {0.0, 0.1, 0.2, 0.35, 0.5}) {
            const IteratedParams outer{4, 1, q, 0.0};
            dev_outer = std::max(
                dev_outer, std::abs(rate_iterated(outer, p) - rate_bb84(4, p, q)));
            const IteratedParams inner{1, 3, q, 0.15};
            dev_inner = std::max(
                dev_inner,
                std::abs(rate_iterated(inner, p) - rate_bb84(3, p, q_tot(inner))));
        }
    }
    const bool pass = gap > 2e-5 && dev_outer <= 1e-10 && dev_inner <= 1e-10;
    return {pass, fmt("t(3x3)=%.6f t(m=9)=%.6f gap=%.2e outer_dev=%.2e inner_dev=%.2e",
                      t33.p_max, t9.p_max, gap, dev_outer, dev_inner)};
}

// c10: structural invariants — sector dimensions account for the full space
// exactly, every syndrome distribution is normalized, and correlated error
// families never beat independent errors.
Outcome c10_structural_invariants() {
    for (int m = 1; m <= 1024; ++m) {
        const BlockStructure bs = block_structure(m);
        mpz_class total = 0;
        for (const SchurBlock& blk : bs.blocks) total += blk.multiplicity * blk.dim;
        if (total != (mpz_class(1) << m)) {
            return {false, fmt("sector dimensions do not sum to 2^m at m=%d", m)};
        }
    }

    double dev_norm = 0.0;
    for (int m : {1, 2, 3, 5, 10, 50, 200, 511, 1024}) {
        for (double pt : {0.11, 0.3, 0.5}) {
            const SyndromeWeightTable tab = syndrome_table(m, pt);
            double total = 0.0;
            for (int s = 0; s < m; ++s) total += tab.mass0[s] + tab.mass1[s];
            dev_norm = std::max(dev_norm, std::abs(total - 1.0));
        }
    }
    for (const auto& [m1, m2] : std::vector<std::pair<int, int>>{
             {2, 2}, {3, 3}, {5, 4}, {4, 5}, {2, 12}}) {
        const IteratedParams params{m1, m2, 0.05, 0.07};
        dev_norm = std::max(
            dev_norm,
            std::abs(iterated_syndrome_distribution(params, 0.08).total_mass() - 1.0));
    }

    double violation = 0.0;
    for (int m = 1; m <= 3; ++m) {
        for (const auto& [p, q] :
             std::vector<std::pair<double, double>>{{0.08, 0.05}, {0.11, 0.25}}) {
            const double t_lo = std::max(0.0, 2.0 * p - 1.0);
            std::vector<double> t_grid;
            for (int i = 0; i <= 20; ++i) t_grid.push_back(t_lo + (p - t_lo) * i / 20.0);
            violation =
                std::max(violation, oracle::independent_error_check(m, p, q, t_grid));
        }
    }

    const bool pass = dev_norm <= 1e-12 && violation <= 1e-9;
    return {pass, fmt("completeness=exact(m<=1024) norm_dev=%.2e(1e-12) "
                      "correlated_excess=%.2e(1e-9)",
                      dev_norm, violation)};
}

}  // namespace

// With no arguments every criterion runs (the acceptance gate). Criterion
// ids as arguments (e.g. `acceptance c06 c09`) select a subset, for quick
// re-checks after a fix; the exit code still reflects only the selected
// criteria.
int main(int argc, char** argv) {
    pin_blas_threads();

    struct Row {
        const char* id;
        const char* name;
        double budget_s;  // 0 = no explicit budget
        std::function<Outcome(double)> fn;
    };
    auto nobudget = [](std::function<Outcome()> f) {
        return [f](double) { return f(); };
    };

    const std::vector<Row> rows{
        {"c01", "block-entropy-vs-dense", 30.0, nobudget(c1_block_entropy)},
        {"c02", "information-terms-vs-enumeration", 120.0, nobudget(c2_information_terms)},
        {"c03", "single-block-threshold-and-gain", 0.0, nobudget(c3_single_block_threshold)},
        {"c04", "large-block-optimized-threshold", 1800.0, nobudget(c4_large_block_threshold)},
        {"c05", "sixstate-single-block-threshold", 0.0, nobudget(c5_sixstate_single_block)},
        {"c06", "sixstate-large-block-reach", 7200.0,
         [](double budget) { return c6_sixstate_reach(budget); }},
        {"c07", "zero-noise-block-size-sweet-spot", 0.0, nobudget(c7_zero_noise_sweet_spot)},
        {"c08", "thresholds-monotone-in-block-size", 0.0, nobudget(c8_monotone_thresholds)},
        {"c09", "two-level-beats-single-level", 0.0, nobudget(c9_two_level_advantage)},
        {"c10", "structural-invariants", 0.0, nobudget(c10_structural_invariants)},
    };

    std::vector<std::string> selected(argv + 1, argv + argc);
    for (const std::string& id : selected) {
        const bool known = std::any_of(rows.begin(), rows.end(),
                                       [&](const Row& r) { return id == r.id; });
        if (!known) {
            std::fprintf(stderr, "unknown criterion id: %s\n", id.c_str());
            return 2;
        }
    }

    int n_pass = 0;
    int n_run = 0;
    for (const Row& row : rows) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), row.id) == selected.end()) {
            continue;
        }
        ++n_run;
        const double t0 = now_s();
        Outcome out;
        try {
            out = row.fn(row.budget_s > 0 ? row.budget_s : 1e9);
        } catch (const std::exception& e) {
            out = {false, fmt("exception: %s", e.what())};
        }
        const double dt = now_s() - t0;
        bool pass = out.pass;
        std::string detail = out.detail;
        if (row.budget_s > 0 && dt > row.budget_s) {
            pass = false;
            detail += fmt(" [exceeded %.0fs budget]", row.budget_s);
        }
        if (pass) ++n_pass;
        std::printf("%s %s %-36s %s [%.1fs]\n", row.id, pass ? "PASS" : "FAIL", row.name,
                    detail.c_str(), dt);
        std::fflush(stdout);
    }
    std::printf(selected.empty() ? "ACCEPTANCE: %d/%d criteria passed\n"
                                 : "ACCEPTANCE (subset): %d/%d criteria passed\n",
                n_pass, n_run);
    return n_pass == n_run ? 0 : 1;
}
