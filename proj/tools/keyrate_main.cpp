// Command-line front end: secret-key rates, bit-error thresholds, and
// parameter-sweep CSVs for repetition-block preprocessing of BB84 and
// 6-state keys.
//
// Exit codes: 0 success, 2 usage error (bad flags or out-of-range
// parameters), 3 numerical failure (eigensolver breakdown or a failed
// validation run).

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"

#include "keyrate/bb84.hpp"
#include "keyrate/entropy.hpp"
#include "keyrate/iterated.hpp"
#include "keyrate/optimize.hpp"
#include "keyrate/oracle.hpp"
#include "keyrate/parallel.hpp"
#include "keyrate/schur.hpp"
#include "keyrate/sixstate.hpp"

namespace {

using namespace keyrate;

// ---------------------------------------------------------------------------
// Formatting

// Shortest representation with at most 12 significant digits, '.' decimal
// separator, locale-independent.
std::string fmt12(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::general, 12);
    return std::string(buf.data(), res.ptr);
}

class Stopwatch {
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();

public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0_)
            .count();
    }
};

// ---------------------------------------------------------------------------
// CSV rows

struct RateRow {
    std::string protocol;
    int m1 = 1;
    int m2 = 1;
    double p = 0.0;
    double q = 0.0;
    double big_q = 0.0;
    double q_tot = 0.0;
    double rate = 0.0;  // raw (unclamped); clamping is a display concern
    double i_xy = 0.0;
    double i_xe = 0.0;
};

constexpr const char* kCsvHeader = "protocol,m1,m2,p,q,Q,q_tot,rate,i_xy,i_xe";

std::string render_csv(std::vector<RateRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) {
        return std::tie(a.p, a.m1, a.m2) < std::tie(b.p, b.m1, b.m2);
    });
    std::string text = kCsvHeader;
    text += '\n';
    for (const RateRow& r : rows) {
        text += r.protocol;
        text += ',';
        text += std::to_string(r.m1);
        text += ',';
        text += std::to_string(r.m2);
        for (double v : {r.p, r.q, r.big_q, r.q_tot, r.rate, r.i_xy, r.i_xe}) {
            text += ',';
            text += fmt12(v);
        }
        text += '\n';
    }
    return text;
}

// Write the CSV to `path` (atomically, via a temporary) or to standard
// output when no path is given. A failed write never leaves a partial file
// at the target path.
void emit_csv(const std::string& path, std::vector<RateRow> rows) {
    const std::string text = render_csv(std::move(rows));
    if (path.empty()) {
        std::cout << text;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp(path + ".tmp");
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw std::runtime_error("cannot open output file: " + tmp.string());
            }
            out << text;
            out.flush();
            if (!out) {
                throw std::runtime_error("write failed: " + tmp.string());
            }
        }
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

// ---------------------------------------------------------------------------
// Protocol plumbing

enum class Proto { bb84, sixstate };

const char* proto_name(Proto t) { return t == Proto::bb84 ? "bb84" : "sixstate"; }

Proto parse_proto(const std::string& s) {
    if (s == "bb84") return Proto::bb84;
    if (s == "sixstate") return Proto::sixstate;
    throw std::invalid_argument("--protocol must be 'bb84' or 'sixstate'");
}

double p_cap(Proto t) { return t == Proto::bb84 ? 0.5 : 0.66; }

void check_p(Proto t, double p) {
    if (!(p >= 0.0 && p <= p_cap(t))) {
        throw std::invalid_argument(std::string("p must lie in [0, ") +
                                    (t == Proto::bb84 ? "0.5" : "0.66") + "] for " +
                                    proto_name(t));
    }
}

void check_m(int m) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
}

// "auto" -> nullopt; otherwise a number in [0, 1/2].
std::optional<double> parse_q_spec(const std::string& s, const char* flag) {
    if (s == "auto") return std::nullopt;
    double v = 0.0;
    std::size_t pos = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(flag) + " must be a number or 'auto'");
    }
    if (pos != s.size()) {
        throw std::invalid_argument(std::string(flag) + " must be a number or 'auto'");
    }
    if (!(v >= 0.0 && v <= 0.5)) {
        throw std::invalid_argument(std::string(flag) + " must lie in [0, 0.5]");
    }
    return v;
}

double proto_rate(Proto t, int m, double p, double q) {
    return t == Proto::bb84 ? rate_bb84(m, p, q) : rate_sixstate(m, p, q);
}

OptimizationResult proto_opt(Proto t, int m, double p) {
    return t == Proto::bb84 ? rate_bb84_opt(m, p) : rate_sixstate_opt(m, p);
}

OptimizationResult proto_opt(Proto t, int m, double p, double hint) {
    return t == Proto::bb84 ? rate_bb84_opt(m, p, hint) : rate_sixstate_opt(m, p, hint);
}

// Assemble one single-round row from the same library calls the rate
// functions are built from, so every printed number matches the library
// result bit for bit.
RateRow single_round_row(Proto t, int m, double p, double q) {
    RateRow row;
    row.protocol = proto_name(t);
    row.m1 = m;
    row.m2 = 1;
    row.p = p;
    row.q = q;
    row.big_q = 0.0;
    row.q_tot = q;
    if (t == Proto::bb84) {
        row.i_xy = mutual_info_xy(m, p_tilde(p, q));
        row.i_xe = mutual_info_xe_bb84(m, p, q);
    } else {
        const SixStateChannel ch = sixstate_channel(p);
        const double pt = (q == 0.5) ? 0.5 : ch.p * (1.0 - q) + (1.0 - ch.p) * q;
        row.i_xy = mutual_info_xy(m, pt);
        row.i_xe = mutual_info_xe_sixstate(m, ch.p, q);
    }
    row.rate = (row.i_xy - row.i_xe) / m;
    return row;
}

RateRow iterated_row(const IteratedParams& params, double p) {
    RateRow row;
    row.protocol = "iterated";
    row.m1 = params.m1;
    row.m2 = params.m2;
    row.p = p;
    row.q = params.q;
    row.big_q = params.big_q;
    row.q_tot = q_tot(params);
    row.i_xy = mutual_info_xy_iterated(params, p);
    row.i_xe = mutual_info_xe_iterated(params, p);
    row.rate = (row.i_xy - row.i_xe) / (params.m1 * params.m2);
    return row;
}

// ---------------------------------------------------------------------------
// Threshold search with automatic bracketing

struct ThresholdSpec {
    Proto proto = Proto::bb84;
    int m = 1;
    std::optional<double> q_fixed;  // nullopt -> optimize q at every p
    std::optional<double> p_lo;
    std::optional<double> p_hi;
    // Bisection half-width on p. Thresholds of nearby blocklengths differ by
    // as little as ~2e-8 (m=1 vs m=2), so the CLI default resolves them with
    // an order of magnitude to spare; pass --tol 1e-5 to trade resolution for
    // speed on large blocklengths.
    double tol = 1e-9;
};

ThresholdResult run_threshold(const ThresholdSpec& spec) {
    check_m(spec.m);
    std::optional<double> hint;  // warm start carried across p evaluations
    auto ropt = [&](double p) -> OptimizationResult {
        if (spec.q_fixed) {
            const double v = proto_rate(spec.proto, spec.m, p, *spec.q_fixed);
            return OptimizationResult{{*spec.q_fixed}, v, 1, true};
        }
        OptimizationResult r = hint ? proto_opt(spec.proto, spec.m, p, *hint)
                                    : proto_opt(spec.proto, spec.m, p);
        hint = r.argmax[0];
        return r;
    };

    const double cap = p_cap(spec.proto);
    const double lo = spec.p_lo.value_or(1e-4);
    check_p(spec.proto, lo);
    double hi = 0.0;
    if (spec.p_hi) {
        hi = *spec.p_hi;
        check_p(spec.proto, hi);
    } else {
        // Walk the upper end outward until the optimized rate turns
        // nonpositive; thresholds of interest sit near the walk origin, so
        // this costs only a couple of extra evaluations.
        hi = std::min(spec.proto == Proto::bb84 ? 0.13 : 0.15, cap);
        while (true) {
            if (!(ropt(hi).value > 0.0)) break;
            if (hi >= cap) {
                throw numerical_error(
                    "threshold bracketing found no nonpositive rate up to the "
                    "domain cap; supply --p-hi explicitly");
            }
            hi = std::min(hi + 0.02, cap);
        }
    }
    return find_threshold(ropt, lo, hi, spec.tol);
}

// ---------------------------------------------------------------------------
// Subcommand handlers

void apply_threads(int threads) {
    if (threads > 0) set_max_threads(threads);
}

int cmd_rate(Proto proto, int m, double p, const std::string& q_spec) {
    check_m(m);
    check_p(proto, p);
    const std::optional<double> q_fixed = parse_q_spec(q_spec, "--q");

    Stopwatch clock;
    double q = 0.0;
    bool optimized = false;
    long evaluations = 0;
    if (q_fixed) {
        q = *q_fixed;
    } else {
        const OptimizationResult r = proto_opt(proto, m, p);
        q = r.argmax[0];
        optimized = true;
        evaluations = r.evaluations;
    }
    const RateRow row = single_round_row(proto, m, p, q);
    const double clamped = std::max(row.rate, 0.0);
    const double ms = clock.ms();

    std::cout << "protocol: " << row.protocol << "\n"
              << "m: " << m << "\n"
              << "p: " << fmt12(p) << "\n"
              << "q: " << fmt12(q) << (optimized ? " (optimized)" : "") << "\n";
    if (optimized) std::cout << "evaluations: " << evaluations << "\n";
    std::cout << "i_xy: " << fmt12(row.i_xy) << "\n"
              << "i_xe: " << fmt12(row.i_xe) << "\n"
              << "rate: " << fmt12(clamped) << "\n"
              << "rate_raw: " << fmt12(row.rate) << "\n"
              << "runtime_ms: " << fmt12(ms) << "\n";
    return 0;
}

int cmd_threshold(Proto proto, int m, const std::string& q_spec,
                  const std::optional<double>& p_lo, const std::optional<double>& p_hi,
                  double tol) {
    check_m(m);
    ThresholdSpec spec;
    spec.proto = proto;
    spec.m = m;
    spec.q_fixed = parse_q_spec(q_spec, "--q");
    spec.p_lo = p_lo;
    spec.p_hi = p_hi;
    spec.tol = tol;

    Stopwatch clock;
    const ThresholdResult t = run_threshold(spec);
    const double ms = clock.ms();

    std::cout << "protocol: " << proto_name(proto) << "\n"
              << "m: " << m << "\n"
              << "q: " << (spec.q_fixed ? fmt12(*spec.q_fixed) : std::string("auto")) << "\n"
              << "p_max: " << fmt12(t.p_max) << "\n"
              << "q_at_threshold: " << fmt12(t.q_at_threshold.at(0)) << "\n"
              << "bracket_width: " << fmt12(2.0 * t.half_width) << "\n"
              << "evaluations: " << t.evaluations << "\n"
              << "runtime_ms: " << fmt12(ms) << "\n";
    return 0;
}

int cmd_curve(Proto proto, int m, double p_min, double p_max, int steps,
              const std::string& q_spec, const std::string& out) {
    check_m(m);
    check_p(proto, p_min);
    check_p(proto, p_max);
    if (steps < 1) throw std::invalid_argument("--steps must be >= 1");
    if (p_min > p_max) throw std::invalid_argument("--p-min must not exceed --p-max");
    const std::optional<double> q_fixed = parse_q_spec(q_spec, "--q");

    std::vector<RateRow> rows;
    rows.reserve(static_cast<std::size_t>(steps));
    std::optional<double> hint;
    for (int i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        const double p = p_min + (p_max - p_min) * frac;
        double q = 0.0;
        if (q_fixed) {
            q = *q_fixed;
        } else {
            const OptimizationResult r = hint ? proto_opt(proto, m, p, *hint)
                                              : proto_opt(proto, m, p);
            q = r.argmax[0];
            hint = q;
        }
        rows.push_back(single_round_row(proto, m, p, q));
    }
    emit_csv(out, std::move(rows));
    return 0;
}

int cmd_scan_m(Proto proto, const std::vector<int>& m_list, const std::string& q_spec,
               const std::optional<double>& p_lo, const std::optional<double>& p_hi,
               double tol, const std::string& out) {
    if (m_list.empty()) throw std::invalid_argument("--m-list must not be empty");
    for (int m : m_list) check_m(m);
    const std::optional<double> q_fixed = parse_q_spec(q_spec, "--q");

    std::vector<RateRow> rows;
    rows.reserve(m_list.size());
    for (int m : m_list) {
        ThresholdSpec spec;
        spec.proto = proto;
        spec.m = m;
        spec.q_fixed = q_fixed;
        spec.p_lo = p_lo;
        spec.p_hi = p_hi;
        spec.tol = tol;
        const ThresholdResult t = run_threshold(spec);
        rows.push_back(single_round_row(proto, m, t.p_max, t.q_at_threshold.at(0)));
    }
    emit_csv(out, std::move(rows));
    return 0;
}

int cmd_iterate(int m1, int m2, double p, const std::string& q_spec,
                const std::string& big_q_spec, const std::string& out) {
    check_m(m1);
    check_m(m2);
    check_p(Proto::bb84, p);  // the two-level scheme runs on the BB84 channel
    const std::optional<double> q_fixed = parse_q_spec(q_spec, "--q");
    const std::optional<double> big_q_fixed = parse_q_spec(big_q_spec, "--Q");

    double q = 0.0;
    double big_q = 0.0;
    if (!q_fixed && !big_q_fixed) {
        const OptimizationResult r = rate_iterated_opt(m1, m2, p);
        q = r.argmax[0];
        big_q = r.argmax[1];
    } else if (!q_fixed) {
        big_q = *big_q_fixed;
        const OptimizationResult r = maximize_over_noise(
            [&](double qq) { return rate_iterated(IteratedParams{m1, m2, qq, big_q}, p); },
            0.0, 0.5);
        q = r.argmax[0];
    } else if (!big_q_fixed) {
        q = *q_fixed;
        const OptimizationResult r = maximize_over_noise(
            [&](double bq) { return rate_iterated(IteratedParams{m1, m2, q, bq}, p); },
            0.0, 0.5);
        big_q = r.argmax[0];
    } else {
        q = *q_fixed;
        big_q = *big_q_fixed;
    }

    std::vector<RateRow> rows;
    rows.push_back(iterated_row(IteratedParams{m1, m2, q, big_q}, p));
    emit_csv(out, std::move(rows));
    return 0;
}

// ---------------------------------------------------------------------------
// Validation suite: every production formula against its brute-force
// counterpart, plus the structural normalization identities.

struct CheckRow {
    std::string name;
    int cases = 0;
    double max_dev = 0.0;
    double tol = 0.0;
    bool pass = false;
};

Eigen::Matrix2d zconj(const Eigen::Matrix2d& a) {
    Eigen::Matrix2d b = a;
    b(0, 1) = -b(0, 1);
    b(1, 0) = -b(1, 0);
    return b;
}

CheckRow check_entropy_blocks_vs_dense() {
    const std::vector<std::vector<MixtureTerm>> families = {
        {{0.5, bb84_state(0.08, 0.10)}, {0.5, zconj(bb84_state(0.08, 0.10))}},
        {{0.7, bb84_state(0.02, 0.00)}, {0.3, sixstate_gamma(0.10, 0.20)}},
        {{0.6, sixstate_gamma(0.30, 0.05)}, {0.4, zconj(sixstate_gamma(0.30, 0.05))}},
        // intentionally subnormalized
        {{0.5, bb84_state(0.25, 0.33)}, {0.25, zconj(bb84_state(0.40, 0.05))}},
    };
    CheckRow row{"entropy-blocks-vs-dense", 0, 0.0, 1e-9, false};
    for (int m = 1; m <= 8; ++m) {
        for (const auto& fam : families) {
            const double a = mixture_entropy(fam, m);
            const double b = oracle::dense_mixture_entropy(fam, m);
            row.max_dev = std::max(row.max_dev, std::abs(a - b));
            ++row.cases;
        }
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_bob_info_vs_enumeration() {
    const std::vector<double> pts = {0.0, 0.05, 0.11, 0.25, 0.37, 0.50, 0.63};
    CheckRow row{"bob-info-vs-enumeration", 0, 0.0, 1e-12, false};
    for (int m = 1; m <= 6; ++m) {
        for (double pt : pts) {
            const double a = mutual_info_xy(m, pt);
            const double b = oracle::enumerate_xy(m, pt);
            row.max_dev = std::max(row.max_dev, std::abs(a - b));
            ++row.cases;
        }
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_eve_info_bb84() {
    const std::vector<std::pair<double, double>> pq = {
        {0.03, 0.0}, {0.08, 0.10}, {0.11, 0.33}};
    CheckRow row{"eve-info-bb84-vs-dense", 0, 0.0, 1e-9, false};
    for (int m = 1; m <= 4; ++m) {
        for (const auto& [p, q] : pq) {
            const double a = mutual_info_xe_bb84(m, p, q);
            const double b = oracle::eve_mutual_info(m, bb84_family(p, p * p), q);
            row.max_dev = std::max(row.max_dev, std::abs(a - b));
            ++row.cases;
        }
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_eve_info_sixstate() {
    const std::vector<std::pair<double, double>> pq = {{0.05, 0.0}, {0.12, 0.20}};
    CheckRow row{"eve-info-sixstate-vs-dense", 0, 0.0, 1e-9, false};
    for (int m = 1; m <= 4; ++m) {
        for (const auto& [p, q] : pq) {
            const double a = mutual_info_xe_sixstate(m, p, q);
            const double b = oracle::eve_mutual_info(m, sixstate_channel(p), q);
            row.max_dev = std::max(row.max_dev, std::abs(a - b));
            ++row.cases;
        }
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_iterated_vs_enumeration() {
    const std::vector<std::pair<int, int>> sizes = {{1, 2}, {2, 2}, {3, 2}, {2, 3}, {3, 3}};
    const double p = 0.08, q = 0.05, big_q = 0.07;
    CheckRow row{"iterated-info-vs-enumeration", 0, 0.0, 1e-9, false};
    for (const auto& [m1, m2] : sizes) {
        const IteratedParams params{m1, m2, q, big_q};
        const oracle::IteratedCheck ref = oracle::iterated_enumeration_check(m1, m2, p, q, big_q);
        row.max_dev = std::max(row.max_dev,
                               std::abs(mutual_info_xy_iterated(params, p) - ref.i_xy));
        ++row.cases;
        row.max_dev = std::max(row.max_dev,
                               std::abs(mutual_info_xe_iterated(params, p) - ref.i_xe));
        ++row.cases;
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_rate_bb84_brute_force() {
    const std::vector<std::pair<double, double>> pq = {{0.05, 0.0}, {0.10, 0.20}};
    CheckRow row{"rate-bb84-vs-brute-force", 0, 0.0, 1e-9, false};
    for (int m = 1; m <= 4; ++m) {
        for (const auto& [p, q] : pq) {
            const double a = rate_bb84(m, p, q);
            const double b = oracle::full_rate_check(m, p, q);
            row.max_dev = std::max(row.max_dev, std::abs(a - b));
            ++row.cases;
        }
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_sixstate_q0_closed_form() {
    const std::vector<double> ps = {0.02, 0.08, 0.14};
    CheckRow row{"sixstate-q0-vs-closed-form", 0, 0.0, 1e-9, false};
    for (int m = 1; m <= 5; ++m) {
        for (double p : ps) {
            const double a = rate_sixstate(m, p, 0.0);
            const double b = lo_rate(m, p);
            row.max_dev = std::max(row.max_dev, std::abs(a - b));
            ++row.cases;
        }
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_mass_normalization() {
    CheckRow row{"syndrome-mass-normalization", 0, 0.0, 1e-12, false};
    for (int m : {1, 2, 3, 7, 20, 100, 333, 1024}) {
        for (double pt : {0.11, 0.5}) {
            const SyndromeWeightTable table = syndrome_table(m, pt);
            double total = 0.0;
            for (int s = 0; s < m; ++s) total += table.mass0[s] + table.mass1[s];
            row.max_dev = std::max(row.max_dev, std::abs(total - 1.0));
            ++row.cases;
        }
    }
    const std::vector<std::pair<int, int>> sizes = {{2, 2}, {3, 3}, {4, 5}, {5, 4}};
    for (const auto& [m1, m2] : sizes) {
        const IteratedParams params{m1, m2, 0.05, 0.07};
        const auto dist = iterated_syndrome_distribution(params, 0.08);
        row.max_dev = std::max(row.max_dev, std::abs(dist.total_mass() - 1.0));
        ++row.cases;
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_sector_completeness() {
    CheckRow row{"sector-dimension-completeness", 0, 0.0, 0.0, false};
    for (int m : {1, 2, 3, 10, 64, 333, 1024}) {
        const BlockStructure bs = block_structure(m);
        mpz_class total = 0;
        for (const SchurBlock& b : bs.blocks) total += b.multiplicity * b.dim;
        const mpz_class expected = mpz_class(1) << m;
        if (total != expected) row.max_dev = 1.0;
        ++row.cases;
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_independent_errors_maximal() {
    const std::vector<std::pair<double, double>> pq = {{0.08, 0.05}, {0.11, 0.25}};
    CheckRow row{"independent-errors-maximal", 0, 0.0, 1e-9, false};
    for (int m = 1; m <= 3; ++m) {
        for (const auto& [p, q] : pq) {
            const double t_lo = std::max(0.0, 2.0 * p - 1.0);
            std::vector<double> grid;
            for (int i = 0; i <= 20; ++i) grid.push_back(t_lo + (p - t_lo) * i / 20.0);
            const double violation = oracle::independent_error_check(m, p, q, grid);
            row.max_dev = std::max(row.max_dev, violation);
            ++row.cases;
        }
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

CheckRow check_block_basis_duality() {
    CheckRow row{"block-basis-duality", 0, 0.0, 0.0, false};
    for (int m : {1, 2, 3, 8, 16, 37, 64}) {
        const oracle::CatCodeBasis basis = oracle::cat_code_basis(m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                int dot = 0;
                for (int b = 0; b < m; ++b) dot ^= basis.xi[i][b] & basis.eta[j][b];
                const int expected = i == j ? 1 : 0;
                if (dot != expected) row.max_dev = 1.0;
            }
        }
        ++row.cases;
    }
    row.pass = row.max_dev <= row.tol;
    return row;
}

int cmd_validate() {
    Stopwatch clock;
    std::vector<CheckRow> rows;
    rows.push_back(check_entropy_blocks_vs_dense());
    rows.push_back(check_bob_info_vs_enumeration());
    rows.push_back(check_eve_info_bb84());
    rows.push_back(check_eve_info_sixstate());
    rows.push_back(check_iterated_vs_enumeration());
    rows.push_back(check_rate_bb84_brute_force());
    rows.push_back(check_sixstate_q0_closed_form());
    rows.push_back(check_mass_normalization());
    rows.push_back(check_sector_completeness());
    rows.push_back(check_independent_errors_maximal());
    rows.push_back(check_block_basis_duality());

    int failures = 0;
    std::printf("%-32s %7s %12s %10s  %s\n", "check", "cases", "max_dev", "tol", "status");
    for (const CheckRow& r : rows) {
        std::printf("%-32s %7d %12.3e %10.1e  %s\n", r.name.c_str(), r.cases, r.max_dev,
                    r.tol, r.pass ? "PASS" : "FAIL");
        if (!r.pass) ++failures;
    }
    std::printf("overall: %s (%zu/%zu checks, %.1f s)\n", failures == 0 ? "PASS" : "FAIL",
                rows.size() - failures, rows.size(), clock.ms() / 1000.0);
    return failures == 0 ? 0 : 3;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    pin_blas_threads();

    CLI::App app{
        "Secret-key rates and maximum tolerable bit-error rates for BB84 and "
        "6-state protocols with added noise and repetition-block preprocessing"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global options (--threads) after the subcommand

    int threads = 0;
    app.add_option("--threads", threads,
                   "Worker thread budget (default: KEYRATE_THREADS or hardware)")
        ->check(CLI::PositiveNumber);

    int rc = 0;

    // rate
    std::string rate_proto = "bb84";
    int rate_m = 1;
    double rate_p = 0.0;
    std::string rate_q = "auto";
    auto* sub_rate = app.add_subcommand("rate", "Key rate at one parameter point");
    sub_rate->add_option("--protocol", rate_proto, "bb84 or sixstate")
        ->required()
        ->check(CLI::IsMember({"bb84", "sixstate"}));
    sub_rate->add_option("--m", rate_m, "blocklength")->required();
    sub_rate->add_option("--p", rate_p, "bit-error rate")->required();
    sub_rate->add_option("--q", rate_q, "added noise rate, or 'auto' to optimize");
    sub_rate->callback([&] {
        apply_threads(threads);
        rc = cmd_rate(parse_proto(rate_proto), rate_m, rate_p, rate_q);
    });

    // threshold
    std::string th_proto = "bb84";
    int th_m = 1;
    std::string th_q = "auto";
    std::optional<double> th_p_lo, th_p_hi;
    double th_tol = 1e-9;
    auto* sub_th = app.add_subcommand("threshold", "Maximum tolerable bit-error rate");
    sub_th->add_option("--protocol", th_proto, "bb84 or sixstate")
        ->required()
        ->check(CLI::IsMember({"bb84", "sixstate"}));
    sub_th->add_option("--m", th_m, "blocklength")->required();
    sub_th->add_option("--q", th_q, "fixed noise rate, or 'auto' to optimize at every p");
    sub_th->add_option("--p-lo", th_p_lo, "lower bracket end (default 1e-4)");
    sub_th->add_option("--p-hi", th_p_hi, "upper bracket end (default: walk outward)");
    sub_th->add_option("--tol", th_tol,
                       "bisection half-width on p (default 1e-9; use 1e-5 for large m)");
    sub_th->callback([&] {
        apply_threads(threads);
        rc = cmd_threshold(parse_proto(th_proto), th_m, th_q, th_p_lo, th_p_hi, th_tol);
    });

    // curve
    std::string cv_proto = "bb84";
    int cv_m = 1;
    double cv_p_min = 0.0, cv_p_max = 0.0;
    int cv_steps = 1;
    std::string cv_q = "auto";
    std::string cv_out;
    auto* sub_cv = app.add_subcommand("curve", "Rate-vs-p sweep written as CSV");
    sub_cv->add_option("--protocol", cv_proto, "bb84 or sixstate")
        ->required()
        ->check(CLI::IsMember({"bb84", "sixstate"}));
    sub_cv->add_option("--m", cv_m, "blocklength")->required();
    sub_cv->add_option("--p-min", cv_p_min, "first bit-error rate")->required();
    sub_cv->add_option("--p-max", cv_p_max, "last bit-error rate")->required();
    sub_cv->add_option("--steps", cv_steps, "number of rows")->required();
    sub_cv->add_option("--q", cv_q, "noise rate, or 'auto' to optimize per row");
    sub_cv->add_option("--out", cv_out, "output CSV path")->required();
    sub_cv->callback([&] {
        apply_threads(threads);
        rc = cmd_curve(parse_proto(cv_proto), cv_m, cv_p_min, cv_p_max, cv_steps, cv_q,
                       cv_out);
    });

    // scan-m
    std::string sm_proto = "bb84";
    std::vector<int> sm_list;
    std::string sm_q = "auto";
    std::optional<double> sm_p_lo, sm_p_hi;
    double sm_tol = 1e-9;
    std::string sm_out;
    auto* sub_sm = app.add_subcommand("scan-m", "Threshold per blocklength, CSV rows at p_max");
    sub_sm->add_option("--protocol", sm_proto, "bb84 or sixstate")
        ->required()
        ->check(CLI::IsMember({"bb84", "sixstate"}));
    sub_sm->add_option("--m-list", sm_list, "comma-separated blocklengths")
        ->required()
        ->delimiter(',');
    sub_sm->add_option("--q", sm_q, "fixed noise rate, or 'auto' to optimize at every p");
    sub_sm->add_option("--p-lo", sm_p_lo, "lower bracket end (default 1e-4)");
    sub_sm->add_option("--p-hi", sm_p_hi, "upper bracket end (default: walk outward)");
    sub_sm->add_option("--tol", sm_tol,
                       "bisection half-width on p (default 1e-9; use 1e-5 for large m)");
    sub_sm->add_option("--out", sm_out, "output CSV path (default: standard output)");
    sub_sm->callback([&] {
        apply_threads(threads);
        rc = cmd_scan_m(parse_proto(sm_proto), sm_list, sm_q, sm_p_lo, sm_p_hi, sm_tol, sm_out);
    });

    // iterate
    int it_m1 = 1, it_m2 = 1;
    double it_p = 0.0;
    std::string it_q = "auto", it_big_q = "auto";
    std::string it_out;
    auto* sub_it = app.add_subcommand("iterate", "Two-level preprocessing at one point");
    sub_it->add_option("--m1", it_m1, "inner blocklength")->required();
    sub_it->add_option("--m2", it_m2, "outer blocklength")->required();
    sub_it->add_option("--p", it_p, "bit-error rate")->required();
    sub_it->add_option("--q", it_q, "first-level noise rate, or 'auto'");
    sub_it->add_option("--Q", it_big_q, "second-level noise rate, or 'auto'");
    sub_it->add_option("--out", it_out, "output CSV path (default: standard output)");
    sub_it->callback([&] {
        apply_threads(threads);
        rc = cmd_iterate(it_m1, it_m2, it_p, it_q, it_big_q, it_out);
    });

    // validate
    auto* sub_val = app.add_subcommand(
        "validate", "Run the brute-force validation suite and report max deviations");
    sub_val->callback([&] {
        apply_threads(threads);
        rc = cmd_validate();
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const keyrate::numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
