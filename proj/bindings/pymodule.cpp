// Python bindings for the key-rate library. Mixture terms cross the
// boundary as (weight, 2x2 array) tuples; exact sector multiplicities cross
// as arbitrary-precision Python ints.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "keyrate/bb84.hpp"
#include "keyrate/entropy.hpp"
#include "keyrate/iterated.hpp"
#include "keyrate/optimize.hpp"
#include "keyrate/oracle.hpp"
#include "keyrate/parallel.hpp"
#include "keyrate/schur.hpp"
#include "keyrate/sixstate.hpp"

namespace py = pybind11;
using namespace keyrate;

namespace {

using TermList = std::vector<std::pair<double, Eigen::Matrix2d>>;

std::vector<MixtureTerm> to_terms(const TermList& terms) {
    std::vector<MixtureTerm> out;
    out.reserve(terms.size());
    for (const auto& [w, s] : terms) out.push_back(MixtureTerm{w, s});
    return out;
}

py::int_ to_py_int(const mpz_class& v) {
    return py::cast<py::int_>(py::module_::import("builtins").attr("int")(v.get_str()));
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() =
        "Secret-key rates and bit-error thresholds for BB84 and 6-state "
        "protocols with added noise and repetition-block preprocessing";
    mod.attr("__version__") = "1.0.0";

    pin_blas_threads();

    py::register_exception<numerical_error>(mod, "NumericalError", PyExc_RuntimeError);

    // ------------------------------------------------------------------ threads
    mod.def("max_threads", &max_threads, "Current worker thread budget.");
    mod.def("set_max_threads", &set_max_threads, py::arg("n"),
            "Override the worker thread budget for the process (n >= 1).");

    // ------------------------------------------------------------------ entropy
    mod.def("binary_entropy", &binary_entropy, py::arg("x"),
            "Binary entropy in bits, 0 log 0 = 0.");
    mod.def(
        "shannon_entropy",
        [](const std::vector<double>& p) {
            return shannon_entropy(std::span<const double>(p.data(), p.size()));
        },
        py::arg("p"),
        "Shannon entropy in bits of a (possibly subnormalized) probability vector.");
    mod.def(
        "von_neumann_entropy",
        [](const Eigen::MatrixXd& a) { return von_neumann_entropy(a); }, py::arg("a"),
        "Von Neumann entropy in bits of a PSD operator with trace <= 1.");

    // ------------------------------------------------------------------ sectors
    py::class_<SchurBlock>(mod, "SchurBlock",
                           "One collective-spin sector of m qubits.")
        .def_readonly("two_j", &SchurBlock::two_j)
        .def_readonly("dim", &SchurBlock::dim)
        .def_property_readonly(
            "multiplicity",
            [](const SchurBlock& b) { return to_py_int(b.multiplicity); },
            "Exact sector multiplicity as a Python int.")
        .def_readonly("log2_multiplicity", &SchurBlock::log2_multiplicity)
        .def("__repr__", [](const SchurBlock& b) {
            return "SchurBlock(two_j=" + std::to_string(b.two_j) +
                   ", dim=" + std::to_string(b.dim) +
                   ", multiplicity=" + b.multiplicity.get_str() + ")";
        });
    py::class_<BlockStructure>(mod, "BlockStructure")
        .def_readonly("m", &BlockStructure::m)
        .def_readonly("blocks", &BlockStructure::blocks);
    mod.def("block_structure", &block_structure, py::arg("m"),
            "Collective-spin sector decomposition of m qubits (1 <= m <= 1024).");
    mod.def("rotation_angle", &rotation_angle, py::arg("rho"),
            "Angle whose half-angle rotation diagonalizes a symmetric 2x2 matrix.");
    mod.def("wigner_block", &wigner_block, py::arg("two_j"), py::arg("theta"),
            py::call_guard<py::gil_scoped_release>(),
            "Collective rotation restricted to one spin sector.");
    mod.def("diagonal_block", &diagonal_block, py::arg("two_j"), py::arg("lambda1"),
            py::arg("lambda2"), py::arg("m"),
            "Diagonal of one spin sector of diag(lambda1, lambda2)^(tensor m).");
    mod.def(
        "mixture_entropy",
        [](const TermList& terms, int m) { return mixture_entropy(to_terms(terms), m); },
        py::arg("terms"), py::arg("m"), py::call_guard<py::gil_scoped_release>(),
        "Entropy in bits of sum_t w_t rho_t^(tensor m); terms are (weight, 2x2 "
        "array) pairs.");

    // ------------------------------------------------------------------ optimize
    py::class_<OptimizationResult>(mod, "OptimizationResult")
        .def(py::init([](std::vector<double> argmax, double value, long evaluations,
                         bool converged) {
                 return OptimizationResult{std::move(argmax), value, evaluations,
                                           converged};
             }),
             py::arg("argmax"), py::arg("value"), py::arg("evaluations") = 0,
             py::arg("converged") = true)
        .def_readwrite("argmax", &OptimizationResult::argmax)
        .def_readwrite("value", &OptimizationResult::value)
        .def_readwrite("evaluations", &OptimizationResult::evaluations)
        .def_readwrite("converged", &OptimizationResult::converged)
        .def("__repr__", [](const OptimizationResult& r) {
            std::string s = "OptimizationResult(argmax=[";
            for (std::size_t i = 0; i < r.argmax.size(); ++i) {
                if (i) s += ", ";
                s += std::to_string(r.argmax[i]);
            }
            s += "], value=" + std::to_string(r.value) + ")";
            return s;
        });
    py::class_<ThresholdResult>(mod, "ThresholdResult")
        .def_readonly("p_max", &ThresholdResult::p_max)
        .def_readonly("half_width", &ThresholdResult::half_width)
        .def_readonly("q_at_threshold", &ThresholdResult::q_at_threshold)
        .def_readonly("evaluations", &ThresholdResult::evaluations)
        .def("__repr__", [](const ThresholdResult& r) {
            return "ThresholdResult(p_max=" + std::to_string(r.p_max) + ")";
        });
    mod.def(
        "maximize_over_noise",
        [](const std::function<double(double)>& f, double lo, double hi,
           std::optional<double> hint) {
            return hint ? maximize_over_noise(f, lo, hi, *hint)
                        : maximize_over_noise(f, lo, hi);
        },
        py::arg("f"), py::arg("lo"), py::arg("hi"), py::arg("hint") = std::nullopt,
        "Deterministic grid + golden-section maximization over one noise rate.");
    mod.def(
        "maximize_over_noise_2d",
        [](const std::function<double(double, double)>& f, double lo1, double hi1,
           double lo2, double hi2, std::optional<double> hint1,
           std::optional<double> hint2) {
            if (hint1.has_value() != hint2.has_value()) {
                throw std::invalid_argument("hint1 and hint2 must be given together");
            }
            return hint1 ? maximize_over_noise_2d(f, lo1, hi1, lo2, hi2, *hint1, *hint2)
                         : maximize_over_noise_2d(f, lo1, hi1, lo2, hi2);
        },
        py::arg("f"), py::arg("lo1"), py::arg("hi1"), py::arg("lo2"), py::arg("hi2"),
        py::arg("hint1") = std::nullopt, py::arg("hint2") = std::nullopt,
        "Deterministic maximization over two noise rates.");
    mod.def("find_threshold", &find_threshold, py::arg("rate_opt"), py::arg("p_lo"),
            py::arg("p_hi"), py::arg("half_width") = 1e-5,
            "Bisect for the largest p with a positive optimized rate; rate_opt maps "
            "p to an OptimizationResult and the bracket must change sign. half_width "
            "sets the final bracket half-width on p.");

    // ------------------------------------------------------------------ bb84
    py::class_<BitPhaseDistribution>(mod, "BitPhaseDistribution",
                                     "Joint bit/phase flip distribution of one signal.")
        .def(py::init([](double p00, double p10, double p11, double p01) {
                 return BitPhaseDistribution{p00, p10, p11, p01};
             }),
             py::arg("p00") = 1.0, py::arg("p10") = 0.0, py::arg("p11") = 0.0,
             py::arg("p01") = 0.0)
        .def_readwrite("p00", &BitPhaseDistribution::p00)
        .def_readwrite("p10", &BitPhaseDistribution::p10)
        .def_readwrite("p11", &BitPhaseDistribution::p11)
        .def_readwrite("p01", &BitPhaseDistribution::p01)
        .def("bit_error", &BitPhaseDistribution::bit_error)
        .def("phase_given_u0", &BitPhaseDistribution::phase_given_u0)
        .def("phase_given_u1", &BitPhaseDistribution::phase_given_u1);
    mod.def("bb84_family", &bb84_family, py::arg("p"), py::arg("t"),
            "The BB84 attack family {1-2p+t, p-t, t, p-t}.");
    mod.def("p_tilde", &p_tilde, py::arg("p"), py::arg("q"),
            "Effective bit-error rate after added noise q.");
    py::class_<SyndromeWeightTable>(mod, "SyndromeWeightTable")
        .def_readonly("m", &SyndromeWeightTable::m)
        .def_readonly("p_tilde", &SyndromeWeightTable::p_tilde)
        .def_readonly("mass0", &SyndromeWeightTable::mass0)
        .def_readonly("mass1", &SyndromeWeightTable::mass1)
        .def_readonly("cond1", &SyndromeWeightTable::cond1);
    mod.def("syndrome_table", &syndrome_table, py::arg("m"), py::arg("p_tilde"),
            "Per-weight-class syndrome statistics of a length-m block.");
    mod.def("mutual_info_xy", &mutual_info_xy, py::arg("m"), py::arg("p_tilde"),
            py::call_guard<py::gil_scoped_release>(),
            "Bob's information per block (protocol-independent).");
    mod.def("mutual_info_xe_bb84", &mutual_info_xe_bb84, py::arg("m"), py::arg("p"),
            py::arg("q"), py::call_guard<py::gil_scoped_release>(),
            "The attacker's information per block, BB84 channel.");
    mod.def("rate_bb84", &rate_bb84, py::arg("m"), py::arg("p"), py::arg("q"),
            py::call_guard<py::gil_scoped_release>(),
            "Unclamped BB84 secret-key rate in bits per signal.");
    mod.def(
        "rate_bb84_opt",
        [](int m, double p, std::optional<double> q_hint) {
            py::gil_scoped_release release;
            return q_hint ? rate_bb84_opt(m, p, *q_hint) : rate_bb84_opt(m, p);
        },
        py::arg("m"), py::arg("p"), py::arg("q_hint") = std::nullopt,
        "Maximize rate_bb84 over the added noise q.");
    mod.def("bb84_state", &bb84_state, py::arg("p"), py::arg("q"),
            "The 2x2 attack state at independent bit/phase errors.");

    // ------------------------------------------------------------------ sixstate
    py::class_<SixStateChannel>(mod, "SixStateChannel")
        .def_readonly("p", &SixStateChannel::p)
        .def_readonly("p_prime", &SixStateChannel::p_prime)
        .def("joint", &SixStateChannel::joint)
        .def("phase_given_u0", &SixStateChannel::phase_given_u0)
        .def("phase_given_u1", &SixStateChannel::phase_given_u1);
    mod.def("sixstate_channel", &sixstate_channel, py::arg("p"),
            "The symmetric 6-state channel at bit-error rate p (p < 2/3).");
    mod.def("sixstate_gamma", &sixstate_gamma, py::arg("p"), py::arg("q"),
            "The attacker state on an error-free position.");
    mod.def("mutual_info_xe_sixstate", &mutual_info_xe_sixstate, py::arg("m"),
            py::arg("p"), py::arg("q"), py::call_guard<py::gil_scoped_release>(),
            "The attacker's information per block, 6-state channel.");
    mod.def("rate_sixstate", &rate_sixstate, py::arg("m"), py::arg("p"), py::arg("q"),
            py::call_guard<py::gil_scoped_release>(),
            "Unclamped 6-state secret-key rate in bits per signal.");
    mod.def("lo_rate", &lo_rate, py::arg("m"), py::arg("p"),
            py::call_guard<py::gil_scoped_release>(),
            "The q = 0 rate in its four-outcome closed form.");
    mod.def(
        "rate_sixstate_opt",
        [](int m, double p, std::optional<double> q_hint) {
            py::gil_scoped_release release;
            return q_hint ? rate_sixstate_opt(m, p, *q_hint) : rate_sixstate_opt(m, p);
        },
        py::arg("m"), py::arg("p"), py::arg("q_hint") = std::nullopt,
        "Maximize rate_sixstate over the added noise q.");

    // ------------------------------------------------------------------ iterated
    py::class_<IteratedParams>(mod, "IteratedParams",
                               "Two-level preprocessing parameters.")
        .def(py::init([](int m1, int m2, double q, double big_q) {
                 return IteratedParams{m1, m2, q, big_q};
             }),
             py::arg("m1") = 1, py::arg("m2") = 1, py::arg("q") = 0.0,
             py::arg("big_q") = 0.0)
        .def_readwrite("m1", &IteratedParams::m1)
        .def_readwrite("m2", &IteratedParams::m2)
        .def_readwrite("q", &IteratedParams::q)
        .def_readwrite("big_q", &IteratedParams::big_q);
    mod.def("q_tot", &q_tot, py::arg("params"),
            "Combined flip rate of the two noise layers.");
    mod.def("mutual_info_xy_iterated", &mutual_info_xy_iterated, py::arg("params"),
            py::arg("p"), py::call_guard<py::gil_scoped_release>(),
            "Bob's information per super-block.");
    mod.def("mutual_info_xe_iterated", &mutual_info_xe_iterated, py::arg("params"),
            py::arg("p"), py::call_guard<py::gil_scoped_release>(),
            "The attacker's information per super-block (m1*m2 <= 13).");
    mod.def("rate_iterated", &rate_iterated, py::arg("params"), py::arg("p"),
            py::call_guard<py::gil_scoped_release>(),
            "Unclamped two-level secret-key rate in bits per signal.");
    mod.def(
        "rate_iterated_opt",
        [](int m1, int m2, double p, std::optional<double> q_hint,
           std::optional<double> big_q_hint) {
            if (q_hint.has_value() != big_q_hint.has_value()) {
                throw std::invalid_argument("q_hint and big_q_hint must be given together");
            }
            py::gil_scoped_release release;
            return q_hint ? rate_iterated_opt(m1, m2, p, *q_hint, *big_q_hint)
                          : rate_iterated_opt(m1, m2, p);
        },
        py::arg("m1"), py::arg("m2"), py::arg("p"), py::arg("q_hint") = std::nullopt,
        py::arg("big_q_hint") = std::nullopt,
        "Maximize rate_iterated over (q, Q).");

    // ------------------------------------------------------------------ oracle
    auto ora = mod.def_submodule("oracle", "Brute-force reference implementations.");
    py::class_<oracle::CatCodeBasis>(ora, "CatCodeBasis")
        .def_readonly("m", &oracle::CatCodeBasis::m)
        .def_readonly("xi", &oracle::CatCodeBasis::xi)
        .def_readonly("eta", &oracle::CatCodeBasis::eta);
    ora.def("cat_code_basis", &oracle::cat_code_basis, py::arg("m"),
            "Dual bases of the repetition block over GF(2).");
    ora.def(
        "dense_mixture_entropy",
        [](const TermList& terms, int m) {
            return oracle::dense_mixture_entropy(to_terms(terms), m);
        },
        py::arg("terms"), py::arg("m"), py::call_guard<py::gil_scoped_release>(),
        "Mixture entropy by explicit Kronecker powers (2^m <= 4096).");
    ora.def("enumerate_xy", &oracle::enumerate_xy, py::arg("m"), py::arg("p_tilde"),
            "Bob's information by exhaustive enumeration (m <= 6).");
    ora.def("eve_mutual_info",
            py::overload_cast<int, const BitPhaseDistribution&, double>(
                &oracle::eve_mutual_info),
            py::arg("m"), py::arg("joint"), py::arg("q"),
            "The attacker's information from explicit conditional states (m <= 4).");
    ora.def("eve_mutual_info",
            py::overload_cast<int, const SixStateChannel&, double>(
                &oracle::eve_mutual_info),
            py::arg("m"), py::arg("channel"), py::arg("q"));
    ora.def("independent_error_check", &oracle::independent_error_check, py::arg("m"),
            py::arg("p"), py::arg("q"), py::arg("t_grid"),
            "Max advantage of correlated errors over independent ones (m <= 3).");
    py::class_<oracle::IteratedCheck>(ora, "IteratedCheck")
        .def_readonly("i_xy", &oracle::IteratedCheck::i_xy)
        .def_readonly("i_xe", &oracle::IteratedCheck::i_xe);
    ora.def("iterated_enumeration_check", &oracle::iterated_enumeration_check,
            py::arg("m1"), py::arg("m2"), py::arg("p"), py::arg("q"), py::arg("big_q"),
            py::call_guard<py::gil_scoped_release>(),
            "Both sides of the two-level scheme by brute force (m1, m2 <= 3).");
    ora.def("full_rate_check", &oracle::full_rate_check, py::arg("m"), py::arg("p"),
            py::arg("q"), "Brute-force BB84 rate at independent errors (m <= 4).");
}
