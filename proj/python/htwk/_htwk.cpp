#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "htwk/classlab.hpp"
#include "htwk/cli.hpp"
#include "htwk/distspec.hpp"
#include "htwk/tailmath.hpp"
#include "htwk/verify.hpp"
#include "htwk/walksim.hpp"

namespace py = pybind11;
using namespace htwk;

namespace {

ParallelOptions par(std::uint64_t seed, unsigned workers) {
    ParallelOptions p;
    p.seed = seed;
    p.workers = workers;
    return p;
}

py::dict wilson_dict(const std::vector<WilsonInterval>& ci) {
    std::vector<double> lo, hi;
    for (const auto& c : ci) {
        lo.push_back(c.lo);
        hi.push_back(c.hi);
    }
    py::dict d;
    d["lo"] = lo;
    d["hi"] = hi;
    return d;
}

// Reports cross the boundary as JSON text; the Python side decodes them.
std::string block_json(const CheckBlock& b) { return b.to_json().dump(); }

}  // namespace

PYBIND11_MODULE(_htwk, m) {
    m.doc() = "Heavy-tailed random walk cycle maxima: analytic tails, class diagnostics and simulation.";

    py::register_exception<Error>(m, "HtwkError");
    py::register_exception<distspec::ParseError>(m, "ParseError", PyExc_ValueError);

    m.attr("default_model_spec") = std::string(distspec::default_model_spec);

    m.def("format_spec", [](const std::string& text) { return distspec::format_spec(distspec::parse_spec(text)); },
          py::arg("text"), "Parse a distribution expression and return its canonical form.");

    py::class_<IncrementModel>(m, "Model")
        .def(py::init([](const std::string& spec) { return model_from_spec(spec); }), py::arg("spec"))
        .def_property_readonly("spec", &IncrementModel::spec)
        .def("pos_tail", &IncrementModel::pos_tail, py::arg("x"))
        .def("neg_tail", &IncrementModel::neg_tail, py::arg("y"))
        .def_property_readonly("q_plus", &IncrementModel::q_plus)
        .def_property_readonly("q_minus", &IncrementModel::q_minus)
        .def_property_readonly("infinite_negative_mean", &IncrementModel::infinite_negative_mean)
        .def("__repr__", [](const IncrementModel& self) { return "Model(\"" + self.spec() + "\")"; });

    m.def(
        "truncated_mean",
        [](const IncrementModel& model, const std::vector<double>& xs) {
            const TruncatedMean tm(model);
            std::vector<double> out;
            for (double x : xs) out.push_back(tm(x));
            return out;
        },
        py::arg("model"), py::arg("xs"), "m(x) = E min(xi^-, x) at each x.");

    m.def(
        "criterion_K",
        [](const IncrementModel& model) {
            const KResult k = criterion_K(model);
            return py::make_tuple(k.value, k.finite);
        },
        py::arg("model"), "Returns (K, finite); K is the partial sum when divergent.");

    m.def("mu_plus", [](const IncrementModel& model) { return mu_plus(model); }, py::arg("model"));

    m.def(
        "g1_tail",
        [](const IncrementModel& model, const std::vector<double>& xs) {
            const G1Tail g(model);
            std::vector<double> out;
            for (double x : xs) out.push_back(g(x));
            return out;
        },
        py::arg("model"), py::arg("xs"));

    m.def(
        "gh_tail",
        [](const IncrementModel& model, const std::string& h, const std::vector<double>& xs) {
            const TruncatedMean tm(model);
            RenewalMeasure H;
            if (h == "lebesgue") {
                H = RenewalMeasure::lebesgue();
            } else if (h == "x_over_m") {
                H = RenewalMeasure::x_over_m(tm);
            } else {
                throw Error("h must be 'lebesgue' or 'x_over_m'");
            }
            std::vector<double> out;
            for (double x : xs) out.push_back(gh_tail(model, H, x));
            return out;
        },
        py::arg("model"), py::arg("h"), py::arg("xs"));

    m.def(
        "membership_curve",
        [](const std::string& kind, const IncrementModel& model, const std::vector<double>& xs) {
            const RatioDiagnostic d = membership_curve(parse_membership_kind(kind), model, nullptr, xs);
            return d.to_json().dump();
        },
        py::arg("kind"), py::arg("model"), py::arg("xs"), "Ratio curve as JSON text (kinds L, D, S, Sstar).");

    m.def(
        "mtau_tail",
        [](const IncrementModel& model, const std::vector<double>& xs, std::size_t cycles, std::uint64_t seed,
           unsigned workers) {
            MtauTail t;
            {
                py::gil_scoped_release release;
                t = mtau_tail_estimate(model, xs, cycles, par(seed, workers));
            }
            py::dict d;
            d["xs"] = t.xs;
            d["hits"] = t.hits;
            d["p_hat"] = t.p_hat;
            d["ci"] = wilson_dict(t.ci);
            d["cycles"] = t.cycles;
            d["tau_mean"] = t.tau_mean;
            d["tau_se"] = t.tau_se;
            return d;
        },
        py::arg("model"), py::arg("xs"), py::arg("cycles"), py::arg("seed"), py::arg("workers") = 0);

    m.def(
        "sample_sup",
        [](const IncrementModel& model, std::size_t n, double barrier, std::uint64_t seed, unsigned workers) {
            SupSample s;
            {
                py::gil_scoped_release release;
                s = sample_sup(model, n, barrier, par(seed, workers));
            }
            py::dict d;
            d["m"] = s.m;
            d["p_hat"] = s.p_hat;
            d["p_se"] = s.p_se;
            d["escape_estimate"] = s.escape_estimate;
            d["bias_flag"] = s.bias_flag;
            return d;
        },
        py::arg("model"), py::arg("n"), py::arg("barrier") = 1e4, py::arg("seed"), py::arg("workers") = 0);

    m.def(
        "renewal_estimate",
        [](const IncrementModel& model, const std::vector<double>& xs, std::size_t reps, std::uint64_t seed,
           unsigned workers) {
            RenewalEstimate r;
            {
                py::gil_scoped_release release;
                r = renewal_estimate(model, xs, reps, par(seed, workers));
            }
            py::dict d;
            d["xs"] = r.xs;
            d["h"] = r.h;
            d["se"] = r.se;
            return d;
        },
        py::arg("model"), py::arg("xs"), py::arg("reps"), py::arg("seed"), py::arg("workers") = 0);

    m.def(
        "main_theorem_report",
        [](const IncrementModel& model, const std::vector<double>& xs, std::size_t cycles, std::uint64_t seed,
           unsigned workers, double tol, std::size_t sup_samples) {
            MainTheoremOptions opt;
            opt.tol = tol;
            opt.sup_samples = sup_samples;
            py::gil_scoped_release release;
            return block_json(main_theorem_report(model, xs, cycles, par(seed, workers), opt));
        },
        py::arg("model"), py::arg("xs"), py::arg("cycles"), py::arg("seed"), py::arg("workers") = 0,
        py::arg("tol") = 0.2, py::arg("sup_samples") = 100000);

    m.def(
        "theorem2_report",
        [](const IncrementModel& model, const std::vector<double>& xs) {
            py::gil_scoped_release release;
            return block_json(theorem2_report(model, xs));
        },
        py::arg("model"), py::arg("xs"));

    m.def(
        "recompute_verdict",
        [](const std::string& block) {
            CheckBlock b = CheckBlock::from_json(nlohmann::json::parse(block));
            return std::string(verdict_name(recompute_verdict(b)));
        },
        py::arg("block"), "Verdict recomputed from the stored numbers of a serialized block.");

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "htwk");
            std::vector<char*> argv;
            for (auto& a : args) argv.push_back(a.data());
            py::gil_scoped_release release;
            return cli::run_command(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Runs the htwk command line; returns its exit code.");
}
