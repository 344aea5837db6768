#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsmix/asymptotics.hpp"
#include "gsmix/design.hpp"
#include "gsmix/estimation.hpp"
#include "gsmix/simulation.hpp"
#include "gsmix/sub_density.hpp"

namespace py = pybind11;
using namespace gsmix;

namespace {

py::dict row_dict(const OcRow& r) {
    py::dict d;
    d["theta"] = r.theta;
    d["stop_prob"] = r.stop_prob;
    d["reject_prob"] = r.reject_prob;
    d["cum_reject"] = r.cum_reject;
    d["expected_n"] = r.expected_n;
    return d;
}

py::dict moments_dict(const MomentsReport& rep) {
    py::dict d;
    d["kind"] = rep.kind == MleKind::Conditional ? "conditional" : "unconditional";
    py::list rows;
    auto one = [](const StageMoments& s) {
        py::dict r;
        r["stage"] = s.stage;
        r["pr_stage"] = s.pr_stage;
        r["divergence_rate"] = s.divergence_rate;
        r["bias"] = s.bias;
        r["sd"] = s.sd;
        r["mse"] = s.mse;
        return r;
    };
    for (const auto& s : rep.per_stage) rows.append(one(s));
    d["per_stage"] = rows;
    d["overall"] = one(rep.overall);
    return d;
}

MleKind kind_of(const std::string& s) {
    if (s == "unconditional") return MleKind::Unconditional;
    if (s == "conditional") return MleKind::Conditional;
    throw std::invalid_argument("kind must be 'unconditional' or 'conditional'");
}

}  // namespace

PYBIND11_MODULE(_gsmix, m) {
    m.doc() = "group sequential design engine";

    py::class_<Design>(m, "Design")
        .def(py::init<std::vector<int>, std::vector<double>>(), py::arg("n"), py::arg("c"))
        .def_readonly("n", &Design::n)
        .def_readonly("c", &Design::c)
        .def_readonly("cum", &Design::cum)
        .def_property_readonly("stages", &Design::stages)
        .def("__repr__", [](const Design& d) {
            std::string r = "Design(n=[";
            for (std::size_t i = 0; i < d.n.size(); ++i)
                r += (i ? "," : "") + std::to_string(d.n[i]);
            r += "], c=[";
            for (std::size_t i = 0; i < d.c.size(); ++i)
                r += (i ? "," : "") + std::to_string(d.c[i]);
            return r + "])";
        });

    m.def("solve_alpha0", &solve_alpha0, py::arg("alpha"), py::arg("k"));

    m.def(
        "solve_design",
        [](int k, double alpha, double power, std::vector<double> alternatives,
           std::vector<double> alphas) {
            DesignSpec spec;
            spec.k = k;
            spec.alpha = alpha;
            spec.power = power;
            spec.alternatives = std::move(alternatives);
            spec.alphas = std::move(alphas);
            DesignSolution sol = solve_design(spec);
            py::dict out;
            out["design"] = sol.design;
            out["alphas"] = sol.alphas;
            out["attained_power"] = sol.attained_power;
            py::list rows;
            for (const auto& r : sol.summary) rows.append(row_dict(r));
            out["summary"] = rows;
            return out;
        },
        py::arg("k"), py::arg("alpha"), py::arg("power"), py::arg("alternatives"),
        py::arg("alphas") = std::vector<double>{});

    m.def(
        "stopping_probabilities",
        [](const Design& d, double theta) {
            StopReport r = stopping_probabilities(d, theta);
            py::dict out;
            out["stop_prob"] = r.stop_prob;
            out["reject_prob"] = r.reject_prob;
            out["cum_reject"] = r.cum_reject;
            return out;
        },
        py::arg("design"), py::arg("theta"));

    m.def(
        "mixture_cdf",
        [](const Design& d, double theta, double v) { return mixture_cdf(d, theta, v); },
        py::arg("design"), py::arg("theta"), py::arg("v"));

    m.def(
        "expected_sample_size",
        [](const Design& d, double theta) { return expected_sample_size(d, theta); },
        py::arg("design"), py::arg("theta"));

    m.def(
        "oc_row", [](const Design& d, double theta) { return row_dict(oc_row(d, theta)); },
        py::arg("design"), py::arg("theta"));

    m.def(
        "estimate",
        [](const Design& d, std::vector<double> stage_means) {
            TrialOutcome o = make_outcome(d, stage_means);
            MleResult u = mle_unconditional(o);
            MleResult c = mle_conditional(o);
            ObservedInfo info = observed_info(o, u.estimate);
            bool reject = (o.stop_stage < d.stages()) ||
                          (o.cumulative_z.back() > d.c[d.stages() - 1]);
            py::dict out;
            out["stop_stage"] = o.stop_stage;
            out["decision"] = reject ? "reject" : "accept";
            out["z"] = o.cumulative_z;
            out["estimate"] = u.estimate;
            out["conditional_estimate"] = c.estimate;
            out["conditional_diverged"] = c.diverged;
            out["information"] = info.i;
            out["conditional_information"] = info.i_conditional;
            return out;
        },
        py::arg("design"), py::arg("stage_means"));

    m.def(
        "expected_info",
        [](const Design& d, double theta) {
            InfoReport r = expected_info(d, theta);
            py::dict out;
            out["theta"] = r.theta;
            out["stage_i"] = r.stage_i;
            out["stage_i_conditional"] = r.stage_i_conditional;
            out["stage_i_fixed"] = r.stage_i_fixed;
            out["stop_prob"] = r.stop_prob;
            out["overall_i"] = r.overall_i;
            out["overall_i_conditional"] = r.overall_i_conditional;
            out["overall_i_fixed"] = r.overall_i_fixed;
            out["info_loss"] = r.info_loss;
            return out;
        },
        py::arg("design"), py::arg("theta"));

    m.def(
        "estimator_moments",
        [](const Design& d, double theta, const std::string& kind, const std::string& method,
           long reps, std::uint64_t seed) {
            MomentMethod mm =
                method == "mc" ? MomentMethod::MonteCarlo : MomentMethod::Quadrature;
            if (method != "mc" && method != "quad")
                throw std::invalid_argument("method must be 'quad' or 'mc'");
            return moments_dict(estimator_moments(d, theta, kind_of(kind), mm, reps, seed));
        },
        py::arg("design"), py::arg("theta"), py::arg("kind"), py::arg("method") = "quad",
        py::arg("reps") = 100000, py::arg("seed") = 1);

    m.def(
        "run_oc",
        [](const Design& d, double theta, long reps, std::uint64_t seed, int threads) {
            SimConfig cfg(d);
            cfg.theta = theta;
            cfg.reps = reps;
            cfg.master_seed = seed;
            cfg.threads = threads;
            SimResult res = run_oc(cfg);
            py::dict out;
            out["reps"] = res.reps;
            out["stop_count"] = res.stop_count;
            out["reject_count"] = res.reject_count;
            out["cum_reject_count"] = res.cum_reject_count;
            out["mean_n"] = res.mean_n;
            return out;
        },
        py::arg("design"), py::arg("theta"), py::arg("reps") = 100000, py::arg("seed") = 1,
        py::arg("threads") = 0);

    m.def(
        "estimator_study",
        [](const Design& d, double theta, long reps, std::uint64_t seed, int threads) {
            SimConfig cfg(d);
            cfg.theta = theta;
            cfg.reps = reps;
            cfg.master_seed = seed;
            cfg.threads = threads;
            SimResult res = run_estimator_study(cfg);
            py::dict out;
            out["unconditional"] =
                moments_dict(summarize_moments(res, d, theta, MleKind::Unconditional));
            out["conditional"] =
                moments_dict(summarize_moments(res, d, theta, MleKind::Conditional));
            return out;
        },
        py::arg("design"), py::arg("theta"), py::arg("reps") = 100000, py::arg("seed") = 1,
        py::arg("threads") = 0);

    py::class_<LocalAltSpec>(m, "LocalAltSpec")
        .def(py::init([](double h, std::vector<std::vector<double>> ratios,
                         std::vector<double> boundary) {
                 LocalAltSpec s;
                 s.h = h;
                 s.ratios = std::move(ratios);
                 s.boundary = std::move(boundary);
                 return s;
             }),
             py::arg("h"), py::arg("ratios"), py::arg("boundary"))
        .def_readonly("h", &LocalAltSpec::h)
        .def_readonly("ratios", &LocalAltSpec::ratios)
        .def_readonly("boundary", &LocalAltSpec::boundary);

    m.def("local_spec_of", &local_spec_of, py::arg("design"), py::arg("h"));
    m.def("mixture_cdf_two_stage", &mixture_cdf_two_stage, py::arg("spec"), py::arg("v"));
    m.def(
        "mixture_cdf_k_stage",
        [](const LocalAltSpec& s, double v) { return mixture_cdf_k_stage(s, v); },
        py::arg("spec"), py::arg("v"));
    m.def(
        "finite_centered_cdf",
        [](const Design& d, double h, double v) { return finite_centered_cdf(d, h, v); },
        py::arg("design"), py::arg("h"), py::arg("v"));
}
