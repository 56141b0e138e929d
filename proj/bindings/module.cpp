// Python bindings for the sampling library: geometry primitives, kernel
// evaluators, the exact Gaussian and proximal samplers, the Langevin
// baseline, and the text-config experiment driver.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rps/baselines.hpp"
#include "rps/diagnostics.hpp"
#include "rps/harness.hpp"
#include "rps/heat_kernel.hpp"
#include "rps/manifold.hpp"
#include "rps/proximal.hpp"
#include "rps/riemannian_gaussian.hpp"
#include "rps/rng.hpp"

namespace py = pybind11;
using namespace rps;

namespace {

ExperimentConfig preset_by_name(const std::string& name) {
    if (name == "vmf_s2") return ExperimentConfig::preset_vmf_s2();
    if (name == "vmf_s5") return ExperimentConfig::preset_vmf_s5();
    if (name == "spd") return ExperimentConfig::preset_spd();
    if (name == "circle") return ExperimentConfig::preset_circle();
    if (name == "kernel_table") return ExperimentConfig::preset_kernel_table();
    throw std::invalid_argument("unknown preset '" + name +
                                "' (expected vmf_s2, vmf_s5, spd, circle, or kernel_table)");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Riemannian proximal sampling: geometry, heat kernels, and experiment driver";

    // -- errors --------------------------------------------------------------
    py::register_exception<NumericError>(m, "NumericError");
    py::register_exception<ConfigError>(m, "ConfigurationError");

    // -- geometry ------------------------------------------------------------
    py::class_<Manifold>(m, "Manifold")
        .def_static("circle", &Manifold::circle)
        .def_static("sphere", &Manifold::sphere, py::arg("d"))
        .def_static("spd", &Manifold::spd, py::arg("m"))
        .def("dim", &Manifold::dim)
        .def("ricci_lower_bound", &Manifold::ricci_lower_bound)
        .def("__eq__", [](const Manifold& a, const Manifold& b) { return a == b; })
        .def("__repr__", [](const Manifold& man) {
            switch (man.kind()) {
            case ManifoldKind::Circle: return std::string("Manifold.circle()");
            case ManifoldKind::Sphere:
                return "Manifold.sphere(" + std::to_string(man.sphere_d()) + ")";
            case ManifoldKind::Spd:
                return "Manifold.spd(" + std::to_string(man.spd_m()) + ")";
            }
            return std::string("Manifold(?)");
        });

    py::class_<Point>(m, "Point")
        .def_static("circle", &Point::circle, py::arg("angle"))
        .def_static("sphere", &Point::sphere, py::arg("v"))
        .def_static("spd", &Point::spd, py::arg("x"))
        .def_property_readonly("manifold", &Point::manifold)
        .def_property_readonly("value", &Point::value)
        .def("angle", &Point::angle)
        .def("vec", &Point::vec);

    py::class_<TangentVector>(m, "TangentVector")
        .def(py::init<const Point&, const Eigen::MatrixXd&>(), py::arg("base"), py::arg("v"))
        .def_static("zero", &TangentVector::zero, py::arg("base"))
        .def_property_readonly("base", &TangentVector::base)
        .def_property_readonly("value", &TangentVector::value)
        .def("__mul__", [](const TangentVector& v, double s) { return v * s; })
        .def("__rmul__", [](const TangentVector& v, double s) { return v * s; })
        .def("__add__", [](const TangentVector& a, const TangentVector& b) { return a + b; })
        .def("__neg__", [](const TangentVector& v) { return -v; });

    m.def("distance", &distance, py::arg("x"), py::arg("y"));
    m.def("exp_map", &exp_map, py::arg("x"), py::arg("v"));
    m.def("log_map", &log_map, py::arg("x"), py::arg("y"));
    m.def("grad_dist_sq", &grad_dist_sq, py::arg("x"), py::arg("y"));
    m.def("inner", &inner, py::arg("a"), py::arg("b"));
    m.def("norm", &norm, py::arg("v"));
    m.def("sample_tangent_gaussian", &sample_tangent_gaussian, py::arg("x"), py::arg("t"),
          py::arg("rng"));

    // -- rng -----------------------------------------------------------------
    py::class_<CounterRng>(m, "CounterRng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("stream", &CounterRng::stream, py::arg("index"))
        .def("uniform", py::overload_cast<>(&CounterRng::uniform))
        .def("uniform", py::overload_cast<double, double>(&CounterRng::uniform), py::arg("lo"),
             py::arg("hi"))
        .def("normal", &CounterRng::normal)
        .def("gamma", &CounterRng::gamma, py::arg("shape"))
        .def("beta", &CounterRng::beta, py::arg("a"), py::arg("b"));

    // -- heat kernels --------------------------------------------------------
    m.def("sphere_area", &sphere_area, py::arg("d"));
    m.def("circle_heat_kernel", &circle_heat_kernel, py::arg("t"), py::arg("phi"),
          py::arg("n_max"));
    m.def("circle_wrap_count", &circle_wrap_count, py::arg("t"), py::arg("zeta"));
    m.def("sphere_heat_kernel", &sphere_heat_kernel, py::arg("d"), py::arg("t"), py::arg("c"),
          py::arg("level"));
    m.def("truncation_tail_bound", &truncation_tail_bound, py::arg("d"), py::arg("t"),
          py::arg("level"));
    m.def("choose_truncation", &choose_truncation, py::arg("d"), py::arg("t"), py::arg("zeta"));
    m.def("varadhan_log_kernel", &varadhan_log_kernel, py::arg("x"), py::arg("y"), py::arg("t"));

    // -- exact Riemannian Gaussian -------------------------------------------
    py::class_<RGaussian>(m, "RGaussian")
        .def(py::init<const Point&, double>(), py::arg("center"), py::arg("t"))
        .def_property_readonly("center", &RGaussian::center)
        .def_property_readonly("t", &RGaussian::t)
        .def("log_density_unnorm", &RGaussian::log_density_unnorm, py::arg("x"))
        .def("normalizer", &RGaussian::normalizer, py::arg("nodes") = 512)
        .def(
            "sample",
            [](const RGaussian& g, CounterRng& rng, long cap) { return g.sample(rng, cap); },
            py::arg("rng"), py::arg("rejection_cap") = 1000000);

    // -- proximal sampler ----------------------------------------------------
    py::enum_<MbiOracle>(m, "MbiOracle")
        .value("SeriesRejection", MbiOracle::SeriesRejection)
        .value("GeodesicRandomWalk", MbiOracle::GeodesicRandomWalk)
        .value("RGaussianVaradhan", MbiOracle::RGaussianVaradhan);
    py::enum_<RhkOracle>(m, "RhkOracle")
        .value("TruncatedKernelRejection", RhkOracle::TruncatedKernelRejection)
        .value("VaradhanRejection", RhkOracle::VaradhanRejection);
    py::enum_<ProposalCenter>(m, "ProposalCenter")
        .value("Mode", ProposalCenter::Mode)
        .value("Y", ProposalCenter::Y);

    py::class_<TargetSpec>(m, "TargetSpec")
        .def_static("zero", &TargetSpec::zero, py::arg("manifold"))
        .def_static("vmf", &TargetSpec::vmf, py::arg("mu"), py::arg("kappa"))
        .def_static("circle_cosine", &TargetSpec::circle_cosine, py::arg("kappa"))
        .def_static("spd_quartic", &TargetSpec::spd_quartic, py::arg("m"), py::arg("sigma"))
        .def_readonly("lipschitz", &TargetSpec::lipschitz)
        .def_readonly("description", &TargetSpec::description)
        .def("f", [](const TargetSpec& t, const Point& x) { return t.f(x); }, py::arg("x"));

    py::class_<TheoryParams>(m, "TheoryParams")
        .def_static("varadhan_triple", &TheoryParams::varadhan_triple, py::arg("L1"),
                    py::arg("dim"), py::arg("epsilon"))
        .def_readonly("c_eps", &TheoryParams::c_eps)
        .def_readonly("eta", &TheoryParams::eta)
        .def_readonly("t", &TheoryParams::t)
        .def_readonly("total_time", &TheoryParams::total_time);

    py::class_<SamplerConfig>(m, "SamplerConfig")
        .def(py::init<>())
        .def_readwrite("eta", &SamplerConfig::eta)
        .def_readwrite("mbi", &SamplerConfig::mbi)
        .def_readwrite("rhk", &SamplerConfig::rhk)
        .def_readwrite("center", &SamplerConfig::center)
        .def_readwrite("grw_substeps", &SamplerConfig::grw_substeps)
        .def_readwrite("proposal_t", &SamplerConfig::proposal_t)
        .def_readwrite("epsilon", &SamplerConfig::epsilon)
        .def_readwrite("lipschitz_override", &SamplerConfig::lipschitz_override)
        .def_readwrite("zeta", &SamplerConfig::zeta)
        .def_readwrite("level", &SamplerConfig::level)
        .def_readwrite("rejection_cap", &SamplerConfig::rejection_cap)
        .def_readwrite("clip_acceptance", &SamplerConfig::clip_acceptance);

    py::class_<StepStats>(m, "StepStats")
        .def(py::init<>())
        .def_readonly("mbi_proposals", &StepStats::mbi_proposals)
        .def_readonly("mbi_accepts", &StepStats::mbi_accepts)
        .def_readonly("rhk_proposals", &StepStats::rhk_proposals)
        .def_readonly("rhk_accepts", &StepStats::rhk_accepts)
        .def_readonly("clamp_events", &StepStats::clamp_events)
        .def_readonly("clip_events", &StepStats::clip_events);

    py::class_<ChainTrace>(m, "ChainTrace")
        .def_readonly("states", &ChainTrace::states)
        .def_readonly("flagged", &ChainTrace::flagged)
        .def_readonly("flag_reason", &ChainTrace::flag_reason);

    py::class_<ProximalSampler>(m, "ProximalSampler")
        .def(py::init([](const TargetSpec& target, const SamplerConfig& cfg) {
                 return ProximalSampler(target, cfg);
             }),
             py::arg("target"), py::arg("config"))
        .def("sample_mbi",
             [](const ProximalSampler& s, const Point& x, CounterRng& rng) {
                 return s.sample_mbi(x, rng);
             },
             py::arg("x"), py::arg("rng"))
        .def("sample_rhk",
             [](const ProximalSampler& s, const Point& y, CounterRng& rng) {
                 return s.sample_rhk(y, rng);
             },
             py::arg("y"), py::arg("rng"))
        .def("find_mode",
             [](const ProximalSampler& s, const Point& y) { return s.find_mode(y); },
             py::arg("y"))
        .def("step",
             [](const ProximalSampler& s, const Point& x, CounterRng& rng) {
                 return s.step(x, rng);
             },
             py::arg("x"), py::arg("rng"))
        .def("run_chain", &ProximalSampler::run_chain, py::arg("init"), py::arg("n_iters"),
             py::arg("rng"));

    // -- Langevin baseline ---------------------------------------------------
    py::enum_<LmcSchedule>(m, "LmcSchedule")
        .value("Constant", LmcSchedule::Constant)
        .value("Decreasing", LmcSchedule::Decreasing);

    py::class_<LmcConfig>(m, "LmcConfig")
        .def(py::init<>())
        .def_readwrite("step", &LmcConfig::step)
        .def_readwrite("schedule", &LmcConfig::schedule)
        .def_readwrite("divergence_threshold", &LmcConfig::divergence_threshold);

    m.def(
        "rlmc_run",
        [](const TargetSpec& target, const Point& init, int n_iters, const LmcConfig& cfg,
           CounterRng rng) { return rlmc_run(target, init, n_iters, cfg, rng); },
        py::arg("target"), py::arg("init"), py::arg("n_iters"), py::arg("config"), py::arg("rng"));

    // -- diagnostics ---------------------------------------------------------
    m.def("frechet_variance", &frechet_variance, py::arg("points"), py::arg("ref"));
    m.def("vmf_oracle_sample", &vmf_oracle_sample, py::arg("mode"), py::arg("kappa_eff"),
          py::arg("rng"));

    // -- experiment driver ---------------------------------------------------
    m.def(
        "preset_config",
        [](const std::string& name) { return serialize_config(preset_by_name(name)); },
        py::arg("name"),
        "Serialized configuration for one of the built-in experiments: "
        "vmf_s2, vmf_s5, spd, circle, kernel_table.");
    m.def(
        "run_experiment",
        [](const std::string& config_text) {
            const ExperimentConfig cfg = parse_config(config_text);
            validate_config(cfg);
            return format_csv(run_experiment(cfg));
        },
        py::arg("config_text"),
        "Parse a key = value configuration, run the experiment, and return "
        "the result table as CSV text.");
}
