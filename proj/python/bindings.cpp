#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kinkflow/bench.hpp"
#include "kinkflow/errors.hpp"
#include "kinkflow/evolution.hpp"
#include "kinkflow/exact.hpp"
#include "kinkflow/griffiths.hpp"
#include "kinkflow/instance.hpp"
#include "kinkflow/observables.hpp"
#include "kinkflow/rng.hpp"
#include "kinkflow/spectrum.hpp"
#include "kinkflow/version.hpp"

namespace py = pybind11;
using namespace kinkflow;

namespace {

ChainInstance py_sample(int n, const std::string& disorder, std::uint64_t seed, int m) {
  DisorderSpec spec = disorder_kind_from_string(disorder) == DisorderKind::uniform_strong
                          ? DisorderSpec::strong(seed)
                          : DisorderSpec::scaled(m, seed);
  return sample_logical(n, spec);
}

ChainInstance py_embed_balanced(const ChainInstance& logical, int m,
                                const std::string& edge, bool apply_rescale, double c) {
  BalancedOptions opts;
  opts.edge = edge_exponent_from_string(edge);
  opts.apply_rescale = apply_rescale;
  opts.c = c;
  return embed_balanced(logical, m, opts);
}

EvolutionOperator py_integrate(const ChainInstance& inst, double t_final,
                               const std::string& method, double dt,
                               const std::string& parallel, int workers) {
  AnnealSchedule sched{t_final};
  IntegratorConfig cfg;
  cfg.method = method_from_string(method);
  cfg.dt = dt;
  if (parallel == "columns") {
    cfg.parallel = {ParallelPlan::Kind::column_split, workers};
  } else if (parallel == "intervals") {
    cfg.parallel = {ParallelPlan::Kind::interval_split, workers};
  } else if (parallel != "serial") {
    throw ValidationError("parallel must be serial, columns, or intervals");
  }
  return integrate(inst, sched, cfg);
}

}  // namespace

PYBIND11_MODULE(_kinkflow, mod) {
  mod.doc() = "Free-fermion annealing dynamics for disordered Ising chains";
  mod.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(mod, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericError>(mod, "NumericError", PyExc_ArithmeticError);

  py::class_<ChainInstance>(mod, "ChainInstance")
      .def(py::init<>())
      .def_readwrite("n_logical", &ChainInstance::n_logical)
      .def_readwrite("block_size", &ChainInstance::block_size)
      .def_readwrite("seed", &ChainInstance::seed)
      .def_readwrite("rescale_factor", &ChainInstance::rescale_factor)
      .def_readwrite("logical_couplings", &ChainInstance::logical_couplings)
      .def_readwrite("block_couplings", &ChainInstance::block_couplings)
      .def_readwrite("couplings", &ChainInstance::couplings)
      .def_property_readonly("embedding",
                             [](const ChainInstance& i) {
                               return std::string(to_string(i.embedding_kind));
                             })
      .def("total_spins", &ChainInstance::total_spins)
      .def("validate", &ChainInstance::validate)
      .def("to_json", [](const ChainInstance& i) { return to_json(i); })
      .def("__repr__", [](const ChainInstance& i) {
        return "<ChainInstance n=" + std::to_string(i.n_logical) + " m=" +
               std::to_string(i.block_size) + " seed=" + std::to_string(i.seed) + ">";
      });

  mod.def("sample_logical", &py_sample, py::arg("n"), py::arg("disorder") = "strong",
          py::arg("seed") = 1, py::arg("m") = 3,
          "Draw a logical chain with uniform disorder");
  mod.def("embed_canonical", &embed_canonical, py::arg("logical"), py::arg("m"),
          py::arg("k") = 1.0);
  mod.def("embed_balanced", &py_embed_balanced, py::arg("logical"), py::arg("m"),
          py::arg("edge") = "standard", py::arg("apply_rescale") = true,
          py::arg("c") = 0.0);
  mod.def("renormalized_fields", &renormalized_fields, py::arg("instance"),
          py::arg("gamma_bare"));
  mod.def("rescale_lambda", &rescale_lambda, py::arg("m"));
  mod.def("balanced_c", &balanced_c, py::arg("m"));
  mod.def("gamma_of_s", &gamma_of_s, py::arg("s"));
  mod.def("s_of_gamma", &s_of_gamma, py::arg("gamma"));
  mod.def("instance_from_json", &instance_from_json, py::arg("text"));
  mod.def("load_instance", &load_instance, py::arg("path"));
  mod.def("save_instance", &save_instance, py::arg("instance"), py::arg("path"));

  mod.def(
      "single_particle_energies",
      [](const ChainInstance& inst, double s) {
        const auto r = spectrum_at(inst, s);
        return py::make_tuple(r.energies, r.gap, r.precision_flag);
      },
      py::arg("instance"), py::arg("s"),
      "Positive single-fermion energies, the gap, and the precision flag");
  mod.def("many_body_spectrum", &many_body_spectrum, py::arg("energies"));
  mod.def(
      "minimum_gap",
      [](const ChainInstance& inst) {
        const auto r = minimum_gap(inst);
        py::dict d;
        d["s_c"] = r.s_c;
        d["gap"] = r.gap;
        d["multimodal"] = r.multimodal;
        d["precision_flag"] = r.precision_flag;
        return d;
      },
      py::arg("instance"));
  mod.def("gap_curve", &gap_curve, py::arg("instance"), py::arg("s_min") = 0.05,
          py::arg("s_max") = 0.98, py::arg("points") = 128);

  mod.def("griffiths_walk", &griffiths_walk, py::arg("instance"), py::arg("gamma"));
  mod.def(
      "griffiths_estimate",
      [](const ChainInstance& inst, double gamma) {
        const auto e = griffiths_estimate(inst, gamma);
        py::dict d;
        d["eps0"] = e.eps0;
        d["eps1"] = e.eps1;
        d["extrema"] = e.extrema;
        d["positions"] = e.positions;
        d["degenerate"] = e.degenerate;
        return d;
      },
      py::arg("instance"), py::arg("gamma"));
  mod.def("estimate_critical_gamma", &estimate_critical_gamma, py::arg("instance"));

  py::class_<EvolutionOperator>(mod, "EvolutionOperator")
      .def_readonly("matrix", &EvolutionOperator::matrix)
      .def_readonly("t", &EvolutionOperator::t)
      .def_readonly("orthogonality_drift", &EvolutionOperator::orthogonality_drift)
      .def_readonly("steps", &EvolutionOperator::steps);

  mod.def("integrate", &py_integrate, py::arg("instance"), py::arg("t_final"),
          py::arg("method") = "cm8", py::arg("dt") = 1.0,
          py::arg("parallel") = "serial", py::arg("workers") = 1,
          "Propagator of the full anneal as a real orthogonal matrix");

  mod.def(
      "ground_state_probability",
      [](const Eigen::MatrixXd& s) {
        const auto r = ground_state_probability(s);
        py::dict d;
        d["p0"] = r.p0;
        d["asymmetry"] = r.asymmetry;
        d["clamped"] = r.clamped;
        return d;
      },
      py::arg("s"));

  mod.def(
      "anneal_success_probability",
      [](const ChainInstance& inst, double t_final, const std::string& method,
         double dt) {
        AnnealSchedule sched{t_final};
        IntegratorConfig cfg;
        cfg.method = method_from_string(method);
        cfg.dt = dt;
        const auto evo = integrate(inst, sched, cfg);
        const auto pr = ground_state_probability(evo.matrix);
        py::dict d;
        d["p0"] = pr.p0;
        d["orthogonality_drift"] = evo.orthogonality_drift;
        return d;
      },
      py::arg("instance"), py::arg("t_final"), py::arg("method") = "cm8",
      py::arg("dt") = 1.0, "Full anneal followed by the success-probability readout");

  mod.def("exact_spectrum", &exact_spectrum, py::arg("instance"), py::arg("s"),
          "Dense many-body spectrum for small chains");
  mod.def("exact_ground_state_probability",
          [](const ChainInstance& inst, double t_final, double dt) {
            return exact_ground_state_probability(inst, AnnealSchedule{t_final}, dt);
          },
          py::arg("instance"), py::arg("t_final"), py::arg("dt") = 0.0);

  mod.def("time_to_solution",
          [](double t, double p0) {
            bool sat = false;
            const double tau = time_to_solution(t, p0, &sat);
            return py::make_tuple(tau, sat);
          },
          py::arg("t"), py::arg("p0"));

  mod.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("index"));
}
