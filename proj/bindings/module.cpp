#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "specsim/harness.hpp"

namespace py = pybind11;
using namespace specsim;

PYBIND11_MODULE(_specsim, mod) {
  mod.doc() = "lattice evolution models: particle simulators, potential-flow "
              "landscape analysis and experiment harness";

  py::class_<PhenotypeSpace>(mod, "PhenotypeSpace")
      .def(py::init<int>(), py::arg("half_width"))
      .def_readonly("half_width", &PhenotypeSpace::half_width)
      .def("size", &PhenotypeSpace::size)
      .def("contains", &PhenotypeSpace::contains);

  py::class_<Simplex>(mod, "Simplex")
      .def(py::init<PhenotypeSpace, std::vector<double>>(), py::arg("space"), py::arg("weights"))
      .def_static("delta", &Simplex::delta)
      .def_static("uniform", &Simplex::uniform)
      .def_static("near_delta", &Simplex::near_delta)
      .def_property_readonly("weights", &Simplex::weights)
      .def("at_site", &Simplex::at_site)
      .def("mean_site", &Simplex::mean_site)
      .def("variance_site", &Simplex::variance_site)
      .def("__len__", &Simplex::size);

  py::class_<KernelSpec>(mod, "KernelSpec")
      .def(py::init<>())
      .def_readwrite("half_width", &KernelSpec::half_width)
      .def_readwrite("capacity_kind", &KernelSpec::capacity_kind)
      .def_readwrite("sigma_k", &KernelSpec::sigma_k)
      .def_readwrite("capacity_scale", &KernelSpec::capacity_scale)
      .def_readwrite("capacity_peak", &KernelSpec::capacity_peak)
      .def_readwrite("capacity_halfwidth", &KernelSpec::capacity_halfwidth)
      .def_readwrite("capacity_table", &KernelSpec::capacity_table)
      .def_readwrite("cooperation_kind", &KernelSpec::cooperation_kind)
      .def_readwrite("b", &KernelSpec::b)
      .def_readwrite("m", &KernelSpec::m)
      .def_readwrite("cooperation_value", &KernelSpec::cooperation_value)
      .def_readwrite("competition_kind", &KernelSpec::competition_kind)
      .def_readwrite("sigma_c", &KernelSpec::sigma_c)
      .def_readwrite("competition_halfwidth", &KernelSpec::competition_halfwidth)
      .def_readwrite("competition_value", &KernelSpec::competition_value);

  py::class_<KernelSet>(mod, "KernelSet")
      .def_readonly("space", &KernelSet::space)
      .def_readonly("capacity", &KernelSet::capacity)
      .def_readonly("cooperation", &KernelSet::cooperation)
      .def_readonly("competition", &KernelSet::competition)
      .def_readonly("assumption1", &KernelSet::assumption1)
      .def_readonly("step_level", &KernelSet::step_level)
      .def_readonly("step_width", &KernelSet::step_width)
      .def("K", &KernelSet::K)
      .def("B", &KernelSet::B)
      .def("C", &KernelSet::C);

  mod.def("build_kernels", &build_kernels, py::arg("spec"));

  py::class_<ModelParams>(mod, "ModelParams")
      .def(py::init<>())
      .def_readwrite("sigma", &ModelParams::sigma)
      .def_readwrite("mu", &ModelParams::mu)
      .def_readwrite("population", &ModelParams::population)
      .def("mu_tilde", &ModelParams::mu_tilde);

  mod.def("fitness", &fitness, py::arg("pi"), py::arg("kernels"));
  mod.def("mean_fitness", &mean_fitness, py::arg("pi"), py::arg("m"));
  mod.def("potential", &potential, py::arg("pi"), py::arg("kernels"), py::arg("mu_tilde"));
  mod.def("sup_distance", &sup_distance);

  py::class_<Snapshot>(mod, "Snapshot")
      .def_readonly("time", &Snapshot::time)
      .def_readonly("frequency", &Snapshot::frequency);

  py::class_<RunRecord>(mod, "RunRecord")
      .def_readonly("seed", &RunRecord::seed)
      .def_readonly("snapshots", &RunRecord::snapshots)
      .def_readonly("snapshot_totals", &RunRecord::snapshot_totals)
      .def_readonly("event_count", &RunRecord::event_count)
      .def_readonly("extinction_time", &RunRecord::extinction_time)
      .def_readonly("speciation_time", &RunRecord::speciation_time);

  // ---- birth/death model ----
  py::class_<DDParams>(mod, "DDParams")
      .def(py::init<>())
      .def_readwrite("space", &DDParams::space)
      .def_readwrite("sigma_k", &DDParams::sigma_k)
      .def_readwrite("sigma_c", &DDParams::sigma_c)
      .def_readwrite("capacity_scale", &DDParams::capacity_scale)
      .def_readwrite("birth_rate", &DDParams::birth_rate)
      .def_readwrite("death_scale", &DDParams::death_scale)
      .def_readwrite("mutation_prob", &DDParams::mutation_prob)
      .def_readwrite("mutation_std", &DDParams::mutation_std)
      .def_readwrite("x_hat", &DDParams::x_hat);

  py::class_<PopulationCounts>(mod, "PopulationCounts")
      .def_static("delta", &PopulationCounts::delta)
      .def_readonly("counts", &PopulationCounts::counts)
      .def("total", &PopulationCounts::total)
      .def("frequencies", &PopulationCounts::frequencies);

  mod.def("run_dd", &run_dd, py::arg("params"), py::arg("initial"), py::arg("horizon"),
          py::arg("snapshot_times"), py::arg("seed"), py::arg("replica") = 0);

  // ---- conditioned model ----
  py::enum_<FitnessKind>(mod, "FitnessKind").value("W1", FitnessKind::W1).value("W2", FitnessKind::W2);

  py::class_<MutationMatrix>(mod, "MutationMatrix")
      .def_static("identity", &MutationMatrix::identity)
      .def_static("tridiagonal", &MutationMatrix::tridiagonal);

  mod.def("fitness_w", &fitness_w, py::arg("pi"), py::arg("kernels"), py::arg("kind"));
  mod.def("det_map_step", &det_map_step);

  py::class_<FixedPointResult>(mod, "FixedPointResult")
      .def_readonly("pi_hat", &FixedPointResult::pi_hat)
      .def_readonly("converged", &FixedPointResult::converged)
      .def_readonly("iterations", &FixedPointResult::iterations)
      .def_readonly("condition3_residual", &FixedPointResult::condition3_residual);

  mod.def(
      "iterate_to_fixed_point",
      [](const Simplex& pi0, const KernelSet& kernels, FitnessKind kind, const MutationMatrix& a,
         double tol, int max_iter) {
        FixedPointOptions opt;
        opt.tol = tol;
        opt.max_iter = max_iter;
        return iterate_to_fixed_point(pi0, kernels, kind, a, opt);
      },
      py::arg("pi0"), py::arg("kernels"), py::arg("kind"), py::arg("a"), py::arg("tol") = 1e-12,
      py::arg("max_iter") = 200000);

  // ---- exchangeable particle model and its deterministic limits ----
  py::class_<MoranParams>(mod, "MoranParams")
      .def(py::init([](const KernelSet& kernels, const ModelParams& model, int initial_site) {
             return MoranParams{kernels.space, kernels, model, initial_site};
           }),
           py::arg("kernels"), py::arg("model"), py::arg("initial_site") = 0)
      .def_readonly("space", &MoranParams::space)
      .def_readonly("kernels", &MoranParams::kernels)
      .def_readonly("model", &MoranParams::model)
      .def_readonly("initial_site", &MoranParams::initial_site);

  mod.def("run_moran", &run_moran, py::arg("params"), py::arg("horizon"),
          py::arg("snapshot_times"), py::arg("seed"), py::arg("replica") = 0);

  py::enum_<OdeVariant>(mod, "OdeVariant")
      .value("eq6", OdeVariant::eq6)
      .value("eq7", OdeVariant::eq7)
      .value("eq9", OdeVariant::eq9);

  mod.def("ode_rhs", &ode_rhs, py::arg("pi"), py::arg("kernels"), py::arg("params"),
          py::arg("variant"));

  py::class_<OdeResult>(mod, "OdeResult")
      .def_readonly("terminal", &OdeResult::terminal)
      .def_readonly("time", &OdeResult::time)
      .def_readonly("ok", &OdeResult::ok)
      .def_readonly("hit_stop_velocity", &OdeResult::hit_stop_velocity)
      .def_readonly("steps", &OdeResult::steps)
      .def_readonly("max_potential_drop", &OdeResult::max_potential_drop)
      .def_readonly("trajectory", &OdeResult::trajectory);

  mod.def(
      "integrate_ode",
      [](OdeVariant variant, const Simplex& pi0, const KernelSet& kernels,
         const ModelParams& params, double horizon, double stop_velocity,
         double snapshot_interval) {
        OdeOptions opt;
        opt.horizon = horizon;
        opt.stop_velocity = stop_velocity;
        opt.snapshot_interval = snapshot_interval;
        return integrate_ode(variant, pi0, kernels, params, opt);
      },
      py::arg("variant"), py::arg("pi0"), py::arg("kernels"), py::arg("params"),
      py::arg("horizon") = 1e9, py::arg("stop_velocity") = 0.0,
      py::arg("snapshot_interval") = 0.0);

  // ---- stationary law ----
  py::class_<StationaryDensity>(mod, "StationaryDensity")
      .def(py::init([](const KernelSet& kernels, const ModelParams& params) {
             return StationaryDensity{kernels, params};
           }),
           py::arg("kernels"), py::arg("params"))
      .def("log_unnormalized", &StationaryDensity::log_unnormalized)
      .def("log_unnormalized_potential_form", &StationaryDensity::log_unnormalized_potential_form);

  py::class_<McmcOptions>(mod, "McmcOptions")
      .def(py::init<>())
      .def_readwrite("n_samples", &McmcOptions::n_samples)
      .def_readwrite("n_chains", &McmcOptions::n_chains)
      .def_readwrite("burn_in", &McmcOptions::burn_in)
      .def_readwrite("proposal_scale", &McmcOptions::proposal_scale)
      .def_readwrite("seed", &McmcOptions::seed);

  py::class_<McmcResult>(mod, "McmcResult")
      .def_readonly("samples", &McmcResult::samples)
      .def_readonly("log_density", &McmcResult::log_density)
      .def_readonly("acceptance_rate", &McmcResult::acceptance_rate)
      .def_readonly("max_split_rhat", &McmcResult::max_split_rhat)
      .def_readonly("tuning_warning", &McmcResult::tuning_warning);

  mod.def("mcmc_sample_stationary", &mcmc_sample_stationary, py::arg("density"), py::arg("options"));

  // ---- speciation detection ----
  py::class_<SpeciationCriterion>(mod, "SpeciationCriterion")
      .def(py::init<>())
      .def_readwrite("smooth_window", &SpeciationCriterion::smooth_window)
      .def_readwrite("min_mode_separation", &SpeciationCriterion::min_mode_separation)
      .def_readwrite("min_mode_mass", &SpeciationCriterion::min_mode_mass)
      .def_readwrite("mode_mass_radius", &SpeciationCriterion::mode_mass_radius)
      .def_readwrite("valley_ratio", &SpeciationCriterion::valley_ratio)
      .def_readwrite("version", &SpeciationCriterion::version);

  mod.def("is_bimodal", &is_bimodal, py::arg("frequency"),
          py::arg("criterion") = SpeciationCriterion{});
  mod.def("speciation_time", &speciation_time, py::arg("trajectory"),
          py::arg("criterion") = SpeciationCriterion{});

  // ---- landscape analysis ----
  py::enum_<StationaryClass>(mod, "StationaryClass")
      .value("local_max_V", StationaryClass::local_max_V)
      .value("saddle_or_unstable", StationaryClass::saddle_or_unstable)
      .value("unresolved", StationaryClass::unresolved);

  py::class_<StationaryPoint>(mod, "StationaryPoint")
      .def_readonly("pi_hat", &StationaryPoint::pi_hat)
      .def_readonly("fitness", &StationaryPoint::fitness)
      .def_readonly("constancy_residual", &StationaryPoint::constancy_residual)
      .def_readonly("classification", &StationaryPoint::classification)
      .def_readonly("basin_tag", &StationaryPoint::basin_tag)
      .def_readonly("velocity_norm", &StationaryPoint::velocity_norm)
      .def_readonly("tangent_eigenvalues", &StationaryPoint::tangent_eigenvalues);

  mod.def("find_stationary_points", &find_stationary_points, py::arg("params"),
          py::arg("n_starts"), py::arg("tol"), py::arg("seed") = 7);

  py::class_<StationarityDiagnostics>(mod, "StationarityDiagnostics")
      .def_readonly("constancy_residual", &StationarityDiagnostics::constancy_residual)
      .def_readonly("subset_residual", &StationarityDiagnostics::subset_residual)
      .def_readonly("sign_equivalence_ok", &StationarityDiagnostics::sign_equivalence_ok)
      .def_readonly("monotone_coupling_ok", &StationarityDiagnostics::monotone_coupling_ok);

  mod.def("verify_stationarity", &verify_stationarity, py::arg("pi_hat"), py::arg("kernels"),
          py::arg("mu_tilde"));

  py::class_<FaceSpec>(mod, "FaceSpec")
      .def_static("make", &FaceSpec::make)
      .def_readonly("support", &FaceSpec::support)
      .def_readonly("spaced", &FaceSpec::spaced);

  py::class_<FaceCandidate>(mod, "FaceCandidate")
      .def_readonly("solved", &FaceCandidate::solved)
      .def_readonly("valid", &FaceCandidate::valid)
      .def_readonly("degenerate", &FaceCandidate::degenerate)
      .def_readonly("reason", &FaceCandidate::reason)
      .def_readonly("pi", &FaceCandidate::pi)
      .def_readonly("on_support_fitness", &FaceCandidate::on_support_fitness)
      .def_readonly("max_off_support_fitness", &FaceCandidate::max_off_support_fitness)
      .def_readonly("mbar", &FaceCandidate::mbar)
      .def_readonly("hessian_eigenvalues", &FaceCandidate::hessian_eigenvalues);

  mod.def("face_local_max", &face_local_max, py::arg("face"), py::arg("kernels"));
  mod.def("face_equal_fitness_weights", &face_equal_fitness_weights, py::arg("face"),
          py::arg("kernels"), py::arg("total_mass"));

  py::class_<TwoPointResult>(mod, "TwoPointResult")
      .def_readonly("conditions_ok", &TwoPointResult::conditions_ok)
      .def_readonly("reason", &TwoPointResult::reason)
      .def_readonly("p", &TwoPointResult::p)
      .def_readonly("mbar", &TwoPointResult::mbar);

  mod.def("two_point_formula", &two_point_formula, py::arg("x"), py::arg("kernels"));

  py::class_<ThreePointResult>(mod, "ThreePointResult")
      .def_readonly("conditions_ok", &ThreePointResult::conditions_ok)
      .def_readonly("reason", &ThreePointResult::reason)
      .def_readonly("p", &ThreePointResult::p)
      .def_readonly("q", &ThreePointResult::q)
      .def_readonly("mbar", &ThreePointResult::mbar)
      .def_readonly("oracle_p", &ThreePointResult::oracle_p)
      .def_readonly("oracle_q", &ThreePointResult::oracle_q)
      .def_readonly("oracle_mbar", &ThreePointResult::oracle_mbar)
      .def_readonly("oracle_valid", &ThreePointResult::oracle_valid)
      .def_readonly("discrepancy", &ThreePointResult::discrepancy)
      .def_readonly("flagged", &ThreePointResult::flagged);

  mod.def("three_point_formula", &three_point_formula, py::arg("x"), py::arg("kernels"));

  py::class_<GapAuditReport>(mod, "GapAuditReport")
      .def_readonly("applicable", &GapAuditReport::applicable)
      .def_readonly("found", &GapAuditReport::found)
      .def_readonly("gap_left", &GapAuditReport::gap_left)
      .def_readonly("gap_right", &GapAuditReport::gap_right)
      .def_readonly("improving_site", &GapAuditReport::improving_site)
      .def_readonly("donor_site", &GapAuditReport::donor_site)
      .def_readonly("directional_derivative", &GapAuditReport::directional_derivative);

  mod.def("gap_audit", &gap_audit, py::arg("pi_hat"), py::arg("kernels"),
          py::arg("support_threshold") = 1e-6);

  py::class_<BoundAuditInputs>(mod, "BoundAuditInputs")
      .def(py::init<>())
      .def_readwrite("n", &BoundAuditInputs::n)
      .def_readwrite("epsilon", &BoundAuditInputs::epsilon);

  py::class_<BoundAuditEntry>(mod, "BoundAuditEntry")
      .def_readonly("name", &BoundAuditEntry::name)
      .def_readonly("hypothesis_ok", &BoundAuditEntry::hypothesis_ok)
      .def_readonly("skip_reason", &BoundAuditEntry::skip_reason)
      .def_readonly("conclusion_ok", &BoundAuditEntry::conclusion_ok)
      .def_readonly("margin", &BoundAuditEntry::margin);

  mod.def("bound_audit", &bound_audit, py::arg("pi_hat"), py::arg("kernels"), py::arg("params"),
          py::arg("inputs"));

  mod.def("v_local_max_near", &v_local_max_near, py::arg("pi_tilde"), py::arg("kernels"),
          py::arg("params"));

  py::class_<BifurcationResult>(mod, "BifurcationResult")
      .def_readonly("found", &BifurcationResult::found)
      .def_readonly("note", &BifurcationResult::note)
      .def_readonly("mu_low", &BifurcationResult::mu_low)
      .def_readonly("mu_high", &BifurcationResult::mu_high)
      .def_readonly("mu_star", &BifurcationResult::mu_star)
      .def_readonly("grid_results", &BifurcationResult::grid_results);

  mod.def("bifurcation_scan", &bifurcation_scan, py::arg("kernels"), py::arg("base"),
          py::arg("mu_grid"));

  // ---- experiment harness ----
  py::class_<ExperimentOutcome>(mod, "ExperimentOutcome")
      .def_readonly("exit_code", &ExperimentOutcome::exit_code)
      .def_readonly("artifacts", &ExperimentOutcome::artifacts)
      .def_readonly("warnings", &ExperimentOutcome::warnings);

  mod.def(
      "run_experiment_json",
      [](const std::string& config_text, bool with_timestamp) {
        return run_experiment(ExperimentConfig::from_json_text(config_text), with_timestamp);
      },
      py::arg("config_text"), py::arg("with_timestamp") = true,
      "run an experiment from config JSON text; artifacts land in the configured output dir");
  mod.def("recipe_list", &recipe_list);
  mod.def("recipe_config_text", &recipe_config_text, py::arg("name"));
  mod.def(
      "config_hash",
      [](const std::string& config_text) {
        return ExperimentConfig::from_json_text(config_text).hash();
      },
      py::arg("config_text"));
}
