// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "plex/estimate.hpp"
#include "plex/spectral.hpp"

namespace plex {
namespace {

namespace fs = std::filesystem;

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (stream + 1));
  return splitmix64(s);
}

ValidationOptions validation_options(const ScenarioConfig& cfg) {
  ValidationOptions v;
  v.n_samples = cfg.estimators.validation_samples;
  v.t_orbit = 1.0;
  v.seed = derived_seed(cfg.sampling.seed, 3);
  return v;
}

void check_horizons(const Scenario& sc) {
  const Propagator p = sc.make_propagator();
  const auto& h = sc.config.horizons;
  try {
    p.steps_for(h.T);
    p.steps_for(h.burn_in);
    p.steps_for(h.T_spin);
    p.steps_for(1.0);
    p.steps_for(sc.config.estimators.gamma_horizon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("horizons must be multiples of scheme.dt: ") + e.what());
  }
  if (sc.flow->kind() == FlowKind::smoothed_switching) {
    const double reach = std::max(2.0 * h.T_spin, h.T + 2.0 * h.T_spin);
    if (reach > sc.config.flow.path_window)
      throw ConfigError("flow.path_window must be at least T + 2*T_spin = " +
                        format_double(reach));
  }
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const FlowSpecError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NonSymmetricError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SingularStepError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const AssemblyError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const EvalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const EigenConvergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const SingularPivotError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const PathWindowError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

ScenarioConfig load_with_overrides(const std::string& config, const RunOptions& opts) {
  ScenarioConfig cfg = load_scenario(config);
  if (opts.seed) cfg.sampling.seed = *opts.seed;
  return cfg;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& cfg) {
  std::shared_ptr<const MetricFlow> flow;
  try {
    flow = std::make_shared<const MetricFlow>(cfg.flow);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("flow: ") + e.what());
  }
  std::shared_ptr<const CoefficientField> field;
  try {
    field = std::make_shared<const CoefficientField>(build_coefficients(cfg), flow);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("coefficients: ") + e.what());
  }
  Scenario sc{cfg, flow, field, Mesh1D(cfg.mesh.x_left, cfg.mesh.x_right, cfg.mesh.n_elements),
              cfg.scheme, FlowPoint{}};
  if (cfg.dt_from_default) {
    ValidationOptions vo = validation_options(cfg);
    vo.n_samples = std::min<std::size_t>(vo.n_samples, 16);
    const ValidationReport v = validate_assumptions(*field, sc.mesh.domain(), vo);
    const double raw = default_dt(sc.mesh, std::max(v.sup_a, 1e-12), flow->characteristic_period());
    // snap so that unit horizons hold a whole number of steps
    sc.scheme.dt = 1.0 / std::ceil(1.0 / raw);
  }
  sc.omega = flow->sample_invariant(cfg.sampling.seed, 1).front();
  check_horizons(sc);
  return sc;
}

ValidationReport validate_scenario(const Scenario& sc) {
  return validate_assumptions(*sc.field, sc.mesh.domain(), validation_options(sc.config));
}

EstimatorReport estimate_scenario(const Scenario& sc, unsigned threads, const TraceSink& trace) {
  const auto& cfg = sc.config;
  const auto& h = cfg.horizons;
  Propagator prop = sc.make_propagator();
  const bool symmetric = sc.field->coefficients().symmetric();

  EstimatorReport r;
  r.scenario = cfg.name;
  r.symmetric = symmetric;
  r.autonomous = sc.field->autonomous();
  r.resolution = Resolution{cfg.mesh.n_elements, prop.dt(),        h.T,
                            h.burn_in,           h.T_spin,         cfg.sampling.n_samples,
                            cfg.sampling.block_length, to_string(prop.scheme().method),
                            prop.scheme().lumped_mass};
  r.warnings = sc.flow->warnings();

  const DirectEstimate direct =
      lyapunov_direct(prop, sc.omega, prop.positive_start(), h.T, h.burn_in, cfg.sampling.block_length);
  r.E1 = direct.E1;
  r.E1_stderr = direct.stderr_;
  r.flags.possibly_divergent = direct.possibly_divergent;
  if (direct.possibly_divergent)
    r.warnings.push_back("possibly divergent downward: E1 keeps decreasing between T/2 and T");

  KappaOptions ko;
  ko.T = h.T;
  ko.burn_in = h.burn_in;
  ko.T_spin = h.T_spin;
  ko.block_length = cfg.sampling.block_length;
  ko.spin_tolerance = cfg.estimators.spin_tolerance;
  ko.with_upper_bound =
      symmetric && cfg.estimators.upper_bound && cfg.estimators.upper_bound_mode == UpperBoundMode::orbit;
  ko.trace_stride = cfg.outputs.stride;
  ko.trace = trace;
  const KappaEstimate kappa = lyapunov_kappa(prop, sc.omega, ko);
  r.E2 = kappa.E2;
  r.E2_stderr = kappa.E2_stderr;
  r.identity_residual = kappa.identity_residual;
  r.identity_residual_per_time = kappa.identity_residual_per_time;
  r.spin_up_distance = kappa.spin.distance;
  r.flags.spin_up_converged = kappa.spin.converged;
  if (!kappa.spin.converged) r.warnings.push_back(kappa.spin.warning);

  if (cfg.estimators.upper_bound) {
    r.E3_mode = cfg.estimators.upper_bound_mode == UpperBoundMode::orbit ? "orbit" : "mc";
    if (!symmetric) {
      r.E3_note = NonSymmetricError().what();
    } else if (cfg.estimators.upper_bound_mode == UpperBoundMode::orbit) {
      r.E3 = kappa.E3;
      r.E3_stderr = kappa.E3_stderr;
      r.min_rayleigh_gap = kappa.min_rayleigh_gap;
    } else {
      const UpperBoundEstimate ub =
          upper_bound(prop, UpperBoundMode::mc, sc.omega, h.T, h.burn_in, cfg.sampling.block_length,
                      cfg.sampling.n_samples, derived_seed(cfg.sampling.seed, 2), threads);
      r.E3 = ub.E3;
      r.E3_stderr = ub.stderr_;
    }
  }
  if (symmetric) {
    FormAssembler fa(sc.mesh, *sc.field, prop.scheme().lumped_mass);
    r.lambda_princ = principal_eigen(prop.mass(), fa.assemble(sc.omega)).lambda_princ;
  }

  const MonteCarloEstimate mc =
      lnrho1_mc(prop, cfg.sampling.n_samples, derived_seed(cfg.sampling.seed, 1), h.T_spin, threads,
                cfg.estimators.spin_tolerance);
  r.ln_rho1_mc = mc.mean;
  r.ln_rho1_stderr = mc.stderr_;
  r.mc_used = mc.used;
  r.mc_dropped = mc.dropped;

  const std::size_t k = std::min(cfg.estimators.op_norm_vectors, prop.size());
  r.op_norm_rates = operator_norm_rate(prop, sc.omega, h.T, k, h.burn_in).rates;

  const GammaCheck g = check_gamma_bound(prop, sc.omega, prop.positive_start(),
                                         cfg.estimators.gamma_horizon, cfg.estimators.c0_grid);
  r.gamma_hat = g.gamma_hat;
  r.gamma_hat_doubled = g.gamma_hat_doubled;
  r.flags.gamma_stable = g.pass;

  // acceptance-style consistency flags
  const double s12 = std::hypot(r.E1_stderr, r.E2_stderr);
  r.flags.concordance = std::fabs(r.E1 - r.E2) <= 3.0 * s12 + r.identity_residual_per_time + 1e-9;
  if (r.E3) {
    r.flags.upper_bound_kappa = r.E2 <= *r.E3 + 1e-8;
    r.flags.upper_bound_direct = r.E1 <= *r.E3 + 3.0 * r.E1_stderr + 1e-9;
  }
  const double smc = std::hypot(mc.stderr_, r.E1_stderr);
  r.flags.mc_agreement = std::fabs(mc.mean - r.E1) <= 3.0 * smc + 1e-8;
  r.flags.op_norm_agreement = std::fabs(r.op_norm_rates.front() - r.E1) <= 1e-3;
  return r;
}

int run_scenario(const std::string& config, const RunOptions& opts, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&]() -> int {
    const ScenarioConfig cfg = load_with_overrides(config, opts);
    const Scenario sc = build_scenario(cfg);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    const ValidationReport v = validate_scenario(sc);
    write_file(dir / cfg.outputs.validation, validation_to_json(v));
    if (!v.passed()) {
      err << "validation failed: " << v.failures.front() << '\n';
      return kExitValidation;
    }
    if (cfg.outputs.dump_matrices) {
      FormAssembler fa(sc.mesh, *sc.field, sc.scheme.lumped_mass);
      std::ofstream ma(dir / "M.txt"), aa(dir / "A.txt");
      write_triplets(ma, assemble_mass(sc.mesh, cfg.bc, sc.scheme.lumped_mass));
      write_triplets(aa, fa.assemble(sc.omega));
    }

    std::ofstream trace_os(dir / cfg.outputs.trace, std::ios::binary);
    if (!trace_os) throw std::runtime_error("cannot write " + (dir / cfg.outputs.trace).string());
    const bool with_lambda = sc.field->coefficients().symmetric() && cfg.estimators.upper_bound &&
                             cfg.estimators.upper_bound_mode == UpperBoundMode::orbit;
    TraceCsv csv(trace_os, with_lambda);
    const EstimatorReport rep =
        estimate_scenario(sc, opts.threads, [&](const TraceRow& row) { csv.write(row); });
    trace_os.close();
    write_file(dir / cfg.outputs.report, report_to_json(rep));

    out << cfg.name << ": E1=" << format_double(rep.E1) << " E2=" << format_double(rep.E2)
        << " E3=" << (rep.E3 ? format_double(*rep.E3) : std::string("undefined")) << '\n';
    for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
    return kExitOk;
  });
}

int validate_config(const std::string& config, const RunOptions& opts, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&]() -> int {
    const ScenarioConfig cfg = load_with_overrides(config, opts);
    const Scenario sc = build_scenario(cfg);
    const ValidationReport v = validate_scenario(sc);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    write_file(dir / cfg.outputs.validation, validation_to_json(v));
    for (const auto& w : v.warnings) err << "warning: " << w << '\n';
    if (!v.passed()) {
      for (const auto& f : v.failures) err << "validation failed: " << f << '\n';
      return kExitValidation;
    }
    out << cfg.name << ": assumptions hold on " << v.n_samples << " samples (alpha0="
        << format_double(v.alpha0) << ")\n";
    return kExitOk;
  });
}

}  // namespace plex
