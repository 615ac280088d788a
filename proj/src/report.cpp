// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/report.hpp"

#include <charconv>
#include <cmath>

#include "json.hpp"

namespace plex {
namespace {

using nlohmann::ordered_json;

template <class T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string report_to_json(const EstimatorReport& r) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scenario"] = r.scenario;
  j["symmetric"] = r.symmetric;
  j["autonomous"] = r.autonomous;
  j["E1"] = num(r.E1);
  j["E2"] = num(r.E2);
  j["E3"] = opt(r.E3);
  j["E3_mode"] = r.E3_mode;
  j["E3_note"] = r.E3_note.empty() ? ordered_json(nullptr) : ordered_json(r.E3_note);
  j["lambda_princ"] = opt(r.lambda_princ);
  j["block_stderr"] = {{"E1", num(r.E1_stderr)}, {"E2", num(r.E2_stderr)}, {"E3", opt(r.E3_stderr)}};
  j["ln_rho1_mc"] = {{"mean", opt(r.ln_rho1_mc)},
                     {"stderr", opt(r.ln_rho1_stderr)},
                     {"used", r.mc_used},
                     {"dropped", r.mc_dropped}};
  j["op_norm_rate"] = r.op_norm_rates.empty() ? ordered_json(nullptr) : num(r.op_norm_rates.front());
  j["op_norm_rates"] = r.op_norm_rates;
  j["identity_residual"] = num(r.identity_residual);
  j["identity_residual_per_time"] = num(r.identity_residual_per_time);
  j["min_rayleigh_gap"] = r.E3 ? num(r.min_rayleigh_gap) : ordered_json(nullptr);
  j["spin_up_distance"] = num(r.spin_up_distance);
  j["gamma"] = {{"gamma_hat", num(r.gamma_hat)}, {"gamma_hat_doubled", num(r.gamma_hat_doubled)}};
  const auto& res = r.resolution;
  j["resolution"] = {{"n_elements", res.n_elements}, {"dt", res.dt},
                     {"T", res.T},                   {"burn_in", res.burn_in},
                     {"T_spin", res.T_spin},         {"n_samples", res.n_samples},
                     {"block_length", res.block_length}, {"scheme", res.scheme},
                     {"lumped_mass", res.lumped_mass}};
  const auto& f = r.flags;
  j["flags"] = {{"concordance", f.concordance},
                {"upper_bound_kappa", opt(f.upper_bound_kappa)},
                {"upper_bound_direct", opt(f.upper_bound_direct)},
                {"mc_agreement", opt(f.mc_agreement)},
                {"op_norm_agreement", f.op_norm_agreement},
                {"spin_up_converged", f.spin_up_converged},
                {"gamma_stable", f.gamma_stable},
                {"possibly_divergent", f.possibly_divergent}};
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string validation_to_json(const ValidationReport& v) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["passed"] = v.passed();
  j["n_samples"] = v.n_samples;
  j["t_orbit"] = v.t_orbit;
  j["ellipticity"] = {{"alpha0", num(v.alpha0)}, {"pass", v.ellipticity_ok}};
  j["boundedness"] = {{"sup_a", num(v.sup_a)},
                      {"sup_a1", num(v.sup_a1)},
                      {"sup_b", num(v.sup_b)},
                      {"pass", v.bounded_ok}};
  j["robin_d0"] = {{"min_d0", num(v.min_d0)}, {"pass", v.d0_ok}};
  j["a4_i"] = {{"estimate", num(v.a4_i)}, {"stderr", num(v.a4_i_stderr)}, {"pass", v.a4_i_ok}};
  j["a4_ii"] = {{"estimate", num(v.a4_ii)}, {"stderr", num(v.a4_ii_stderr)}, {"pass", v.a4_ii_ok}};
  j["warnings"] = v.warnings;
  j["failures"] = v.failures;
  return j.dump(2) + "\n";
}

TraceCsv::TraceCsv(std::ostream& os, bool with_lambda) : os_(&os), with_lambda_(with_lambda) {
  *os_ << "t,log_norm,kappa" << (with_lambda_ ? ",lambda_princ" : "") << '\n';
}

void TraceCsv::write(const TraceRow& row) {
  *os_ << format_double(row.t) << ',' << format_double(row.log_norm) << ','
       << format_double(row.kappa);
  if (with_lambda_) *os_ << ',' << format_double(row.lambda_princ);
  *os_ << '\n';
}

}  // namespace plex
