// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "plex/coefficients.hpp"
#include "plex/estimate.hpp"

namespace plex {

inline constexpr const char* kReportSchemaVersion = "1.0.0";

struct Resolution {
  std::size_t n_elements = 0;
  double dt = 0.0;
  double T = 0.0;
  double burn_in = 0.0;
  double T_spin = 0.0;
  std::size_t n_samples = 0;
  double block_length = 0.0;
  std::string scheme;
  bool lumped_mass = false;
};

struct ReportFlags {
  bool concordance = false;          // |E1 - E2| <= 3 sigma + identity residual rate
  std::optional<bool> upper_bound_kappa;  // E2 <= E3 + 1e-8
  std::optional<bool> upper_bound_direct; // E1 <= E3 + 3 sigma
  std::optional<bool> mc_agreement;       // |ln_rho1 - E1| <= 3 combined sigma
  bool op_norm_agreement = false;    // |op_norm_rate - E1| <= 1e-3
  bool spin_up_converged = false;
  bool gamma_stable = false;
  bool possibly_divergent = false;
};

struct EstimatorReport {
  std::string scenario;
  bool symmetric = false;
  bool autonomous = false;

  double E1 = 0.0;
  double E2 = 0.0;
  std::optional<double> E3;
  std::string E3_mode;
  std::string E3_note;  // set when E3 is undefined
  std::optional<double> lambda_princ;  // at the starting point omega

  double E1_stderr = 0.0;
  double E2_stderr = 0.0;
  std::optional<double> E3_stderr;

  std::optional<double> ln_rho1_mc;
  std::optional<double> ln_rho1_stderr;
  std::size_t mc_used = 0;
  std::size_t mc_dropped = 0;

  std::vector<double> op_norm_rates;
  double identity_residual = 0.0;
  double identity_residual_per_time = 0.0;
  double min_rayleigh_gap = 0.0;

  double spin_up_distance = 0.0;
  double gamma_hat = 0.0;
  double gamma_hat_doubled = 0.0;

  Resolution resolution;
  ReportFlags flags;
  std::vector<std::string> warnings;
};

/// Pretty-printed JSON documents with a trailing newline.
std::string report_to_json(const EstimatorReport& r);
std::string validation_to_json(const ValidationReport& v);

/// CSV writer for TraceRow with shortest round-trip number formatting.
class TraceCsv {
 public:
  TraceCsv(std::ostream& os, bool with_lambda);
  void write(const TraceRow& row);

 private:
  std::ostream* os_;
  bool with_lambda_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace plex
