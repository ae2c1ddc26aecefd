#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fairdispatch/engine.hpp"
#include "fairdispatch/gpr.hpp"
#include "fairdispatch/metrics.hpp"
#include "fairdispatch/workload.hpp"

namespace fd {

/// One GPR training sample: an accepted agent's joining features and realized work.
struct TrainingRow {
  FeatureVector features;
  double active_h = 0.0;
  double work_h = 0.0;
};

std::vector<TrainingRow> training_rows(const SimReport& r);

/// Total work over total active time of the accepted agents.
double realized_omega(const SimReport& r);

/// Quick estimate without simulating: total shortest delivery time of the
/// deliverable orders over total session time, clamped to [0, 1].
double analytic_omega(const Workload& w);

/// Keeps a seeded random subset of sessions (scale < 1) or adds copies of
/// randomly chosen sessions at random serviced login nodes (scale > 1).
Workload scale_supply(const Workload& w, double scale, std::uint64_t seed);

struct CalibrationOptions {
  std::vector<double> supply_scales{0.6, 0.8, 1.0, 1.5, 2.0};
  /// Extra rounds replacing omega by the realized ratio of a fixed-guarantee
  /// run at g = omega.
  int omega_refinements = 0;
};

struct CalibrationResult {
  double baseline_omega = 0.0;  // delivery-time dispatcher, no guarantee
  double omega = 0.0;           // after refinements
  std::vector<TrainingRow> rows;
};

/// Omega from delivery-time-only runs over all days, then training rows from
/// fixed-guarantee runs at g = omega for each day and supply scale.
CalibrationResult calibrate(std::span<const Workload> days, const SimConfig& base, const CalibrationOptions& opt = {});

// training.csv header:
//   login_time,logoff_time,login_lat,login_lon,active_agent_count,orders_per_window,rating,active_h,work_h
void write_training_rows(std::ostream& os, std::span<const TrainingRow> rows);
std::vector<TrainingRow> read_training_rows(std::istream& is, const std::string& name = "training.csv");

/// Fits a model predicting work hours from joining features.
GprModel train_gpr(std::span<const TrainingRow> rows, bool with_rating, const FitOptions& opt = {},
                   FitDiagnostics* diag = nullptr);

struct SweepPoint {
  double g = 0.0;
  double pay_rate = 0.0;
  MetricsReport metrics;
};

/// Fixed-guarantee runs over `gs`, paying min_wage / g per worked hour (the
/// base pay rate when g = 0).
std::vector<SweepPoint> sweep(const Workload& w, const SimConfig& base, std::span<const double> gs);

// Curve table header:
//   g,pay_rate,platform_cost,total_handouts,cost_times_g,total_work_h,total_active_h,
//   gini_income_per_active,gini_income_per_active_work_only,gini_work_for_min_wage,
//   sla_violation_pct,avg_delivery_time_s
void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> points);

}  // namespace fd
