#pragma once

#include <memory>
#include <string>

#include "fairdispatch/core.hpp"
#include "fairdispatch/gpr.hpp"

namespace fd {

enum class GuaranteeMode { kFixed, kDynamic, kRatingBased };

std::string to_string(GuaranteeMode m);
GuaranteeMode guarantee_mode_from_string(const std::string& s);

/// How each agent's guarantee ratio is set, and whether new agents may be turned away.
struct GuaranteePolicy {
  GuaranteeMode mode = GuaranteeMode::kFixed;
  double g = 0.0;             // fixed mode
  double omega = 0.25;        // rating-based mode
  bool rejection_enabled = false;
  double baseline_g = 0.0;    // threshold ratio for rejection
  std::shared_ptr<const GprModel> model;  // dynamic mode or rejection

  bool needs_prediction() const { return rejection_enabled || mode == GuaranteeMode::kDynamic; }
  void validate() const;
};

/// Ratio of total work to total active time, clamped to [0, 1].
double optimal_fixed_g(double total_work_hours, double total_active_hours);

/// Predicted work over active time, clamped to [0, 1].
double dynamic_g(double predicted_work_hours, double active_hours);

/// Same, with the prediction coming from the model at the given features.
double dynamic_g(const GprModel& model, const FeatureVector& features, double active_hours, bool with_rating = false);

/// (1 + 0.1 * (rating - 3)) * omega, clamped to [0, 1].
double rating_based_g(int rating, double omega);

/// True when predicted work falls strictly short of the guaranteed work.
bool should_reject(double predicted_work_hours, double baseline_g, double active_hours);

}  // namespace fd
