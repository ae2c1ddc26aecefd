#include "fairdispatch/guarantee.hpp"

namespace fd {

std::string to_string(GuaranteeMode m) {
  switch (m) {
    case GuaranteeMode::kFixed: return "fixed";
    case GuaranteeMode::kDynamic: return "dynamic";
    case GuaranteeMode::kRatingBased: return "rating";
  }
  return "fixed";
}

GuaranteeMode guarantee_mode_from_string(const std::string& s) {
  if (s == "fixed") return GuaranteeMode::kFixed;
  if (s == "dynamic") return GuaranteeMode::kDynamic;
  if (s == "rating") return GuaranteeMode::kRatingBased;
  throw ConfigError("unknown guarantee mode '" + s + "' (expected fixed, dynamic or rating)");
}

void GuaranteePolicy::validate() const {
  if (mode == GuaranteeMode::kFixed && !(g >= 0.0 && g <= 1.0)) throw ConfigError("policy.g must lie in [0, 1]");
  if (mode == GuaranteeMode::kRatingBased && !(omega > 0.0 && omega <= 1.0)) {
    throw ConfigError("policy.omega must lie in (0, 1]");
  }
  if (!(baseline_g >= 0.0 && baseline_g <= 1.0)) throw ConfigError("policy.baseline_g must lie in [0, 1]");
  if (needs_prediction() && !model) throw ConfigError("policy requires a GPR model (dynamic mode or rejection)");
  if (model && !model->fitted()) throw ConfigError("policy GPR model is not fitted");
}

double optimal_fixed_g(double total_work_hours, double total_active_hours) {
  if (!(total_active_hours > 0.0)) throw ContractError("optimal_fixed_g: total active time must be positive");
  return clamp_ratio(total_work_hours / total_active_hours);
}

double dynamic_g(double predicted_work_hours, double active_hours) {
  if (!(active_hours > 0.0)) throw ContractError("dynamic_g: active time must be positive");
  return clamp_ratio(predicted_work_hours / active_hours);
}

double dynamic_g(const GprModel& model, const FeatureVector& features, double active_hours, bool with_rating) {
  if (!model.fitted()) throw ContractError("dynamic_g: model is not fitted");
  return dynamic_g(model.predict(features.values(with_rating)).mean, active_hours);
}

double rating_based_g(int rating, double omega) {
  if (rating < 1 || rating > 5) throw ContractError("rating_based_g: rating must be in 1..5, got " + std::to_string(rating));
  if (!(omega > 0.0 && omega <= 1.0)) throw ContractError("rating_based_g: omega must lie in (0, 1]");
  return clamp_ratio((1.0 + 0.1 * (rating - 3)) * omega);
}

bool should_reject(double predicted_work_hours, double baseline_g, double active_hours) {
  if (!(active_hours > 0.0)) throw ContractError("should_reject: active time must be positive");
  return predicted_work_hours < baseline_g * active_hours;
}

}  // namespace fd
