#include "fairdispatch/experiment.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include "csv.hpp"

namespace fd {

std::vector<TrainingRow> training_rows(const SimReport& r) {
  std::vector<TrainingRow> rows;
  for (const auto& a : r.agents) {
    if (!a.ledger.accepted || a.ledger.active_time <= 0) continue;
    rows.push_back({a.features, to_hours(a.ledger.active_time), to_hours(a.ledger.work_time)});
  }
  return rows;
}

double realized_omega(const SimReport& r) {
  double work = 0.0, active = 0.0;
  for (const auto& a : r.agents) {
    if (!a.ledger.accepted) continue;
    work += to_hours(a.ledger.work_time);
    active += to_hours(a.ledger.active_time);
  }
  return optimal_fixed_g(work, active);
}

double analytic_omega(const Workload& w) {
  double work_s = 0.0, active_s = 0.0;
  for (const auto& o : w.orders) {
    if (!w.network->serviced(o.restaurant_node) || !w.network->serviced(o.customer_node)) continue;
    work_s += static_cast<double>(sdt(o, *w.network));
  }
  for (const auto& a : w.agents) active_s += static_cast<double>(a.shift_length());
  return optimal_fixed_g(work_s / kSecondsPerHour, active_s / kSecondsPerHour);
}

Workload scale_supply(const Workload& w, double scale, std::uint64_t seed) {
  if (!(scale > 0.0)) throw ContractError("scale_supply: scale must be positive");
  Workload out{w.network, w.orders, {}};
  std::mt19937_64 rng(seed);
  const auto n = w.agents.size();
  if (scale <= 1.0) {
    const auto keep = static_cast<std::size_t>(std::llround(scale * static_cast<double>(n)));
    std::sample(w.agents.begin(), w.agents.end(), std::back_inserter(out.agents), keep, rng);
    return out;
  }
  out.agents = w.agents;
  if (n == 0) return out;
  std::vector<NodeId> nodes;
  for (const auto& rec : w.network->nodes()) {
    if (w.network->serviced(rec.id)) nodes.push_back(rec.id);
  }
  AgentId next_id = 0;
  for (const auto& a : w.agents) next_id = std::max(next_id, a.id + 1);
  const auto extra = static_cast<std::size_t>(std::llround((scale - 1.0) * static_cast<double>(n)));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<std::size_t> pick_node(0, nodes.size() - 1);
  for (std::size_t k = 0; k < extra; ++k) {
    AgentSession s = w.agents[pick(rng)];
    s.id = next_id++;
    s.login_node = nodes[pick_node(rng)];
    out.agents.push_back(s);
  }
  return out;
}

CalibrationResult calibrate(std::span<const Workload> days, const SimConfig& base, const CalibrationOptions& opt) {
  if (days.empty()) throw ContractError("calibrate: no workloads");
  auto ratio_over_days = [&](const SimConfig& cfg) {
    double work = 0.0, active = 0.0;
    for (const auto& d : days) {
      for (const auto& a : run_simulation(d, cfg).agents) {
        if (!a.ledger.accepted) continue;
        work += to_hours(a.ledger.work_time);
        active += to_hours(a.ledger.active_time);
      }
    }
    return active > 0.0 ? optimal_fixed_g(work, active) : 0.0;
  };

  SimConfig baseline = base;
  baseline.matching = MatchingMode::kDeliveryTime;
  baseline.policy = GuaranteePolicy{};
  CalibrationResult res;
  res.baseline_omega = ratio_over_days(baseline);
  res.omega = res.baseline_omega;

  SimConfig fixed = base;
  fixed.matching = MatchingMode::kGuarantee;
  fixed.policy = GuaranteePolicy{};
  for (int i = 0; i < opt.omega_refinements; ++i) {
    fixed.policy.g = res.omega;
    res.omega = ratio_over_days(fixed);
  }

  fixed.policy.g = res.omega;
  for (std::size_t d = 0; d < days.size(); ++d) {
    for (std::size_t k = 0; k < opt.supply_scales.size(); ++k) {
      const double scale = opt.supply_scales[k];
      const Workload w = scale == 1.0 ? days[d] : scale_supply(days[d], scale, base.seed * 1000 + d * 37 + k);
      auto rows = training_rows(run_simulation(w, fixed));
      res.rows.insert(res.rows.end(), rows.begin(), rows.end());
    }
  }
  return res;
}

void write_training_rows(std::ostream& os, std::span<const TrainingRow> rows) {
  using csv::format_double;
  os << "login_time,logoff_time,login_lat,login_lon,active_agent_count,orders_per_window,rating,active_h,work_h\n";
  for (const auto& r : rows) {
    const auto& f = r.features;
    os << format_double(f.login_time) << ',' << format_double(f.logoff_time) << ',' << format_double(f.login_lat)
       << ',' << format_double(f.login_lon) << ',' << format_double(f.active_agent_count) << ','
       << format_double(f.orders_per_window) << ',' << (f.rating ? format_double(*f.rating) : "") << ','
       << format_double(r.active_h) << ',' << format_double(r.work_h) << '\n';
  }
}

std::vector<TrainingRow> read_training_rows(std::istream& is, const std::string& name) {
  csv::Reader rd(is, name);
  const auto c_in = rd.require("login_time"), c_out = rd.require("logoff_time"), c_lat = rd.require("login_lat"),
             c_lon = rd.require("login_lon"), c_agents = rd.require("active_agent_count"),
             c_opw = rd.require("orders_per_window"), c_rating = rd.require("rating"),
             c_active = rd.require("active_h"), c_work = rd.require("work_h");
  std::vector<TrainingRow> rows;
  while (rd.next()) {
    TrainingRow r;
    r.features.login_time = rd.get<double>(c_in);
    r.features.logoff_time = rd.get<double>(c_out);
    r.features.login_lat = rd.get<double>(c_lat);
    r.features.login_lon = rd.get<double>(c_lon);
    r.features.active_agent_count = rd.get<double>(c_agents);
    r.features.orders_per_window = rd.get<double>(c_opw);
    if (!rd.field(c_rating).empty()) r.features.rating = rd.get<double>(c_rating);
    r.active_h = rd.get<double>(c_active);
    r.work_h = rd.get<double>(c_work);
    if (r.active_h < 0 || r.work_h < 0) rd.fail("negative hours");
    rows.push_back(r);
  }
  return rows;
}

GprModel train_gpr(std::span<const TrainingRow> rows, bool with_rating, const FitOptions& opt, FitDiagnostics* diag) {
  if (rows.empty()) throw DataError("no training rows");
  const auto dims = static_cast<Eigen::Index>(FeatureVector::kBaseDims + (with_rating ? 1 : 0));
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), dims);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (with_rating && !rows[i].features.rating) throw DataError("training row without rating");
    const auto v = rows[i].features.values(with_rating);
    for (Eigen::Index d = 0; d < dims; ++d) X(static_cast<Eigen::Index>(i), d) = v[static_cast<std::size_t>(d)];
    y(static_cast<Eigen::Index>(i)) = rows[i].work_h;
  }
  return GprModel::fit(X, y, opt, diag);
}

std::vector<SweepPoint> sweep(const Workload& w, const SimConfig& base, std::span<const double> gs) {
  std::vector<SweepPoint> out;
  for (double g : gs) {
    SimConfig cfg = base;
    cfg.matching = MatchingMode::kGuarantee;
    cfg.policy = GuaranteePolicy{};
    cfg.policy.g = g;
    if (g > 0.0) cfg.cost.pay_rate = pay_rate_for_guarantee(g, cfg.cost.min_wage);
    out.push_back({g, cfg.cost.pay_rate, compute_metrics(run_simulation(w, cfg))});
  }
  return out;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> points) {
  using csv::format_double;
  os << "g,pay_rate,platform_cost,total_handouts,cost_times_g,total_work_h,total_active_h,gini_income_per_active,"
        "gini_income_per_active_work_only,gini_work_for_min_wage,sla_violation_pct,avg_delivery_time_s\n";
  for (const auto& p : points) {
    const auto& m = p.metrics;
    os << format_double(p.g) << ',' << format_double(p.pay_rate) << ',' << format_double(m.platform_cost) << ','
       << format_double(m.total_handouts) << ',' << format_double(m.platform_cost * p.g) << ','
       << format_double(m.total_work_h) << ',' << format_double(m.total_active_h) << ','
       << format_double(m.gini_income_per_active) << ',' << format_double(m.gini_income_per_active_work_only) << ','
       << format_double(m.gini_work_for_min_wage) << ',' << format_double(m.sla_violation_pct) << ','
       << format_double(m.avg_delivery_time_s) << '\n';
  }
}

}  // namespace fd
