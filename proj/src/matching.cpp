#include "fairdispatch/matching.hpp"

#include <algorithm>
#include <cstdint>

namespace fd {

double CostMatrix::big_m() const {
  double max_w = 0.0;
  for (double x : w_)
    if (x != kInfeasible) max_w = std::max(max_w, x);
  return static_cast<double>(rows_ + 1) * max_w + 1.0;
}

double CostMatrix::surrogate(std::size_t r, std::size_t c) const {
  return feasible(r, c) ? at(r, c) : big_m();
}

namespace {

// Cost in the ordered group Z x R: infeasible-edge count first, then weight.
struct Lex {
  std::int64_t big = 0;
  double w = 0.0;

  Lex operator+(const Lex& o) const { return {big + o.big, w + o.w}; }
  Lex operator-(const Lex& o) const { return {big - o.big, w - o.w}; }
  Lex& operator+=(const Lex& o) { big += o.big; w += o.w; return *this; }
  Lex& operator-=(const Lex& o) { big -= o.big; w -= o.w; return *this; }
  bool operator<(const Lex& o) const { return big != o.big ? big < o.big : w < o.w; }
};

constexpr Lex kLexInf{std::int64_t{1} << 50, 0.0};

// Rows <= cols. Returns row_of_col (size cols, -1 when free).
std::vector<int> hungarian(const std::vector<std::vector<Lex>>& a, std::size_t n, std::size_t m) {
  std::vector<Lex> u(n + 1), v(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<Lex> minv(m + 1, kLexInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      Lex delta = kLexInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const Lex cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_of_col(m, -1);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) row_of_col[j - 1] = static_cast<int>(p[j] - 1);
  return row_of_col;
}

}  // namespace

Assignment min_cost_assignment(const CostMatrix& m) {
  std::vector<std::size_t> rows, cols;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.feasible(r, c)) {
        rows.push_back(r);
        break;
      }
    }
  }
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (m.feasible(r, c)) {
        cols.push_back(c);
        break;
      }
    }
  }
  Assignment out;
  if (rows.empty()) return out;

  const bool transpose = rows.size() > cols.size();
  const auto& left = transpose ? cols : rows;
  const auto& right = transpose ? rows : cols;
  std::vector<std::vector<Lex>> a(left.size(), std::vector<Lex>(right.size()));
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      const std::size_t r = transpose ? right[j] : left[i];
      const std::size_t c = transpose ? left[i] : right[j];
      a[i][j] = m.feasible(r, c) ? Lex{0, m.at(r, c)} : Lex{1, 0.0};
    }
  }
  const auto left_of_right = hungarian(a, left.size(), right.size());
  for (std::size_t j = 0; j < right.size(); ++j) {
    if (left_of_right[j] < 0) continue;
    const std::size_t i = static_cast<std::size_t>(left_of_right[j]);
    const std::size_t r = transpose ? right[j] : left[i];
    const std::size_t c = transpose ? left[i] : right[j];
    if (m.feasible(r, c)) out.emplace_back(r, c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double assignment_weight(const CostMatrix& m, const Assignment& a) {
  double sum = 0.0;
  for (auto [r, c] : a) sum += m.at(r, c);
  return sum;
}

double guarantee_weight(double work_s, double guarantee_s, double extra_work_s) {
  if (work_s < 0 || guarantee_s < 0 || extra_work_s < 0) throw ContractError("guarantee_weight: negative input");
  if (guarantee_s > work_s) return std::max(work_s + extra_work_s - guarantee_s, 0.0);
  return extra_work_s;
}

EdgeEvaluation evaluate_edge(const CourierState& courier, const RoutePlan& current, const Batch& batch,
                             const RoadNetwork& net, Seconds now, Seconds sla, Seconds available_until) {
  EdgeEvaluation ev;
  if (courier.load() + static_cast<int>(batch.orders.size()) > courier.capacity) return ev;
  ev.plan = plan_route(courier, batch.orders, net, now);
  ev.extra_work = std::max<Seconds>(0, ev.plan.completion_time() - current.completion_time());

  bool ok = ev.plan.completion_time() <= available_until;
  double weight = 0.0;
  for (const auto& o : batch.orders) {
    const Seconds delivered = ev.plan.drop_time(o.id) - o.placed_at;
    if (delivered > sla) ok = false;
    weight += static_cast<double>(std::max<Seconds>(0, delivered - sdt(o, net)));
  }
  auto owed = [&](const Order& o) {
    const Seconds before = current.drop_time(o.id);
    const Seconds after = ev.plan.drop_time(o.id);
    if (after - o.placed_at > sla) ok = false;
    weight += static_cast<double>(after - before);
  };
  for (const auto& o : courier.onboard) owed(o);
  for (const auto& o : courier.assigned) owed(o);
  ev.delivery_weight = weight;
  ev.feasible = ok;
  return ev;
}

double delivery_weight(const CourierState& courier, const Batch& batch, const RoadNetwork& net, Seconds now) {
  if (courier.load() + static_cast<int>(batch.orders.size()) > courier.capacity) return kInfeasible;
  const auto current = plan_route(courier, {}, net, now);
  return evaluate_edge(courier, current, batch, net, now, std::numeric_limits<Seconds>::max()).delivery_weight;
}

double combined_weight(const CourierState& courier, const Batch& batch, const AgentLedger& ledger,
                       const RoadNetwork& net, Seconds now, double lambda) {
  if (courier.load() + static_cast<int>(batch.orders.size()) > courier.capacity) return kInfeasible;
  const auto current = plan_route(courier, {}, net, now);
  const auto ev = evaluate_edge(courier, current, batch, net, now, std::numeric_limits<Seconds>::max());
  const double g = guarantee_weight(static_cast<double>(ledger.work_time), ledger.guarantee(),
                                    static_cast<double>(ev.extra_work));
  return g + lambda * ev.delivery_weight;
}

bool feasible(const CourierState& courier, const Batch& batch, const RoadNetwork& net, Seconds now, Seconds sla) {
  if (courier.load() + static_cast<int>(batch.orders.size()) > courier.capacity) return false;
  const auto current = plan_route(courier, {}, net, now);
  return evaluate_edge(courier, current, batch, net, now, sla).feasible;
}

}  // namespace fd
