#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "fairdispatch/batching.hpp"
#include "fairdispatch/core.hpp"
#include "fairdispatch/routing.hpp"

namespace fd {

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Batch x agent edge weights in seconds; kInfeasible marks a forbidden edge.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kInfeasible)
      : rows_(rows), cols_(cols), w_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t r, std::size_t c) { return w_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return w_[r * cols_ + c]; }
  bool feasible(std::size_t r, std::size_t c) const { return at(r, c) != kInfeasible; }

  /// (rows + 1) * max finite weight + 1: larger than any all-finite assignment.
  double big_m() const;
  /// Weight with infeasible edges replaced by big_m().
  double surrogate(std::size_t r, std::size_t c) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> w_;
};

using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;

/// Maximum-cardinality matching over feasible edges with minimum total weight.
///
/// Shortest augmenting path Hungarian method on lexicographic costs
/// (infeasible-edge count, weight), which is the big_m surrogate taken to its
/// limit. Rows are batches, columns agents, both expected in ascending id
/// order; ties resolve deterministically from that order. Pairs come back
/// sorted by row.
Assignment min_cost_assignment(const CostMatrix& m);

/// Sum of weights of the assigned edges.
double assignment_weight(const CostMatrix& m, const Assignment& a);

/// Extra-cost edge weight of a work guarantee (seconds).
double guarantee_weight(double work_s, double guarantee_s, double extra_work_s);

/// Everything the matcher derives from one (agent, batch) pair.
struct EdgeEvaluation {
  bool feasible = false;
  Seconds extra_work = 0;
  double delivery_weight = kInfeasible;
  RoutePlan plan;
};

/// Evaluates adding `batch` to a courier whose current plan is `current`.
/// Feasible iff capacity holds, every order in the new plan meets the SLA and
/// the new plan completes by `available_until`.
EdgeEvaluation evaluate_edge(const CourierState& courier, const RoutePlan& current, const Batch& batch,
                             const RoadNetwork& net, Seconds now, Seconds sla,
                             Seconds available_until = std::numeric_limits<Seconds>::max());

/// Sum of the batch's excess delivery times plus the delay imposed on orders
/// the agent already owes; kInfeasible when capacity would be exceeded.
double delivery_weight(const CourierState& courier, const Batch& batch, const RoadNetwork& net, Seconds now);

/// guarantee_weight + lambda * delivery_weight.
double combined_weight(const CourierState& courier, const Batch& batch, const AgentLedger& ledger,
                       const RoadNetwork& net, Seconds now, double lambda);

bool feasible(const CourierState& courier, const Batch& batch, const RoadNetwork& net, Seconds now, Seconds sla);

}  // namespace fd
