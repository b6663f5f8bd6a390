#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tpanon/exact.hpp"
#include "tpanon/model.hpp"
#include "tpanon/objective.hpp"

namespace tpanon {

using GroupCostFn = std::function<std::int64_t(std::span<const UserIndex>)>;

struct DpResult {
    Partition groups;  // consecutive runs of the input order
    std::int64_t cost = 0;
};

// Minimum-cost split of `order` into consecutive runs of length [k, 2k-1]:
//   C[0] = 0, C[i] = min_{k <= i-j <= 2k-1} C[j] + w(order[j..i)).
// O(n k) evaluations of w. Ties prefer the shortest final run.
DpResult consecutive_dp(std::span<const UserIndex> order, int k, const GroupCostFn& cost);

// Same recurrence with w evaluated incrementally from the objective, which
// makes the whole pass O(n k * active timesteps).
DpResult consecutive_dp(std::span<const UserIndex> order, int k, const Objective& objective);

// Users sorted by Hilbert index of their position at t, ties by user index.
std::vector<UserIndex> hilbert_order(const TrajectoryDB& db, Timestep t);

// Users sorted lexicographically by the tuple of per-timestep Hilbert
// indices, ties by user index.
std::vector<UserIndex> trajectory_order(const TrajectoryDB& db);

enum class Axis { x, y };

// Users sorted by position at t along `major`, then the other axis, then user
// index. On a single row or column this is coordinate order.
std::vector<UserIndex> coordinate_order(const TrajectoryDB& db, Timestep t, Axis major);

// Number of candidate orderings: 3l + 1.
std::size_t candidate_count(const TrajectoryDB& db);

// Candidate c in tie-break order: hilbert_order(t) for t = 0..l-1, then
// trajectory_order, then coordinate_order(t, x) and coordinate_order(t, y)
// for t = 0..l-1.
std::vector<UserIndex> candidate_order(const TrajectoryDB& db, std::size_t c);
std::vector<std::vector<UserIndex>> candidate_orders(const TrajectoryDB& db);

// Optimal consecutive grouping of the Hilbert order at t, each user weighted
// by one request at t. This is the trajectory-unaware snapshot solver.
Partition solve_single_step(const TrajectoryDB& db, Timestep t, int k);

// Runs solve_single_step at every timestep; the resulting policies regroup
// users over time and are open to intersection attacks.
std::vector<Policy> solve_per_step(const TrajectoryDB& db, int k);

struct ApproxOptions {
    std::int64_t cover_weight = 0;
    unsigned threads = 1;
};

struct ApproxResult {
    Policy policy;
    std::int64_t cost = 0;  // total_cost of policy
    std::size_t candidate = 0;  // winning index into candidate_orders
    std::vector<std::int64_t> candidate_costs;  // objective value per candidate
};

// Fixed-partition solver for the multi-timestep objective: every candidate
// ordering is split optimally by consecutive_dp under the full objective and
// the cheapest result wins (first candidate on ties).
ApproxResult solve_approx_detailed(const TrajectoryDB& db, const RequestLog& log, int k,
                                   const ApproxOptions& options = {});

Policy solve_approx(const TrajectoryDB& db, const RequestLog& log, int k,
                    const ApproxOptions& options = {});

}  // namespace tpanon
