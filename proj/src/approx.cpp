#include "tpanon/approx.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "tpanon/error.hpp"
#include "tpanon/geometry.hpp"
#include "tpanon/parallel.hpp"

namespace tpanon {

namespace {

void check_k(std::size_t n, int k) {
    if (k < 2) throw Error("k must be at least 2");
    if (n < static_cast<std::size_t>(k)) {
        throw Error("k exceeds user count (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
}

constexpr auto inf = std::numeric_limits<std::int64_t>::max();

// Shared DP driver; `run_cost(i, visit)` calls visit(len, w) for each run
// length len in [1, 2k-1] of the run ending before position i, in
// increasing len.
template <class RunCosts>
DpResult dp(std::span<const UserIndex> order, int k, RunCosts&& run_costs) {
    const std::size_t n = order.size();
    check_k(n, k);
    const std::size_t kk = static_cast<std::size_t>(k);
    std::vector<std::int64_t> best(n + 1, inf);
    std::vector<std::uint32_t> run(n + 1, 0);
    best[0] = 0;
    for (std::size_t i = kk; i <= n; ++i) {
        run_costs(i, [&](std::size_t len, std::int64_t w) {
            if (len < kk) return;
            const auto j = i - len;
            if (best[j] == inf) return;
            if (best[j] + w < best[i]) {
                best[i] = best[j] + w;
                run[i] = static_cast<std::uint32_t>(len);
            }
        });
    }
    DpResult out;
    out.cost = best[n];
    for (std::size_t i = n; i > 0; i -= run[i]) {
        out.groups.emplace_back(order.begin() + (i - run[i]), order.begin() + i);
    }
    std::reverse(out.groups.begin(), out.groups.end());
    return out;
}

}  // namespace

DpResult consecutive_dp(std::span<const UserIndex> order, int k, const GroupCostFn& cost) {
    const std::size_t max_run = 2 * static_cast<std::size_t>(std::max(k, 1)) - 1;
    return dp(order, k, [&](std::size_t i, auto&& visit) {
        for (std::size_t len = static_cast<std::size_t>(k); len <= std::min(max_run, i); ++len) {
            visit(len, cost(order.subspan(i - len, len)));
        }
    });
}

DpResult consecutive_dp(std::span<const UserIndex> order, int k, const Objective& objective) {
    const std::size_t max_run = 2 * static_cast<std::size_t>(std::max(k, 1)) - 1;
    Objective::Accumulator acc(objective);
    return dp(order, k, [&](std::size_t i, auto&& visit) {
        acc.reset();
        for (std::size_t len = 1; len <= std::min(max_run, i); ++len) {
            acc.add(order[i - len]);
            if (len >= static_cast<std::size_t>(k)) visit(len, acc.cost());
        }
    });
}

std::vector<UserIndex> hilbert_order(const TrajectoryDB& db, Timestep t) {
    if (t >= db.horizon()) {
        throw Error("timestep " + std::to_string(t) + " out of range (horizon " +
                    std::to_string(db.horizon()) + ")");
    }
    const auto order = HilbertOrder::of(db.world());
    std::vector<std::pair<std::uint64_t, UserIndex>> keyed(db.size());
    for (UserIndex u = 0; u < db.size(); ++u) keyed[u] = {hilbert_index(db.position(u, t), order), u};
    std::sort(keyed.begin(), keyed.end());
    std::vector<UserIndex> out(db.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) out[i] = keyed[i].second;
    return out;
}

std::vector<UserIndex> trajectory_order(const TrajectoryDB& db) {
    const auto order = HilbertOrder::of(db.world());
    const std::size_t l = db.horizon();
    std::vector<std::uint64_t> keys(db.size() * l);
    for (UserIndex u = 0; u < db.size(); ++u) {
        for (Timestep t = 0; t < l; ++t) keys[u * l + t] = hilbert_index(db.position(u, t), order);
    }
    std::vector<UserIndex> out(db.size());
    std::iota(out.begin(), out.end(), UserIndex{0});
    std::sort(out.begin(), out.end(), [&](UserIndex a, UserIndex b) {
        const auto* ka = keys.data() + std::size_t{a} * l;
        const auto* kb = keys.data() + std::size_t{b} * l;
        for (std::size_t t = 0; t < l; ++t) {
            if (ka[t] != kb[t]) return ka[t] < kb[t];
        }
        return a < b;
    });
    return out;
}

std::vector<UserIndex> coordinate_order(const TrajectoryDB& db, Timestep t, Axis major) {
    if (t >= db.horizon()) {
        throw Error("timestep " + std::to_string(t) + " out of range (horizon " +
                    std::to_string(db.horizon()) + ")");
    }
    std::vector<std::pair<std::uint64_t, UserIndex>> keyed(db.size());
    for (UserIndex u = 0; u < db.size(); ++u) {
        auto p = db.position(u, t);
        auto a = static_cast<std::uint64_t>(major == Axis::x ? p.x : p.y);
        auto b = static_cast<std::uint64_t>(major == Axis::x ? p.y : p.x);
        keyed[u] = {(a << 32) | b, u};
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<UserIndex> out(db.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) out[i] = keyed[i].second;
    return out;
}

std::size_t candidate_count(const TrajectoryDB& db) { return 3 * std::size_t{db.horizon()} + 1; }

std::vector<UserIndex> candidate_order(const TrajectoryDB& db, std::size_t c) {
    const std::size_t l = db.horizon();
    if (c < l) return hilbert_order(db, static_cast<Timestep>(c));
    if (c == l) return trajectory_order(db);
    c -= l + 1;
    if (c < 2 * l) return coordinate_order(db, static_cast<Timestep>(c / 2), c % 2 == 0 ? Axis::x : Axis::y);
    throw Error("candidate index out of range");
}

std::vector<std::vector<UserIndex>> candidate_orders(const TrajectoryDB& db) {
    std::vector<std::vector<UserIndex>> out;
    for (std::size_t c = 0; c < candidate_count(db); ++c) out.push_back(candidate_order(db, c));
    return out;
}

Partition solve_single_step(const TrajectoryDB& db, Timestep t, int k) {
    auto objective = Objective::single_step(db, t);
    auto order = hilbert_order(db, t);
    return consecutive_dp(order, k, objective).groups;
}

std::vector<Policy> solve_per_step(const TrajectoryDB& db, int k) {
    std::vector<Policy> out;
    for (Timestep t = 0; t < db.horizon(); ++t) {
        Policy p{k, solve_single_step(db, t, k)};
        p.canonicalize();
        out.push_back(std::move(p));
    }
    return out;
}

ApproxResult solve_approx_detailed(const TrajectoryDB& db, const RequestLog& log, int k,
                                   const ApproxOptions& options) {
    check_k(db.size(), k);
    const auto objective = Objective::from_log(db, log, options.cover_weight);
    const std::size_t candidates = candidate_count(db);

    std::vector<DpResult> results(candidates);
    parallel_for(candidates, options.threads, [&](std::size_t c) {
        results[c] = consecutive_dp(candidate_order(db, c), k, objective);
    });

    ApproxResult out;
    std::size_t winner = 0;
    for (std::size_t c = 0; c < candidates; ++c) {
        out.candidate_costs.push_back(results[c].cost);
        if (results[c].cost < results[winner].cost) winner = c;
    }
    out.candidate = winner;
    out.policy = Policy{k, std::move(results[winner].groups)};
    out.policy.canonicalize();
    out.cost = options.cover_weight == 0 ? results[winner].cost : total_cost(out.policy, db, log);
    return out;
}

Policy solve_approx(const TrajectoryDB& db, const RequestLog& log, int k,
                    const ApproxOptions& options) {
    return solve_approx_detailed(db, log, k, options).policy;
}

}  // namespace tpanon
