#include <doctest.h>

#include <limits>
#include <random>

#include "helpers.hpp"
#include "tpanon/approx.hpp"
#include "tpanon/attacker.hpp"
#include "tpanon/error.hpp"
#include "tpanon/policy.hpp"

using namespace tpanon;
using namespace tpanon::test;

namespace {

// All splits of `order` into consecutive runs with lengths in [k, 2k-1].
std::int64_t brute_consecutive(std::span<const UserIndex> order, int k, const GroupCostFn& w) {
    if (order.empty()) return 0;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t len = k; len <= std::min<std::size_t>(2 * k - 1, order.size()); ++len) {
        auto rest = order.subspan(len);
        if (!rest.empty() && rest.size() < std::size_t(k)) continue;
        auto tail = brute_consecutive(rest, k, w);
        if (tail == std::numeric_limits<std::int64_t>::max()) continue;
        best = std::min(best, w(order.first(len)) + tail);
    }
    return best;
}

GroupCostFn cost_fn(const TrajectoryDB& db, const RequestLog& log) {
    return [&db, &log](std::span<const UserIndex> g) {
        Policy p{2, {std::vector<UserIndex>(g.begin(), g.end())}};
        std::int64_t total = 0;
        for (std::size_t i = 0; i < log.size(); ++i) {
            if (std::find(g.begin(), g.end(), log.sender(i)) != g.end()) total += group_cost(g, db, log[i].t);
        }
        return total;
    };
}

}  // namespace

TEST_CASE("consecutive_dp on the line instance") {
    auto inst = craft("line-4");
    std::vector<UserIndex> order{0, 1, 2, 3};
    auto r = consecutive_dp(order, 2, cost_fn(inst.db, inst.log));
    CHECK(r.groups == Partition{{0, 1}, {2, 3}});
    CHECK(r.cost == 8);
    auto fast = consecutive_dp(order, 2, Objective::from_log(inst.db, inst.log));
    CHECK(fast.groups == r.groups);
    CHECK(fast.cost == 8);

    auto whole = consecutive_dp(std::span(order).first(2), 2, cost_fn(inst.db, inst.log));
    CHECK(whole.groups == Partition{{0, 1}});
    CHECK_THROWS_AS(consecutive_dp(std::span(order).first(1), 2, cost_fn(inst.db, inst.log)), Error);
}

TEST_CASE("consecutive_dp with n=5, k=2 picks the cheaper of (2,3) and (3,2)") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto inst = small_instance(seed, 5, 2, 16);
        std::vector<UserIndex> order{0, 1, 2, 3, 4};
        auto w = cost_fn(inst.db, inst.log);
        auto a = w(std::span(order).first(2)) + w(std::span(order).subspan(2));
        auto b = w(std::span(order).first(3)) + w(std::span(order).subspan(3));
        CHECK(consecutive_dp(order, 2, w).cost == std::min(a, b));
    }
}

TEST_CASE("property: both DP routes agree with exhaustive consecutive splits") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 150; ++trial) {
        std::size_t n = 2 + trial % 11;
        int k = 2 + trial % 3;
        if (n < std::size_t(k)) continue;
        auto inst = small_instance(4000 + trial, n, 1 + trial % 3, 16);
        std::vector<UserIndex> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<UserIndex>(i);
        std::shuffle(order.begin(), order.end(), rng);
        auto w = cost_fn(inst.db, inst.log);
        auto slow = consecutive_dp(order, k, w);
        auto fast = consecutive_dp(order, k, Objective::from_log(inst.db, inst.log));
        CHECK(slow.cost == brute_consecutive(order, k, w));
        CHECK(fast.cost == slow.cost);
        CHECK(fast.groups == slow.groups);
        CHECK(total_cost({k, fast.groups}, inst.db, inst.log) == fast.cost);
    }
}

TEST_CASE("solve_single_step") {
    auto line = craft("line-4");
    CHECK(solve_single_step(line.db, 0, 2) == Partition{{0, 1}, {2, 3}});
    CHECK_THROWS_AS(solve_single_step(line.db, 1, 2), Error);

    std::vector<std::vector<GridPoint>> same(7, std::vector<GridPoint>{{2, 2}});
    auto db = make_db(4, same);
    auto groups = solve_single_step(db, 0, 3);
    std::int64_t cost = 0;
    for (const auto& g : groups) {
        CHECK(g.size() >= 3);
        CHECK(g.size() <= 5);
        cost += static_cast<std::int64_t>(g.size()) * group_cost(g, db, 0);
    }
    CHECK(cost == 7);

    auto three = small_instance(5, 3, 2);
    CHECK(solve_single_step(three.db, 1, 3).size() == 1);
}

TEST_CASE("hilbert order on the bottom row is coordinate order") {
    auto db = make_db(16, {{{9, 0}}, {{2, 0}}, {{15, 0}}, {{0, 0}}, {{2, 0}}});
    CHECK(hilbert_order(db, 0) == std::vector<UserIndex>{3, 1, 4, 0, 2});
    CHECK(coordinate_order(db, 0, Axis::x) == std::vector<UserIndex>{3, 1, 4, 0, 2});
}

TEST_CASE("hilbert order on an interior row is not coordinate order") {
    auto db = make_db(16, {{{0, 5}}, {{1, 5}}, {{2, 5}}, {{3, 5}}});
    CHECK(hilbert_order(db, 0) != std::vector<UserIndex>{0, 1, 2, 3});
    CHECK(coordinate_order(db, 0, Axis::x) == std::vector<UserIndex>{0, 1, 2, 3});
    auto column = make_db(16, {{{5, 3}}, {{5, 0}}, {{4, 9}}, {{5, 1}}});
    CHECK(coordinate_order(column, 0, Axis::y) == std::vector<UserIndex>{1, 3, 0, 2});
    CHECK(coordinate_order(column, 0, Axis::x) == std::vector<UserIndex>{2, 1, 3, 0});
    CHECK_THROWS_AS(coordinate_order(column, 1, Axis::x), Error);
}

TEST_CASE("candidate orders: hilbert per step, trajectory, then coordinate orders") {
    auto inst = small_instance(4, 6, 2);
    auto orders = candidate_orders(inst.db);
    REQUIRE(orders.size() == 7);
    CHECK(orders[0] == hilbert_order(inst.db, 0));
    CHECK(orders[1] == hilbert_order(inst.db, 1));
    CHECK(orders[2] == trajectory_order(inst.db));
    CHECK(orders[3] == coordinate_order(inst.db, 0, Axis::x));
    CHECK(orders[4] == coordinate_order(inst.db, 0, Axis::y));
    CHECK(orders[5] == coordinate_order(inst.db, 1, Axis::x));
    CHECK(orders[6] == coordinate_order(inst.db, 1, Axis::y));
}

TEST_CASE("1D with unequal group sizes: a nested grouping beats every consecutive split") {
    // {0,100} + {50,50,51}: 2*101 + 3*2 = 208; best consecutive {0,50,50}{51,100}: 3*51 + 2*50 = 253
    auto db = make_db(128, {{{0, 0}}, {{50, 0}}, {{50, 0}}, {{51, 0}}, {{100, 0}}});
    auto log = one_request_per_user_per_step(db);
    CHECK(total_cost(solve_exact(db, log, 2), db, log) == 208);
    CHECK(total_cost(solve_approx(db, log, 2), db, log) == 253);
}

TEST_CASE("solve_approx on the line instance and with n = k") {
    auto line = craft("line-4");
    auto policy = solve_approx(line.db, line.log, 2);
    CHECK(policy.groups == Partition{{0, 1}, {2, 3}});
    CHECK(total_cost(policy, line.db, line.log) == total_cost(solve_exact(line.db, line.log, 2), line.db, line.log));

    auto inst = small_instance(9, 4, 3, 16, 3.0);
    auto all = solve_approx(inst.db, inst.log, 4);
    CHECK(all.groups == Partition{{0, 1, 2, 3}});
    std::int64_t expected = 0;
    for (const auto& r : inst.log.requests()) expected += group_cost(all.groups.front(), inst.db, r.t);
    CHECK(total_cost(all, inst.db, inst.log) == expected);
    CHECK_THROWS_AS(solve_approx(inst.db, inst.log, 5), Error);
}

TEST_CASE("solve_approx on the intersection instance stays private and near optimal") {
    auto inst = craft("intersection-attack-4");
    auto policy = solve_approx(inst.db, inst.log, 2);
    auto report = audit(anonymize(inst.db, inst.log, policy, 1), inst.db, policy, 2);
    CHECK(report.min_anonymity >= 2);
    auto approx = total_cost(policy, inst.db, inst.log);
    auto exact = total_cost(solve_exact(inst.db, inst.log, 2), inst.db, inst.log);
    CHECK(approx <= 2 * exact);
    CHECK(approx == 20);
}

TEST_CASE("property: approx policies are valid, dominant over candidates and deterministic") {
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 10 + (trial * 7) % 60;
        int k = 2 + trial % 4;
        auto inst = small_instance(5000 + trial, n, 1 + trial % 4, 32);
        auto detailed = solve_approx_detailed(inst.db, inst.log, k);
        CHECK(policy_wellformed(detailed.policy, inst.db).ok());
        CHECK(detailed.cost == total_cost(detailed.policy, inst.db, inst.log));
        CHECK(detailed.candidate_costs.size() == 3 * inst.db.horizon() + 1);
        for (auto c : detailed.candidate_costs) CHECK(detailed.cost <= c);
        auto objective = Objective::from_log(inst.db, inst.log);
        auto orders = candidate_orders(inst.db);
        for (std::size_t c = 0; c < orders.size(); ++c) {
            CHECK(consecutive_dp(orders[c], k, objective).cost == detailed.candidate_costs[c]);
        }
        auto again = solve_approx_detailed(inst.db, inst.log, k, {0, 4});
        CHECK(again.policy == detailed.policy);
        CHECK(again.candidate == detailed.candidate);
        CHECK(audit(anonymize(inst.db, inst.log, detailed.policy, 3), inst.db, detailed.policy, k).passed());
    }
}

TEST_CASE("cover weight lets silent users shape the grouping") {
    auto inst = small_instance(17, 40, 3, 32, 0.3);
    auto plain = solve_approx_detailed(inst.db, inst.log, 3);
    auto covered = solve_approx_detailed(inst.db, inst.log, 3, {2, 1});
    CHECK(policy_wellformed(covered.policy, inst.db).ok());
    CHECK(covered.cost == total_cost(covered.policy, inst.db, inst.log));
    CHECK(plain.cost <= covered.cost);
    CHECK_THROWS_AS(solve_approx(inst.db, inst.log, 3, {-1, 1}), Error);
}
