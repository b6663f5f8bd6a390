#include "tpanon/exact.hpp"

#include <bit>
#include <limits>

#include "tpanon/error.hpp"
#include "tpanon/objective.hpp"

namespace tpanon {

namespace {

void check_k(std::size_t n, int k) {
    if (k < 2) throw Error("k must be at least 2");
    if (n < static_cast<std::size_t>(k)) {
        throw Error("k exceeds user count (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
}

// Lexicographic r-combinations of pool positions; visit gets the chosen
// positions.
template <class Visit>
void for_each_combination(std::size_t pool, std::size_t r, Visit&& visit) {
    if (r > pool) return;
    std::vector<std::size_t> idx(r);
    for (std::size_t i = 0; i < r; ++i) idx[i] = i;
    while (true) {
        visit(static_cast<const std::vector<std::size_t>&>(idx));
        // advance
        std::size_t i = r;
        while (i > 0 && idx[i - 1] == pool - r + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
}

void partition_rec(std::vector<UserIndex>& remaining, std::size_t k, std::size_t max_group,
                   Partition& current, const std::function<void(const Partition&)>& visit) {
    if (remaining.empty()) {
        visit(current);
        return;
    }
    const auto n = remaining.size();
    const auto first = remaining.front();
    for (std::size_t size = k; size <= std::min(max_group, n); ++size) {
        const auto rest = n - size;
        if (rest != 0 && rest < k) continue;
        for_each_combination(n - 1, size - 1, [&](const std::vector<std::size_t>& pick) {
            std::vector<UserIndex> group{first};
            std::vector<UserIndex> left;
            left.reserve(rest);
            std::size_t p = 0;
            for (std::size_t i = 1; i < n; ++i) {
                if (p < pick.size() && pick[p] == i - 1) {
                    group.push_back(remaining[i]);
                    ++p;
                } else {
                    left.push_back(remaining[i]);
                }
            }
            current.push_back(std::move(group));
            partition_rec(left, k, max_group, current, visit);
            current.pop_back();
        });
    }
}

}  // namespace

void for_each_partition(std::span<const UserIndex> users, int k, std::size_t max_group,
                        const std::function<void(const Partition&)>& visit) {
    check_k(users.size(), k);
    std::vector<UserIndex> remaining(users.begin(), users.end());
    Partition current;
    partition_rec(remaining, static_cast<std::size_t>(k), max_group, current, visit);
}

std::vector<Partition> enumerate_partitions(std::span<const UserIndex> users, int k) {
    std::vector<Partition> out;
    for_each_partition(users, k, 2 * static_cast<std::size_t>(std::max(k, 1)) - 1,
                       [&](const Partition& p) { out.push_back(p); });
    return out;
}

Policy solve_exact(const TrajectoryDB& db, const RequestLog& log, int k, ExactOptions options) {
    const auto n = db.size();
    check_k(n, k);
    if (n > options.cap) {
        throw Error("instance too large for exact solver: " + std::to_string(n) +
                    " users exceeds cap " + std::to_string(options.cap));
    }
    if (n > 24) throw Error("exact solver cap cannot exceed 24 users");

    const auto objective = Objective::from_log(db, log, options.cover_weight);
    const std::size_t kk = static_cast<std::size_t>(k);
    const std::size_t max_group = 2 * kk - 1;
    constexpr auto inf = std::numeric_limits<std::int64_t>::max();
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;

    std::vector<std::int64_t> group_cost(std::size_t{full} + 1, -1);
    auto cost_of = [&](std::uint32_t mask) {
        auto& c = group_cost[mask];
        if (c < 0) {
            std::vector<UserIndex> members;
            for (auto m = mask; m; m &= m - 1) members.push_back(static_cast<UserIndex>(std::countr_zero(m)));
            c = objective.group_cost(members);
        }
        return c;
    };

    // best[S]: optimal cost of partitioning S; choice[S]: group holding S's lowest member
    std::vector<std::int64_t> best(std::size_t{full} + 1, inf);
    std::vector<std::uint32_t> choice(std::size_t{full} + 1, 0);
    best[0] = 0;
    std::vector<std::uint32_t> bits;
    for (std::uint32_t s = 1; s <= full; ++s) {
        const auto count = static_cast<std::size_t>(std::popcount(s));
        if (count < kk) continue;
        const std::uint32_t low = s & (~s + 1);
        bits.clear();
        for (auto m = s & ~low; m; m &= m - 1) bits.push_back(m & (~m + 1));
        for (std::size_t size = kk; size <= std::min(max_group, count); ++size) {
            for_each_combination(bits.size(), size - 1, [&](const std::vector<std::size_t>& pick) {
                std::uint32_t g = low;
                for (auto i : pick) g |= bits[i];
                const auto rest = s & ~g;
                if (best[rest] == inf) return;
                const auto c = cost_of(g) + best[rest];
                if (c < best[s]) {
                    best[s] = c;
                    choice[s] = g;
                }
            });
        }
    }
    if (best[full] == inf) throw Error("no valid partition");  // unreachable for n >= k

    Policy policy{k, {}};
    for (auto s = full; s != 0;) {
        auto g = choice[s];
        std::vector<UserIndex> members;
        for (auto m = g; m; m &= m - 1) members.push_back(static_cast<UserIndex>(std::countr_zero(m)));
        policy.groups.push_back(std::move(members));
        s &= ~g;
    }
    policy.canonicalize();
    return policy;
}

}  // namespace tpanon
