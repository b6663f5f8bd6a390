#include "tpanon/geometry.hpp"

#include <limits>
#include <utility>
#include <vector>

#include "tpanon/error.hpp"

namespace tpanon {

namespace {

void check_point(GridPoint p, HilbertOrder order) {
    auto side = std::int64_t{1} << order.order;
    if (p.x < 0 || p.y < 0 || p.x >= side || p.y >= side) {
        throw Error("point (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                    ") out of bounds for Hilbert order " + std::to_string(order.order));
    }
}

}  // namespace

std::uint64_t hilbert_index(GridPoint p, HilbertOrder order) {
    check_point(p, order);
    std::uint64_t x = static_cast<std::uint64_t>(p.x);
    std::uint64_t y = static_cast<std::uint64_t>(p.y);
    std::uint64_t d = 0;
    for (std::uint64_t s = (std::uint64_t{1} << order.order) >> 1; s > 0; s >>= 1) {
        std::uint64_t rx = (x & s) ? 1 : 0;
        std::uint64_t ry = (y & s) ? 1 : 0;
        d += s * s * ((3 * rx) ^ ry);
        // rotate the quadrant so the sub-curve starts at its origin
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - (x & (s - 1));
                y = s - 1 - (y & (s - 1));
            }
            std::swap(x, y);
        }
        x &= s - 1;
        y &= s - 1;
    }
    return d;
}

GridPoint hilbert_point(std::uint64_t index, HilbertOrder order) {
    if (index >= order.cell_count()) {
        throw Error("Hilbert index " + std::to_string(index) + " out of range");
    }
    std::uint64_t x = 0, y = 0, t = index;
    std::uint64_t side = std::uint64_t{1} << order.order;
    for (std::uint64_t s = 1; s < side; s <<= 1) {
        std::uint64_t rx = 1 & (t / 2);
        std::uint64_t ry = 1 & (t ^ rx);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
    return {static_cast<std::int32_t>(x), static_cast<std::int32_t>(y)};
}

CloakRegion bounding_region(std::span<const GridPoint> points) {
    if (points.empty()) throw Error("bounding_region of an empty point set");
    auto r = point_region(points.front());
    for (auto p : points.subspan(1)) extend(r, p);
    return r;
}

CloakRegion group_region(std::span<const UserIndex> group, const TrajectoryDB& db, Timestep t) {
    if (group.empty()) throw Error("empty group");
    auto r = point_region(db.position(group.front(), t));
    for (auto u : group.subspan(1)) extend(r, db.position(u, t));
    return r;
}

std::int64_t group_cost(std::span<const UserIndex> group, const TrajectoryDB& db, Timestep t) {
    return region_area(group_region(group, db, t));
}

std::int64_t total_cost(const Policy& policy, const TrajectoryDB& db, const RequestLog& log) {
    constexpr auto none = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> group_of(db.size(), none);
    for (std::uint32_t g = 0; g < policy.groups.size(); ++g) {
        for (auto u : policy.groups[g]) {
            if (u >= db.size()) throw Error("policy references unknown user index");
            group_of[u] = g;
        }
    }
    std::int64_t total = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        auto u = log.sender(i);
        if (group_of[u] == none) {
            throw Error("policy does not cover sender '" + db.user_id(u) + "'");
        }
        total += group_cost(policy.groups[group_of[u]], db, log[i].t);
    }
    return total;
}

}  // namespace tpanon
