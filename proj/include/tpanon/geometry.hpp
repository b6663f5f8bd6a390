#pragma once

#include <cstdint>
#include <span>

#include "tpanon/model.hpp"

namespace tpanon {

// Order m of the Hilbert curve filling a 2^m x 2^m grid.
struct HilbertOrder {
    unsigned order = 0;

    static HilbertOrder of(const World& world) { return {world.order()}; }
    std::uint64_t cell_count() const { return std::uint64_t{1} << (2 * order); }
};

// Position of `p` along the Hilbert curve. The order-1 curve visits
// (0,0), (0,1), (1,1), (1,0); higher orders follow the usual recursive
// construction, so consecutive indices are always 4-adjacent cells.
std::uint64_t hilbert_index(GridPoint p, HilbertOrder order);

// Inverse of hilbert_index.
GridPoint hilbert_point(std::uint64_t index, HilbertOrder order);

CloakRegion bounding_region(std::span<const GridPoint> points);

inline std::int64_t region_area(const CloakRegion& r) {
    return std::int64_t{r.x_max - r.x_min + 1} * std::int64_t{r.y_max - r.y_min + 1};
}

// Smallest region covering `r` and `p`.
inline void extend(CloakRegion& r, GridPoint p) {
    if (p.x < r.x_min) r.x_min = p.x;
    if (p.x > r.x_max) r.x_max = p.x;
    if (p.y < r.y_min) r.y_min = p.y;
    if (p.y > r.y_max) r.y_max = p.y;
}

inline CloakRegion point_region(GridPoint p) { return {p.x, p.y, p.x, p.y}; }

// Bounding region of the group members' positions at t.
CloakRegion group_region(std::span<const UserIndex> group, const TrajectoryDB& db, Timestep t);

std::int64_t group_cost(std::span<const UserIndex> group, const TrajectoryDB& db, Timestep t);

// Sum over requests of the area published for that request: the bounding
// region of the sender's group at the request's timestep.
std::int64_t total_cost(const Policy& policy, const TrajectoryDB& db, const RequestLog& log);

}  // namespace tpanon
