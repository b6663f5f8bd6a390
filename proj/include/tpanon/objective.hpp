#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tpanon/geometry.hpp"
#include "tpanon/model.hpp"

namespace tpanon {

// The solvers' objective: each user carries a number of requests per
// timestep, and a group costs sum over timesteps of (requests of its members
// at t) x (area of the group's bounding region at t). Built from a
// RequestLog this is exactly total_cost.
class Objective {
public:
    // Optional cover weight adds that many synthetic requests per user at
    // every timestep, so users without requests still influence grouping.
    static Objective from_log(const TrajectoryDB& db, const RequestLog& log,
                              std::int64_t cover_weight = 0);

    // One synthetic request per user at timestep t.
    static Objective single_step(const TrajectoryDB& db, Timestep t);

    const TrajectoryDB& db() const { return *db_; }

    std::int64_t group_cost(std::span<const UserIndex> group) const;

    // Incrementally grown group; add() and cost() are O(active timesteps).
    class Accumulator {
    public:
        explicit Accumulator(const Objective& objective);
        void reset();
        void add(UserIndex u);
        std::int64_t cost() const;

    private:
        const Objective* objective_;
        std::vector<CloakRegion> regions_;
        std::vector<std::int64_t> counts_;
        bool empty_ = true;
    };

private:
    struct Entry {
        std::uint32_t slot;  // index into active_
        std::int64_t count;
    };

    Objective(const TrajectoryDB& db, std::vector<Timestep> active,
              std::vector<std::vector<Entry>> per_user);

    const TrajectoryDB* db_;
    std::vector<Timestep> active_;      // timesteps carrying any weight
    std::vector<std::uint32_t> offsets_;  // CSR over users
    std::vector<Entry> entries_;
};

}  // namespace tpanon
