#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tpanon {

// Dense index of a user inside a TrajectoryDB; users are indexed in
// ascending user_id order.
using UserIndex = std::uint32_t;
using Timestep = std::uint32_t;

struct GridPoint {
    std::int32_t x = 0;
    std::int32_t y = 0;

    friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

// Square grid of side 2^order cells observed over `horizon` timesteps.
class World {
public:
    // Largest supported grid is 2^16 cells per axis.
    static constexpr unsigned max_order = 16;

    World() = default;
    World(std::uint32_t side, std::uint32_t horizon);

    std::uint32_t side() const { return side_; }
    std::uint32_t horizon() const { return horizon_; }
    unsigned order() const { return order_; }
    std::uint64_t cell_count() const { return std::uint64_t{side_} * side_; }

    bool contains(GridPoint p) const {
        return p.x >= 0 && p.y >= 0 && static_cast<std::uint32_t>(p.x) < side_ &&
               static_cast<std::uint32_t>(p.y) < side_;
    }

    friend bool operator==(const World&, const World&) = default;

private:
    std::uint32_t side_ = 1;
    std::uint32_t horizon_ = 1;
    unsigned order_ = 0;
};

struct Trajectory {
    std::string user_id;
    std::vector<GridPoint> positions;
};

// Public trajectories of every user, immutable after construction.
class TrajectoryDB {
public:
    // Validates completeness, bounds and uniqueness; users are re-ordered by
    // user_id.
    TrajectoryDB(World world, std::vector<Trajectory> trajectories);

    const World& world() const { return world_; }
    std::size_t size() const { return user_ids_.size(); }
    Timestep horizon() const { return world_.horizon(); }

    const std::string& user_id(UserIndex u) const { return user_ids_[u]; }
    const std::vector<std::string>& user_ids() const { return user_ids_; }
    std::optional<UserIndex> find(const std::string& user_id) const;

    GridPoint position(UserIndex u, Timestep t) const {
        return positions_[std::size_t{u} * world_.horizon() + t];
    }
    std::span<const GridPoint> trajectory(UserIndex u) const {
        return {positions_.data() + std::size_t{u} * world_.horizon(), world_.horizon()};
    }

    friend bool operator==(const TrajectoryDB& a, const TrajectoryDB& b) {
        return a.world_ == b.world_ && a.user_ids_ == b.user_ids_ && a.positions_ == b.positions_;
    }

private:
    World world_;
    std::vector<std::string> user_ids_;
    std::vector<GridPoint> positions_;  // user-major, horizon entries per user
    std::unordered_map<std::string, UserIndex> index_;
};

struct Request {
    std::string req_id;
    std::string user_id;
    Timestep t = 0;
    std::string payload_tag;

    friend bool operator==(const Request&, const Request&) = default;
};

// Requests validated against one TrajectoryDB; senders are resolved to
// dense indices once at construction.
class RequestLog {
public:
    RequestLog() = default;
    RequestLog(const TrajectoryDB& db, std::vector<Request> requests);

    std::size_t size() const { return requests_.size(); }
    bool empty() const { return requests_.empty(); }
    const std::vector<Request>& requests() const { return requests_; }
    const Request& operator[](std::size_t i) const { return requests_[i]; }
    UserIndex sender(std::size_t i) const { return senders_[i]; }
    const std::vector<UserIndex>& senders() const { return senders_; }

private:
    std::vector<Request> requests_;
    std::vector<UserIndex> senders_;
};

// Inclusive rectangle of grid cells.
struct CloakRegion {
    std::int32_t x_min = 0;
    std::int32_t y_min = 0;
    std::int32_t x_max = 0;
    std::int32_t y_max = 0;

    friend bool operator==(const CloakRegion&, const CloakRegion&) = default;

    bool contains(GridPoint p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
};

// A partition of the users of one TrajectoryDB into anonymity groups.
// Well-formedness is checked separately (see policy.hpp) so that broken
// policies can be reported in full rather than rejected on first error.
struct Policy {
    int k = 2;
    std::vector<std::vector<UserIndex>> groups;

    // Sorts members inside each group and orders groups by smallest member.
    void canonicalize();

    friend bool operator==(const Policy&, const Policy&) = default;
};

struct AnonRecord {
    std::string req_id;
    std::string pseudonym;
    Timestep t = 0;
    CloakRegion region;
    std::string payload_tag;

    friend bool operator==(const AnonRecord&, const AnonRecord&) = default;
};

struct AnonymizedLog {
    World world;
    std::vector<AnonRecord> records;
};

std::vector<std::pair<std::string, GridPoint>> snapshot(const TrajectoryDB& db, Timestep t);

// File IO. Formats:
//   trajectories  user_id,t,x,y
//   requests      req_id,user_id,t,payload_tag
//   anonymized    req_id,pseudonym,t,x_min,y_min,x_max,y_max,payload_tag
//   manifest      {"side": .., "horizon": .., ...}
TrajectoryDB load_trajectories(const std::filesystem::path& path, const World& world);
void save_trajectories(const std::filesystem::path& path, const TrajectoryDB& db);

RequestLog load_requests(const std::filesystem::path& path, const TrajectoryDB& db);
void save_requests(const std::filesystem::path& path, const RequestLog& log);

AnonymizedLog load_anonymized(const std::filesystem::path& path, const World& world);
void save_anonymized(const std::filesystem::path& path, const AnonymizedLog& anon);

World load_world_manifest(const std::filesystem::path& path);

}  // namespace tpanon
