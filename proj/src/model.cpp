#include "tpanon/model.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "tpanon/csv.hpp"
#include "tpanon/error.hpp"

namespace tpanon {

World::World(std::uint32_t side, std::uint32_t horizon) : side_(side), horizon_(horizon) {
    if (side == 0 || !std::has_single_bit(side)) {
        throw Error("grid side " + std::to_string(side) + " is not a power of two");
    }
    order_ = static_cast<unsigned>(std::countr_zero(side));
    if (order_ > max_order) {
        throw Error("grid side " + std::to_string(side) + " exceeds 2^" + std::to_string(max_order));
    }
    if (horizon == 0) {
        throw Error("horizon must be at least 1");
    }
}

TrajectoryDB::TrajectoryDB(World world, std::vector<Trajectory> trajectories) : world_(world) {
    if (trajectories.empty()) {
        throw Error("trajectory database has no users");
    }
    std::vector<std::size_t> order(trajectories.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return trajectories[a].user_id < trajectories[b].user_id;
    });

    user_ids_.reserve(trajectories.size());
    positions_.reserve(trajectories.size() * world.horizon());
    index_.reserve(trajectories.size());
    for (std::size_t i : order) {
        auto& tr = trajectories[i];
        if (!user_ids_.empty() && user_ids_.back() == tr.user_id) {
            throw Error("duplicate user_id '" + tr.user_id + "'");
        }
        if (tr.positions.size() != world.horizon()) {
            throw Error("incomplete trajectory for user '" + tr.user_id + "': " +
                        std::to_string(tr.positions.size()) + " of " +
                        std::to_string(world.horizon()) + " timesteps");
        }
        for (auto p : tr.positions) {
            if (!world.contains(p)) {
                throw Error("position (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                            ") of user '" + tr.user_id + "' out of bounds");
            }
        }
        index_.emplace(tr.user_id, static_cast<UserIndex>(user_ids_.size()));
        user_ids_.push_back(std::move(tr.user_id));
        positions_.insert(positions_.end(), tr.positions.begin(), tr.positions.end());
    }
}

std::optional<UserIndex> TrajectoryDB::find(const std::string& user_id) const {
    auto it = index_.find(user_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

RequestLog::RequestLog(const TrajectoryDB& db, std::vector<Request> requests)
    : requests_(std::move(requests)) {
    senders_.reserve(requests_.size());
    std::unordered_set<std::string_view> seen;
    seen.reserve(requests_.size());
    for (const auto& r : requests_) {
        auto u = db.find(r.user_id);
        if (!u) {
            throw Error("unknown sender '" + r.user_id + "' in request '" + r.req_id + "'");
        }
        if (r.t >= db.horizon()) {
            throw Error("timestep out of range in request '" + r.req_id + "': t=" +
                        std::to_string(r.t) + ", horizon=" + std::to_string(db.horizon()));
        }
        if (!seen.insert(r.req_id).second) {
            throw Error("duplicate req_id '" + r.req_id + "'");
        }
        senders_.push_back(*u);
    }
}

void Policy::canonicalize() {
    for (auto& g : groups) std::sort(g.begin(), g.end());
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        if (a.empty() || b.empty()) return a.size() < b.size();
        return a.front() < b.front();
    });
}

std::vector<std::pair<std::string, GridPoint>> snapshot(const TrajectoryDB& db, Timestep t) {
    if (t >= db.horizon()) {
        throw Error("timestep " + std::to_string(t) + " out of range (horizon " +
                    std::to_string(db.horizon()) + ")");
    }
    std::vector<std::pair<std::string, GridPoint>> out;
    out.reserve(db.size());
    for (UserIndex u = 0; u < db.size(); ++u) {
        out.emplace_back(db.user_id(u), db.position(u, t));
    }
    return out;
}

TrajectoryDB load_trajectories(const std::filesystem::path& path, const World& world) {
    csv::Reader in(path, {"user_id", "t", "x", "y"});
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<Trajectory> trajectories;
    std::vector<std::vector<bool>> filled;
    std::vector<std::string> row;
    while (in.next(row)) {
        auto t = csv::parse_int(row[1], in, "t");
        auto x = csv::parse_int(row[2], in, "x");
        auto y = csv::parse_int(row[3], in, "y");
        if (t < 0 || t >= world.horizon()) {
            in.fail("timestep " + row[1] + " out of range (horizon " +
                    std::to_string(world.horizon()) + ")");
        }
        if (x < 0 || y < 0 || x >= world.side() || y >= world.side()) {
            in.fail("position (" + row[2] + "," + row[3] + ") out of bounds for side " +
                    std::to_string(world.side()));
        }
        auto [it, inserted] = slot.try_emplace(row[0], trajectories.size());
        if (inserted) {
            trajectories.push_back({row[0], std::vector<GridPoint>(world.horizon())});
            filled.emplace_back(world.horizon(), false);
        }
        auto i = it->second;
        if (filled[i][t]) {
            in.fail("duplicate (user, t) = (" + row[0] + ", " + row[1] + ")");
        }
        filled[i][t] = true;
        trajectories[i].positions[t] = {static_cast<std::int32_t>(x), static_cast<std::int32_t>(y)};
    }
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        auto missing = std::find(filled[i].begin(), filled[i].end(), false);
        if (missing != filled[i].end()) {
            throw Error(in.path() + ": incomplete trajectory for user '" + trajectories[i].user_id +
                        "': missing t=" + std::to_string(missing - filled[i].begin()));
        }
    }
    return TrajectoryDB(world, std::move(trajectories));
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

}  // namespace

void save_trajectories(const std::filesystem::path& path, const TrajectoryDB& db) {
    auto out = open_out(path);
    std::string buf = "user_id,t,x,y\n";
    for (UserIndex u = 0; u < db.size(); ++u) {
        for (Timestep t = 0; t < db.horizon(); ++t) {
            auto p = db.position(u, t);
            csv::append_field(buf, db.user_id(u));
            buf += ',';
            buf += std::to_string(t);
            buf += ',';
            buf += std::to_string(p.x);
            buf += ',';
            buf += std::to_string(p.y);
            buf += '\n';
        }
        if (buf.size() > (1 << 20)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
}

RequestLog load_requests(const std::filesystem::path& path, const TrajectoryDB& db) {
    csv::Reader in(path, {"req_id", "user_id", "t", "payload_tag"});
    std::vector<Request> requests;
    std::vector<std::string> row;
    while (in.next(row)) {
        auto t = csv::parse_int(row[2], in, "t");
        if (t < 0 || t >= db.horizon()) {
            in.fail("timestep out of range: t=" + row[2] + ", horizon=" +
                    std::to_string(db.horizon()));
        }
        requests.push_back({row[0], row[1], static_cast<Timestep>(t), row[3]});
    }
    return RequestLog(db, std::move(requests));
}

void save_requests(const std::filesystem::path& path, const RequestLog& log) {
    auto out = open_out(path);
    std::string buf = "req_id,user_id,t,payload_tag\n";
    for (const auto& r : log.requests()) {
        csv::append_field(buf, r.req_id);
        buf += ',';
        csv::append_field(buf, r.user_id);
        buf += ',';
        buf += std::to_string(r.t);
        buf += ',';
        csv::append_field(buf, r.payload_tag);
        buf += '\n';
        if (buf.size() > (1 << 20)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
}

AnonymizedLog load_anonymized(const std::filesystem::path& path, const World& world) {
    csv::Reader in(path, {"req_id", "pseudonym", "t", "x_min", "y_min", "x_max", "y_max",
                          "payload_tag"});
    AnonymizedLog anon{world, {}};
    std::vector<std::string> row;
    while (in.next(row)) {
        auto t = csv::parse_int(row[2], in, "t");
        if (t < 0 || t > static_cast<std::int64_t>(UINT32_MAX)) in.fail("timestep out of range");
        CloakRegion r{static_cast<std::int32_t>(csv::parse_int(row[3], in, "x_min")),
                      static_cast<std::int32_t>(csv::parse_int(row[4], in, "y_min")),
                      static_cast<std::int32_t>(csv::parse_int(row[5], in, "x_max")),
                      static_cast<std::int32_t>(csv::parse_int(row[6], in, "y_max"))};
        if (r.x_min > r.x_max || r.y_min > r.y_max || !world.contains({r.x_min, r.y_min}) ||
            !world.contains({r.x_max, r.y_max})) {
            in.fail("invalid cloaking region");
        }
        anon.records.push_back({row[0], row[1], static_cast<Timestep>(t), r, row[7]});
    }
    return anon;
}

void save_anonymized(const std::filesystem::path& path, const AnonymizedLog& anon) {
    auto out = open_out(path);
    std::string buf = "req_id,pseudonym,t,x_min,y_min,x_max,y_max,payload_tag\n";
    for (const auto& r : anon.records) {
        csv::append_field(buf, r.req_id);
        buf += ',';
        csv::append_field(buf, r.pseudonym);
        for (auto v : {std::int64_t{r.t}, std::int64_t{r.region.x_min}, std::int64_t{r.region.y_min},
                       std::int64_t{r.region.x_max}, std::int64_t{r.region.y_max}}) {
            buf += ',';
            buf += std::to_string(v);
        }
        buf += ',';
        csv::append_field(buf, r.payload_tag);
        buf += '\n';
        if (buf.size() > (1 << 20)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
}

World load_world_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        return World(j.at("side").get<std::uint32_t>(), j.at("horizon").get<std::uint32_t>());
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed manifest " + path.string() + ": " + e.what());
    }
}

}  // namespace tpanon
