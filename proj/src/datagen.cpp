#include "tpanon/datagen.hpp"

#include <algorithm>
#include <random>
#include <tuple>

#include "tpanon/error.hpp"
#include "tpanon/parallel.hpp"

namespace tpanon {

std::string to_string(Mobility m) {
    switch (m) {
        case Mobility::random_waypoint: return "random-waypoint";
        case Mobility::uniform: return "uniform";
    }
    return "unknown";
}

Mobility parse_mobility(const std::string& name) {
    if (name == "random-waypoint") return Mobility::random_waypoint;
    if (name == "uniform") return Mobility::uniform;
    throw Error("unknown mobility model '" + name + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::string padded(char prefix, std::size_t value, std::size_t width) {
    auto digits = std::to_string(value);
    return prefix + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

std::int32_t step_toward(std::int32_t from, std::int32_t to, std::int32_t speed) {
    return from + std::clamp(to - from, -speed, speed);
}

struct UserDraw {
    std::vector<GridPoint> positions;
    std::vector<std::pair<Timestep, std::uint32_t>> requests;  // (t, payload id)
};

UserDraw draw_user(const GenParams& p, std::size_t user) {
    std::mt19937_64 rng(splitmix64(p.seed ^ splitmix64(user + 1)));
    const auto side = static_cast<std::int32_t>(p.world.side());
    std::uniform_int_distribution<std::int32_t> coord(0, side - 1);
    auto cell = [&] {
        std::int32_t x = coord(rng);
        std::int32_t y = coord(rng);
        return GridPoint{x, y};
    };

    UserDraw out;
    out.positions.reserve(p.world.horizon());
    if (p.model == Mobility::uniform) {
        for (Timestep t = 0; t < p.world.horizon(); ++t) out.positions.push_back(cell());
    } else {
        const auto speed = static_cast<std::int32_t>(p.speed);
        GridPoint pos = cell();
        GridPoint waypoint = cell();
        out.positions.push_back(pos);
        for (Timestep t = 1; t < p.world.horizon(); ++t) {
            pos = {step_toward(pos.x, waypoint.x, speed), step_toward(pos.y, waypoint.y, speed)};
            if (pos == waypoint) waypoint = cell();
            out.positions.push_back(pos);
        }
    }

    if (p.rate > 0) {
        std::poisson_distribution<std::uint32_t> count(p.rate);
        std::uniform_int_distribution<Timestep> when(0, p.world.horizon() - 1);
        std::uniform_int_distribution<std::uint32_t> payload(0, 15);
        auto c = count(rng);
        for (std::uint32_t i = 0; i < c; ++i) {
            auto t = when(rng);
            out.requests.emplace_back(t, payload(rng));
        }
    }
    return out;
}

}  // namespace

Instance generate(const GenParams& p) {
    if (p.users == 0) throw Error("user count must be at least 1");
    if (!(p.rate >= 0)) throw Error("request rate must be non-negative");
    if (p.model == Mobility::random_waypoint && p.speed == 0) throw Error("speed must be at least 1");
    World world(p.world.side(), p.world.horizon());  // revalidate

    std::vector<UserDraw> draws(p.users);
    parallel_for(p.users, p.threads, [&](std::size_t u) { draws[u] = draw_user(p, u); });

    const auto width = std::to_string(p.users - 1).size();
    std::vector<Trajectory> trajectories(p.users);
    // (t, user, sequence within user, payload)
    std::vector<std::tuple<Timestep, std::size_t, std::size_t, std::uint32_t>> pending;
    for (std::size_t u = 0; u < p.users; ++u) {
        trajectories[u].user_id = padded('u', u, width);
        trajectories[u].positions = std::move(draws[u].positions);
        for (std::size_t i = 0; i < draws[u].requests.size(); ++i) {
            auto [t, payload] = draws[u].requests[i];
            pending.emplace_back(t, u, i, payload);
        }
    }
    std::sort(pending.begin(), pending.end());

    const auto req_width = std::to_string(pending.empty() ? 0 : pending.size() - 1).size();
    std::vector<Request> requests;
    requests.reserve(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
        auto [t, u, seq, payload] = pending[i];
        requests.push_back({padded('r', i, req_width), trajectories[u].user_id, t,
                            "svc" + std::to_string(payload)});
    }
    TrajectoryDB db(world, std::move(trajectories));
    RequestLog log(db, std::move(requests));
    return {std::move(db), std::move(log)};
}

namespace {

Instance line_instance(std::uint32_t side, const std::vector<std::vector<std::int32_t>>& xs_per_step,
                       const std::vector<std::string>& names) {
    const auto horizon = static_cast<std::uint32_t>(xs_per_step.size());
    World world(side, horizon);
    std::vector<Trajectory> trajectories;
    for (std::size_t u = 0; u < names.size(); ++u) {
        Trajectory tr{names[u], {}};
        for (const auto& xs : xs_per_step) tr.positions.push_back({xs[u], 0});
        trajectories.push_back(std::move(tr));
    }
    std::vector<Request> requests;
    for (Timestep t = 0; t < horizon; ++t) {
        for (const auto& name : names) {
            requests.push_back({"r" + std::to_string(requests.size()), name, t, "q"});
        }
    }
    TrajectoryDB db(world, std::move(trajectories));
    RequestLog log(db, std::move(requests));
    return {std::move(db), std::move(log)};
}

}  // namespace

Instance craft(const std::string& name) {
    if (name == "intersection-attack-4") {
        // b and c swap places between the two snapshots, so per-snapshot
        // grouping pairs a with b first and with c second.
        return line_instance(16, {{0, 1, 2, 3}, {0, 2, 1, 3}}, {"a", "b", "c", "d"});
    }
    if (name == "line-4") {
        return line_instance(16, {{0, 1, 10, 11}}, {"a", "b", "c", "d"});
    }
    throw Error("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() { return {"intersection-attack-4", "line-4"}; }

nlohmann::json manifest(const GenParams& p) {
    return {{"side", p.world.side()},
            {"horizon", p.world.horizon()},
            {"seed", p.seed},
            {"users", p.users},
            {"model", to_string(p.model)},
            {"rate", p.rate},
            {"speed", p.speed},
            {"data", "synthetic"}};
}

}  // namespace tpanon
