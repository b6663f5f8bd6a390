#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpanon/model.hpp"

namespace tpanon {

enum class Mobility {
    random_waypoint,  // move toward a uniform waypoint, up to `speed` cells per axis per step
    uniform,          // independent uniform cell at every step
};

std::string to_string(Mobility m);
Mobility parse_mobility(const std::string& name);

struct GenParams {
    std::uint64_t seed = 42;
    std::size_t users = 100;
    World world{256, 5};
    Mobility model = Mobility::random_waypoint;
    double rate = 1.0;  // mean requests per user (Poisson)
    std::uint32_t speed = 4;
    unsigned threads = 1;
};

struct Instance {
    TrajectoryDB db;
    RequestLog log;
};

// Synthetic instance fully determined by the parameters (thread count
// excluded): every user draws from its own stream derived from (seed, index).
Instance generate(const GenParams& params);

// Hand-built regression instances: "intersection-attack-4", "line-4".
Instance craft(const std::string& name);
std::vector<std::string> scenario_names();

nlohmann::json manifest(const GenParams& params);

}  // namespace tpanon
