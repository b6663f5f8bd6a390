#pragma once

#include <algorithm>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tpanon/datagen.hpp"
#include "tpanon/exact.hpp"
#include "tpanon/geometry.hpp"
#include "tpanon/model.hpp"

namespace tpanon::test {

// positions[u][t]; users are named "u0", "u1", ... (single digit keeps
// name order equal to index order for up to 10 users).
inline TrajectoryDB make_db(std::uint32_t side, const std::vector<std::vector<GridPoint>>& positions) {
    std::vector<Trajectory> trs;
    for (std::size_t u = 0; u < positions.size(); ++u) {
        trs.push_back({"u" + std::to_string(u), positions[u]});
    }
    return TrajectoryDB(World(side, static_cast<std::uint32_t>(positions.front().size())), trs);
}

// One request per (user, t) pair listed.
inline RequestLog make_log(const TrajectoryDB& db, const std::vector<std::pair<UserIndex, Timestep>>& sends) {
    std::vector<Request> reqs;
    for (auto [u, t] : sends) {
        reqs.push_back({"r" + std::to_string(reqs.size()), db.user_id(u), t, "tag"});
    }
    return RequestLog(db, reqs);
}

inline RequestLog one_request_per_user_per_step(const TrajectoryDB& db) {
    std::vector<std::pair<UserIndex, Timestep>> sends;
    for (Timestep t = 0; t < db.horizon(); ++t) {
        for (UserIndex u = 0; u < db.size(); ++u) sends.emplace_back(u, t);
    }
    return make_log(db, sends);
}

inline Instance small_instance(std::uint64_t seed, std::size_t n, std::uint32_t l, std::uint32_t side = 16,
                               double rate = 1.5) {
    GenParams p;
    p.seed = seed;
    p.users = n;
    p.world = World(side, l);
    p.rate = rate;
    p.speed = 2;
    return generate(p);
}

// Independent cost oracle: bounding box by explicit min/max per request.
inline std::int64_t naive_total_cost(const Policy& policy, const TrajectoryDB& db, const RequestLog& log) {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        auto u = log.sender(i);
        auto t = log[i].t;
        for (const auto& g : policy.groups) {
            if (std::find(g.begin(), g.end(), u) == g.end()) continue;
            int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
            for (auto v : g) {
                auto p = db.position(v, t);
                x0 = std::min(x0, p.x);
                y0 = std::min(y0, p.y);
                x1 = std::max(x1, p.x);
                y1 = std::max(y1, p.y);
            }
            total += std::int64_t(x1 - x0 + 1) * (y1 - y0 + 1);
        }
    }
    return total;
}

// Every set partition of {0..n-1} (restricted growth strings), no size
// filter. Independent of for_each_partition.
inline std::vector<Partition> all_set_partitions(std::size_t n) {
    std::vector<Partition> out;
    std::vector<std::size_t> label(n, 0);
    auto rec = [&](auto&& self, std::size_t i, std::size_t blocks) -> void {
        if (i == n) {
            Partition p(blocks);
            for (std::size_t u = 0; u < n; ++u) p[label[u]].push_back(static_cast<UserIndex>(u));
            out.push_back(std::move(p));
            return;
        }
        for (std::size_t b = 0; b <= blocks; ++b) {
            label[i] = b;
            self(self, i + 1, std::max(blocks, b + 1));
        }
    };
    if (n > 0) {
        label[0] = 0;
        rec(rec, 1, 1);
    }
    return out;
}

// Random partition of 0..n-1 into groups of size >= k.
inline Partition random_partition(std::size_t n, int k, std::mt19937_64& rng) {
    std::vector<UserIndex> users(n);
    for (std::size_t i = 0; i < n; ++i) users[i] = static_cast<UserIndex>(i);
    std::shuffle(users.begin(), users.end(), rng);
    Partition p;
    std::size_t i = 0;
    while (i < n) {
        std::size_t left = n - i;
        std::size_t size;
        if (left < 2 * static_cast<std::size_t>(k)) {
            size = left;
        } else {
            std::uniform_int_distribution<std::size_t> pick(k, left - k);
            size = pick(rng);
        }
        p.emplace_back(users.begin() + i, users.begin() + i + size);
        i += size;
    }
    return p;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("tpanon_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream(p, std::ios::binary) << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace tpanon::test
