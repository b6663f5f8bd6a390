#include "tpanon/policy.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "tpanon/error.hpp"
#include "tpanon/geometry.hpp"
#include "tpanon/parallel.hpp"

namespace tpanon {

std::string PolicyValidation::summary() const {
    std::string s = "ill-formed policy";
    for (std::size_t i = 0; i < violations.size(); ++i) {
        s += i == 0 ? ": " : "; ";
        s += violations[i];
    }
    return s;
}

PolicyValidation policy_wellformed(const Policy& policy, const TrajectoryDB& db) {
    PolicyValidation result;
    if (policy.k < 2) {
        result.violations.push_back("k = " + std::to_string(policy.k) + " < 2");
    }
    std::vector<std::uint32_t> seen(db.size(), 0);
    for (std::size_t g = 0; g < policy.groups.size(); ++g) {
        const auto& group = policy.groups[g];
        if (group.size() < static_cast<std::size_t>(std::max(policy.k, 0))) {
            result.violations.push_back("group " + std::to_string(g) + " size " +
                                        std::to_string(group.size()) + " < k");
        }
        for (auto u : group) {
            if (u >= db.size()) {
                result.violations.push_back("unknown user index " + std::to_string(u));
                continue;
            }
            if (++seen[u] == 2) {
                result.violations.push_back("user " + db.user_id(u) + " duplicated");
            }
        }
    }
    for (UserIndex u = 0; u < db.size(); ++u) {
        if (seen[u] == 0) result.violations.push_back("missing user " + db.user_id(u));
    }
    return result;
}

void require_wellformed(const Policy& policy, const TrajectoryDB& db) {
    auto v = policy_wellformed(policy, db);
    if (!v.ok()) throw Error(v.summary());
}

std::vector<std::string> make_pseudonyms(const TrajectoryDB& db, std::uint64_t seed) {
    std::vector<std::uint64_t> tokens(db.size());
    std::iota(tokens.begin(), tokens.end(), std::uint64_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    auto width = std::to_string(db.size() > 0 ? db.size() - 1 : 0).size();
    std::vector<std::string> out(db.size());
    for (std::size_t u = 0; u < db.size(); ++u) {
        auto digits = std::to_string(tokens[u]);
        out[u] = "p" + std::string(width - digits.size(), '0') + digits;
    }
    return out;
}

namespace {

// group_of[t][u]; the same table is shared by every timestep for fixed policies.
std::vector<std::vector<std::uint32_t>> group_tables(const TrajectoryDB& db,
                                                     std::span<const Policy> policies) {
    std::vector<std::vector<std::uint32_t>> tables;
    tables.reserve(policies.size());
    for (const auto& p : policies) {
        require_wellformed(p, db);
        std::vector<std::uint32_t> group_of(db.size());
        for (std::uint32_t g = 0; g < p.groups.size(); ++g) {
            for (auto u : p.groups[g]) group_of[u] = g;
        }
        tables.push_back(std::move(group_of));
    }
    return tables;
}

AnonymizedLog publish(const TrajectoryDB& db, const RequestLog& log,
                      std::span<const Policy> policies, bool per_timestep, std::uint64_t seed,
                      unsigned threads) {
    auto tables = group_tables(db, policies);
    auto pseudonyms = make_pseudonyms(db, seed);
    AnonymizedLog anon{db.world(), std::vector<AnonRecord>(log.size())};
    parallel_for(log.size(), threads, [&](std::size_t i) {
        const auto& req = log[i];
        auto u = log.sender(i);
        std::size_t which = per_timestep ? req.t : 0;
        const auto& group = policies[which].groups[tables[which][u]];
        anon.records[i] = {req.req_id, pseudonyms[u], req.t, group_region(group, db, req.t),
                           req.payload_tag};
    });
    return anon;
}

}  // namespace

AnonymizedLog anonymize(const TrajectoryDB& db, const RequestLog& log, const Policy& policy,
                        std::uint64_t seed, unsigned threads) {
    return publish(db, log, std::span<const Policy>(&policy, 1), false, seed, threads);
}

AnonymizedLog anonymize_time_varying(const TrajectoryDB& db, const RequestLog& log,
                                     std::span<const Policy> policies, std::uint64_t seed,
                                     unsigned threads) {
    if (policies.size() != db.horizon()) {
        throw Error("expected one policy per timestep (" + std::to_string(db.horizon()) +
                    "), got " + std::to_string(policies.size()));
    }
    return publish(db, log, policies, true, seed, threads);
}

namespace {

nlohmann::json groups_to_json(const Policy& policy, const TrajectoryDB& db) {
    auto groups = nlohmann::json::array();
    for (const auto& g : policy.groups) {
        auto ids = nlohmann::json::array();
        for (auto u : g) ids.push_back(db.user_id(u));
        groups.push_back(std::move(ids));
    }
    return groups;
}

std::vector<std::vector<UserIndex>> groups_from_json(const nlohmann::json& j,
                                                     const TrajectoryDB& db) {
    std::vector<std::vector<UserIndex>> groups;
    for (const auto& g : j) {
        std::vector<UserIndex> members;
        for (const auto& id : g) {
            auto name = id.get<std::string>();
            auto u = db.find(name);
            if (!u) throw Error("policy references unknown user '" + name + "'");
            members.push_back(*u);
        }
        groups.push_back(std::move(members));
    }
    return groups;
}

}  // namespace

nlohmann::json policy_to_json(const Policy& policy, const TrajectoryDB& db) {
    return {{"k", policy.k}, {"generalization", "bbox"}, {"groups", groups_to_json(policy, db)}};
}

nlohmann::json policy_sequence_to_json(std::span<const Policy> policies, const TrajectoryDB& db) {
    if (policies.empty()) throw Error("empty policy sequence");
    auto steps = nlohmann::json::array();
    for (const auto& p : policies) steps.push_back(groups_to_json(p, db));
    return {{"k", policies.front().k}, {"generalization", "bbox"}, {"timesteps", std::move(steps)}};
}

std::vector<Policy> policies_from_json(const nlohmann::json& j, const TrajectoryDB& db) {
    try {
        auto gen = j.value("generalization", std::string("bbox"));
        if (gen != "bbox") throw Error("unsupported generalization '" + gen + "'");
        int k = j.at("k").get<int>();
        std::vector<Policy> out;
        if (j.contains("timesteps")) {
            for (const auto& step : j.at("timesteps")) out.push_back({k, groups_from_json(step, db)});
            if (out.size() != db.horizon()) {
                throw Error("policy sequence has " + std::to_string(out.size()) +
                            " timesteps, horizon is " + std::to_string(db.horizon()));
            }
        } else {
            out.push_back({k, groups_from_json(j.at("groups"), db)});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed policy: ") + e.what());
    }
}

void save_policy(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<Policy> load_policies(const std::filesystem::path& path, const TrajectoryDB& db) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open policy " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed policy " + path.string() + ": " + e.what());
    }
    return policies_from_json(j, db);
}

}  // namespace tpanon
