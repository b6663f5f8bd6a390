#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpanon/model.hpp"

namespace tpanon {

struct PolicyValidation {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

// Checks that the groups exactly partition the users of `db` and that every
// group holds at least policy.k users. All violations are reported.
PolicyValidation policy_wellformed(const Policy& policy, const TrajectoryDB& db);

// Throws Error with the validation summary when the policy is ill-formed.
void require_wellformed(const Policy& policy, const TrajectoryDB& db);

// Per-user pseudonyms, indexed by UserIndex. Derived from a seeded shuffle of
// 0..n-1 handed out in user_id order, so they depend only on (seed, users).
std::vector<std::string> make_pseudonyms(const TrajectoryDB& db, std::uint64_t seed);

// Publishes every request with its sender's pseudonym and the bounding region
// of the sender's group at the request's timestep. Record order follows the
// input log.
AnonymizedLog anonymize(const TrajectoryDB& db, const RequestLog& log, const Policy& policy,
                        std::uint64_t seed, unsigned threads = 1);

// Same, but the group used at timestep t comes from policies[t]. This models
// trajectory-unaware schemes that regroup users at every snapshot.
AnonymizedLog anonymize_time_varying(const TrajectoryDB& db, const RequestLog& log,
                                     std::span<const Policy> policies, std::uint64_t seed,
                                     unsigned threads = 1);

// Policy file: {"k": K, "generalization": "bbox", "groups": [[ids..], ..]}.
// A per-timestep policy sequence uses "timesteps": [[[ids..], ..], ..]
// instead of "groups".
nlohmann::json policy_to_json(const Policy& policy, const TrajectoryDB& db);
nlohmann::json policy_sequence_to_json(std::span<const Policy> policies, const TrajectoryDB& db);

// Returns one policy for a fixed file, or one per timestep for a sequence.
std::vector<Policy> policies_from_json(const nlohmann::json& j, const TrajectoryDB& db);

void save_policy(const std::filesystem::path& path, const nlohmann::json& j);
std::vector<Policy> load_policies(const std::filesystem::path& path, const TrajectoryDB& db);

}  // namespace tpanon
