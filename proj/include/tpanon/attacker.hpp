#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpanon/model.hpp"

namespace tpanon {

struct AuditReport {
    int k = 2;
    // Anonymity set (sorted user indices) of every pseudonym in the log.
    std::map<std::string, std::vector<UserIndex>> per_pseudonym;
    // Smallest anonymity set; equals the user count when the log is empty.
    std::size_t min_anonymity = 0;
    // Pseudonyms whose anonymity set is smaller than k, sorted.
    std::vector<std::string> violations;

    bool passed() const { return violations.empty(); }
};

// Users whose published output under the known policy matches every record
// of `pseudonym`: the intersection over its records of the users whose group
// region at the record's timestep equals the published region.
std::vector<UserIndex> candidate_set(const AnonymizedLog& anon, const std::string& pseudonym,
                                     const TrajectoryDB& db, const Policy& policy);

// As above with the policy in force at timestep t taken from policies[t].
std::vector<UserIndex> candidate_set_time_varying(const AnonymizedLog& anon,
                                                  const std::string& pseudonym,
                                                  const TrajectoryDB& db,
                                                  std::span<const Policy> policies);

AuditReport audit(const AnonymizedLog& anon, const TrajectoryDB& db, const Policy& policy, int k,
                  unsigned threads = 1);

AuditReport audit_time_varying(const AnonymizedLog& anon, const TrajectoryDB& db,
                               std::span<const Policy> policies, int k, unsigned threads = 1);

// {"k", "min_anonymity", "violations", "per_pseudonym_sizes"}
nlohmann::json audit_report_to_json(const AuditReport& report);

}  // namespace tpanon
