#include "tpanon/attacker.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "tpanon/error.hpp"
#include "tpanon/geometry.hpp"
#include "tpanon/parallel.hpp"
#include "tpanon/policy.hpp"

namespace tpanon {

namespace {

std::uint64_t region_key(const CloakRegion& r) {
    // coordinates are < 2^16 (World::max_order)
    return (std::uint64_t(std::uint16_t(r.x_min)) << 48) |
           (std::uint64_t(std::uint16_t(r.y_min)) << 32) |
           (std::uint64_t(std::uint16_t(r.x_max)) << 16) | std::uint64_t(std::uint16_t(r.y_max));
}

// The attacker's view of a public policy: for every timestep, which group
// each user belongs to and which region every group would publish.
class PolicyInversion {
public:
    PolicyInversion(const TrajectoryDB& db, std::span<const Policy> policies, bool per_timestep)
        : db_(db), horizon_(db.horizon()) {
        tables_.reserve(policies.size());
        for (const auto& p : policies) {
            require_wellformed(p, db);
            Table table;
            table.policy = &p;
            table.group_of.resize(db.size());
            for (std::uint32_t g = 0; g < p.groups.size(); ++g) {
                for (auto u : p.groups[g]) table.group_of[u] = g;
            }
            tables_.push_back(std::move(table));
        }
        step_.resize(horizon_);
        for (Timestep t = 0; t < horizon_; ++t) {
            auto& step = step_[t];
            step.table = per_timestep ? &tables_[t] : &tables_[0];
            const auto& groups = step.table->policy->groups;
            step.regions.resize(groups.size());
            for (std::uint32_t g = 0; g < groups.size(); ++g) {
                step.regions[g] = group_region(groups[g], db, t);
                step.by_region[region_key(step.regions[g])].push_back(g);
            }
        }
    }

    void check(const AnonRecord& r) const {
        if (r.t >= horizon_) {
            throw Error("inconsistent inputs: record '" + r.req_id + "' at timestep " +
                        std::to_string(r.t) + " outside horizon " + std::to_string(horizon_));
        }
    }

    // Users consistent with a single record.
    std::vector<UserIndex> matching(const AnonRecord& r) const {
        const auto& step = step_[r.t];
        std::vector<UserIndex> out;
        auto it = step.by_region.find(region_key(r.region));
        if (it == step.by_region.end()) return out;
        for (auto g : it->second) {
            const auto& members = step.table->policy->groups[g];
            out.insert(out.end(), members.begin(), members.end());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    bool consistent(UserIndex u, const AnonRecord& r) const {
        const auto& step = step_[r.t];
        return step.regions[step.table->group_of[u]] == r.region;
    }

    std::vector<UserIndex> candidates(std::span<const AnonRecord* const> records) const {
        for (auto* r : records) check(*r);
        if (records.empty()) return {};
        auto out = matching(*records.front());
        for (auto* r : records.subspan(1)) {
            std::erase_if(out, [&](UserIndex u) { return !consistent(u, *r); });
            if (out.empty()) break;
        }
        return out;
    }

    std::size_t users() const { return db_.size(); }

private:
    struct Table {
        const Policy* policy = nullptr;
        std::vector<std::uint32_t> group_of;
    };
    struct Step {
        const Table* table = nullptr;
        std::vector<CloakRegion> regions;
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_region;
    };

    const TrajectoryDB& db_;
    Timestep horizon_;
    std::vector<Table> tables_;
    std::vector<Step> step_;
};

std::vector<const AnonRecord*> records_of(const AnonymizedLog& anon, const std::string& pseudonym) {
    std::vector<const AnonRecord*> out;
    for (const auto& r : anon.records) {
        if (r.pseudonym == pseudonym) out.push_back(&r);
    }
    if (out.empty()) throw Error("unknown pseudonym '" + pseudonym + "'");
    return out;
}

AuditReport run_audit(const AnonymizedLog& anon, const PolicyInversion& inv, int k,
                      unsigned threads) {
    std::unordered_map<std::string_view, std::size_t> slot;
    std::vector<std::string_view> names;
    std::vector<std::vector<const AnonRecord*>> grouped;
    for (const auto& r : anon.records) {
        inv.check(r);
        auto [it, inserted] = slot.try_emplace(r.pseudonym, names.size());
        if (inserted) {
            names.push_back(r.pseudonym);
            grouped.emplace_back();
        }
        grouped[it->second].push_back(&r);
    }

    std::vector<std::vector<UserIndex>> sets(names.size());
    parallel_for(names.size(), threads, [&](std::size_t i) { sets[i] = inv.candidates(grouped[i]); });

    AuditReport report;
    report.k = k;
    report.min_anonymity = inv.users();
    for (std::size_t i = 0; i < names.size(); ++i) {
        report.min_anonymity = std::min(report.min_anonymity, sets[i].size());
        if (sets[i].size() < static_cast<std::size_t>(std::max(k, 0))) {
            report.violations.emplace_back(names[i]);
        }
        report.per_pseudonym.emplace(std::string(names[i]), std::move(sets[i]));
    }
    std::sort(report.violations.begin(), report.violations.end());
    return report;
}

}  // namespace

std::vector<UserIndex> candidate_set(const AnonymizedLog& anon, const std::string& pseudonym,
                                     const TrajectoryDB& db, const Policy& policy) {
    auto records = records_of(anon, pseudonym);
    PolicyInversion inv(db, std::span<const Policy>(&policy, 1), false);
    return inv.candidates(records);
}

std::vector<UserIndex> candidate_set_time_varying(const AnonymizedLog& anon,
                                                  const std::string& pseudonym,
                                                  const TrajectoryDB& db,
                                                  std::span<const Policy> policies) {
    if (policies.size() != db.horizon()) {
        throw Error("expected one policy per timestep");
    }
    auto records = records_of(anon, pseudonym);
    PolicyInversion inv(db, policies, true);
    return inv.candidates(records);
}

AuditReport audit(const AnonymizedLog& anon, const TrajectoryDB& db, const Policy& policy, int k,
                  unsigned threads) {
    PolicyInversion inv(db, std::span<const Policy>(&policy, 1), false);
    return run_audit(anon, inv, k, threads);
}

AuditReport audit_time_varying(const AnonymizedLog& anon, const TrajectoryDB& db,
                               std::span<const Policy> policies, int k, unsigned threads) {
    if (policies.size() != db.horizon()) {
        throw Error("expected one policy per timestep (" + std::to_string(db.horizon()) +
                    "), got " + std::to_string(policies.size()));
    }
    PolicyInversion inv(db, policies, true);
    return run_audit(anon, inv, k, threads);
}

nlohmann::json audit_report_to_json(const AuditReport& report) {
    auto sizes = nlohmann::json::object();
    for (const auto& [p, set] : report.per_pseudonym) sizes[p] = set.size();
    return {{"k", report.k},
            {"min_anonymity", report.min_anonymity},
            {"violations", report.violations},
            {"per_pseudonym_sizes", std::move(sizes)}};
}

}  // namespace tpanon
