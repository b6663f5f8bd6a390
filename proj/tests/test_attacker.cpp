#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tpanon/approx.hpp"
#include "tpanon/attacker.hpp"
#include "tpanon/error.hpp"
#include "tpanon/policy.hpp"

using namespace tpanon;
using namespace tpanon::test;

namespace {

// Naive attacker: for every user v, rerun the full publication pipeline with
// the pseudonym's requests reattributed to v and compare the regions.
std::vector<UserIndex> brute_force_candidates(const AnonymizedLog& anon, const std::string& pseudonym,
                                              const TrajectoryDB& db, std::span<const Policy> policies,
                                              bool per_timestep) {
    std::vector<const AnonRecord*> records;
    for (const auto& r : anon.records) {
        if (r.pseudonym == pseudonym) records.push_back(&r);
    }
    std::vector<UserIndex> out;
    for (UserIndex v = 0; v < db.size(); ++v) {
        std::vector<Request> reqs;
        for (auto* r : records) reqs.push_back({r->req_id, db.user_id(v), r->t, r->payload_tag});
        RequestLog counterfactual(db, reqs);
        auto replay = per_timestep ? anonymize_time_varying(db, counterfactual, policies, 0)
                                   : anonymize(db, counterfactual, policies.front(), 0);
        bool same = true;
        for (std::size_t i = 0; i < records.size(); ++i) same = same && replay.records[i].region == records[i]->region;
        if (same) out.push_back(v);
    }
    return out;
}

std::string pseudonym_of(const AnonymizedLog& anon, const RequestLog& log, UserIndex u) {
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (log.sender(i) == u) return anon.records[i].pseudonym;
    }
    return {};
}

}  // namespace

TEST_CASE("fixed policy: sender's whole group stays in the candidate set") {
    auto db = make_db(8, {{{0, 0}, {5, 5}}, {{1, 1}, {7, 7}}, {{4, 4}, {0, 7}}, {{6, 6}, {1, 6}}});
    auto log = make_log(db, {{0, 0}, {0, 1}});
    Policy policy{2, {{0, 1}, {2, 3}}};
    auto anon = anonymize(db, log, policy, 1);
    auto c = candidate_set(anon, anon.records[0].pseudonym, db, policy);
    CHECK(c == std::vector<UserIndex>{0, 1});
    CHECK_THROWS_AS(candidate_set(anon, "nobody", db, policy), Error);
}

TEST_CASE("intersection attack on per-snapshot grouping isolates the sender") {
    auto inst = craft("intersection-attack-4");
    auto steps = solve_per_step(inst.db, 2);
    // the trajectory-unaware solver reproduces the crafted grouping
    CHECK(steps[0].groups == Partition{{0, 1}, {2, 3}});
    CHECK(steps[1].groups == Partition{{0, 2}, {1, 3}});

    auto anon = anonymize_time_varying(inst.db, inst.log, steps, 3);
    auto a = pseudonym_of(anon, inst.log, 0);
    CHECK(candidate_set_time_varying(anon, a, inst.db, steps) == std::vector<UserIndex>{0});
    CHECK(brute_force_candidates(anon, a, inst.db, steps, true) == std::vector<UserIndex>{0});

    auto report = audit_time_varying(anon, inst.db, steps, 2);
    CHECK(report.min_anonymity == 1);
    CHECK_FALSE(report.passed());
    CHECK(std::find(report.violations.begin(), report.violations.end(), a) != report.violations.end());

    // a fixed policy from the trajectory-aware solver survives the same attacker
    auto fixed = solve_approx(inst.db, inst.log, 2);
    auto safe = anonymize(inst.db, inst.log, fixed, 3);
    CHECK(audit(safe, inst.db, fixed, 2).min_anonymity >= 2);
}

TEST_CASE("a region covering the whole world matches every user") {
    auto db = make_db(2, {{{0, 0}}, {{1, 1}}, {{0, 1}}, {{1, 0}}});
    auto log = make_log(db, {{2, 0}});
    Policy policy{2, {{0, 1}, {2, 3}}};
    auto anon = anonymize(db, log, policy, 0);
    CHECK(anon.records[0].region == CloakRegion{0, 0, 1, 1});
    CHECK(candidate_set(anon, anon.records[0].pseudonym, db, policy).size() == 4);
}

TEST_CASE("audit of policy-engine output with a well-formed policy never drops below k") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        auto inst = small_instance(700 + trial, 25, 1 + trial % 4);
        int k = 2 + trial % 3;
        Policy policy{k, random_partition(inst.db.size(), k, rng)};
        auto report = audit(anonymize(inst.db, inst.log, policy, trial), inst.db, policy, k);
        CHECK(report.passed());
        CHECK(report.min_anonymity >= static_cast<std::size_t>(k));
        for (const auto& [p, set] : report.per_pseudonym) CHECK(std::is_sorted(set.begin(), set.end()));
    }
}

TEST_CASE("empty log audits vacuously") {
    auto inst = craft("line-4");
    Policy policy{2, {{0, 1}, {2, 3}}};
    AnonymizedLog empty{inst.db.world(), {}};
    auto report = audit(empty, inst.db, policy, 2);
    CHECK(report.passed());
    CHECK(report.per_pseudonym.empty());
    CHECK(report.min_anonymity == inst.db.size());
}

TEST_CASE("time-varying audit with identical policies equals the fixed audit") {
    auto inst = small_instance(12, 20, 3);
    auto policy = solve_approx(inst.db, inst.log, 3);
    auto anon = anonymize(inst.db, inst.log, policy, 2);
    std::vector<Policy> same(inst.db.horizon(), policy);
    auto a = audit(anon, inst.db, policy, 3);
    auto b = audit_time_varying(anon, inst.db, same, 3);
    CHECK(a.per_pseudonym == b.per_pseudonym);
    CHECK(a.min_anonymity == b.min_anonymity);
    CHECK(a.violations == b.violations);
}

TEST_CASE("a single-record pseudonym keeps at least its group under time-varying policies") {
    auto inst = craft("intersection-attack-4");
    auto steps = solve_per_step(inst.db, 2);
    auto log = make_log(inst.db, {{3, 1}});
    auto anon = anonymize_time_varying(inst.db, log, steps, 0);
    auto report = audit_time_varying(anon, inst.db, steps, 2);
    CHECK(report.min_anonymity >= 2);
}

TEST_CASE("inconsistent inputs are rejected") {
    auto inst = craft("line-4");
    Policy policy{2, {{0, 1}, {2, 3}}};
    auto anon = anonymize(inst.db, inst.log, policy, 0);
    anon.records[1].t = 5;
    CHECK_THROWS_AS(audit(anon, inst.db, policy, 2), Error);
    CHECK_THROWS_AS(audit(anonymize(inst.db, inst.log, policy, 0), inst.db, Policy{2, {{0, 1}}}, 2), Error);
}

TEST_CASE("property: candidate_set equals the counterfactual brute-force attacker (n <= 8)") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 4 + trial % 5;
        auto inst = small_instance(900 + trial, n, 1 + trial % 3, 4, 1.2);
        if (inst.log.empty()) continue;
        int k = 2;
        if (trial % 2 == 0) {
            Policy policy{k, random_partition(n, k, rng)};
            auto anon = anonymize(inst.db, inst.log, policy, 1);
            std::vector<Policy> one{policy};
            for (const auto& [p, set] : audit(anon, inst.db, policy, k).per_pseudonym) {
                CHECK(set == brute_force_candidates(anon, p, inst.db, one, false));
            }
        } else {
            std::vector<Policy> steps;
            for (Timestep t = 0; t < inst.db.horizon(); ++t) steps.push_back({k, random_partition(n, k, rng)});
            auto anon = anonymize_time_varying(inst.db, inst.log, steps, 1);
            for (const auto& [p, set] : audit_time_varying(anon, inst.db, steps, k).per_pseudonym) {
                CHECK(set == brute_force_candidates(anon, p, inst.db, steps, true));
            }
        }
    }
}

TEST_CASE("property: adding a record never enlarges a candidate set") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        auto inst = small_instance(1300 + trial, 10, 3, 8, 2.0);
        if (inst.log.size() < 2) continue;
        std::vector<Policy> steps;
        for (Timestep t = 0; t < 3; ++t) steps.push_back({2, random_partition(10, 2, rng)});
        auto anon = anonymize_time_varying(inst.db, inst.log, steps, 1);
        auto target = anon.records.front().pseudonym;
        AnonymizedLog growing{anon.world, {}};
        std::size_t previous = inst.db.size() + 1;
        for (const auto& r : anon.records) {
            if (r.pseudonym != target) continue;
            growing.records.push_back(r);
            auto size = candidate_set_time_varying(growing, target, inst.db, steps).size();
            CHECK(size <= previous);
            previous = size;
        }
    }
}

TEST_CASE("policy-aware attacker re-deriving the per-step policies from public trajectories") {
    // The per-snapshot solver only reads trajectories, so an attacker who
    // knows the algorithm recomputes exactly the policies in force.
    auto inst = small_instance(55, 40, 4, 16, 2.0);
    auto published = anonymize_time_varying(inst.db, inst.log, solve_per_step(inst.db, 3), 4);
    auto rederived = solve_per_step(inst.db, 3);
    auto report = audit_time_varying(published, inst.db, rederived, 3);
    for (std::size_t i = 0; i < published.records.size(); ++i) {
        const auto& set = report.per_pseudonym.at(published.records[i].pseudonym);
        CHECK(std::binary_search(set.begin(), set.end(), inst.log.sender(i)));
    }
    MESSAGE("per-step scheme, n=40 l=4 k=3: min anonymity " << report.min_anonymity << ", "
                                                             << report.violations.size() << " violations");
}

TEST_CASE("audit report JSON layout") {
    auto inst = craft("intersection-attack-4");
    auto steps = solve_per_step(inst.db, 2);
    auto report = audit_time_varying(anonymize_time_varying(inst.db, inst.log, steps, 0), inst.db, steps, 2);
    auto j = audit_report_to_json(report);
    CHECK(j["k"] == 2);
    CHECK(j["min_anonymity"] == 1);
    CHECK(j["violations"].size() == 4);
    CHECK(j["per_pseudonym_sizes"].size() == 4);
}
