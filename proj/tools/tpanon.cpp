// tpanon: generate, anonymize, audit and benchmark LBS request logs.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error, 3 audit violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tpanon/approx.hpp"
#include "tpanon/attacker.hpp"
#include "tpanon/bench.hpp"
#include "tpanon/datagen.hpp"
#include "tpanon/error.hpp"
#include "tpanon/exact.hpp"
#include "tpanon/geometry.hpp"
#include "tpanon/parallel.hpp"
#include "tpanon/policy.hpp"

namespace fs = std::filesystem;
using namespace tpanon;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;
constexpr int exit_violation = 3;

struct UsageError : Error {
    using Error::Error;
};

struct WorldFlags {
    std::optional<std::uint32_t> side;
    std::optional<std::uint32_t> horizon;
    std::string manifest;

    void add(CLI::App* cmd) {
        cmd->add_option("--side", side, "Grid side (power of two)");
        cmd->add_option("--horizon", horizon, "Number of timesteps");
        cmd->add_option("--manifest", manifest,
                        "JSON manifest with side/horizon (default: manifest.json next to --traj)");
    }

    World resolve(const fs::path& traj) const {
        if (side && horizon) return World(*side, *horizon);
        if (side || horizon) throw UsageError("--side and --horizon must be given together");
        fs::path m = manifest.empty() ? traj.parent_path() / "manifest.json" : fs::path(manifest);
        if (manifest.empty() && !fs::exists(m)) {
            throw UsageError("grid size unknown: pass --side/--horizon or --manifest");
        }
        return load_world_manifest(m);
    }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

unsigned resolve_threads(unsigned flag) { return flag > 0 ? flag : default_threads(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anonymize LBS request logs against trajectory- and policy-aware attackers"};
    app.require_subcommand(1);

    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: TPANON_THREADS or all cores)");

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic or crafted instance");
    GenParams gp;
    std::uint32_t gen_side = 256, gen_horizon = 5;
    std::string gen_model = "random-waypoint", scenario, gen_out;
    gen->add_option("--seed", gp.seed, "RNG seed");
    gen->add_option("--users", gp.users, "Number of users");
    gen->add_option("--side", gen_side, "Grid side (power of two)");
    gen->add_option("--horizon", gen_horizon, "Number of timesteps");
    gen->add_option("--rate", gp.rate, "Mean requests per user");
    gen->add_option("--speed", gp.speed, "Max cells per axis per timestep (random-waypoint)");
    gen->add_option("--model", gen_model, "Mobility model")
        ->check(CLI::IsMember({"random-waypoint", "uniform"}));
    gen->add_option("--scenario", scenario, "Crafted scenario instead of random data")
        ->check(CLI::IsMember(scenario_names()));
    gen->add_option("--out", gen_out, "Output directory")->required();

    // anonymize
    auto* anon_cmd = app.add_subcommand("anonymize", "Compute a policy and publish the log");
    std::string traj, req, out_dir, solver = "approx";
    int k = 0;
    std::uint64_t seed = 0;
    std::size_t cap = ExactOptions{}.cap;
    std::int64_t cover_weight = 0;
    WorldFlags anon_world;
    anon_cmd->add_option("--traj", traj, "Trajectory CSV")->required();
    anon_cmd->add_option("--req", req, "Request CSV")->required();
    anon_cmd->add_option("--k", k, "Anonymity parameter")->required()->check(CLI::Range(2, 1 << 30));
    anon_cmd->add_option("--solver", solver, "exact | approx | per-step")
        ->check(CLI::IsMember({"exact", "approx", "per-step"}));
    anon_cmd->add_option("--seed", seed, "Pseudonym seed");
    anon_cmd->add_option("--cap", cap, "Largest instance the exact solver accepts");
    anon_cmd->add_option("--cover-weight", cover_weight,
                         "Synthetic requests per user per timestep in the solver objective");
    anon_cmd->add_option("--out", out_dir, "Output directory")->required();
    anon_world.add(anon_cmd);

    // audit
    auto* audit_cmd = app.add_subcommand("audit", "Run the trajectory- and policy-aware attacker");
    std::string anon_path, policy_path, report_path;
    int audit_k = 0;
    WorldFlags audit_world;
    audit_cmd->add_option("--traj", traj, "Trajectory CSV")->required();
    audit_cmd->add_option("--anon", anon_path, "Anonymized log CSV")->required();
    audit_cmd->add_option("--policy", policy_path, "Policy JSON")->required();
    audit_cmd->add_option("--k", audit_k, "Required anonymity")->required()->check(CLI::Range(1, 1 << 30));
    audit_cmd->add_option("--report", report_path, "Write the report here instead of stdout");
    audit_world.add(audit_cmd);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark ladder");
    std::string config_path, bench_out;
    bench_cmd->add_option("--config", config_path, "Bench config JSON")->required();
    bench_cmd->add_option("--out", bench_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    const unsigned nthreads = resolve_threads(threads);
    try {
        if (*gen) {
            fs::create_directories(gen_out);
            nlohmann::json m;
            std::optional<Instance> inst;
            if (!scenario.empty()) {
                inst.emplace(craft(scenario));
                m = {{"side", inst->db.world().side()},
                     {"horizon", inst->db.world().horizon()},
                     {"scenario", scenario},
                     {"data", "synthetic"}};
            } else {
                gp.world = World(gen_side, gen_horizon);
                gp.model = parse_mobility(gen_model);
                gp.threads = nthreads;
                inst.emplace(generate(gp));
                m = manifest(gp);
            }
            save_trajectories(fs::path(gen_out) / "trajectories.csv", inst->db);
            save_requests(fs::path(gen_out) / "requests.csv", inst->log);
            write_json(fs::path(gen_out) / "manifest.json", m);
            std::cout << "wrote " << inst->db.size() << " users, " << inst->log.size()
                      << " requests to " << gen_out << '\n';
            return exit_ok;
        }

        if (*anon_cmd) {
            auto world = anon_world.resolve(traj);
            auto db = load_trajectories(traj, world);
            auto log = load_requests(req, db);
            if (static_cast<std::size_t>(k) > db.size()) {
                throw Error("k exceeds user count (k=" + std::to_string(k) + ", n=" +
                            std::to_string(db.size()) + ")");
            }
            fs::create_directories(out_dir);
            nlohmann::json summary{{"solver", solver}, {"k", k}, {"n", db.size()},
                                   {"requests", log.size()}, {"threads", nthreads}};
            if (solver == "per-step") {
                auto policies = solve_per_step(db, k);
                auto published = anonymize_time_varying(db, log, policies, seed, nthreads);
                write_json(fs::path(out_dir) / "policy.json", policy_sequence_to_json(policies, db));
                save_anonymized(fs::path(out_dir) / "anonymized.csv", published);
            } else {
                Policy policy = solver == "exact"
                                    ? solve_exact(db, log, k, {cap, cover_weight})
                                    : solve_approx(db, log, k, {cover_weight, nthreads});
                summary["cost"] = total_cost(policy, db, log);
                auto published = anonymize(db, log, policy, seed, nthreads);
                write_json(fs::path(out_dir) / "policy.json", policy_to_json(policy, db));
                save_anonymized(fs::path(out_dir) / "anonymized.csv", published);
            }
            std::cout << summary.dump() << '\n';
            return exit_ok;
        }

        if (*audit_cmd) {
            auto world = audit_world.resolve(traj);
            auto db = load_trajectories(traj, world);
            auto published = load_anonymized(anon_path, world);
            auto policies = load_policies(policy_path, db);
            auto report = policies.size() == 1
                              ? audit(published, db, policies.front(), audit_k, nthreads)
                              : audit_time_varying(published, db, policies, audit_k, nthreads);
            auto j = audit_report_to_json(report);
            if (report_path.empty()) {
                std::cout << j.dump(2) << '\n';
            } else {
                write_json(report_path, j);
                std::cout << "min_anonymity " << report.min_anonymity << ", "
                          << report.violations.size() << " violation(s)\n";
            }
            return report.passed() ? exit_ok : exit_violation;
        }

        if (*bench_cmd) {
            BenchConfig config;
            try {
                std::ifstream in(config_path);
                if (!in) throw Error("cannot open bench config " + config_path);
                nlohmann::json j;
                try {
                    in >> j;
                } catch (const nlohmann::json::exception& e) {
                    throw Error(std::string("malformed bench config: ") + e.what());
                }
                config = BenchConfig::from_json(j);
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << '\n';
                return exit_usage;
            }
            if (threads > 0) config.threads = threads;
            fs::create_directories(bench_out);
            std::ofstream jsonl(fs::path(bench_out) / "bench.jsonl", std::ios::trunc);
            std::ofstream csv(fs::path(bench_out) / "bench.csv", std::ios::trunc);
            if (!jsonl || !csv) throw Error("cannot write to " + bench_out);
            csv << bench_csv_header() << '\n';
            for (const auto& row : run_bench(config)) {
                jsonl << row.to_json().dump() << '\n';
                csv << bench_csv_row(row) << '\n';
                std::cout << row.to_json().dump() << '\n';
            }
            return exit_ok;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_usage;
}
