#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpanon/datagen.hpp"
#include "tpanon/model.hpp"

namespace tpanon {

enum class LowerBoundMethod {
    automatic,  // exact when a timestep has at most exact_lb_limit users
    exact,      // smallest rectangle holding the sender and k-1 others
    relaxed,    // Chebyshev radius of the (k-1)-th nearest other user, plus one
};

constexpr std::size_t exact_lb_limit = 64;

// Sum over requests of the smallest area any valid group region could have
// for that request: a rectangle covering the sender and at least k-1 other
// users at the request's timestep. The relaxed variant is weaker but
// near-linear: any such rectangle spans at least d+1 cells along one axis,
// d being the Chebyshev distance to the (k-1)-th nearest other user.
std::int64_t lower_bound(const TrajectoryDB& db, const RequestLog& log, int k,
                         LowerBoundMethod method = LowerBoundMethod::automatic);

// Per-user bound at one timestep, indexed by UserIndex.
std::vector<std::int64_t> snapshot_lower_bounds(const TrajectoryDB& db, Timestep t, int k,
                                                LowerBoundMethod method);

// Fixed-point ratio rounded half-even to 6 decimal places.
struct Ratio {
    std::int64_t micros = 0;

    double value() const { return static_cast<double>(micros) / 1e6; }
    std::string str() const;
    friend auto operator<=>(const Ratio&, const Ratio&) = default;
};

// approx_cost / exact_cost; (0, 0) is defined as 1.
Ratio compare(std::int64_t exact_cost, std::int64_t approx_cost);

struct BenchConfig {
    std::vector<std::size_t> users;
    std::vector<std::uint32_t> horizons{5};
    std::vector<int> ks{10};
    std::vector<std::string> solvers{"approx"};
    std::vector<std::uint64_t> seeds{7};
    std::uint32_t side = 1024;
    double rate = 1.0;
    Mobility model = Mobility::random_waypoint;
    std::uint32_t speed = 4;
    std::size_t repetitions = 1;
    std::size_t exact_cap = 15;
    unsigned threads = 1;
    bool audit = true;

    // Accepts scalar or array for n/l/k/seed(s)/solver(s).
    static BenchConfig from_json(const nlohmann::json& j);
};

struct BenchRow {
    std::size_t n = 0;
    std::uint32_t l = 0;
    int k = 0;
    std::string solver;
    std::uint64_t seed = 0;
    std::size_t repetition = 0;
    std::size_t requests = 0;
    std::optional<std::int64_t> cost;
    std::optional<std::int64_t> lb;
    std::optional<Ratio> ratio_lb;
    std::optional<Ratio> ratio_opt;
    double wall_ms = 0;
    double peak_rss_mb = 0;
    unsigned threads = 1;
    std::optional<bool> audit_pass;
    std::optional<std::string> error;

    nlohmann::json to_json() const;
};

std::vector<BenchRow> run_bench(const BenchConfig& config);

// Peak resident set size of this process in MiB; best effort.
double peak_rss_mb();

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

}  // namespace tpanon
