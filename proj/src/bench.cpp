#include "tpanon/bench.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <limits>
#include <queue>

#include "tpanon/approx.hpp"
#include "tpanon/attacker.hpp"
#include "tpanon/error.hpp"
#include "tpanon/exact.hpp"
#include "tpanon/geometry.hpp"
#include "tpanon/policy.hpp"

namespace tpanon {

namespace {

std::int64_t exact_user_bound(const std::vector<GridPoint>& pts, std::size_t u, std::size_t k) {
    const auto me = pts[u];
    std::vector<std::int32_t> xs;
    for (auto p : pts) xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto mid = std::lower_bound(xs.begin(), xs.end(), me.x);

    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::vector<std::int32_t> ys;
    // x-range [lo, hi] with lo <= me.x <= hi, both taken from occupied columns
    for (auto lo = mid + 1; lo != xs.begin();) {
        --lo;
        for (auto hi = mid; hi != xs.end(); ++hi) {
            const std::int64_t width = *hi - *lo + 1;
            if (width >= best) break;
            ys.clear();
            for (auto p : pts) {
                if (p.x >= *lo && p.x <= *hi) ys.push_back(p.y);
            }
            if (ys.size() < k) continue;
            std::sort(ys.begin(), ys.end());
            for (std::size_t i = 0; i + k <= ys.size(); ++i) {
                const std::int64_t height =
                    std::max(ys[i + k - 1], me.y) - std::min(ys[i], me.y) + 1;
                best = std::min(best, width * height);
            }
        }
    }
    return best;
}

// Chebyshev distance from each user to its (k-1)-th nearest other user, via
// ring search over a bucket grid.
std::vector<std::int64_t> relaxed_bounds(const std::vector<GridPoint>& pts, std::uint32_t side,
                                         std::size_t k) {
    const std::size_t n = pts.size();
    std::uint32_t buckets = 1;
    while (buckets < side && std::size_t{buckets} * buckets * 2 < n) buckets <<= 1;
    const std::int32_t bucket_size = static_cast<std::int32_t>(side / buckets);
    auto bucket_of = [&](GridPoint p) {
        return std::pair<std::int32_t, std::int32_t>{p.x / bucket_size, p.y / bucket_size};
    };

    std::vector<std::uint32_t> start(std::size_t{buckets} * buckets + 1, 0);
    for (auto p : pts) {
        auto [bx, by] = bucket_of(p);
        ++start[std::size_t(by) * buckets + bx + 1];
    }
    for (std::size_t i = 1; i < start.size(); ++i) start[i] += start[i - 1];
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    std::vector<std::uint32_t> members(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        auto [bx, by] = bucket_of(pts[i]);
        members[fill[std::size_t(by) * buckets + bx]++] = i;
    }

    const std::size_t need = k - 1;
    std::vector<std::int64_t> out(n, 0);
    std::priority_queue<std::int64_t> heap;  // the `need` smallest distances seen
    for (std::uint32_t u = 0; u < n; ++u) {
        heap = {};
        const auto me = pts[u];
        auto [bx, by] = bucket_of(me);
        for (std::int32_t ring = 0;; ++ring) {
            for (std::int32_t y = by - ring; y <= by + ring; ++y) {
                if (y < 0 || y >= static_cast<std::int32_t>(buckets)) continue;
                const bool edge_row = y == by - ring || y == by + ring;
                for (std::int32_t x = bx - ring; x <= bx + ring; x += edge_row ? 1 : 2 * ring) {
                    if (x >= 0 && x < static_cast<std::int32_t>(buckets)) {
                        auto b = std::size_t(y) * buckets + x;
                        for (auto i = start[b]; i < start[b + 1]; ++i) {
                            if (members[i] == u) continue;
                            auto p = pts[members[i]];
                            std::int64_t d = std::max(std::abs(p.x - me.x), std::abs(p.y - me.y));
                            if (heap.size() < need) {
                                heap.push(d);
                            } else if (d < heap.top()) {
                                heap.pop();
                                heap.push(d);
                            }
                        }
                    }
                    if (ring == 0) break;
                }
            }
            // unvisited users lie at least ring * bucket_size + 1 cells away
            const bool covered = ring >= static_cast<std::int32_t>(buckets);
            if (heap.size() == need &&
                (covered || heap.top() <= std::int64_t{ring} * bucket_size + 1)) {
                break;
            }
            if (covered) break;
        }
        out[u] = (heap.empty() ? 0 : heap.top()) + 1;
    }
    return out;
}

}  // namespace

std::vector<std::int64_t> snapshot_lower_bounds(const TrajectoryDB& db, Timestep t, int k,
                                                LowerBoundMethod method) {
    if (k < 2) throw Error("k must be at least 2");
    if (db.size() < static_cast<std::size_t>(k)) {
        throw Error("fewer than k users (k=" + std::to_string(k) + ", n=" + std::to_string(db.size()) + ")");
    }
    if (t >= db.horizon()) throw Error("timestep out of range");
    std::vector<GridPoint> pts(db.size());
    for (UserIndex u = 0; u < db.size(); ++u) pts[u] = db.position(u, t);
    if (method == LowerBoundMethod::automatic) {
        method = db.size() <= exact_lb_limit ? LowerBoundMethod::exact : LowerBoundMethod::relaxed;
    }
    if (method == LowerBoundMethod::relaxed) {
        return relaxed_bounds(pts, db.world().side(), static_cast<std::size_t>(k));
    }
    std::vector<std::int64_t> out(db.size());
    for (std::size_t u = 0; u < pts.size(); ++u) {
        out[u] = exact_user_bound(pts, u, static_cast<std::size_t>(k));
    }
    return out;
}

std::int64_t lower_bound(const TrajectoryDB& db, const RequestLog& log, int k,
                         LowerBoundMethod method) {
    if (k < 2) throw Error("k must be at least 2");
    if (db.size() < static_cast<std::size_t>(k)) {
        throw Error("fewer than k users (k=" + std::to_string(k) + ", n=" + std::to_string(db.size()) + ")");
    }
    std::vector<std::vector<std::int64_t>> per_step(db.horizon());
    std::int64_t total = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        auto t = log[i].t;
        if (per_step[t].empty()) per_step[t] = snapshot_lower_bounds(db, t, k, method);
        total += per_step[t][log.sender(i)];
    }
    return total;
}

std::string Ratio::str() const {
    auto whole = micros / 1000000;
    auto frac = std::to_string(micros % 1000000);
    return std::to_string(whole) + "." + std::string(6 - frac.size(), '0') + frac;
}

Ratio compare(std::int64_t exact_cost, std::int64_t approx_cost) {
    if (exact_cost == 0 && approx_cost == 0) return {1000000};
    if (exact_cost <= 0) {
        throw Error("cannot compare against exact cost " + std::to_string(exact_cost) +
                    " with approx cost " + std::to_string(approx_cost));
    }
    if (approx_cost < 0) throw Error("negative cost");
    const __int128 scaled = static_cast<__int128>(approx_cost) * 1000000;
    __int128 q = scaled / exact_cost;
    const __int128 r = scaled % exact_cost;
    if (2 * r > exact_cost || (2 * r == exact_cost && (q & 1))) ++q;
    return {static_cast<std::int64_t>(q)};
}

namespace {

template <class T>
std::vector<T> scalar_or_array(const nlohmann::json& j, const char* single, const char* plural,
                               std::vector<T> fallback) {
    const char* key = j.contains(plural) ? plural : (j.contains(single) ? single : nullptr);
    if (!key) return fallback;
    const auto& v = j.at(key);
    if (v.is_array()) {
        if (v.empty()) throw Error(std::string("bench config: '") + key + "' is empty");
        return v.get<std::vector<T>>();
    }
    return {v.get<T>()};
}

}  // namespace

BenchConfig BenchConfig::from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw Error("bench config must be a JSON object");
        BenchConfig c;
        c.users = scalar_or_array<std::size_t>(j, "n", "n", {});
        if (c.users.empty()) throw Error("bench config: 'n' is required");
        c.horizons = scalar_or_array<std::uint32_t>(j, "l", "l", c.horizons);
        c.ks = scalar_or_array<int>(j, "k", "k", c.ks);
        c.solvers = scalar_or_array<std::string>(j, "solver", "solvers", c.solvers);
        c.seeds = scalar_or_array<std::uint64_t>(j, "seed", "seeds", c.seeds);
        c.side = j.value("side", c.side);
        c.rate = j.value("rate", c.rate);
        c.model = parse_mobility(j.value("model", to_string(c.model)));
        c.speed = j.value("speed", c.speed);
        c.repetitions = j.value("repetitions", c.repetitions);
        c.exact_cap = j.value("exact_cap", c.exact_cap);
        c.threads = j.value("threads", c.threads);
        c.audit = j.value("audit", c.audit);
        for (const auto& s : c.solvers) {
            if (s != "approx" && s != "exact") throw Error("bench config: unknown solver '" + s + "'");
        }
        World(c.side, 1);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed bench config: ") + e.what());
    }
}

nlohmann::json BenchRow::to_json() const {
    auto opt = [](const auto& v) -> nlohmann::json {
        if (v) return *v;
        return nullptr;
    };
    auto ratio = [](const std::optional<Ratio>& r) -> nlohmann::json {
        if (r) return r->value();
        return nullptr;
    };
    nlohmann::json j{{"n", n},
                     {"l", l},
                     {"k", k},
                     {"solver", solver},
                     {"seed", seed},
                     {"rep", repetition},
                     {"requests", requests},
                     {"cost", opt(cost)},
                     {"lb", opt(lb)},
                     {"ratio_lb", ratio(ratio_lb)},
                     {"ratio_opt", ratio(ratio_opt)},
                     {"wall_ms", wall_ms},
                     {"peak_rss_mb", peak_rss_mb},
                     {"threads", threads},
                     {"audit_pass", opt(audit_pass)},
                     {"data", "synthetic"}};
    if (error) j["error"] = *error;
    return j;
}

double peak_rss_mb() {
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
    return static_cast<double>(usage.ru_maxrss) / 1024.0;  // ru_maxrss is KiB on Linux
}

std::string bench_csv_header() {
    return "n,l,k,solver,seed,rep,requests,cost,lb,ratio_lb,ratio_opt,wall_ms,peak_rss_mb,threads,"
           "audit_pass,error";
}

std::string bench_csv_row(const BenchRow& r) {
    auto num = [](const auto& v) { return v ? std::to_string(*v) : std::string(); };
    auto ratio = [](const std::optional<Ratio>& v) { return v ? v->str() : std::string(); };
    std::string err = r.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    char rss[32];
    std::snprintf(rss, sizeof rss, "%.1f", r.peak_rss_mb);
    return std::to_string(r.n) + "," + std::to_string(r.l) + "," + std::to_string(r.k) + "," +
           r.solver + "," + std::to_string(r.seed) + "," + std::to_string(r.repetition) + "," +
           std::to_string(r.requests) + "," + num(r.cost) + "," + num(r.lb) + "," +
           ratio(r.ratio_lb) + "," + ratio(r.ratio_opt) + "," + wall + "," + rss + "," +
           std::to_string(r.threads) + "," +
           (r.audit_pass ? (*r.audit_pass ? "true" : "false") : "") + "," + err;
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
    std::vector<BenchRow> rows;
    // exact first so approx rows can report cost / OPT
    auto solvers = config.solvers;
    std::stable_sort(solvers.begin(), solvers.end(),
                     [](const auto& a, const auto& b) { return a == "exact" && b != "exact"; });

    for (auto n : config.users) {
        for (auto l : config.horizons) {
            for (auto k : config.ks) {
                for (auto seed : config.seeds) {
                    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
                        BenchRow base;
                        base.n = n;
                        base.l = l;
                        base.k = k;
                        base.seed = seed;
                        base.repetition = rep;
                        base.threads = config.threads;

                        std::optional<Instance> inst;
                        std::optional<std::int64_t> lb;
                        std::string setup_error;
                        try {
                            GenParams gp;
                            gp.seed = seed;
                            gp.users = n;
                            gp.world = World(config.side, l);
                            gp.model = config.model;
                            gp.rate = config.rate;
                            gp.speed = config.speed;
                            gp.threads = config.threads;
                            inst.emplace(generate(gp));
                            base.requests = inst->log.size();
                            lb = lower_bound(inst->db, inst->log, k);
                        } catch (const Error& e) {
                            setup_error = e.what();
                        }

                        std::optional<std::int64_t> opt;
                        for (const auto& solver : solvers) {
                            BenchRow row = base;
                            row.solver = solver;
                            if (!inst || !lb) {
                                row.error = setup_error;
                                rows.push_back(row);
                                continue;
                            }
                            try {
                                auto started = std::chrono::steady_clock::now();
                                Policy policy;
                                if (solver == "exact") {
                                    policy = solve_exact(inst->db, inst->log, k, {config.exact_cap, 0});
                                } else {
                                    policy = solve_approx(inst->db, inst->log, k,
                                                          {0, config.threads});
                                }
                                row.wall_ms = std::chrono::duration<double, std::milli>(
                                                  std::chrono::steady_clock::now() - started)
                                                  .count();
                                row.cost = total_cost(policy, inst->db, inst->log);
                                row.lb = lb;
                                row.ratio_lb = compare(*lb, *row.cost);
                                if (solver == "exact") opt = row.cost;
                                if (opt) row.ratio_opt = compare(*opt, *row.cost);
                                if (config.audit) {
                                    auto anon = anonymize(inst->db, inst->log, policy, seed, config.threads);
                                    row.audit_pass = audit(anon, inst->db, policy, k, config.threads).passed();
                                }
                            } catch (const Error& e) {
                                row.error = e.what();
                            }
                            row.peak_rss_mb = peak_rss_mb();
                            rows.push_back(std::move(row));
                        }
                    }
                }
            }
        }
    }
    return rows;
}

}  // namespace tpanon
