#include "tpanon/objective.hpp"

#include <algorithm>

#include "tpanon/error.hpp"

namespace tpanon {

Objective::Objective(const TrajectoryDB& db, std::vector<Timestep> active,
                     std::vector<std::vector<Entry>> per_user)
    : db_(&db), active_(std::move(active)) {
    offsets_.reserve(per_user.size() + 1);
    offsets_.push_back(0);
    for (auto& entries : per_user) {
        entries_.insert(entries_.end(), entries.begin(), entries.end());
        offsets_.push_back(static_cast<std::uint32_t>(entries_.size()));
    }
}

Objective Objective::from_log(const TrajectoryDB& db, const RequestLog& log,
                              std::int64_t cover_weight) {
    if (cover_weight < 0) throw Error("cover weight must be non-negative");
    const auto horizon = db.horizon();
    std::vector<bool> used(horizon, cover_weight > 0);
    for (const auto& r : log.requests()) used[r.t] = true;
    std::vector<Timestep> active;
    std::vector<std::uint32_t> slot(horizon, 0);
    for (Timestep t = 0; t < horizon; ++t) {
        if (used[t]) {
            slot[t] = static_cast<std::uint32_t>(active.size());
            active.push_back(t);
        }
    }

    // counts[u] as a sparse map slot -> count
    std::vector<std::vector<Entry>> per_user(db.size());
    if (cover_weight > 0) {
        for (auto& entries : per_user) {
            for (std::uint32_t s = 0; s < active.size(); ++s) entries.push_back({s, cover_weight});
        }
    }
    for (std::size_t i = 0; i < log.size(); ++i) {
        auto& entries = per_user[log.sender(i)];
        auto s = slot[log[i].t];
        auto it = std::lower_bound(entries.begin(), entries.end(), s,
                                   [](const Entry& e, std::uint32_t v) { return e.slot < v; });
        if (it != entries.end() && it->slot == s) {
            ++it->count;
        } else {
            entries.insert(it, {s, 1});
        }
    }
    return Objective(db, std::move(active), std::move(per_user));
}

Objective Objective::single_step(const TrajectoryDB& db, Timestep t) {
    if (t >= db.horizon()) {
        throw Error("timestep " + std::to_string(t) + " out of range (horizon " +
                    std::to_string(db.horizon()) + ")");
    }
    std::vector<std::vector<Entry>> per_user(db.size(), std::vector<Entry>{{0, 1}});
    return Objective(db, {t}, std::move(per_user));
}

std::int64_t Objective::group_cost(std::span<const UserIndex> group) const {
    Accumulator acc(*this);
    for (auto u : group) acc.add(u);
    return acc.cost();
}

Objective::Accumulator::Accumulator(const Objective& objective)
    : objective_(&objective),
      regions_(objective.active_.size()),
      counts_(objective.active_.size(), 0) {}

void Objective::Accumulator::reset() {
    std::fill(counts_.begin(), counts_.end(), 0);
    empty_ = true;
}

void Objective::Accumulator::add(UserIndex u) {
    const auto& obj = *objective_;
    const auto& db = *obj.db_;
    if (empty_) {
        for (std::size_t s = 0; s < obj.active_.size(); ++s) {
            regions_[s] = point_region(db.position(u, obj.active_[s]));
        }
        empty_ = false;
    } else {
        for (std::size_t s = 0; s < obj.active_.size(); ++s) {
            extend(regions_[s], db.position(u, obj.active_[s]));
        }
    }
    for (auto i = obj.offsets_[u]; i < obj.offsets_[u + 1]; ++i) {
        counts_[obj.entries_[i].slot] += obj.entries_[i].count;
    }
}

std::int64_t Objective::Accumulator::cost() const {
    std::int64_t total = 0;
    for (std::size_t s = 0; s < counts_.size(); ++s) {
        if (counts_[s] != 0) total += counts_[s] * region_area(regions_[s]);
    }
    return total;
}

}  // namespace tpanon
