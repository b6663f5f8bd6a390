#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tpanon/model.hpp"

namespace tpanon {

using Partition = std::vector<std::vector<UserIndex>>;

// Visits every partition of `users` into groups with sizes in
// [k, max_group], each exactly once, in canonical order: the group holding
// the smallest remaining user is chosen first, by ascending size and then
// lexicographically by members. Groups come out sorted by smallest member.
// `users` must be sorted ascending.
void for_each_partition(std::span<const UserIndex> users, int k, std::size_t max_group,
                        const std::function<void(const Partition&)>& visit);

// All partitions with group sizes in [k, 2k-1].
std::vector<Partition> enumerate_partitions(std::span<const UserIndex> users, int k);

struct ExactOptions {
    std::size_t cap = 15;
    std::int64_t cover_weight = 0;
};

// Minimum-cost policy over all partitions into groups of size in [k, 2k-1]
// (splitting a larger group never costs more). Among optimal partitions the
// first in canonical order is returned. Subset dynamic programming,
// O(3^n) time and O(2^n) memory.
Policy solve_exact(const TrajectoryDB& db, const RequestLog& log, int k, ExactOptions options = {});

}  // namespace tpanon
