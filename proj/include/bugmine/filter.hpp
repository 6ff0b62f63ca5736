#pragma once

#include "bugmine/dataset.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bugmine {

enum class FilterStrategy { none, removal, subtract, single, gcf };

std::string_view to_string(FilterStrategy s);
/// Throws ValidationError for an unknown name.
FilterStrategy filter_strategy_from_string(std::string_view name);

inline constexpr FilterStrategy all_filter_strategies[] = {FilterStrategy::none, FilterStrategy::removal,
                                                           FilterStrategy::subtract, FilterStrategy::single,
                                                           FilterStrategy::gcf};

/// Entries sharing one metric vector. Members index the input entry list.
struct ConflictGroup {
    std::string feature_key;
    int n_buggy = 0;
    int n_clean = 0;
    std::vector<std::size_t> members;

    bool conflicting() const { return n_buggy > 0 && n_clean > 0; }
};

/// Canonical serialization of level plus every metric value.
std::string feature_key(const DatasetEntry& entry);

/// Partition by feature key, groups in order of first appearance.
std::vector<ConflictGroup> group_conflicts(const std::vector<DatasetEntry>& entries);

/// Counts kept on each side for a conflicting group with (b, c) members.
/// A tie under `single` returns (1, 1); the caller keeps one by coin flip.
std::pair<int, int> filter_counts(FilterStrategy strategy, int n_buggy, int n_clean);

/// Kept entries in their original order. Deterministic under seed.
std::vector<DatasetEntry> apply_filter(const std::vector<ConflictGroup>& groups,
                                       const std::vector<DatasetEntry>& entries, FilterStrategy strategy,
                                       std::uint64_t seed);

std::vector<DatasetEntry> apply_filter(const std::vector<DatasetEntry>& entries, FilterStrategy strategy,
                                       std::uint64_t seed);

}  // namespace bugmine
