#include "bugmine/filter.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace bugmine {

std::string_view to_string(FilterStrategy s)
{
    switch (s) {
    case FilterStrategy::none: return "none";
    case FilterStrategy::removal: return "removal";
    case FilterStrategy::subtract: return "subtract";
    case FilterStrategy::single: return "single";
    case FilterStrategy::gcf: return "gcf";
    }
    return "none";
}

FilterStrategy filter_strategy_from_string(std::string_view name)
{
    for (auto s : all_filter_strategies)
        if (to_string(s) == name)
            return s;
    if (name == "full")
        return FilterStrategy::none;
    throw ValidationError(fmt::format("unknown filter strategy '{}'", name), {std::string(name)});
}

std::string feature_key(const DatasetEntry& entry)
{
    std::string key(to_string(entry.level));
    for (const auto& v : entry.metrics.values()) {
        key += ',';
        key += metrics::format_value(v);
    }
    return key;
}

std::vector<ConflictGroup> group_conflicts(const std::vector<DatasetEntry>& entries)
{
    std::vector<ConflictGroup> groups;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto key = feature_key(entries[i]);
        auto [it, fresh] = index.emplace(key, groups.size());
        if (fresh)
            groups.push_back({std::move(key), 0, 0, {}});
        auto& g = groups[it->second];
        g.members.push_back(i);
        (entries[i].bug_count > 0 ? g.n_buggy : g.n_clean)++;
    }
    return groups;
}

std::pair<int, int> filter_counts(FilterStrategy strategy, int b, int c)
{
    if (b == 0 || c == 0 || strategy == FilterStrategy::none)
        return {b, c};
    switch (strategy) {
    case FilterStrategy::removal:
        return b > c ? std::pair{b, 0} : b < c ? std::pair{0, c} : std::pair{0, 0};
    case FilterStrategy::subtract:
        return b > c ? std::pair{b - c, 0} : std::pair{0, c - b};
    case FilterStrategy::single:
        return b > c ? std::pair{1, 0} : b < c ? std::pair{0, 1} : std::pair{1, 1};
    case FilterStrategy::gcf: {
        const int g = std::gcd(b, c);
        return {b / g, c / g};
    }
    case FilterStrategy::none: break;
    }
    return {b, c};
}

namespace {

/// k distinct members of `pool`, chosen by a partial Fisher-Yates shuffle.
std::vector<std::size_t> pick(std::vector<std::size_t> pool, int k, std::mt19937_64& rng)
{
    const auto n = pool.size();
    for (std::size_t i = 0; i < static_cast<std::size_t>(k) && i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(std::min<std::size_t>(static_cast<std::size_t>(k), n));
    return pool;
}

}  // namespace

std::vector<DatasetEntry> apply_filter(const std::vector<ConflictGroup>& groups,
                                       const std::vector<DatasetEntry>& entries, FilterStrategy strategy,
                                       std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<char> keep(entries.size(), 0);
    for (const auto& g : groups) {
        if (!g.conflicting() || strategy == FilterStrategy::none) {
            for (auto m : g.members)
                keep.at(m) = 1;
            continue;
        }
        std::vector<std::size_t> buggy, clean;
        for (auto m : g.members)
            (entries.at(m).bug_count > 0 ? buggy : clean).push_back(m);
        auto [kb, kc] = filter_counts(strategy, g.n_buggy, g.n_clean);
        if (strategy == FilterStrategy::single && kb == 1 && kc == 1) {
            if (rng() & 1)
                kc = 0;
            else
                kb = 0;
        }
        for (auto m : pick(buggy, kb, rng))
            keep[m] = 1;
        for (auto m : pick(clean, kc, rng))
            keep[m] = 1;
    }
    std::vector<DatasetEntry> out;
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (keep[i])
            out.push_back(entries[i]);
    return out;
}

std::vector<DatasetEntry> apply_filter(const std::vector<DatasetEntry>& entries, FilterStrategy strategy,
                                       std::uint64_t seed)
{
    return apply_filter(group_conflicts(entries), entries, strategy, seed);
}

}  // namespace bugmine
