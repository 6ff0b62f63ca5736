#include "bugmine/filter.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <numeric>
#include <random>

using namespace bugmine;

namespace {

DatasetEntry entry(int id, double loc, int bugs)
{
    DatasetEntry e;
    e.commit_hash = fmt::format("{:040x}", id);
    e.fqn = fmt::format("F{}.java", id);
    e.level = ElementKind::file;
    e.metrics = metrics::MetricsVector(ElementKind::file);
    e.metrics.set("LOC", loc);
    e.bug_count = bugs;
    return e;
}

/// b buggy and c clean entries sharing one metric vector, then `extra` unique clean ones.
std::vector<DatasetEntry> group_of(int b, int c, int extra = 0)
{
    std::vector<DatasetEntry> v;
    int id = 0;
    for (int i = 0; i < b; ++i)
        v.push_back(entry(id++, 10, 1 + i % 3));
    for (int i = 0; i < c; ++i)
        v.push_back(entry(id++, 10, 0));
    for (int i = 0; i < extra; ++i)
        v.push_back(entry(id++, 100 + i, 0));
    return v;
}

std::pair<int, int> labels(const std::vector<DatasetEntry>& v, double loc = 10)
{
    int b = 0, c = 0;
    for (const auto& e : v)
        if (e.metrics.at("LOC") == loc)
            (e.bug_count > 0 ? b : c)++;
    return {b, c};
}

}  // namespace

TEST_SUITE("filter")
{
    TEST_CASE("documented 10:20 group")
    {
        const auto v = group_of(10, 20);
        CHECK(labels(apply_filter(v, FilterStrategy::none, 1)) == std::pair{10, 20});
        CHECK(labels(apply_filter(v, FilterStrategy::removal, 1)) == std::pair{0, 20});
        CHECK(labels(apply_filter(v, FilterStrategy::subtract, 1)) == std::pair{0, 10});
        CHECK(labels(apply_filter(v, FilterStrategy::single, 1)) == std::pair{0, 1});
        CHECK(labels(apply_filter(v, FilterStrategy::gcf, 1)) == std::pair{1, 2});
    }

    TEST_CASE("ties")
    {
        const auto v = group_of(4, 4);
        CHECK(labels(apply_filter(v, FilterStrategy::removal, 1)) == std::pair{0, 0});
        CHECK(labels(apply_filter(v, FilterStrategy::subtract, 1)) == std::pair{0, 0});
        CHECK(labels(apply_filter(v, FilterStrategy::gcf, 1)) == std::pair{1, 1});
        std::set<std::pair<int, int>> seen;
        for (std::uint64_t seed = 0; seed < 32; ++seed) {
            auto r = labels(apply_filter(v, FilterStrategy::single, seed));
            CHECK(r.first + r.second == 1);
            CHECK(labels(apply_filter(v, FilterStrategy::single, seed)) == r);
            seen.insert(r);
        }
        CHECK(seen.size() == 2);  // the coin lands both ways
    }

    TEST_CASE("grouping ignores names and bug counts")
    {
        auto v = group_of(2, 3, 2);
        auto groups = group_conflicts(v);
        REQUIRE(groups.size() == 3);
        CHECK(groups[0].n_buggy == 2);
        CHECK(groups[0].n_clean == 3);
        CHECK(groups[0].members.size() == 5);
        CHECK(groups[0].conflicting());
        CHECK_FALSE(groups[1].conflicting());
        CHECK(feature_key(v[0]) == feature_key(v[4]));
        CHECK(feature_key(v[0]) != feature_key(v[5]));
        // Same metric values on another level never collide.
        auto cls = v[0];
        cls.level = ElementKind::class_;
        cls.metrics = metrics::MetricsVector(ElementKind::class_);
        CHECK(feature_key(cls) != feature_key(v[0]));
    }

    TEST_CASE("strategy names")
    {
        for (auto s : all_filter_strategies)
            CHECK(filter_strategy_from_string(to_string(s)) == s);
        CHECK_THROWS_AS(filter_strategy_from_string("bogus"), ValidationError);
    }

    TEST_CASE("random groups keep their invariants")
    {
        std::mt19937_64 rng(20201019);
        for (int iter = 0; iter < 1000; ++iter) {
            const int b = static_cast<int>(rng() % 30), c = static_cast<int>(rng() % 30);
            const auto v = group_of(b, c, 3);
            CAPTURE(b);
            CAPTURE(c);
            for (auto s : all_filter_strategies) {
                const auto seed = rng();
                const auto once = apply_filter(v, s, seed);
                const auto [kb, kc] = labels(once);
                auto [eb, ec] = filter_counts(s, b, c);
                if (s == FilterStrategy::single && eb == 1 && ec == 1)
                    CHECK(kb + kc == 1);
                else
                    CHECK(std::pair{kb, kc} == std::pair{eb, ec});
                // Non-conflicting groups pass through.
                CHECK(static_cast<int>(once.size()) == kb + kc + 3);
                if (b > 0 && c > 0 && s != FilterStrategy::none && s != FilterStrategy::gcf)
                    CHECK((kb == 0 || kc == 0));
                if (s == FilterStrategy::gcf && b > 0 && c > 0)
                    CHECK(static_cast<long>(kb) * c == static_cast<long>(kc) * b);
                // Idempotence and determinism.
                CHECK(labels(apply_filter(once, s, seed + 1)) == std::pair{kb, kc});
                const auto again = apply_filter(v, s, seed);
                CHECK(again == once);
                // Kept entries keep their order.
                std::size_t pos = 0;
                for (const auto& e : once) {
                    while (pos < v.size() && !(v[pos] == e))
                        ++pos;
                    CHECK(pos < v.size());
                }
            }
        }
    }

    TEST_CASE("seed selects which members survive")
    {
        const auto v = group_of(5, 12);
        std::set<std::vector<std::string>> kept;
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            std::vector<std::string> names;
            for (const auto& e : apply_filter(v, FilterStrategy::subtract, seed))
                names.push_back(e.fqn);
            kept.insert(names);
        }
        CHECK(kept.size() > 1);
    }
}
