#include "bugmine/stats.hpp"
#include "bugmine/util.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

using namespace bugmine;
using namespace bugmine::stats;

TEST_SUITE("stats")
{
    TEST_CASE("matrix shape is validated")
    {
        CHECK_THROWS_AS(PairedSampleMatrix({{1, 2}}), ValidationError);
        CHECK_THROWS_AS(PairedSampleMatrix({{1}, {2}}), ValidationError);
        CHECK_THROWS_AS(PairedSampleMatrix({{1, 2}, {1}}), ValidationError);
    }

    TEST_CASE("midranks")
    {
        CHECK(midranks({3, 1, 2}) == std::vector<double>{3, 1, 2});
        CHECK(midranks({5, 5, 1, 5}) == std::vector<double>{3, 3, 1, 3});
    }

    TEST_CASE("friedman examples")
    {
        auto same = friedman(PairedSampleMatrix({{1, 1, 1}, {2, 2, 2}, {3, 3, 3}}));
        CHECK(same.statistic == 0);
        CHECK(same.p_value == 1);
        auto dom = friedman(PairedSampleMatrix({{3, 2, 1}, {9, 5, 4}, {0.9, 0.5, 0.1}}));
        CHECK(dom.statistic == doctest::Approx(6));
        CHECK(dom.p_value == doctest::Approx(0.0498).epsilon(1e-3));
        CHECK(dom.mean_ranks == std::vector<double>{3, 2, 1});
    }

    TEST_CASE("friedman is rank based")
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<std::vector<double>> rows(12, std::vector<double>(4));
        for (auto& r : rows)
            for (auto& v : r)
                v = u(rng);
        auto t = rows;
        for (auto& r : t)
            for (auto& v : r)
                v = std::exp(3 * v) + 7;
        CHECK(friedman(PairedSampleMatrix(rows)).statistic ==
              doctest::Approx(friedman(PairedSampleMatrix(t)).statistic).epsilon(1e-12));
    }

    TEST_CASE("incomplete gamma on both branches")
    {
        // Q(1, x) = exp(-x); chi-square with 2 dof has tail exp(-x/2).
        for (double x : {0.1, 0.5, 1.9, 2.1, 10.0, 40.0})
            CHECK(gamma_q(1, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
        CHECK(chi_square_sf(6, 2) == doctest::Approx(std::exp(-3)).epsilon(1e-12));
        CHECK(normal_sf(1.96) == doctest::Approx(0.0249979).epsilon(1e-5));
        CHECK_THROWS_AS(gamma_q(0, 1), ValidationError);
    }

    TEST_CASE("nemenyi")
    {
        CHECK(q_critical(0.05, 5) == doctest::Approx(3.8577));
        CHECK(std::round(q_critical(0.05, 5) * 10) / 10 == 3.9);
        CHECK_THROWS_AS(q_critical(0.05, 21), ValidationError);
        CHECK_THROWS_AS(q_critical(0.1, 5), ValidationError);
        // The tabulated critical value is where the exact tail crosses alpha.
        for (int k = 2; k <= 20; ++k)
            CHECK(studentized_range_sf(q_critical(0.05, k), k) == doctest::Approx(0.05).epsilon(2e-3));

        auto same = nemenyi(PairedSampleMatrix({{1, 1, 1}, {2, 2, 2}}));
        for (const auto& p : same.pairs) {
            CHECK(p.rank_difference == 0);
            CHECK(p.p_reported == nemenyi_p_cap);
            CHECK_FALSE(p.significant);
        }

        // Two treatments: sign follows which column wins more rows.
        auto two = nemenyi(PairedSampleMatrix({{1, 2}, {1, 2}, {3, 1}, {0, 5}}));
        REQUIRE(two.pairs.size() == 1);
        CHECK(two.pairs[0].rank_difference > 0);

        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<std::vector<double>> rows(30, std::vector<double>(5));
        for (auto& r : rows)
            for (std::size_t c = 0; c < r.size(); ++c)
                r[c] = u(rng) + 0.2 * static_cast<double>(c);
        auto res = nemenyi(PairedSampleMatrix(rows));
        CHECK(res.pairs.size() == 10);
        for (const auto& p : res.pairs) {
            CHECK(p.i > p.j);
            CHECK(p.rank_difference == doctest::Approx(res.mean_ranks[p.i] - res.mean_ranks[p.j]));
            CHECK(p.p_value >= 0);
            CHECK(p.p_value <= 1);
            CHECK(p.p_reported >= nemenyi_p_floor);
            CHECK(p.p_reported <= nemenyi_p_cap);
            CHECK(p.significant == (std::fabs(p.rank_difference) >= res.critical_difference));
        }
        const auto table = format_nemenyi_table(res, {"none", "removal", "subtract", "single", "gcf"});
        CHECK(split_lines(table).size() >= 5);
        CHECK(table.find("gcf") != std::string::npos);
        CHECK_THROWS_AS(format_nemenyi_table(res, {"a"}), ValidationError);
    }

    TEST_CASE("wilcoxon")
    {
        auto same = wilcoxon_signed_rank({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5});
        CHECK(same.degenerate);
        CHECK(same.z == 0);
        CHECK(same.p_value == 1);
        CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2}, {1}), ValidationError);
        CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2, 3}, {0, 0, 0}), ValidationError);

        std::vector<double> a{0.61, 0.72, 0.55, 0.8, 0.66, 0.7, 0.59, 0.63, 0.77, 0.68};
        std::vector<double> b{0.58, 0.7, 0.57, 0.71, 0.6, 0.7, 0.52, 0.6, 0.7, 0.61};
        auto ab = wilcoxon_signed_rank(a, b), ba = wilcoxon_signed_rank(b, a);
        CHECK(ab.z == doctest::Approx(-ba.z));
        CHECK(ab.p_value == doctest::Approx(ba.p_value));
        CHECK(ab.n == 9);
        CHECK(ab.p_value < 0.05);
    }

    TEST_CASE("effect size and rate")
    {
        auto e = effect_size_r(1.96, 4);
        CHECK(e.r == doctest::Approx(0.98));
        CHECK(e.label == "large");
        CHECK(effect_size_r(0, 10).label == "negligible");
        CHECK(effect_size_r(0.2 * std::sqrt(25.0), 25).label == "small");
        CHECK(effect_size_r(-0.4 * 10, 100).label == "medium");
        auto reported = effect_size_r(10.9, 353);
        CHECK(std::round(reported.r * 100) / 100 == 0.58);
        CHECK(reported.label == "large");
        CHECK_THROWS_AS(effect_size_r(1, 0), ValidationError);

        CHECK(std::round(rate(167708, 109244) * 100) / 100 == 1.54);
        CHECK(std::round(rate(27216, 66092) * 100) / 100 == 0.41);
        CHECK(std::round(rate(16235, 49868) * 100) / 100 == 0.33);
        CHECK(rate(5, 5) == 1.0);
        CHECK_THROWS_AS(rate(5, 0), ValidationError);
    }

    TEST_CASE("reference oracle")
    {
        const auto doc = nlohmann::json::parse(read_file(testsupport::fixtures / "stats_oracle.json"));
        REQUIRE(doc["cases"].size() == 50);
        for (const auto& c : doc["cases"]) {
            const auto rows = c["matrix"].get<std::vector<std::vector<double>>>();
            const PairedSampleMatrix m(rows);
            const auto f = friedman(m);
            CHECK(f.statistic == doctest::Approx(c["friedman"]["statistic"].get<double>()).epsilon(1e-9));
            CHECK(std::fabs(f.p_value - c["friedman"]["p"].get<double>()) < 1e-6);
            if (m.cols() <= 20) {
                const auto n = nemenyi(m);
                const auto& ref = c["nemenyi"];
                REQUIRE(ref.size() == n.pairs.size());
                for (std::size_t i = 0; i < ref.size(); ++i) {
                    CHECK(n.pairs[i].i == ref[i]["i"].get<std::size_t>());
                    CHECK(n.pairs[i].j == ref[i]["j"].get<std::size_t>());
                    CHECK(n.pairs[i].statistic == doctest::Approx(ref[i]["statistic"].get<double>()).epsilon(1e-9));
                    CHECK(std::fabs(n.pairs[i].p_value - ref[i]["p"].get<double>()) < 1e-6);
                }
            }
            std::vector<double> a, b;
            for (const auto& r : rows) {
                a.push_back(r[0]);
                b.push_back(r[1]);
            }
            const auto w = wilcoxon_signed_rank(a, b);
            CHECK(w.w_plus == doctest::Approx(c["wilcoxon"]["w_plus"].get<double>()));
            CHECK(w.n == c["wilcoxon"]["n"].get<std::size_t>());
            CHECK(std::fabs(std::fabs(w.z) - c["wilcoxon"]["abs_z"].get<double>()) < 1e-6);
            CHECK(std::fabs(w.p_value - c["wilcoxon"]["p"].get<double>()) < 1e-6);
        }
    }
}
