#include "bugmine/metrics.hpp"

#include <doctest.h>

#include <cmath>

using namespace bugmine;
using namespace bugmine::metrics;

namespace {

const MetricsVector& of(const std::map<std::string, MetricsVector>& all, const std::string& fqn)
{
    auto it = all.find(fqn);
    REQUIRE_MESSAGE(it != all.end(), fqn);
    return it->second;
}

std::map<std::string, MetricsVector> analyze(const std::string& src)
{
    FileAnalysis f("T.java", src);
    return compute_all(f);
}

}  // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("empty method conventions")
    {
        auto all = analyze("class A {\nvoid m(){}\n}\n");
        const auto& m = of(all, "A.m()void");
        CHECK(m.at("LOC") == 1);
        CHECK(m.at("NUMPAR") == 0);
        CHECK(m.at("McCC") == 1);
        CHECK(m.at("NOS") == 0);
        CHECK(m.at("HPV") == 0);
        CHECK(m.at("HVOL") == 0);
    }

    TEST_CASE("if with two returns")
    {
        auto all = analyze("class A {\nint f(int a){ if(a>0) return a; return 0; }\n}\n");
        const auto& m = of(all, "A.f(int)int");
        CHECK(m.at("McCC") == 2);
        CHECK(m.at("NUMPAR") == 1);
        CHECK(m.at("NOS") == 3);
    }

    TEST_CASE("for with a short-circuit condition")
    {
        auto all = analyze("class A {\nvoid f(int n, boolean b){\n for (int i = 0; i < n && b; i++) {\n  n--;\n }\n}\n}\n");
        CHECK(of(all, "A.f(int,boolean)void").at("McCC") == 3);
    }

    TEST_CASE("class counts and WMC")
    {
        auto all = analyze("class A {\n"
                           " public void a() {}\n"
                           " public int b(int x) { return x > 0 ? 1 : 0; }\n"
                           " private int c(int x) { if (x > 0 && x < 9) return 1; return 0; }\n"
                           "}\n");
        const auto& c = of(all, "A");
        CHECK(c.at("NPM") == 2);
        CHECK(c.at("NLM") == 3);
        CHECK(c.at("NM") == 3);
        CHECK(c.at("WMC") == 1 + 2 + 3);
    }

    TEST_CASE("empty class")
    {
        auto all = analyze("class E {\n}\n");
        const auto& c = of(all, "E");
        CHECK(c.at("NM") == 0);
        CHECK(c.at("WMC") == 0);
    }

    TEST_CASE("blank file")
    {
        auto all = analyze("\n\n\n");
        const auto& f = of(all, "T.java");
        CHECK(f.at("LOC") == 3);
        CHECK(f.at("LLOC") == 0);
        CHECK(f.at("CLOC") == 0);
    }

    TEST_CASE("documented and undocumented public methods")
    {
        auto all = analyze("public class A {\n"
                           "    /** Doc. */\n"
                           "    public void a() {}\n"
                           "    public void b() {}\n"
                           "}\n");
        const auto& f = of(all, "T.java");
        // Only methods are counted; the class itself is not.
        CHECK(f.at("PDA") == 1);
        CHECK(f.at("PUA") == 1);
        const auto& c = of(all, "A");
        CHECK(c.at("PDA") == 1);
        CHECK(c.at("PUA") == 1);
    }

    TEST_CASE("file LLOC is additive over top-level regions")
    {
        const std::string a = "class A {\n int x;\n void m() { x++; }\n}\n";
        const std::string b = "// between\n\nclass B {\n void n() {\n }\n}\n";
        auto fa = of(analyze(a), "T.java").at("LLOC");
        auto fb = of(analyze(b), "T.java").at("LLOC");
        CHECK(of(analyze(a + b), "T.java").at("LLOC") == fa + fb);
    }

    TEST_CASE("halstead identities and density bounds")
    {
        auto all = analyze("class A {\n"
                           " // helper\n"
                           " int g(int a, int b) {\n"
                           "  int s = a * b + a; // sum\n"
                           "  while (s > 10) { s -= b; }\n"
                           "  return s;\n"
                           " }\n"
                           "}\n");
        const auto& m = of(all, "A.g(int,int)int");
        const double hpl = m.at("HPL"), hpv = m.at("HPV"), hvol = m.at("HVOL");
        CHECK(hvol == doctest::Approx(hpl * std::log2(hpv)).epsilon(1e-12));
        CHECK(m.at("HEFF") == doctest::Approx(m.at("HDIF") * hvol).epsilon(1e-12));
        CHECK(m.at("HNDB") == doctest::Approx(hvol / 3000).epsilon(1e-12));
        CHECK(m.at("HTRP") == doctest::Approx(m.at("HEFF") / 18).epsilon(1e-12));
        CHECK(m.at("LLOC") <= m.at("LOC"));
        CHECK(m.at("CD") >= 0);
        CHECK(m.at("CD") <= 1);
        CHECK(m.at("NL") >= m.at("NLE"));
    }

    TEST_CASE("appending a statement never shrinks size counts")
    {
        auto before = of(analyze("class A {\n void m() {\n  int a = 1;\n }\n}\n"), "A.m()void");
        auto after = of(analyze("class A {\n void m() {\n  int a = 1;\n  a++;\n }\n}\n"), "A.m()void");
        for (const char* id : {"LOC", "LLOC", "NOS"})
            CHECK(after.at(id) >= before.at(id));
    }

    TEST_CASE("schema columns and uncomputed metrics")
    {
        auto all = analyze("class A { void m() {} }\n");
        const auto& c = of(all, "A");
        CHECK_FALSE(c.get("CBO").has_value());
        CHECK(is_uncomputed("LCOM5"));
        CHECK(format_value(std::nullopt).empty());
        CHECK(format_value(0.1) == "0.1");
        CHECK_THROWS(c.at("HVOL"));
        auto cols = columns(ElementKind::file);
        CHECK(std::vector<std::string_view>(cols.begin(), cols.end()) ==
              std::vector<std::string_view>{"CLOC", "LOC", "LLOC", "McCC", "PDA", "PUA"});
    }
}
