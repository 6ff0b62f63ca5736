#include "bugmine/java_structure.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <map>
#include <sstream>

using namespace bugmine;
using namespace bugmine::java;

namespace {

std::vector<std::pair<TokenKind, std::string>> significant(const TokenStream& ts)
{
    std::vector<std::pair<TokenKind, std::string>> out;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i].kind != TokenKind::whitespace)
            out.emplace_back(ts[i].kind, std::string(ts.lexeme(i)));
    return out;
}

std::vector<SourceElement> parse(const std::string& path, const std::string& src)
{
    return parse_elements(path, tokenize(src));
}

}  // namespace

TEST_SUITE("java")
{
    TEST_CASE("tokenize a declaration with a trailing comment")
    {
        auto toks = significant(tokenize("int a = 1; // x"));
        std::vector<std::pair<TokenKind, std::string>> want{
            {TokenKind::keyword, "int"},  {TokenKind::identifier, "a"}, {TokenKind::operator_, "="},
            {TokenKind::literal, "1"},    {TokenKind::operator_, ";"},  {TokenKind::comment, "// x"}};
        CHECK(toks == want);
    }

    TEST_CASE("comment markers inside string literals are literal text")
    {
        auto toks = significant(tokenize("/* a */ \"b//c\""));
        REQUIRE(toks.size() == 2);
        CHECK(toks[0].first == TokenKind::comment);
        CHECK(toks[1] == std::pair<TokenKind, std::string>{TokenKind::literal, "\"b//c\""});
    }

    TEST_CASE("tokens cover every byte exactly once")
    {
        const std::string src = "class A { String s = \"unterminated\n int x; /* open";
        auto ts = tokenize(src);
        std::size_t pos = 0;
        for (const auto& t : ts.tokens()) {
            CHECK(t.offset == pos);
            pos += t.length;
        }
        CHECK(pos == src.size());
        CHECK(ts.has_unterminated());
    }

    TEST_CASE("1000-line file matches the reference lexer counts")
    {
        const auto src = read_file(testsupport::fixtures / "lexer_1000.java");
        const auto expected = nlohmann::json::parse(read_file(testsupport::fixtures / "lexer_1000.expected.json"));
        auto ts = tokenize(src);
        CHECK(ts.line_count() == expected["lines"].get<int>());
        std::map<std::string, int> counts;
        int total = 0;
        for (const auto& t : ts.tokens()) {
            if (t.kind == TokenKind::whitespace)
                continue;
            ++counts[std::string(to_string(t.kind))];
            ++total;
        }
        for (const auto& [kind, n] : expected["counts"].items())
            CHECK_MESSAGE(counts[kind] == n.get<int>(), kind);
        CHECK(total == expected["total"].get<int>());
        CHECK_FALSE(ts.has_unterminated());
    }

    TEST_CASE("package, class and method names")
    {
        auto es = parse("A.java", "package p; class A { void m(int x){} }");
        REQUIRE(es.size() == 3);
        CHECK(es[1].fqn == "p.A");
        CHECK(es[2].fqn == "p.A.m(int)void");
        CHECK(es[2].parent_fqn == "p.A");
    }

    TEST_CASE("overloads get distinct names, generics are erased")
    {
        auto es = parse("A.java", "class A { void m(int x){} void m(long x){} java.util.List<String> g(Map<K, V> m){ return null; } }");
        REQUIRE(es.size() == 5);
        CHECK(es[2].fqn == "A.m(int)void");
        CHECK(es[3].fqn == "A.m(long)void");
        CHECK(es[4].fqn == "A.g(Map)java.util.List");
    }

    TEST_CASE("anonymous classes are not elements")
    {
        auto es = parse("A.java", "class A {\n void m() {\n  new Runnable() { public void run() {} };\n }\n}\n");
        REQUIRE(es.size() == 3);
        CHECK(es[2].fqn == "A.m()void");
        CHECK(es[2].start_line == 2);
        CHECK(es[2].end_line == 4);
    }

    TEST_CASE("unbalanced braces degrade but keep earlier elements")
    {
        auto fs = analyze_structure("A.java", tokenize("class A {\n void m() {}\n void n() {\n"));
        CHECK(fs.degraded);
        REQUIRE(fs.elements.size() >= 3);
        CHECK(fs.elements[2].fqn == "A.m()void");
    }

    TEST_CASE("fixture files match their golden element lists")
    {
        for (const char* name : {"Shapes", "Legacy"}) {
            CAPTURE(name);
            const auto dir = testsupport::fixtures / "java";
            const auto src = read_file(dir / (std::string(name) + ".java"));
            auto es = parse(std::string(name) + ".java", src);
            std::string got;
            for (const auto& e : es)
                got += std::string(to_string(e.kind)) + " " + e.fqn + " " + std::to_string(e.start_line) + " " +
                       std::to_string(e.end_line) + "\n";
            CHECK(got == read_file(dir / (std::string(name) + ".golden")));

            // Nesting: methods inside their class, classes inside the file.
            std::map<std::string, SourceElement> classes;
            for (const auto& e : es)
                if (e.kind == ElementKind::class_)
                    classes[e.fqn] = e;
            for (const auto& e : es) {
                CHECK(e.start_line <= e.end_line);
                CHECK(e.start_line >= es[0].start_line);
                CHECK(e.end_line <= es[0].end_line);
                if (e.kind == ElementKind::method) {
                    REQUIRE(e.parent_fqn);
                    const auto& c = classes.at(*e.parent_fqn);
                    CHECK(c.start_line <= e.start_line);
                    CHECK(e.end_line <= c.end_line);
                }
            }
            CHECK(parse(std::string(name) + ".java", src) == es);
        }
    }

    TEST_CASE("line_has_code ignores comments and blanks")
    {
        auto ts = tokenize("int a;\n// c\n\n/* x */ int b;\n");
        CHECK(line_has_code(ts, 1));
        CHECK_FALSE(line_has_code(ts, 2));
        CHECK_FALSE(line_has_code(ts, 3));
        CHECK(line_has_code(ts, 4));
    }
}
