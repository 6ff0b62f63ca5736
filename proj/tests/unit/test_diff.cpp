#include "bugmine/diff.hpp"
#include "bugmine/java_structure.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace bugmine;
using namespace bugmine::diff;

namespace {

const char* sample_diff = "--- /path/to/original\n"
                            "+++ /path/to/new\n"
                            "@@ -1,4 +1,4 @@\n"
                            "+Added line\n"
                            "-Deleted line\n"
                            " This line is unchanged\n"
                            " This line is unchanged\n"
                            " This line is unchanged\n";

SourceElement elem(ElementKind k, std::string fqn, int a, int b)
{
    SourceElement e;
    e.kind = k;
    e.fqn = std::move(fqn);
    e.path = "F.java";
    e.start_line = a;
    e.end_line = b;
    return e;
}

}  // namespace

TEST_SUITE("diff")
{
    TEST_CASE("example diff parses into one hunk")
    {
        auto files = parse_unified_diff(sample_diff);
        REQUIRE(files.size() == 1);
        CHECK(files[0].old_path == "/path/to/original");
        CHECK(files[0].new_path == "/path/to/new");
        REQUIRE(files[0].hunks.size() == 1);
        int add = 0, del = 0, ctx = 0;
        for (auto& l : files[0].hunks[0].lines)
            (l.tag == LineTag::add ? add : l.tag == LineTag::del ? del : ctx)++;
        CHECK(add == 1);
        CHECK(del == 1);
        CHECK(ctx == 3);
        CHECK(modified_ranges(files[0], Side::old_side).ranges() == std::vector<std::pair<int, int>>{{1, 1}});
        CHECK(modified_ranges(files[0], Side::new_side).ranges() == std::vector<std::pair<int, int>>{{1, 1}});
    }

    TEST_CASE("empty input and malformed headers")
    {
        CHECK(parse_unified_diff("").empty());
        CHECK_THROWS_AS(parse_unified_diff("--- a\n+++ b\n@@ -x +1 @@\n"), ParseError);
        // Header promises 2 old lines, body has 1.
        CHECK_THROWS_AS(parse_unified_diff("--- a\n+++ b\n@@ -1,2 +1,1 @@\n-x\n"), ParseError);
    }

    TEST_CASE("skipped text is reported with offsets")
    {
        std::vector<Skipped> skipped;
        auto files = parse_unified_diff(std::string("garbage\n") + sample_diff, &skipped);
        CHECK(files.size() == 1);
        REQUIRE(!skipped.empty());
        CHECK(skipped[0].offset == 0);
    }

    TEST_CASE("context-only and pure-addition hunks")
    {
        auto ctx = parse_unified_diff("--- a\n+++ b\n@@ -1,2 +1,2 @@\n x\n y\n");
        CHECK(modified_ranges(ctx[0], Side::old_side).empty());
        CHECK(modified_ranges(ctx[0], Side::new_side).empty());
        auto add = parse_unified_diff("--- a\n+++ b\n@@ -9,0 +10,3 @@\n+a\n+b\n+c\n");
        CHECK(modified_ranges(add[0], Side::old_side).empty());
        CHECK(modified_ranges(add[0], Side::new_side).ranges() == std::vector<std::pair<int, int>>{{10, 12}});
    }

    TEST_CASE("apply replays hunks and honours missing final newline")
    {
        std::string old_text = "a\nb\nc\n";
        auto d = parse_unified_diff("--- a/f\n+++ b/f\n@@ -2,2 +2,2 @@\n b\n-c\n+C\n\\ No newline at end of file\n");
        CHECK(diff::apply(old_text, d[0]) == "a\nb\nC");
        auto bad = parse_unified_diff("--- a/f\n+++ b/f\n@@ -1 +1 @@\n-zzz\n+y\n");
        CHECK_THROWS_AS(diff::apply(old_text, bad[0]), ParseError);
    }

    TEST_CASE("hunks-only patches render back identically")
    {
        std::string patch = "@@ -1,3 +1,3 @@\n a\n-b\n+B\n c\n";
        auto hunks = parse_hunks(patch);
        CHECK(render_hunks(hunks) == patch);
    }

    TEST_CASE("elements touched by containment")
    {
        std::vector<SourceElement> es{elem(ElementKind::file, "F.java", 1, 30), elem(ElementKind::class_, "p.C", 2, 29),
                                      elem(ElementKind::method, "p.C.a()void", 3, 8),
                                      elem(ElementKind::method, "p.C.b()void", 9, 12),
                                      elem(ElementKind::method, "p.C.c()void", 15, 20)};
        LineRangeSet r;
        r.add(5);
        CHECK(elements_touched(r, es) == std::set<std::string>{"F.java", "p.C", "p.C.a()void"});
        LineRangeSet two;
        two.add(8, 9);
        CHECK(elements_touched(two, es) == std::set<std::string>{"F.java", "p.C", "p.C.a()void", "p.C.b()void"});
        LineRangeSet gap;
        gap.add(13, 14);
        CHECK(elements_touched(gap, es) == std::set<std::string>{"F.java", "p.C"});
    }

    TEST_CASE("line range sets stay disjoint and sorted")
    {
        LineRangeSet s;
        s.add(5, 7);
        s.add(1, 2);
        s.add(3, 4);
        s.add(10);
        CHECK(s.ranges() == std::vector<std::pair<int, int>>{{1, 7}, {10, 10}});
        CHECK(s.line_count() == 8);
        CHECK(s.intersects(8, 10));
        CHECK_FALSE(s.intersects(8, 9));
    }

    TEST_CASE("git two-file diff keeps both paths")
    {
        testsupport::TempDir dir;
        const auto repo = dir / "repo";
        testsupport::make_fixture_repo(repo);
        auto commits = testsupport::fixture_commits(repo);
        // C1 -> C2 changes only Calc; C7 -> C8 changes Util; diff C1..C3 spans Calc and Util.
        auto text = testsupport::git(repo, {"diff", "--no-color", commits[0], commits[2]});
        auto files = parse_unified_diff(text);
        REQUIRE(files.size() == 2);
        CHECK(files[0].new_path == "src/main/java/com/acme/Calc.java");
        CHECK(files[1].new_path == "src/main/java/com/acme/Util.java");
    }
}
