#include "bugmine/csv.hpp"
#include "bugmine/util.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace bugmine;

TEST_SUITE("util")
{
    TEST_CASE("utc timestamps round-trip")
    {
        auto t = parse_utc("2020-01-05T10:00:00Z");
        CHECK(format_utc(t) == "2020-01-05T10:00:00Z");
        CHECK(parse_utc("2020-01-05T10:00:00+00:00") == t);
        CHECK(t.time_since_epoch().count() == 1578218400);
        CHECK_THROWS_AS(parse_utc("2020-13-05"), ParseError);
    }

    TEST_CASE("glob matching")
    {
        CHECK(glob_match("**/test/**", "src/test/java/A.java"));
        CHECK(glob_match("**/test/**", "test/A.java"));
        CHECK_FALSE(glob_match("**/test/**", "src/main/java/Test.java"));
        CHECK(glob_match("*.java", "A.java"));
        CHECK_FALSE(glob_match("*.java", "dir/A.java"));
        CHECK(glob_match("src/?.java", "src/A.java"));
    }

    TEST_CASE("sha256 of known strings")
    {
        CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("atomic write leaves only the final file")
    {
        testsupport::TempDir dir;
        write_file_atomic(dir / "a.txt", "one");
        write_file_atomic(dir / "a.txt", "two");
        CHECK(read_file(dir / "a.txt") == "two");
        int n = 0;
        for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(dir.path()))
            ++n;
        CHECK(n == 1);
    }

    TEST_CASE("process runner passes stdin and reports exit codes")
    {
        auto r = run_process({"cat"}, "hello");
        CHECK(r.exit_code == 0);
        CHECK(r.out == "hello");
        CHECK(run_process({"false"}).exit_code != 0);
    }

    TEST_CASE("csv quoting follows RFC 4180")
    {
        CHECK(csv::quote("plain") == "plain");
        CHECK(csv::quote("a,b") == "\"a,b\"");
        CHECK(csv::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
        CHECK(csv::join_row({"a", "b,c"}) == "a,\"b,c\"\n");
        auto rows = csv::parse("x,\"y,\"\"z\"\"\"\r\n1,2\n");
        REQUIRE(rows.size() == 2);
        CHECK(rows[0][1] == "y,\"z\"");
        CHECK(rows[1][0] == "1");
    }
}
