#include "httplib.h"

#include "bugmine/ingest.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <thread>

using namespace bugmine;
using nlohmann::json;

namespace {

const std::string hash_a(40, 'a');
const std::string hash_b(40, 'b');

SnapshotData small_data()
{
    SnapshotData d;
    d.repo_id = "o/r";
    d.captured_at = parse_utc("2021-01-01T00:00:00Z");
    d.head = hash_b;
    CommitRecord a;
    a.hash = hash_a;
    a.author_id = "x";
    a.timestamp = parse_utc("2020-01-01T00:00:00Z");
    a.message = "init";
    CommitRecord b = a;
    b.hash = hash_b;
    b.parents = {hash_a};
    b.message = "fix, closes #7";
    b.timestamp = parse_utc("2020-01-02T00:00:00Z");
    diff::FileDiff fd;
    fd.old_path = "A.java";
    fd.new_path = "A.java";
    fd.hunks = diff::parse_hunks("@@ -1 +1 @@\n-a\n+b\n");
    b.file_diffs.push_back(fd);
    d.commits = {a, b};
    IssueRecord i;
    i.id = 7;
    i.state = IssueState::closed;
    i.created_at = parse_utc("2019-12-31T00:00:00Z");
    i.closed_at = parse_utc("2020-01-02T00:00:00Z");
    i.labels = {"bug"};
    i.fixing_commits = {{hash_b, b.timestamp}};
    d.issues = {i};
    return d;
}

/// Minimal REST v3 stand-in for one repository "o/r".
class MockHub {
public:
    MockHub()
    {
        server_.Get("/repos/o/r", [this](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req, res))
                return;
            res.set_content(R"({"default_branch":"master"})", "application/json");
        });
        server_.Get("/repos/o/r/commits", [this](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req, res))
                return;
            if (rate_limited_once_.exchange(false)) {
                res.status = 403;
                res.set_header("X-RateLimit-Remaining", "0");
                res.set_header("X-RateLimit-Reset", "1577836810");
                return;
            }
            if (always_limited_) {
                res.status = 429;
                res.set_header("Retry-After", "2");
                return;
            }
            const bool first = req.get_param_value("page") == "1";
            res.set_content(first ? json::array({{{"sha", hash_b}}, {{"sha", hash_a}}}).dump() : "[]",
                            "application/json");
        });
        server_.Get(R"(/repos/o/r/commits/([0-9a-f]{40}))", [this](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req, res))
                return;
            const auto sha = req.matches[1].str();
            json c{{"sha", sha},
                   {"author", {{"login", "dev"}}},
                   {"parents", json::array()},
                   {"commit", {{"message", sha == hash_b ? "Repair parser" : "init"},
                               {"author", {{"email", "dev@example.com"}}},
                               {"committer", {{"date", sha == hash_b ? "2020-01-02T00:00:00Z" : "2020-01-01T00:00:00Z"}}}}},
                   {"files", json::array()}};
            if (sha == hash_b) {
                c["parents"] = json::array({{{"sha", hash_a}}});
                c["files"] = json::array({{{"filename", "A.java"}, {"status", "modified"},
                                           {"patch", "@@ -1 +1 @@\n-a\n+b"}}});
            }
            res.set_content(c.dump(), "application/json");
        });
        server_.Get("/repos/o/r/issues", [this](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req, res))
                return;
            json issues = json::array();
            if (req.get_param_value("page") == "1" && with_issues_) {
                issues.push_back({{"number", 7}, {"state", "closed"}, {"created_at", "2019-12-31T00:00:00Z"},
                                  {"closed_at", "2020-01-02T00:00:00Z"}, {"labels", {{{"name", "bug"}}}}});
                issues.push_back({{"number", 8}, {"state", "closed"}, {"created_at", "2019-12-31T00:00:00Z"},
                                  {"closed_at", "2020-01-02T00:00:00Z"}, {"labels", {{{"name", "enhancement"}}}}});
                issues.push_back({{"number", 9}, {"state", "closed"}, {"created_at", "2019-12-31T00:00:00Z"},
                                  {"closed_at", "2020-01-02T00:00:00Z"}, {"labels", {{{"name", "bug"}}}}});
                issues.push_back({{"number", 10}, {"state", "open"}, {"created_at", "2020-01-01T00:00:00Z"},
                                  {"labels", {{{"name", "bug"}}}}});
                issues.push_back({{"number", 11}, {"pull_request", json::object()}, {"state", "open"},
                                  {"created_at", "2020-01-01T00:00:00Z"}, {"labels", {{{"name", "bug"}}}}});
            }
            res.set_content(issues.dump(), "application/json");
        });
        server_.Get(R"(/repos/o/r/issues/(\d+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req, res))
                return;
            json events = json::array();
            if (req.matches[1].str() == "7" && req.get_param_value("page") == "1")
                events.push_back({{"event", "closed"}, {"commit_id", hash_b},
                                  {"commit_url", "https://api.example/repos/o/r/commits/" + hash_b}});
            res.set_content(events.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockHub()
    {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    bool with_issues_ = true;
    std::atomic<bool> rate_limited_once_{false};
    bool always_limited_ = false;

private:
    bool authorized(const httplib::Request& req, httplib::Response& res)
    {
        if (req.get_header_value("Authorization") == "Bearer revoked") {
            res.status = 401;
            return false;
        }
        return true;
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

FetchOptions options_for(const MockHub& hub, std::vector<std::chrono::seconds>* waits)
{
    FetchOptions o;
    o.base_url = hub.url();
    o.max_retries = 3;
    o.now = [] { return parse_utc("2020-01-01T00:00:00Z"); };
    o.sleeper = [waits](std::chrono::seconds s) { waits->push_back(s); };
    return o;
}

}  // namespace

TEST_SUITE("ingest")
{
    TEST_CASE("fixture snapshot loads with three bug issues")
    {
        auto snap = load_snapshot(testsupport::fixtures / "mini-project.snapshot");
        CHECK(snap.issues().size() == 3);
        CHECK(snap.commits().size() == 12);
        CHECK(snap.commit(snap.head()) != nullptr);
    }

    TEST_CASE("save then load is the identity")
    {
        ProjectSnapshot s(small_data());
        testsupport::TempDir dir;
        save_snapshot(s, dir / "s.json");
        CHECK(load_snapshot(dir / "s.json") == s);
        auto fixture = load_snapshot(testsupport::fixtures / "mini-project.snapshot");
        CHECK(snapshot_from_json(snapshot_to_json(fixture)) == fixture);
    }

    TEST_CASE("empty issue list is valid")
    {
        auto d = small_data();
        d.issues.clear();
        CHECK(ProjectSnapshot(d).issues().empty());
    }

    TEST_CASE("unknown fixing commit is named in the error")
    {
        auto d = small_data();
        const std::string ghost(40, 'c');
        d.issues[0].fixing_commits.push_back({ghost, parse_utc("2020-01-03T00:00:00Z")});
        try {
            ProjectSnapshot s(d);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find(ghost) != std::string::npos);
        }
    }

    TEST_CASE("invariant violations are all reported")
    {
        auto d = small_data();
        d.issues[0].closed_at.reset();
        d.commits[1].parents = {std::string(40, 'e')};
        auto v = snapshot_violations(d);
        CHECK(v.size() >= 2);
    }

    TEST_CASE("parse errors carry a position")
    {
        testsupport::TempDir dir;
        write_file_atomic(dir / "bad.json", "{\n  \"repo\": \"o/r\",\n  \"issues\": [\n");
        try {
            load_snapshot(dir / "bad.json");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line") != std::string::npos);
        }
        write_file_atomic(dir / "typed.json", R"({"format_version":1,"repo":"o/r","captured_at":"2020-01-01T00:00:00Z","bug_labels":["bug"],"issues":[{"id":"x"}],"commits":[]})");
        try {
            load_snapshot(dir / "typed.json");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("issues") != std::string::npos);
        }
    }

    TEST_CASE("bug label filtering")
    {
        IssueRecord enh;
        enh.id = 1;
        enh.labels = {"enhancement"};
        IssueRecord fixed;
        fixed.id = 2;
        fixed.state = IssueState::closed;
        fixed.closed_at = parse_utc("2020-01-01T00:00:00Z");
        fixed.labels = {"bug"};
        fixed.fixing_commits = {{hash_a, parse_utc("2020-01-01T00:00:00Z")}};
        IssueRecord open_defect;
        open_defect.id = 3;
        open_defect.labels = {"defect"};
        IssueRecord unreferenced = fixed;
        unreferenced.id = 4;
        unreferenced.fixing_commits.clear();
        const std::vector<IssueRecord> all{enh, fixed, open_defect, unreferenced};

        auto r = filter_bug_issues(all, {"bug"});
        REQUIRE(r.size() == 1);
        CHECK(r[0].id == 2);
        auto r2 = filter_bug_issues(all, {"bug", "defect"});
        REQUIRE(r2.size() == 2);
        CHECK(r2[1].id == 3);
        CHECK(filter_bug_issues(r2, {"bug", "defect"}) == r2);
        CHECK(filter_bug_issues(all, {"defect"}).size() <= r2.size());
    }

    TEST_CASE("snapshot from a local clone")
    {
        testsupport::TempDir dir;
        const auto repo = dir / "repo";
        testsupport::make_fixture_repo(repo);
        auto snap = snapshot_from_git(repo, "master", testsupport::issues_of(repo), "local/fixture", {"bug"});
        CHECK(snap.commits().size() == 12);
        CHECK(snap.issues().size() == 3);
        CHECK(snap.head() == testsupport::fixture_commits(repo).back());
        // Issue 2 is fixed by C3 and C5, found through message references.
        const auto commits = testsupport::fixture_commits(repo);
        REQUIRE(snap.issues()[1].fixing_commits.size() == 2);
        CHECK(snap.issues()[1].fixing_commits[0].hash == commits[2]);
        CHECK(snap.issues()[1].fixing_commits[1].hash == commits[4]);
    }

    TEST_CASE("remote fetch records closing commits")
    {
        MockHub hub;
        std::vector<std::chrono::seconds> waits;
        testsupport::TempDir dir;
        auto snap = fetch_remote("o/r", "token", dir / "s.json", options_for(hub, &waits));
        REQUIRE(snap.issues().size() == 2);  // #7 closed with a fix, #10 open
        CHECK(snap.issues()[0].id == 7);
        REQUIRE(snap.issues()[0].fixing_commits.size() == 1);
        CHECK(snap.issues()[0].fixing_commits[0].hash == hash_b);
        CHECK(format_utc(snap.issues()[0].fixing_commits[0].date) == "2020-01-02T00:00:00Z");
        CHECK(snap.issues()[1].id == 10);
        CHECK(snap.commits().size() == 2);
        CHECK(load_snapshot(dir / "s.json") == snap);
        CHECK(waits.empty());
    }

    TEST_CASE("remote fetch without bug issues")
    {
        MockHub hub;
        hub.with_issues_ = false;
        std::vector<std::chrono::seconds> waits;
        testsupport::TempDir dir;
        CHECK(fetch_remote("o/r", "", dir / "s.json", options_for(hub, &waits)).issues().empty());
    }

    TEST_CASE("revoked token fails without writing a file")
    {
        MockHub hub;
        std::vector<std::chrono::seconds> waits;
        testsupport::TempDir dir;
        CHECK_THROWS_AS(fetch_remote("o/r", "revoked", dir / "s.json", options_for(hub, &waits)), AuthError);
        CHECK_FALSE(std::filesystem::exists(dir / "s.json"));
    }

    TEST_CASE("rate limits pause until the reset")
    {
        MockHub hub;
        hub.rate_limited_once_ = true;
        std::vector<std::chrono::seconds> waits;
        testsupport::TempDir dir;
        fetch_remote("o/r", "", dir / "s.json", options_for(hub, &waits));
        REQUIRE(waits.size() == 1);
        CHECK(waits[0] == std::chrono::seconds(11));  // reset 10 s after "now", plus one
    }

    TEST_CASE("rate limit exhaustion is bounded")
    {
        MockHub hub;
        hub.always_limited_ = true;
        std::vector<std::chrono::seconds> waits;
        testsupport::TempDir dir;
        CHECK_THROWS_AS(fetch_remote("o/r", "", dir / "s.json", options_for(hub, &waits)), RateLimitError);
        CHECK(waits.size() == 3);
        CHECK_FALSE(std::filesystem::exists(dir / "s.json"));
    }
}
