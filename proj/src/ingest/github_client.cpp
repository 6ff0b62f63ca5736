#include "httplib.h"

#include "bugmine/ingest.hpp"
#include "bugmine/linker.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <future>
#include <mutex>
#include <thread>

namespace bugmine {

using nlohmann::json;

namespace {

class GithubApi {
public:
    GithubApi(const FetchOptions& opts, std::string token)
        : opts_(opts), token_(std::move(token)), client_(opts.base_url)
    {
        client_.set_follow_location(true);
        client_.set_connection_timeout(30);
        client_.set_read_timeout(120);
    }

    /// GET returning parsed JSON, or nullopt on 404/422 (object gone).
    std::optional<json> get(const std::string& path)
    {
        httplib::Headers headers{{"Accept", "application/vnd.github+json"},
                                 {"User-Agent", "bugmine"},
                                 {"X-GitHub-Api-Version", "2022-11-28"}};
        if (!token_.empty())
            headers.emplace("Authorization", "Bearer " + token_);

        for (int attempt = 0;; ++attempt) {
            auto res = client_.Get(path, headers);
            if (!res) {
                if (attempt >= opts_.max_retries)
                    throw Error(fmt::format("GET {}: {}", path, httplib::to_string(res.error())));
                pause(std::chrono::seconds(1 << std::min(attempt, 6)));
                continue;
            }
            if (res->status == 401)
                throw AuthError(fmt::format("GET {}: authentication failed (401)", path));
            if (res->status == 403 || res->status == 429) {
                auto wait = rate_limit_wait(*res);
                if (!wait) {
                    if (res->status == 403)
                        throw AuthError(fmt::format("GET {}: forbidden (403)", path));
                    wait = std::chrono::seconds(1 << std::min(attempt, 6));
                }
                if (attempt >= opts_.max_retries)
                    throw RateLimitError(
                        fmt::format("GET {}: rate limit still exhausted after {} retries", path, attempt));
                pause(*wait);
                continue;
            }
            if (res->status == 404 || res->status == 422)
                return std::nullopt;
            if (res->status >= 500) {
                if (attempt >= opts_.max_retries)
                    throw Error(fmt::format("GET {}: server error {}", path, res->status));
                pause(std::chrono::seconds(1 << std::min(attempt, 6)));
                continue;
            }
            if (res->status != 200)
                throw Error(fmt::format("GET {}: unexpected status {}", path, res->status));

            // Spend the last request of a window, then wait for the reset.
            if (res->has_header("X-RateLimit-Remaining") && res->get_header_value("X-RateLimit-Remaining") == "0")
                if (auto w = reset_wait(*res))
                    pause(*w);
            try {
                return json::parse(res->body);
            } catch (const json::parse_error& e) {
                throw ParseError(fmt::format("GET {}: invalid JSON: {}", path, e.what()));
            }
        }
    }

    /// All pages of a list endpoint.
    json get_all(const std::string& path)
    {
        json all = json::array();
        const char sep = path.find('?') == std::string::npos ? '?' : '&';
        for (int page = 1;; ++page) {
            auto j = get(fmt::format("{}{}per_page={}&page={}", path, sep, opts_.per_page, page));
            if (!j || !j->is_array() || j->empty())
                break;
            for (auto& item : *j)
                all.push_back(std::move(item));
            if (static_cast<int>(j->size()) < opts_.per_page)
                break;
        }
        return all;
    }

private:
    Timestamp now() const
    {
        return opts_.now ? opts_.now() : std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    }

    std::optional<std::chrono::seconds> reset_wait(const httplib::Response& res) const
    {
        if (!res.has_header("X-RateLimit-Reset"))
            return std::nullopt;
        const auto reset = std::stoll(res.get_header_value("X-RateLimit-Reset"));
        auto delta = std::chrono::seconds(reset) - now().time_since_epoch() + std::chrono::seconds(1);
        return std::clamp(delta, std::chrono::seconds(1), opts_.max_wait);
    }

    std::optional<std::chrono::seconds> rate_limit_wait(const httplib::Response& res) const
    {
        if (res.has_header("Retry-After"))
            return std::clamp(std::chrono::seconds(std::stoll(res.get_header_value("Retry-After"))),
                              std::chrono::seconds(1), opts_.max_wait);
        if (res.has_header("X-RateLimit-Remaining") && res.get_header_value("X-RateLimit-Remaining") == "0")
            return reset_wait(res);
        return std::nullopt;
    }

    void pause(std::chrono::seconds s) const
    {
        spdlog::info("github: waiting {}s", s.count());
        if (opts_.sleeper)
            opts_.sleeper(s);
        else
            std::this_thread::sleep_for(s);
    }

    const FetchOptions& opts_;
    std::string token_;
    httplib::Client client_;
};

std::string str_or(const json& j, const char* key, std::string fallback = {})
{
    auto it = j.find(key);
    return it != j.end() && it->is_string() ? it->get<std::string>() : fallback;
}

CommitRecord commit_from_detail(const json& j)
{
    CommitRecord c;
    c.hash = j.at("sha").get<std::string>();
    for (const auto& p : j.at("parents"))
        c.parents.push_back(p.at("sha").get<std::string>());
    const auto& commit = j.at("commit");
    c.message = str_or(commit, "message");
    c.timestamp = parse_utc(commit.at("committer").at("date").get<std::string>());
    if (j.contains("author") && j["author"].is_object())
        c.author_id = str_or(j["author"], "login");
    if (c.author_id.empty())
        c.author_id = str_or(commit.at("author"), "email");
    if (j.contains("files")) {
        for (const auto& f : j["files"]) {
            diff::FileDiff fd;
            const auto status = str_or(f, "status");
            const auto name = str_or(f, "filename");
            fd.old_path = status == "renamed" ? str_or(f, "previous_filename", name) : name;
            fd.new_path = name;
            if (status == "added")
                fd.old_path = std::string(diff::dev_null);
            if (status == "removed")
                fd.new_path = std::string(diff::dev_null);
            auto patch = str_or(f, "patch");
            if (patch.empty()) {
                fd.binary = f.value("changes", 0) > 0;
            } else {
                if (patch.back() != '\n')
                    patch += '\n';
                fd.hunks = diff::parse_hunks(patch);
            }
            c.file_diffs.push_back(std::move(fd));
        }
    }
    return c;
}

ProjectSnapshot download(const std::string& repo_id, const std::string& token, const FetchOptions& opts)
{
    GithubApi api(opts, token);
    const std::string base = "/repos/" + repo_id;

    auto repo = api.get(base);
    if (!repo)
        throw Error(fmt::format("repository '{}' not found", repo_id));
    SnapshotData d;
    d.repo_id = repo_id;
    d.default_branch = str_or(*repo, "default_branch", "master");
    d.bug_labels = opts.bug_labels;
    d.captured_at = opts.now ? opts.now() : std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());

    // Commits of the default branch, newest first.
    auto listing = api.get_all(fmt::format("{}/commits?sha={}", base, d.default_branch));
    std::set<std::string> known;
    for (const auto& entry : listing) {
        auto sha = entry.at("sha").get<std::string>();
        auto detail = api.get(fmt::format("{}/commits/{}", base, sha));
        if (!detail)
            continue;
        d.commits.push_back(commit_from_detail(*detail));
        known.insert(sha);
    }
    if (!d.commits.empty())
        d.head = d.commits.front().hash;

    // Issues (pull requests are issues too on this API; skip them).
    auto raw_issues = api.get_all(base + "/issues?state=all");
    const std::string own_commit_url = fmt::format("/repos/{}/commits/", repo_id);
    for (const auto& ri : raw_issues) {
        if (ri.contains("pull_request"))
            continue;
        IssueRecord i;
        i.id = ri.at("number").get<std::int64_t>();
        i.state = str_or(ri, "state") == "closed" ? IssueState::closed : IssueState::open;
        i.created_at = parse_utc(ri.at("created_at").get<std::string>());
        for (const auto& l : ri.value("labels", json::array()))
            i.labels.insert(l.is_string() ? l.get<std::string>() : str_or(l, "name"));
        const bool bug = std::any_of(i.labels.begin(), i.labels.end(),
                                     [&](const std::string& l) { return opts.bug_labels.count(l) > 0; });
        if (!bug)
            continue;
        if (i.state == IssueState::open) {
            d.issues.push_back(std::move(i));
            continue;
        }
        i.closed_at = parse_utc(ri.at("closed_at").get<std::string>());

        // Closing/referencing commits of this repository (forks are ignored),
        // plus commits whose message carries the #id reference.
        std::set<std::string> fixes;
        for (const auto& ev : api.get_all(fmt::format("{}/issues/{}/events", base, i.id))) {
            const auto event = str_or(ev, "event");
            if (event != "closed" && event != "referenced")
                continue;
            auto sha = str_or(ev, "commit_id");
            auto url = str_or(ev, "commit_url");
            if (sha.empty() || (!url.empty() && url.find(own_commit_url) == std::string::npos))
                continue;
            fixes.insert(sha);
        }
        for (const auto& c : d.commits)
            if (extract_issue_refs(c.message).ids.count(i.id))
                fixes.insert(c.hash);
        for (const auto& sha : fixes) {
            if (!known.count(sha)) {
                auto detail = api.get(fmt::format("{}/commits/{}", base, sha));
                if (!detail) {
                    spdlog::warn("issue #{}: fixing commit {} is no longer available", i.id, sha);
                    continue;
                }
                d.commits.push_back(commit_from_detail(*detail));
                known.insert(sha);
            }
        }
        for (const auto& sha : fixes)
            if (known.count(sha)) {
                auto it = std::find_if(d.commits.begin(), d.commits.end(),
                                       [&](const CommitRecord& c) { return c.hash == sha; });
                i.fixing_commits.push_back({sha, it->timestamp});
            }
        std::sort(i.fixing_commits.begin(), i.fixing_commits.end(), [](const auto& a, const auto& b) {
            return a.date != b.date ? a.date < b.date : a.hash < b.hash;
        });
        if (i.fixing_commits.empty())
            continue;  // closed bug never referenced from a commit
        d.issues.push_back(std::move(i));
    }
    std::sort(d.issues.begin(), d.issues.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& c : d.commits)
        for (const auto& p : c.parents)
            if (!known.count(p))
                d.external_parents.insert(p);
    return ProjectSnapshot(std::move(d));
}

std::mutex flights_mutex;
std::map<std::string, std::shared_future<ProjectSnapshot>> flights;

}  // namespace

ProjectSnapshot fetch_remote(const std::string& repo_id, const std::string& token,
                             const std::filesystem::path& out, const FetchOptions& options)
{
    std::promise<ProjectSnapshot> promise;
    std::shared_future<ProjectSnapshot> shared;
    {
        std::lock_guard lock(flights_mutex);
        auto it = flights.find(repo_id);
        if (it != flights.end()) {
            shared = it->second;
        } else {
            shared = promise.get_future().share();
            flights.emplace(repo_id, shared);
            shared = {};
        }
    }
    if (shared.valid()) {
        auto snap = shared.get();
        if (!std::filesystem::exists(out))
            save_snapshot(snap, out);
        return snap;
    }
    auto finish = [&] {
        std::lock_guard lock(flights_mutex);
        flights.erase(repo_id);
    };
    try {
        auto snap = download(repo_id, token, options);
        save_snapshot(snap, out);
        promise.set_value(snap);
        finish();
        return snap;
    } catch (...) {
        promise.set_exception(std::current_exception());
        finish();
        throw;
    }
}

}  // namespace bugmine
