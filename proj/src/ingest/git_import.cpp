#include "bugmine/ingest.hpp"
#include "bugmine/linker.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>

namespace bugmine {

using nlohmann::json;

namespace {

std::string git(const std::filesystem::path& repo, std::vector<std::string> args)
{
    args.insert(args.begin(), {"git", "-c", "core.quotepath=off"});
    auto r = run_process(args, {}, repo);
    if (r.exit_code != 0)
        throw IoError(fmt::format("{} failed ({}): {}", args[3], r.exit_code, r.err));
    return r.out;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            return out;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::vector<diff::FileDiff> commit_diffs(const std::filesystem::path& repo, const std::string& hash)
{
    auto text = git(repo, {"diff-tree", "-p", "--no-renames", "--no-color", "--root", "-m", "--first-parent",
                           "--no-commit-id", "--full-index", hash});
    return diff::parse_unified_diff(text);
}

}  // namespace

ProjectSnapshot snapshot_from_git(const std::filesystem::path& repo, const std::string& branch,
                                  const std::filesystem::path& issues_file, const std::string& repo_id,
                                  const std::set<std::string>& bug_labels)
{
    SnapshotData d;
    d.repo_id = repo_id;
    d.default_branch = branch;
    d.bug_labels = bug_labels;

    auto log = git(repo, {"log", "--topo-order", "--format=%H%x00%P%x00%ae%x00%ct%x00%B%x1e", branch});
    std::set<std::string> known;
    for (auto rec : split(log, '\x1e')) {
        while (!rec.empty() && rec.front() == '\n')
            rec.remove_prefix(1);
        if (rec.empty())
            continue;
        auto f = split(rec, '\0');
        if (f.size() < 5)
            throw ParseError(fmt::format("unexpected git log record: {}", rec.substr(0, 60)));
        CommitRecord c;
        c.hash = std::string(f[0]);
        for (auto p : split(f[1], ' '))
            if (!p.empty())
                c.parents.emplace_back(p);
        c.author_id = std::string(f[2]);
        c.timestamp = Timestamp(std::chrono::seconds(std::stoll(std::string(f[3]))));
        c.message = std::string(f[4]);
        while (!c.message.empty() && c.message.back() == '\n')
            c.message.pop_back();
        c.file_diffs = commit_diffs(repo, c.hash);
        known.insert(c.hash);
        d.commits.push_back(std::move(c));
    }
    if (!d.commits.empty())
        d.head = d.commits.front().hash;
    if (d.commits.empty())
        throw ValidationError(fmt::format("branch '{}' has no commits", branch), {});
    d.captured_at = std::max_element(d.commits.begin(), d.commits.end(), [](const auto& a, const auto& b) {
                        return a.timestamp < b.timestamp;
                    })->timestamp;

    std::map<std::string, Timestamp> when;
    for (const auto& c : d.commits)
        when.emplace(c.hash, c.timestamp);

    json raw;
    try {
        raw = json::parse(read_file(issues_file));
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: {}", issues_file.string(), e.what()));
    }
    if (!raw.is_array())
        throw ParseError(fmt::format("{}: expected a JSON array of issues", issues_file.string()));
    for (const auto& ri : raw) {
        IssueRecord i;
        i.id = ri.at("id").get<std::int64_t>();
        i.state = ri.value("state", "closed") == "closed" ? IssueState::closed : IssueState::open;
        i.created_at = parse_utc(ri.at("created_at").get<std::string>());
        if (ri.contains("closed_at") && !ri["closed_at"].is_null())
            i.closed_at = parse_utc(ri["closed_at"].get<std::string>());
        i.labels = ri.value("labels", std::set<std::string>{});
        std::set<std::string> fixes;
        for (const auto& f : ri.value("fixing_commits", json::array()))
            fixes.insert(f.is_string() ? f.get<std::string>() : f.at("hash").get<std::string>());
        // Message references count as fixes too.
        if (i.state == IssueState::closed)
            for (const auto& c : d.commits)
                if (extract_issue_refs(c.message).ids.count(i.id))
                    fixes.insert(c.hash);
        for (const auto& h : fixes) {
            auto it = when.find(h);
            if (it == when.end())
                throw ValidationError(fmt::format("issue {}: fixing commit {} is not on '{}'", i.id, h, branch),
                                      {fmt::format("issue {}", i.id)});
            i.fixing_commits.push_back({h, it->second});
        }
        std::sort(i.fixing_commits.begin(), i.fixing_commits.end(), [](const auto& a, const auto& b) {
            return a.date != b.date ? a.date < b.date : a.hash < b.hash;
        });
        if (i.state == IssueState::closed && !i.closed_at)
            i.closed_at = i.fixing_commits.empty() ? i.created_at : i.fixing_commits.back().date;
        d.issues.push_back(std::move(i));
    }
    d.issues = filter_bug_issues(d.issues, bug_labels);
    std::sort(d.issues.begin(), d.issues.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& c : d.commits)
        for (const auto& p : c.parents)
            if (!known.count(p))
                d.external_parents.insert(p);
    return ProjectSnapshot(std::move(d));
}

}  // namespace bugmine
