#include "bugmine/ingest.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>

namespace bugmine {

using nlohmann::json;

std::vector<std::string> snapshot_violations(const SnapshotData& d)
{
    std::vector<std::string> bad;
    std::set<std::string> hashes;
    for (const auto& c : d.commits) {
        if (!is_hex_hash(c.hash))
            bad.push_back(fmt::format("commit '{}': hash is not 40 lowercase hex digits", c.hash));
        if (!hashes.insert(c.hash).second)
            bad.push_back(fmt::format("commit {}: duplicate hash", c.hash));
    }
    for (const auto& c : d.commits)
        for (const auto& p : c.parents)
            if (!hashes.count(p) && !d.external_parents.count(p))
                bad.push_back(fmt::format("commit {}: parent {} is neither captured nor marked external", c.hash, p));
    if (!d.commits.empty() && !hashes.count(d.head))
        bad.push_back(fmt::format("head '{}' is not a captured commit", d.head));

    std::set<std::int64_t> ids;
    for (const auto& i : d.issues) {
        if (i.id <= 0)
            bad.push_back(fmt::format("issue {}: id must be positive", i.id));
        if (!ids.insert(i.id).second)
            bad.push_back(fmt::format("issue {}: duplicate id", i.id));
        const bool closed = i.state == IssueState::closed;
        if (closed != i.closed_at.has_value())
            bad.push_back(fmt::format("issue {}: closed_at must be present iff state is closed", i.id));
        if (!closed && !i.fixing_commits.empty())
            bad.push_back(fmt::format("issue {}: open issue with fixing commits", i.id));
        if (closed && i.fixing_commits.empty())
            bad.push_back(fmt::format("issue {}: closed issue without fixing commits", i.id));
        for (std::size_t k = 0; k < i.fixing_commits.size(); ++k) {
            const auto& f = i.fixing_commits[k];
            if (!hashes.count(f.hash))
                bad.push_back(fmt::format("issue {}: fixing commit {} not in snapshot", i.id, f.hash));
            if (k > 0 && f.date < i.fixing_commits[k - 1].date)
                bad.push_back(fmt::format("issue {}: fixing commit dates decrease at {}", i.id, f.hash));
        }
    }
    return bad;
}

ProjectSnapshot::ProjectSnapshot(SnapshotData data) : data_(std::move(data))
{
    auto bad = snapshot_violations(data_);
    if (!bad.empty())
        throw ValidationError(fmt::format("invalid snapshot ({} violations): {}", bad.size(), bad.front()), bad);
    for (std::size_t i = 0; i < data_.commits.size(); ++i)
        by_hash_.emplace(data_.commits[i].hash, i);
}

const CommitRecord* ProjectSnapshot::commit(const std::string& hash) const
{
    auto it = by_hash_.find(hash);
    return it == by_hash_.end() ? nullptr : &data_.commits[it->second];
}

std::vector<IssueRecord> filter_bug_issues(const std::vector<IssueRecord>& issues,
                                           const std::set<std::string>& bug_labels)
{
    std::vector<IssueRecord> out;
    for (const auto& i : issues) {
        const bool bug = std::any_of(i.labels.begin(), i.labels.end(),
                                     [&](const std::string& l) { return bug_labels.count(l) > 0; });
        if (!bug)
            continue;
        if (i.state == IssueState::closed && i.fixing_commits.empty())
            continue;
        out.push_back(i);
    }
    return out;
}

// ---- JSON

namespace {

json diff_to_json(const diff::FileDiff& fd)
{
    json j;
    j["old_path"] = fd.old_path;
    j["new_path"] = fd.new_path;
    if (fd.binary)
        j["binary"] = true;
    j["patch"] = diff::render_hunks(fd.hunks);
    return j;
}

/// Field access with a dotted path for diagnostics.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(std::string_view what) const
    {
        throw ParseError(fmt::format("snapshot field '{}': {}", path_, what));
    }

    Reader at(std::string_view key) const
    {
        if (!j_.is_object())
            fail("expected an object");
        auto it = j_.find(std::string(key));
        if (it == j_.end())
            throw ParseError(fmt::format("snapshot field '{}.{}': missing", path_, key));
        return Reader(*it, fmt::format("{}.{}", path_, key));
    }

    bool has(std::string_view key) const { return j_.is_object() && j_.contains(std::string(key)); }

    std::string str() const
    {
        if (!j_.is_string())
            fail("expected a string");
        return j_.get<std::string>();
    }

    std::int64_t integer() const
    {
        if (!j_.is_number_integer())
            fail("expected an integer");
        return j_.get<std::int64_t>();
    }

    bool boolean() const
    {
        if (!j_.is_boolean())
            fail("expected a boolean");
        return j_.get<bool>();
    }

    Timestamp time() const
    {
        try {
            return parse_utc(str());
        } catch (const ParseError& e) {
            fail(e.what());
        }
    }

    std::vector<Reader> items() const
    {
        if (!j_.is_array())
            fail("expected an array");
        std::vector<Reader> out;
        for (std::size_t i = 0; i < j_.size(); ++i)
            out.emplace_back(j_[i], fmt::format("{}[{}]", path_, i));
        return out;
    }

    std::set<std::string> string_set() const
    {
        std::set<std::string> out;
        for (const auto& r : items())
            out.insert(r.str());
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

IssueRecord read_issue(const Reader& r)
{
    IssueRecord i;
    i.id = r.at("id").integer();
    auto state = r.at("state").str();
    if (state == "open")
        i.state = IssueState::open;
    else if (state == "closed")
        i.state = IssueState::closed;
    else
        r.at("state").fail("expected 'open' or 'closed'");
    i.created_at = r.at("created_at").time();
    if (r.has("closed_at") && !r.at("closed_at").raw().is_null())
        i.closed_at = r.at("closed_at").time();
    if (r.has("labels"))
        i.labels = r.at("labels").string_set();
    if (r.has("fixing_commits"))
        for (const auto& f : r.at("fixing_commits").items())
            i.fixing_commits.push_back({f.at("hash").str(), f.at("date").time()});
    return i;
}

CommitRecord read_commit(const Reader& r)
{
    CommitRecord c;
    c.hash = r.at("hash").str();
    for (const auto& p : r.at("parents").items())
        c.parents.push_back(p.str());
    c.author_id = r.at("author").str();
    c.timestamp = r.at("timestamp").time();
    c.message = r.at("message").str();
    if (r.has("files")) {
        for (const auto& f : r.at("files").items()) {
            diff::FileDiff fd;
            fd.old_path = f.at("old_path").str();
            fd.new_path = f.at("new_path").str();
            if (fd.old_path.empty() || fd.new_path.empty())
                f.fail("paths must be nonempty");
            if (f.has("binary"))
                fd.binary = f.at("binary").boolean();
            try {
                fd.hunks = diff::parse_hunks(f.at("patch").str());
            } catch (const ParseError& e) {
                f.at("patch").fail(e.what());
            }
            c.file_diffs.push_back(std::move(fd));
        }
    }
    return c;
}

std::pair<int, int> line_col(std::string_view text, std::size_t byte)
{
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

std::string snapshot_to_json(const ProjectSnapshot& snapshot)
{
    const auto& d = snapshot.data();
    json j;
    j["format_version"] = snapshot_format_version;
    j["repo"] = d.repo_id;
    j["captured_at"] = format_utc(d.captured_at);
    j["default_branch"] = d.default_branch;
    j["head"] = d.head;
    j["bug_labels"] = d.bug_labels;
    j["external_parents"] = d.external_parents;
    j["issues"] = json::array();
    for (const auto& i : d.issues) {
        json ji;
        ji["id"] = i.id;
        ji["state"] = i.state == IssueState::open ? "open" : "closed";
        ji["created_at"] = format_utc(i.created_at);
        ji["closed_at"] = i.closed_at ? json(format_utc(*i.closed_at)) : json(nullptr);
        ji["labels"] = i.labels;
        ji["fixing_commits"] = json::array();
        for (const auto& f : i.fixing_commits)
            ji["fixing_commits"].push_back({{"hash", f.hash}, {"date", format_utc(f.date)}});
        j["issues"].push_back(std::move(ji));
    }
    j["commits"] = json::array();
    for (const auto& c : d.commits) {
        json jc;
        jc["hash"] = c.hash;
        jc["parents"] = c.parents;
        jc["author"] = c.author_id;
        jc["timestamp"] = format_utc(c.timestamp);
        jc["message"] = c.message;
        jc["files"] = json::array();
        for (const auto& fd : c.file_diffs)
            jc["files"].push_back(diff_to_json(fd));
        j["commits"].push_back(std::move(jc));
    }
    return j.dump(1) + "\n";
}

ProjectSnapshot snapshot_from_json(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(fmt::format("snapshot JSON syntax error at line {}, column {}: {}", line, col, e.what()));
    }
    Reader root(j, "$");
    const auto version = root.at("format_version").integer();
    if (version != snapshot_format_version)
        root.at("format_version").fail(fmt::format("unsupported version {}", version));
    SnapshotData d;
    d.repo_id = root.at("repo").str();
    d.captured_at = root.at("captured_at").time();
    if (root.has("default_branch"))
        d.default_branch = root.at("default_branch").str();
    d.head = root.has("head") ? root.at("head").str() : std::string{};
    d.bug_labels = root.at("bug_labels").string_set();
    if (root.has("external_parents"))
        d.external_parents = root.at("external_parents").string_set();
    for (const auto& r : root.at("issues").items())
        d.issues.push_back(read_issue(r));
    for (const auto& r : root.at("commits").items())
        d.commits.push_back(read_commit(r));
    return ProjectSnapshot(std::move(d));
}

ProjectSnapshot load_snapshot(const std::filesystem::path& path)
{
    return snapshot_from_json(read_file(path));
}

void save_snapshot(const ProjectSnapshot& snapshot, const std::filesystem::path& path)
{
    write_file_atomic(path, snapshot_to_json(snapshot));
}

}  // namespace bugmine
