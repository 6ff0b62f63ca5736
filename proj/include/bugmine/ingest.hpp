#pragma once

#include "bugmine/diff.hpp"
#include "bugmine/util.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bugmine {

inline constexpr int snapshot_format_version = 1;

enum class IssueState { open, closed };

struct FixingCommit {
    std::string hash;
    Timestamp date;

    bool operator==(const FixingCommit&) const = default;
};

struct IssueRecord {
    std::int64_t id = 0;
    IssueState state = IssueState::open;
    Timestamp created_at{};
    std::optional<Timestamp> closed_at;
    std::set<std::string> labels;
    std::vector<FixingCommit> fixing_commits;  ///< ordered by date

    bool operator==(const IssueRecord&) const = default;
};

struct CommitRecord {
    std::string hash;
    std::vector<std::string> parents;
    std::string author_id;
    Timestamp timestamp{};
    std::string message;
    std::vector<diff::FileDiff> file_diffs;  ///< against the first parent

    bool operator==(const CommitRecord&) const = default;
};

/// Mutable contents of a snapshot, validated when frozen into ProjectSnapshot.
struct SnapshotData {
    std::string repo_id;
    Timestamp captured_at{};
    std::string default_branch = "master";
    std::string head;  ///< tip of the default branch
    std::set<std::string> bug_labels{"bug"};
    std::vector<IssueRecord> issues;
    std::vector<CommitRecord> commits;
    std::set<std::string> external_parents;  ///< parents outside the captured history

    bool operator==(const SnapshotData&) const = default;
};

/// Every violated invariant, one message per offender (empty when valid).
std::vector<std::string> snapshot_violations(const SnapshotData& data);

/// Immutable, validated capture of one repository. Safe to share across threads.
class ProjectSnapshot {
public:
    /// Throws ValidationError listing offending issue/commit ids.
    explicit ProjectSnapshot(SnapshotData data);

    const SnapshotData& data() const { return data_; }
    const std::string& repo_id() const { return data_.repo_id; }
    Timestamp captured_at() const { return data_.captured_at; }
    const std::string& head() const { return data_.head; }
    const std::set<std::string>& bug_labels() const { return data_.bug_labels; }
    const std::vector<IssueRecord>& issues() const { return data_.issues; }
    const std::vector<CommitRecord>& commits() const { return data_.commits; }

    /// nullptr when the hash is not part of the snapshot.
    const CommitRecord* commit(const std::string& hash) const;

    bool operator==(const ProjectSnapshot& o) const { return data_ == o.data_; }

private:
    SnapshotData data_;
    std::map<std::string, std::size_t> by_hash_;
};

std::string snapshot_to_json(const ProjectSnapshot& snapshot);
ProjectSnapshot snapshot_from_json(std::string_view text);

/// Throws ParseError with line:column and field path, or ValidationError.
ProjectSnapshot load_snapshot(const std::filesystem::path& path);
void save_snapshot(const ProjectSnapshot& snapshot, const std::filesystem::path& path);

/// Issues carrying a bug label; closed ones without fixing commits are dropped.
std::vector<IssueRecord> filter_bug_issues(const std::vector<IssueRecord>& issues,
                                           const std::set<std::string>& bug_labels);

// ---- hosting-service client

class AuthError : public Error {
public:
    using Error::Error;
};

class RateLimitError : public Error {
public:
    using Error::Error;
};

struct FetchOptions {
    std::string base_url = "https://api.github.com";
    std::set<std::string> bug_labels{"bug"};
    int per_page = 100;
    int max_retries = 5;
    std::chrono::seconds max_wait{3600};
    /// Called instead of sleeping; tests inject a recorder.
    std::function<void(std::chrono::seconds)> sleeper;
    /// Clock used for rate-limit reset arithmetic and captured_at.
    std::function<Timestamp()> now;
};

/// Name of the environment variable holding the API token.
inline constexpr const char* token_env_var = "GITHUB_TOKEN";

/// Downloads issues, commits, and per-commit diffs through the REST v3 API and
/// writes the snapshot atomically to `out`. Concurrent calls for the same
/// repo_id share one download.
ProjectSnapshot fetch_remote(const std::string& repo_id, const std::string& token,
                             const std::filesystem::path& out, const FetchOptions& options = {});

/// Builds a snapshot from a local clone plus an issue list (JSON array in the
/// snapshot's issue format; fixing commits may be bare hashes).
ProjectSnapshot snapshot_from_git(const std::filesystem::path& repo, const std::string& branch,
                                  const std::filesystem::path& issues_file, const std::string& repo_id,
                                  const std::set<std::string>& bug_labels);

}  // namespace bugmine
