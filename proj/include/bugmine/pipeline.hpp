#pragma once

#include "bugmine/dataset.hpp"
#include "bugmine/filter.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bugmine {

class UnknownCommitError : public Error {
public:
    enum class Reason { never_existed, unreachable };

    UnknownCommitError(const std::string& hash, Reason reason);
    Reason reason() const { return reason_; }
    const std::string& hash() const { return hash_; }

private:
    std::string hash_;
    Reason reason_;
};

/// Read-only access to commit trees of a local clone through git plumbing;
/// the working copy is never touched. Thread-safe.
class GitCheckout {
public:
    explicit GitCheckout(std::filesystem::path repo);

    /// Throws UnknownCommitError when the hash names no commit, or a commit
    /// no ref reaches.
    void require(const std::string& hash) const;

    /// Regular files of the commit's tree, path -> blob id.
    std::map<std::string, std::string> list(const std::string& hash) const;
    /// Contents of the given blobs, in one `git cat-file --batch` round trip.
    std::map<std::string, std::string> read_blobs(const std::vector<std::string>& blob_ids) const;
    /// Whole tree of a commit, path -> contents.
    std::map<std::string, std::string> read_tree(const std::string& hash) const;

    /// Lazily loading view of one commit; `prefetch` filters the paths read
    /// in the first batch.
    SourceTree tree(const std::string& hash, std::function<bool(const std::string&)> prefetch = {}) const;

    const std::filesystem::path& repo() const { return repo_; }

private:
    std::string git(std::vector<std::string> args) const;

    std::filesystem::path repo_;
    mutable std::once_flag reachable_once_;
    mutable std::set<std::string> reachable_;
};

struct PipelineConfig {
    std::filesystem::path out_dir = "bugmine-out";
    std::optional<std::filesystem::path> repo;      ///< local clone (checkout provider)
    std::optional<std::filesystem::path> snapshot;  ///< existing snapshot file
    std::optional<std::filesystem::path> issues;    ///< issue list for building the snapshot from git
    std::string repo_id = "local/project";
    std::string branch = "master";
    std::set<std::string> bug_labels{"bug"};
    bool network = false;  ///< allow fetching from the hosting service
    std::string api_url = "https://api.github.com";

    std::vector<std::string> exclude_globs{"**/test/**"};
    bool ignore_comment_only = false;
    std::vector<FilterStrategy> filters{std::begin(all_filter_strategies), std::end(all_filter_strategies)};
    std::vector<std::string> levels{"file", "class", "method", "projected"};
    std::vector<std::string> algorithms{"one_r",       "naive_bayes", "logistic",
                                        "decision_tree", "random_tree", "random_forest"};
    std::uint64_t seed = 1;
    int folds = 10;
    int repeats = 1;
    int jobs = 1;
};

/// Rejected configuration; maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A failed stage; code is the process exit code (3 data, 4 other).
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause, int code);
    const std::string& stage() const { return stage_; }
    int code() const { return code_; }

private:
    std::string stage_;
    int code_;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_data = 3;
inline constexpr int exit_stage = 4;

inline constexpr const char* stage_names[] = {"fetch", "link", "analyze", "build", "filter", "evaluate", "stats"};

struct StageReport {
    std::string stage;
    std::string status;  ///< "ran" or "cached"
};

struct PipelineReport {
    std::vector<StageReport> stages;
    std::filesystem::path manifest;
};

/// Checks the configuration; throws ConfigError.
void validate_config(const PipelineConfig& config);

/// Runs one stage, reusing its outputs when the inputs are unchanged.
StageReport run_stage(const PipelineConfig& config, const std::string& stage);

/// Runs every stage in order and writes the manifest. Throws StageError.
PipelineReport run_pipeline(const PipelineConfig& config);

/// "<sha256>  <relative path>" for every artifact under out_dir, sorted.
std::string build_manifest(const std::filesystem::path& out_dir);

}  // namespace bugmine
