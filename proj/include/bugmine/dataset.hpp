#pragma once

#include "bugmine/diff.hpp"
#include "bugmine/ingest.hpp"
#include "bugmine/java_structure.hpp"
#include "bugmine/linker.hpp"
#include "bugmine/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bugmine {

/// Bumped whenever analyzer output changes; part of the analysis cache key.
inline constexpr int analyzer_version = 1;

/// Read access to the file tree of one commit.
struct SourceTree {
    std::function<std::vector<std::string>()> list;
    std::function<std::optional<std::string>(const std::string&)> read;
};

struct AnalysisOptions {
    std::vector<std::string> exclude_globs{"**/test/**"};
};

/// True for .java files not excluded by the globs.
bool is_analyzed_path(const std::string& path, const AnalysisOptions& options);

struct ElementState {
    SourceElement element;
    std::optional<metrics::MetricsVector> metrics;  ///< present for full analyses

    bool operator==(const ElementState&) const = default;
};

/// One analyzed file pair of a commit's diff, with elements of both versions.
struct ChangedFile {
    std::string old_path;
    std::string new_path;
    std::vector<SourceElement> old_elements;
    std::vector<SourceElement> new_elements;
    /// Every changed line on both sides holds no code (comments or blanks).
    bool comment_only = false;

    bool operator==(const ChangedFile&) const = default;
};

struct CommitAnalysis {
    std::string hash;
    bool full = false;
    /// Full analysis: every analyzed file of the tree. Positions-only: the
    /// new side of the changed files, without metrics.
    std::vector<ElementState> elements;
    std::vector<ChangedFile> changes;
    std::vector<std::string> diagnostics;

    const ElementState* find(ElementKind kind, const std::string& fqn) const;
    bool operator==(const CommitAnalysis&) const = default;
};

/// `parent` is used for the pre-image of changed files; pass nullptr for root commits.
CommitAnalysis analyze_commit(const CommitRecord& commit, bool full, const SourceTree& tree,
                              const SourceTree* parent, const AnalysisOptions& options = {});

std::string analysis_to_json(const CommitAnalysis& analysis);
CommitAnalysis analysis_from_json(std::string_view text);

using AnalysisMap = std::map<std::string, CommitAnalysis>;

struct IssueTouchSet {
    std::int64_t issue_id = 0;
    std::map<ElementKind, std::set<std::string>> fqns_by_level;

    bool empty() const;
    bool contains(ElementKind kind, const std::string& fqn) const;
    bool operator==(const IssueTouchSet&) const = default;
};

struct TouchOptions {
    bool ignore_comment_only = false;
};

/// Union over the green commits of the elements touched on both diff sides,
/// closed upward to classes and files. Throws Error naming a green commit
/// without analysis.
IssueTouchSet accumulate_issue_touches(const BugFixTimeline& timeline, const ProjectSnapshot& snapshot,
                                       const AnalysisMap& analyses, const TouchOptions& options = {});

struct DatasetEntry {
    std::string commit_hash;
    std::string fqn;
    ElementKind level = ElementKind::file;
    std::optional<std::string> parent_fqn;
    metrics::MetricsVector metrics;
    int bug_count = 0;

    bool operator==(const DatasetEntry&) const = default;
};

struct DropRecord {
    std::int64_t issue_id = 0;
    std::string commit_hash;
    ElementKind level = ElementKind::file;
    std::string fqn;
    std::string reason;
};

/// Buggy entries at each orange commit and fixed entries at each last green
/// commit, one per (commit, element); sorted by (history position, level, fqn).
std::vector<DatasetEntry> build_entries(const std::vector<IssueTouchSet>& touch_sets,
                                        const std::vector<BugFixTimeline>& timelines, const AnalysisPlan& plan,
                                        const AnalysisMap& analyses, const History& history,
                                        std::vector<DropRecord>* drops = nullptr);

/// Commits whose state counts as buggy for an issue: blue, orange, greens
/// before the last one, and grays.
std::set<std::string> buggy_interval(const BugFixTimeline& timeline);

std::string drops_to_text(const std::vector<DropRecord>& drops);

/// Names of the per-level CSVs.
inline constexpr const char* csv_names[] = {"file.csv", "class.csv", "method.csv", "method-p.csv"};

std::vector<std::string> csv_header(ElementKind level, bool with_parent);
std::string entries_to_csv(const std::vector<DatasetEntry>& entries, ElementKind level, bool with_parent);

/// Writes file.csv, class.csv, method.csv and method-p.csv into dir.
void export_csv(const std::vector<DatasetEntry>& entries, const std::filesystem::path& dir);
void export_csv(const std::vector<DatasetEntry>& entries, ElementKind level, bool with_parent,
                const std::filesystem::path& path);

/// Reads back a CSV written by export_csv.
std::vector<DatasetEntry> read_entries_csv(const std::filesystem::path& path, ElementKind level);

/// Concatenates per-project CSV directories into `out` (the combined "all" set).
void combine_csv(const std::vector<std::filesystem::path>& project_dirs, const std::filesystem::path& out);

}  // namespace bugmine
