#pragma once

#include "bugmine/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bugmine {

struct IssueRefs {
    std::set<std::int64_t> ids;
    /// Subset of ids seen only without a word boundary before '#' ("version#2").
    std::set<std::int64_t> low_confidence;
    /// "owner/repo#id" references, recorded and otherwise ignored.
    std::vector<std::string> foreign;
};

struct RefOptions {
    /// Only accept references introduced by a closing keyword ("fixes #3").
    bool keyword_only = false;
};

IssueRefs extract_issue_refs(std::string_view message, const RefOptions& options = {});

/// Position of every commit relative to the first-parent chain from head.
/// Chain commits get their chain index (0 = oldest); commits merged in from
/// side branches take the index of the chain commit that first reaches them.
class History {
public:
    explicit History(const ProjectSnapshot& snapshot);

    const std::vector<std::string>& chain() const { return chain_; }
    /// nullopt when the hash is not reachable from head.
    std::optional<std::size_t> position(const std::string& hash) const;
    bool on_chain(const std::string& hash) const;

private:
    std::vector<std::string> chain_;
    std::map<std::string, std::size_t> position_;
    std::set<std::string> on_chain_;
};

struct BugFixTimeline {
    std::int64_t issue_id = 0;
    std::string orange;
    std::vector<std::string> green;  ///< history order
    std::vector<std::string> gray;
    std::vector<std::string> blue;   ///< history order, ends with orange
    bool degraded = false;
    std::vector<std::string> missing;  ///< unresolvable fixing hashes
    std::string note;                  ///< why the timeline is degraded

    const std::string& last_green() const { return green.back(); }
    bool operator==(const BugFixTimeline&) const = default;
};

BugFixTimeline build_timeline(const IssueRecord& issue, const ProjectSnapshot& snapshot, const History& history);
BugFixTimeline build_timeline(const IssueRecord& issue, const ProjectSnapshot& snapshot);

/// Timelines of every closed issue in the snapshot, ordered by issue id.
std::vector<BugFixTimeline> build_timelines(const ProjectSnapshot& snapshot);

struct PlannedCommit {
    std::string hash;
    bool full_analysis = false;

    bool operator==(const PlannedCommit&) const = default;
};

struct AnalysisPlan {
    std::vector<PlannedCommit> commits;  ///< history order, no duplicates

    bool contains(const std::string& hash) const;
    bool operator==(const AnalysisPlan&) const = default;
};

/// Degraded timelines are skipped. Pass the history to order the result;
/// without it the order of first appearance is kept.
AnalysisPlan select_analysis_commits(const std::vector<BugFixTimeline>& timelines, const History* history = nullptr);

/// One "<hash> full|pos" line per commit.
std::string plan_to_text(const AnalysisPlan& plan);
AnalysisPlan plan_from_text(std::string_view text);

}  // namespace bugmine
