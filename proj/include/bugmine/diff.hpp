#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bugmine {

struct SourceElement;

namespace diff {

enum class LineTag { context, add, del };

struct HunkLine {
    LineTag tag = LineTag::context;
    std::string text;          ///< line content without the leading tag or newline
    bool no_newline = false;   ///< followed by "\ No newline at end of file"

    bool operator==(const HunkLine&) const = default;
};

struct Hunk {
    int old_start = 0;
    int old_len = 0;
    int new_start = 0;
    int new_len = 0;
    std::vector<HunkLine> lines;

    bool operator==(const Hunk&) const = default;
};

inline constexpr std::string_view dev_null = "/dev/null";

struct FileDiff {
    std::string old_path;
    std::string new_path;
    std::vector<Hunk> hunks;
    bool binary = false;

    bool is_added() const { return old_path == dev_null; }
    bool is_deleted() const { return new_path == dev_null; }
    /// Renames map as delete of the old file plus add of the new one.
    bool is_rename() const { return !is_added() && !is_deleted() && old_path != new_path; }

    bool operator==(const FileDiff&) const = default;
};

/// A section of input the parser skipped (text outside any file diff).
struct Skipped {
    std::size_t offset = 0;
    std::string line;
};

/// Parses plain or git-style unified diff text. Throws ParseError naming the
/// offending line on a malformed hunk header or a hunk whose body does not
/// reconcile with its header counts.
std::vector<FileDiff> parse_unified_diff(std::string_view text, std::vector<Skipped>* skipped = nullptr);

/// Parses a hunks-only patch (what hosting APIs return per file).
std::vector<Hunk> parse_hunks(std::string_view text);

std::string render_hunks(std::span<const Hunk> hunks);
std::string render(const FileDiff& diff);

/// Applies the hunks to `old_text`; throws ParseError if context or deleted
/// lines do not match.
std::string apply(std::string_view old_text, const FileDiff& diff);

/// Disjoint, sorted, inclusive 1-based line intervals.
class LineRangeSet {
public:
    LineRangeSet() = default;

    void add(int line) { add(line, line); }
    void add(int first, int last);
    void merge(const LineRangeSet& other);

    bool empty() const { return ranges_.empty(); }
    bool contains(int line) const;
    bool intersects(int first, int last) const;
    std::size_t line_count() const;
    const std::vector<std::pair<int, int>>& ranges() const { return ranges_; }

    bool operator==(const LineRangeSet&) const = default;

private:
    std::vector<std::pair<int, int>> ranges_;
};

enum class Side { old_side, new_side };

/// Lines deleted (old side) or added (new side); context never counts.
LineRangeSet modified_ranges(const FileDiff& diff, Side side);

/// FQNs of every element whose [start_line, end_line] meets a range.
std::set<std::string> elements_touched(const LineRangeSet& ranges, std::span<const SourceElement> elements);

}  // namespace diff
}  // namespace bugmine
