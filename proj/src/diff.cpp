#include "bugmine/diff.hpp"

#include "bugmine/java_structure.hpp"
#include "bugmine/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>

namespace bugmine::diff {

namespace {

struct Line {
    std::string_view text;  // without the trailing '\n'
    std::size_t offset = 0;
};

std::vector<Line> lines_of(std::string_view text)
{
    std::vector<Line> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        auto end = nl == std::string_view::npos ? text.size() : nl;
        out.push_back({text.substr(start, end - start), start});
        if (nl == std::string_view::npos)
            break;
        start = nl + 1;
    }
    return out;
}

bool parse_number(std::string_view& s, int& value)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || value < 0)
        return false;
    s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
    return true;
}

bool parse_range(std::string_view& s, int& start, int& len)
{
    if (!parse_number(s, start))
        return false;
    len = 1;
    if (!s.empty() && s.front() == ',') {
        s.remove_prefix(1);
        if (!parse_number(s, len))
            return false;
    }
    return true;
}

// "@@ -a,b +c,d @@ optional section heading"
bool parse_hunk_header(std::string_view line, Hunk& h)
{
    if (!line.starts_with("@@ -"))
        return false;
    line.remove_prefix(4);
    if (!parse_range(line, h.old_start, h.old_len))
        return false;
    if (!line.starts_with(" +"))
        return false;
    line.remove_prefix(2);
    if (!parse_range(line, h.new_start, h.new_len))
        return false;
    return line.starts_with(" @@") || line == " @@";
}

[[noreturn]] void fail(const Line& line, std::string_view why)
{
    throw ParseError(fmt::format("diff parse error at byte {}: {}: '{}'", line.offset, why, line.text));
}

// Reads one hunk body starting at lines[i] (the header line). Returns the
// index of the first line after the hunk.
std::size_t read_hunk(const std::vector<Line>& lines, std::size_t i, Hunk& hunk)
{
    if (!parse_hunk_header(lines[i].text, hunk))
        fail(lines[i], "malformed hunk header");
    int old_left = hunk.old_len;
    int new_left = hunk.new_len;
    ++i;
    while (i < lines.size() && (old_left > 0 || new_left > 0)) {
        const auto& l = lines[i];
        auto text = l.text;
        char tag = text.empty() ? ' ' : text.front();
        auto body = text.empty() ? std::string_view{} : text.substr(1);
        switch (tag) {
        case ' ':
            if (old_left == 0 || new_left == 0)
                fail(l, "context line exceeds hunk header counts");
            hunk.lines.push_back({LineTag::context, std::string(body), false});
            --old_left;
            --new_left;
            break;
        case '-':
            if (old_left == 0)
                fail(l, "deleted line exceeds hunk header counts");
            hunk.lines.push_back({LineTag::del, std::string(body), false});
            --old_left;
            break;
        case '+':
            if (new_left == 0)
                fail(l, "added line exceeds hunk header counts");
            hunk.lines.push_back({LineTag::add, std::string(body), false});
            --new_left;
            break;
        case '\\':
            if (hunk.lines.empty())
                fail(l, "no-newline marker before any line");
            hunk.lines.back().no_newline = true;
            break;
        default:
            fail(l, "hunk body shorter than its header counts");
        }
        ++i;
    }
    if (old_left > 0 || new_left > 0)
        fail(lines[std::min(i, lines.size()) - 1], "hunk truncated before its header counts were met");
    // A marker may follow the final line.
    if (i < lines.size() && lines[i].text.starts_with("\\")) {
        hunk.lines.back().no_newline = true;
        ++i;
    }
    return i;
}

std::string strip_timestamp(std::string_view path)
{
    auto tab = path.find('\t');
    if (tab != std::string_view::npos)
        path = path.substr(0, tab);
    while (!path.empty() && path.back() == ' ')
        path.remove_suffix(1);
    if (path.size() >= 2 && path.front() == '"' && path.back() == '"')
        path = path.substr(1, path.size() - 2);
    return std::string(path);
}

std::string strip_git_prefix(std::string path, bool git_style)
{
    if (git_style && path != dev_null && path.size() > 2 && (path.starts_with("a/") || path.starts_with("b/")))
        return path.substr(2);
    return path;
}

void check_order(const FileDiff& fd, const Line& where)
{
    for (std::size_t k = 1; k < fd.hunks.size(); ++k)
        if (fd.hunks[k].old_start < fd.hunks[k - 1].old_start)
            fail(where, "hunks out of order");
}

}  // namespace

std::vector<FileDiff> parse_unified_diff(std::string_view text, std::vector<Skipped>* skipped)
{
    const auto lines = lines_of(text);
    std::vector<FileDiff> files;
    bool git_style = false;
    FileDiff* current = nullptr;
    // Paths announced by "diff --git" until ---/+++ confirm them.
    std::string git_old, git_new;
    std::size_t i = 0;

    auto start_git_file = [&] {
        files.push_back({});
        current = &files.back();
        current->old_path = git_old;
        current->new_path = git_new;
    };

    while (i < lines.size()) {
        const auto& l = lines[i];
        auto t = l.text;
        if (t.starts_with("diff --git ")) {
            git_style = true;
            auto rest = t.substr(11);
            auto sep = rest.find(" b/");
            if (sep == std::string_view::npos)
                fail(l, "malformed diff --git header");
            git_old = strip_git_prefix(std::string(rest.substr(0, sep)), true);
            git_new = strip_git_prefix(std::string(rest.substr(sep + 1)), true);
            start_git_file();
            ++i;
            continue;
        }
        if (current && git_style && current->hunks.empty()) {
            if (t.starts_with("new file mode")) {
                current->old_path = std::string(dev_null);
                ++i;
                continue;
            }
            if (t.starts_with("deleted file mode")) {
                current->new_path = std::string(dev_null);
                ++i;
                continue;
            }
            if (t.starts_with("rename from ")) {
                current->old_path = std::string(t.substr(12));
                ++i;
                continue;
            }
            if (t.starts_with("rename to ")) {
                current->new_path = std::string(t.substr(10));
                ++i;
                continue;
            }
            if (t.starts_with("Binary files ") || t.starts_with("GIT binary patch")) {
                current->binary = true;
                ++i;
                continue;
            }
            if (t.starts_with("index ") || t.starts_with("old mode") || t.starts_with("new mode") ||
                t.starts_with("similarity index") || t.starts_with("dissimilarity index") ||
                t.starts_with("copy from") || t.starts_with("copy to")) {
                ++i;
                continue;
            }
        }
        if (t.starts_with("--- ") && i + 1 < lines.size() && lines[i + 1].text.starts_with("+++ ")) {
            auto old_path = strip_git_prefix(strip_timestamp(t.substr(4)), git_style);
            auto new_path = strip_git_prefix(strip_timestamp(lines[i + 1].text.substr(4)), git_style);
            if (old_path.empty() || new_path.empty())
                fail(l, "empty path in file header");
            if (!(current && git_style && current->hunks.empty())) {
                files.push_back({});
                current = &files.back();
            }
            current->old_path = old_path;
            current->new_path = new_path;
            i += 2;
            continue;
        }
        if (t.starts_with("@@")) {
            if (!current)
                fail(l, "hunk outside of a file diff");
            Hunk h;
            i = read_hunk(lines, i, h);
            current->hunks.push_back(std::move(h));
            check_order(*current, l);
            continue;
        }
        if (t.starts_with("--- ") || t.starts_with("+++ "))
            fail(l, "incomplete file header");
        if (skipped)
            skipped->push_back({l.offset, std::string(t)});
        // Anything else ends the current file section.
        if (current && !current->hunks.empty())
            current = nullptr;
        ++i;
    }
    return files;
}

std::vector<Hunk> parse_hunks(std::string_view text)
{
    const auto lines = lines_of(text);
    std::vector<Hunk> hunks;
    std::size_t i = 0;
    while (i < lines.size()) {
        if (!lines[i].text.starts_with("@@"))
            fail(lines[i], "expected hunk header");
        Hunk h;
        i = read_hunk(lines, i, h);
        hunks.push_back(std::move(h));
        if (hunks.size() > 1 && hunks.back().old_start < hunks[hunks.size() - 2].old_start)
            fail(lines[std::min(i, lines.size()) - 1], "hunks out of order");
    }
    return hunks;
}

std::string render_hunks(std::span<const Hunk> hunks)
{
    std::string out;
    for (const auto& h : hunks) {
        out += fmt::format("@@ -{},{} +{},{} @@\n", h.old_start, h.old_len, h.new_start, h.new_len);
        for (const auto& l : h.lines) {
            out += l.tag == LineTag::add ? '+' : l.tag == LineTag::del ? '-' : ' ';
            out += l.text;
            out += '\n';
            if (l.no_newline)
                out += "\\ No newline at end of file\n";
        }
    }
    return out;
}

std::string render(const FileDiff& diff)
{
    return fmt::format("--- {}\n+++ {}\n", diff.old_path, diff.new_path) + render_hunks(diff.hunks);
}

std::string apply(std::string_view old_text, const FileDiff& diff)
{
    // Old file as lines that keep their terminators.
    std::vector<std::string_view> old_lines;
    std::size_t start = 0;
    while (start < old_text.size()) {
        auto nl = old_text.find('\n', start);
        auto end = nl == std::string_view::npos ? old_text.size() : nl + 1;
        old_lines.push_back(old_text.substr(start, end - start));
        start = end;
    }
    auto expect = [&](std::size_t idx, const HunkLine& l) {
        if (idx >= old_lines.size())
            throw ParseError(fmt::format("{}: hunk runs past end of old file", diff.old_path));
        auto have = old_lines[idx];
        bool had_newline = have.ends_with('\n');
        if (had_newline)
            have.remove_suffix(1);
        if (have != l.text || had_newline == l.no_newline)
            throw ParseError(fmt::format("{}: old line {} does not match hunk ('{}' vs '{}')", diff.old_path,
                                         idx + 1, have, l.text));
    };

    std::string out;
    out.reserve(old_text.size());
    std::size_t cursor = 0;
    for (const auto& h : diff.hunks) {
        const std::size_t first = h.old_len == 0 ? static_cast<std::size_t>(h.old_start)
                                                 : static_cast<std::size_t>(h.old_start - 1);
        if (first < cursor || first > old_lines.size())
            throw ParseError(fmt::format("{}: hunk @@ -{},{} out of range", diff.old_path, h.old_start, h.old_len));
        for (; cursor < first; ++cursor)
            out += old_lines[cursor];
        for (const auto& l : h.lines) {
            switch (l.tag) {
            case LineTag::context:
                expect(cursor, l);
                out += old_lines[cursor++];
                break;
            case LineTag::del:
                expect(cursor, l);
                ++cursor;
                break;
            case LineTag::add:
                out += l.text;
                if (!l.no_newline)
                    out += '\n';
                break;
            }
        }
    }
    for (; cursor < old_lines.size(); ++cursor)
        out += old_lines[cursor];
    return out;
}

void LineRangeSet::add(int first, int last)
{
    if (first > last)
        std::swap(first, last);
    // Merge with anything overlapping or adjacent.
    auto it = std::lower_bound(ranges_.begin(), ranges_.end(), first,
                               [](const std::pair<int, int>& r, int v) { return r.second + 1 < v; });
    auto stop = it;
    while (stop != ranges_.end() && stop->first <= last + 1) {
        first = std::min(first, stop->first);
        last = std::max(last, stop->second);
        ++stop;
    }
    it = ranges_.erase(it, stop);
    ranges_.insert(it, {first, last});
}

void LineRangeSet::merge(const LineRangeSet& other)
{
    for (const auto& [a, b] : other.ranges_)
        add(a, b);
}

bool LineRangeSet::contains(int line) const
{
    return intersects(line, line);
}

bool LineRangeSet::intersects(int first, int last) const
{
    auto it = std::lower_bound(ranges_.begin(), ranges_.end(), first,
                               [](const std::pair<int, int>& r, int v) { return r.second < v; });
    return it != ranges_.end() && it->first <= last;
}

std::size_t LineRangeSet::line_count() const
{
    std::size_t n = 0;
    for (const auto& [a, b] : ranges_)
        n += static_cast<std::size_t>(b - a + 1);
    return n;
}

LineRangeSet modified_ranges(const FileDiff& diff, Side side)
{
    LineRangeSet set;
    for (const auto& h : diff.hunks) {
        int old_line = h.old_start;
        int new_line = h.new_start;
        for (const auto& l : h.lines) {
            switch (l.tag) {
            case LineTag::context:
                ++old_line;
                ++new_line;
                break;
            case LineTag::del:
                if (side == Side::old_side)
                    set.add(old_line);
                ++old_line;
                break;
            case LineTag::add:
                if (side == Side::new_side)
                    set.add(new_line);
                ++new_line;
                break;
            }
        }
    }
    return set;
}

std::set<std::string> elements_touched(const LineRangeSet& ranges, std::span<const SourceElement> elements)
{
    std::set<std::string> out;
    for (const auto& e : elements)
        if (ranges.intersects(e.start_line, e.end_line))
            out.insert(e.fqn);
    return out;
}

}  // namespace bugmine::diff
