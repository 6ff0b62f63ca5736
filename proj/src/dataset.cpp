#include "bugmine/dataset.hpp"

#include "bugmine/csv.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <tuple>

namespace bugmine {

using nlohmann::json;

bool is_analyzed_path(const std::string& path, const AnalysisOptions& options)
{
    return path.size() > 5 && path.ends_with(".java") && !any_glob_match(options.exclude_globs, path);
}

const ElementState* CommitAnalysis::find(ElementKind kind, const std::string& fqn) const
{
    for (const auto& e : elements)
        if (e.element.kind == kind && e.element.fqn == fqn)
            return &e;
    return nullptr;
}

// ---- analysis

namespace {

bool no_code_on(const metrics::FileAnalysis& f, const diff::LineRangeSet& lines)
{
    for (auto [a, b] : lines.ranges())
        for (int l = a; l <= b; ++l)
            if (f.has_code(l))
                return false;
    return true;
}

}  // namespace

CommitAnalysis analyze_commit(const CommitRecord& commit, bool full, const SourceTree& tree,
                              const SourceTree* parent, const AnalysisOptions& options)
{
    CommitAnalysis out;
    out.hash = commit.hash;
    out.full = full;

    std::map<std::string, std::unique_ptr<metrics::FileAnalysis>> new_files;
    auto load_new = [&](const std::string& path) -> const metrics::FileAnalysis* {
        auto it = new_files.find(path);
        if (it != new_files.end())
            return it->second.get();
        auto text = tree.read(path);
        if (!text) {
            out.diagnostics.push_back(fmt::format("{}: missing from tree", path));
            return nullptr;
        }
        auto fa = std::make_unique<metrics::FileAnalysis>(path, std::move(*text));
        if (fa->structure().degraded)
            for (const auto& d : fa->structure().diagnostics)
                out.diagnostics.push_back(fmt::format("{}: {}", path, d));
        return new_files.emplace(path, std::move(fa)).first->second.get();
    };

    if (full) {
        auto paths = tree.list();
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) {
            if (!is_analyzed_path(p, options))
                continue;
            const auto* fa = load_new(p);
            if (!fa)
                continue;
            auto values = metrics::compute_all(*fa);
            for (const auto& e : fa->structure().elements) {
                ElementState s{e, std::nullopt};
                if (auto it = values.find(e.fqn); it != values.end())
                    s.metrics = it->second;
                out.elements.push_back(std::move(s));
            }
        }
    }

    for (const auto& fd : commit.file_diffs) {
        const bool old_ok = !fd.is_added() && is_analyzed_path(fd.old_path, options);
        const bool new_ok = !fd.is_deleted() && is_analyzed_path(fd.new_path, options);
        if (fd.binary || (!old_ok && !new_ok))
            continue;
        ChangedFile cf;
        cf.old_path = fd.old_path;
        cf.new_path = fd.new_path;
        bool comment_only = true;
        if (new_ok) {
            if (const auto* fa = load_new(fd.new_path)) {
                cf.new_elements = fa->structure().elements;
                comment_only = comment_only && no_code_on(*fa, diff::modified_ranges(fd, diff::Side::new_side));
                if (!full)
                    for (const auto& e : cf.new_elements)
                        out.elements.push_back({e, std::nullopt});
            }
        }
        if (old_ok && parent) {
            if (auto text = parent->read(fd.old_path)) {
                metrics::FileAnalysis old_fa(fd.old_path, std::move(*text));
                cf.old_elements = old_fa.structure().elements;
                comment_only = comment_only && no_code_on(old_fa, diff::modified_ranges(fd, diff::Side::old_side));
            } else {
                out.diagnostics.push_back(fmt::format("{}: missing from parent tree", fd.old_path));
            }
        }
        cf.comment_only = comment_only;
        out.changes.push_back(std::move(cf));
    }
    return out;
}

namespace {

json element_to_json(const SourceElement& e)
{
    json j{{"kind", std::string(to_string(e.kind))},
           {"fqn", e.fqn},
           {"path", e.path},
           {"start", e.start_line},
           {"end", e.end_line}};
    if (e.parent_fqn)
        j["parent"] = *e.parent_fqn;
    return j;
}

SourceElement element_from_json(const json& j)
{
    SourceElement e;
    e.kind = element_kind_from_string(j.at("kind").get<std::string>());
    e.fqn = j.at("fqn").get<std::string>();
    e.path = j.at("path").get<std::string>();
    e.start_line = j.at("start").get<int>();
    e.end_line = j.at("end").get<int>();
    if (j.contains("parent"))
        e.parent_fqn = j["parent"].get<std::string>();
    return e;
}

json elements_to_json(const std::vector<SourceElement>& v)
{
    json a = json::array();
    for (const auto& e : v)
        a.push_back(element_to_json(e));
    return a;
}

std::vector<SourceElement> elements_from_json(const json& a)
{
    std::vector<SourceElement> v;
    for (const auto& j : a)
        v.push_back(element_from_json(j));
    return v;
}

}  // namespace

std::string analysis_to_json(const CommitAnalysis& a)
{
    json j;
    j["analyzer_version"] = analyzer_version;
    j["hash"] = a.hash;
    j["full"] = a.full;
    j["elements"] = json::array();
    for (const auto& s : a.elements) {
        auto je = element_to_json(s.element);
        if (s.metrics) {
            json values = json::array();
            for (const auto& v : s.metrics->values())
                values.push_back(v ? json(*v) : json(nullptr));
            je["metrics"] = std::move(values);
        }
        j["elements"].push_back(std::move(je));
    }
    j["changes"] = json::array();
    for (const auto& c : a.changes)
        j["changes"].push_back({{"old_path", c.old_path},
                                {"new_path", c.new_path},
                                {"old_elements", elements_to_json(c.old_elements)},
                                {"new_elements", elements_to_json(c.new_elements)},
                                {"comment_only", c.comment_only}});
    j["diagnostics"] = a.diagnostics;
    return j.dump(1) + "\n";
}

CommitAnalysis analysis_from_json(std::string_view text)
{
    try {
        auto j = json::parse(text);
        if (j.at("analyzer_version").get<int>() != analyzer_version)
            throw ParseError("analysis file written by another analyzer version");
        CommitAnalysis a;
        a.hash = j.at("hash").get<std::string>();
        a.full = j.at("full").get<bool>();
        for (const auto& je : j.at("elements")) {
            ElementState s{element_from_json(je), std::nullopt};
            if (je.contains("metrics")) {
                metrics::MetricsVector m(s.element.kind);
                const auto& values = je["metrics"];
                if (values.size() != m.values().size())
                    throw ParseError(fmt::format("analysis of {}: metric count mismatch for {}", a.hash, s.element.fqn));
                for (std::size_t i = 0; i < values.size(); ++i)
                    if (!values[i].is_null())
                        m.values()[i] = values[i].get<double>();
                s.metrics = std::move(m);
            }
            a.elements.push_back(std::move(s));
        }
        for (const auto& jc : j.at("changes"))
            a.changes.push_back({jc.at("old_path").get<std::string>(), jc.at("new_path").get<std::string>(),
                                 elements_from_json(jc.at("old_elements")),
                                 elements_from_json(jc.at("new_elements")), jc.at("comment_only").get<bool>()});
        a.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        return a;
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("invalid analysis file: {}", e.what()));
    }
}

// ---- touches

bool IssueTouchSet::empty() const
{
    return std::all_of(fqns_by_level.begin(), fqns_by_level.end(), [](const auto& kv) { return kv.second.empty(); });
}

bool IssueTouchSet::contains(ElementKind kind, const std::string& fqn) const
{
    auto it = fqns_by_level.find(kind);
    return it != fqns_by_level.end() && it->second.count(fqn) > 0;
}

namespace {

void add_touched(IssueTouchSet& ts, const diff::LineRangeSet& ranges, const std::vector<SourceElement>& elements)
{
    if (ranges.empty())
        return;
    std::map<std::string, const SourceElement*> by_fqn;
    for (const auto& e : elements)
        by_fqn.emplace(e.fqn, &e);
    for (const auto& fqn : diff::elements_touched(ranges, elements)) {
        const auto* e = by_fqn.at(fqn);
        ts.fqns_by_level[e->kind].insert(fqn);
        // Upward closure: owning class and file.
        ts.fqns_by_level[ElementKind::file].insert(e->path);
        if (e->parent_fqn)
            ts.fqns_by_level[ElementKind::class_].insert(*e->parent_fqn);
    }
}

}  // namespace

IssueTouchSet accumulate_issue_touches(const BugFixTimeline& timeline, const ProjectSnapshot& snapshot,
                                       const AnalysisMap& analyses, const TouchOptions& options)
{
    IssueTouchSet ts;
    ts.issue_id = timeline.issue_id;
    for (const auto& g : timeline.green) {
        auto it = analyses.find(g);
        if (it == analyses.end())
            throw Error(fmt::format("issue {}: no analysis for fixing commit {}", timeline.issue_id, g));
        const auto* commit = snapshot.commit(g);
        if (!commit)
            throw Error(fmt::format("issue {}: fixing commit {} not in snapshot", timeline.issue_id, g));
        for (const auto& cf : it->second.changes) {
            if (options.ignore_comment_only && cf.comment_only)
                continue;
            auto fd = std::find_if(commit->file_diffs.begin(), commit->file_diffs.end(), [&](const diff::FileDiff& d) {
                return d.old_path == cf.old_path && d.new_path == cf.new_path;
            });
            if (fd == commit->file_diffs.end())
                throw Error(fmt::format("commit {}: analysis lists {} but the diff does not", g, cf.new_path));
            add_touched(ts, diff::modified_ranges(*fd, diff::Side::old_side), cf.old_elements);
            add_touched(ts, diff::modified_ranges(*fd, diff::Side::new_side), cf.new_elements);
        }
    }
    for (auto it = ts.fqns_by_level.begin(); it != ts.fqns_by_level.end();)
        it = it->second.empty() ? ts.fqns_by_level.erase(it) : std::next(it);
    return ts;
}

// ---- entries

std::set<std::string> buggy_interval(const BugFixTimeline& t)
{
    std::set<std::string> s(t.blue.begin(), t.blue.end());
    if (!t.orange.empty())
        s.insert(t.orange);
    if (!t.green.empty())
        s.insert(t.green.begin(), t.green.end() - 1);
    s.insert(t.gray.begin(), t.gray.end());
    return s;
}

std::vector<DatasetEntry> build_entries(const std::vector<IssueTouchSet>& touch_sets,
                                        const std::vector<BugFixTimeline>& timelines, const AnalysisPlan& plan,
                                        const AnalysisMap& analyses, const History& history,
                                        std::vector<DropRecord>* drops)
{
    std::map<std::int64_t, const BugFixTimeline*> by_issue;
    for (const auto& t : timelines)
        by_issue.emplace(t.issue_id, &t);

    struct Counted {
        const IssueTouchSet* touches;
        std::set<std::string> interval;
    };
    std::vector<Counted> counted;
    for (const auto& ts : touch_sets) {
        auto it = by_issue.find(ts.issue_id);
        if (it == by_issue.end() || it->second->degraded || ts.empty())
            continue;
        counted.push_back({&ts, buggy_interval(*it->second)});
    }
    auto bug_count = [&](const std::string& hash, ElementKind kind, const std::string& fqn) {
        int n = 0;
        for (const auto& c : counted)
            if (c.interval.count(hash) && c.touches->contains(kind, fqn))
                ++n;
        return n;
    };
    auto full_analysis = [&](const std::string& hash, std::int64_t issue) -> const CommitAnalysis& {
        auto it = analyses.find(hash);
        if (it == analyses.end() || !it->second.full)
            throw Error(fmt::format("issue {}: no full analysis for commit {}", issue, hash));
        if (!plan.contains(hash))
            throw Error(fmt::format("issue {}: commit {} is not in the analysis plan", issue, hash));
        return it->second;
    };

    std::map<std::tuple<std::string, ElementKind, std::string>, DatasetEntry> entries;
    auto emit = [&](const std::string& hash, const ElementState& s) {
        auto key = std::make_tuple(hash, s.element.kind, s.element.fqn);
        if (entries.count(key))
            return;
        DatasetEntry e;
        e.commit_hash = hash;
        e.fqn = s.element.fqn;
        e.level = s.element.kind;
        e.parent_fqn = s.element.parent_fqn;
        e.metrics = s.metrics ? *s.metrics : metrics::MetricsVector(s.element.kind);
        e.bug_count = bug_count(hash, e.level, e.fqn);
        entries.emplace(std::move(key), std::move(e));
    };

    for (const auto& c : counted) {
        const auto& t = *by_issue.at(c.touches->issue_id);
        const auto& before = full_analysis(t.orange, t.issue_id);
        const auto& after = full_analysis(t.last_green(), t.issue_id);
        for (const auto& [kind, fqns] : c.touches->fqns_by_level) {
            for (const auto& fqn : fqns) {
                const auto* b = before.find(kind, fqn);
                const auto* a = after.find(kind, fqn);
                if (b)
                    emit(t.orange, *b);
                if (a)
                    emit(t.last_green(), *a);
                else if (drops)
                    drops->push_back({t.issue_id, t.last_green(), kind, fqn,
                                      b ? "removed by the fix" : "present only between fixing commits"});
            }
        }
    }

    std::vector<DatasetEntry> out;
    out.reserve(entries.size());
    for (auto& [k, e] : entries)
        out.push_back(std::move(e));
    std::stable_sort(out.begin(), out.end(), [&](const DatasetEntry& a, const DatasetEntry& b) {
        auto pa = history.position(a.commit_hash).value_or(SIZE_MAX);
        auto pb = history.position(b.commit_hash).value_or(SIZE_MAX);
        const bool ca = history.on_chain(a.commit_hash), cb = history.on_chain(b.commit_hash);
        return std::tie(pa, ca, a.commit_hash, a.level, a.fqn) < std::tie(pb, cb, b.commit_hash, b.level, b.fqn);
    });
    return out;
}

std::string drops_to_text(const std::vector<DropRecord>& drops)
{
    std::string out;
    for (const auto& d : drops)
        out += fmt::format("issue {}\t{}\t{}\t{}\t{}\n", d.issue_id, d.commit_hash, to_string(d.level), d.fqn, d.reason);
    return out;
}

// ---- CSV

std::vector<std::string> csv_header(ElementKind level, bool with_parent)
{
    std::vector<std::string> h{"hash", "fqn"};
    if (with_parent)
        h.emplace_back("parent");
    for (auto id : metrics::columns(level))
        h.emplace_back(id);
    h.emplace_back("bug_count");
    return h;
}

std::string entries_to_csv(const std::vector<DatasetEntry>& entries, ElementKind level, bool with_parent)
{
    std::string out = csv::join_row(csv_header(level, with_parent));
    for (const auto& e : entries) {
        if (e.level != level)
            continue;
        std::vector<std::string> row{e.commit_hash, e.fqn};
        if (with_parent)
            row.push_back(e.parent_fqn.value_or(""));
        for (const auto& v : e.metrics.values())
            row.push_back(metrics::format_value(v));
        row.push_back(std::to_string(e.bug_count));
        out += csv::join_row(row);
    }
    return out;
}

void export_csv(const std::vector<DatasetEntry>& entries, ElementKind level, bool with_parent,
                const std::filesystem::path& path)
{
    write_file_atomic(path, entries_to_csv(entries, level, with_parent));
}

void export_csv(const std::vector<DatasetEntry>& entries, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError(fmt::format("{}: {}", dir.string(), ec.message()));
    export_csv(entries, ElementKind::file, false, dir / "file.csv");
    export_csv(entries, ElementKind::class_, false, dir / "class.csv");
    export_csv(entries, ElementKind::method, false, dir / "method.csv");
    export_csv(entries, ElementKind::method, true, dir / "method-p.csv");
}

std::vector<DatasetEntry> read_entries_csv(const std::filesystem::path& path, ElementKind level)
{
    auto table = csv::read_table(path.string());
    const bool with_parent = table.header.size() > 2 && table.header[2] == "parent";
    if (table.header != csv_header(level, with_parent))
        throw ParseError(fmt::format("{}: header does not match the {} schema", path.string(), to_string(level)));
    const auto ncols = metrics::columns(level).size();
    std::vector<DatasetEntry> out;
    std::size_t line = 1;
    for (const auto& row : table.rows) {
        ++line;
        if (row.size() != table.header.size())
            throw ParseError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), line,
                                         table.header.size(), row.size()));
        DatasetEntry e;
        e.commit_hash = row[0];
        e.fqn = row[1];
        e.level = level;
        std::size_t c = 2;
        if (with_parent) {
            if (!row[2].empty())
                e.parent_fqn = row[2];
            ++c;
        }
        e.metrics = metrics::MetricsVector(level);
        try {
            for (std::size_t i = 0; i < ncols; ++i, ++c)
                if (!row[c].empty())
                    e.metrics.values()[i] = std::stod(row[c]);
            e.bug_count = std::stoi(row[c]);
        } catch (const std::logic_error&) {
            throw ParseError(fmt::format("{}:{}: bad number in column {}", path.string(), line, table.header[c]));
        }
        out.push_back(std::move(e));
    }
    return out;
}

void combine_csv(const std::vector<std::filesystem::path>& project_dirs, const std::filesystem::path& out)
{
    std::filesystem::create_directories(out);
    for (const char* name : csv_names) {
        std::string header;
        std::string body;
        for (const auto& dir : project_dirs) {
            auto text = read_file(dir / name);
            auto nl = text.find('\n');
            auto first = text.substr(0, nl == std::string::npos ? text.size() : nl + 1);
            if (header.empty())
                header = first;
            else if (first != header)
                throw ValidationError(fmt::format("{}: header differs from the other projects", (dir / name).string()),
                                      {(dir / name).string()});
            if (nl != std::string::npos)
                body += text.substr(nl + 1);
        }
        write_file_atomic(out / name, header + body);
    }
}

}  // namespace bugmine
