#include "bugmine/pipeline.hpp"

#include "bugmine/csv.hpp"
#include "bugmine/learn.hpp"
#include "bugmine/linker.hpp"
#include "bugmine/stats.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <future>

namespace bugmine {

namespace fs = std::filesystem;

StageError::StageError(std::string stage, const std::string& cause, int code)
    : Error(fmt::format("stage {} failed: {}", stage, cause)), stage_(std::move(stage)), code_(code)
{}

namespace {

struct Layout {
    fs::path root;

    fs::path snapshot() const { return root / "snapshot" / "snapshot.json"; }
    fs::path plan() const { return root / "plan.txt"; }
    fs::path timelines() const { return root / "timelines.txt"; }
    fs::path analysis_dir() const { return root / "analysis"; }
    fs::path analysis(const std::string& hash) const
    {
        return analysis_dir() / fmt::format("{}-v{}.json", hash, analyzer_version);
    }
    fs::path dataset(FilterStrategy s) const
    {
        return root / "dataset" / (s == FilterStrategy::none ? std::string("full") : std::string(to_string(s)));
    }
    fs::path drops() const { return root / "dataset" / "drops.txt"; }
    fs::path results_csv() const { return root / "eval" / "results.csv"; }
    fs::path results_txt() const { return root / "eval" / "results.txt"; }
    fs::path stats_dir() const { return root / "stats"; }
    fs::path stamp(const std::string& stage) const { return root / ".stamps" / stage; }
    fs::path manifest() const { return root / "manifest.txt"; }
};

std::string file_digest(const fs::path& p)
{
    return fs::exists(p) ? sha256_hex(read_file(p)) : std::string("absent");
}

void write_output(const fs::path& path, std::string_view content)
{
    fs::create_directories(path.parent_path());
    write_file_atomic(path, content);
}

std::string join(const std::vector<std::string>& v, std::string_view sep)
{
    return fmt::format("{}", fmt::join(v, sep));
}

// ---- stage bookkeeping

/// A stamp holds the input key and the digest of every output it produced.
bool stamp_valid(const Layout& L, const std::string& stage, const std::string& key)
{
    const auto p = L.stamp(stage);
    if (!fs::exists(p))
        return false;
    const auto lines = split_lines(read_file(p));
    if (lines.empty() || lines.front() != key)
        return false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        const auto sp = lines[i].find(' ');
        if (file_digest(L.root / lines[i].substr(sp + 1)) != lines[i].substr(0, sp))
            return false;
    }
    return true;
}

void write_stamp(const Layout& L, const std::string& stage, const std::string& key,
                 const std::vector<fs::path>& outputs)
{
    std::string text = key + "\n";
    for (const auto& o : outputs)
        text += fmt::format("{} {}\n", file_digest(o), fs::relative(o, L.root).generic_string());
    write_output(L.stamp(stage), text);
}

std::string key_of(const std::vector<std::string>& parts)
{
    return sha256_hex(join(parts, "\x1f"));
}

std::string head_of(const fs::path& repo, const std::string& branch)
{
    auto r = run_process({"git", "rev-parse", "--verify", branch + "^{commit}"}, {}, repo);
    if (r.exit_code != 0)
        throw ValidationError(fmt::format("branch '{}' not found in {}", branch, repo.string()), {branch});
    return r.out;
}

// ---- fetch

std::string fetch_key(const PipelineConfig& c)
{
    std::vector<std::string> parts{"fetch", c.repo_id, join({c.bug_labels.begin(), c.bug_labels.end()}, ",")};
    if (c.snapshot)
        parts.push_back("file:" + file_digest(*c.snapshot));
    else if (c.repo && c.issues)
        parts.insert(parts.end(), {"git:" + head_of(*c.repo, c.branch), file_digest(*c.issues), c.branch});
    else
        parts.push_back("remote:" + c.api_url);
    return key_of(parts);
}

std::vector<fs::path> run_fetch(const PipelineConfig& c, const Layout& L)
{
    fs::create_directories(L.snapshot().parent_path());
    if (c.snapshot) {
        save_snapshot(load_snapshot(*c.snapshot), L.snapshot());
    } else if (c.repo && c.issues) {
        save_snapshot(snapshot_from_git(*c.repo, c.branch, *c.issues, c.repo_id, c.bug_labels), L.snapshot());
    } else if (c.network) {
        const char* token = std::getenv(token_env_var);
        FetchOptions o;
        o.base_url = c.api_url;
        o.bug_labels = c.bug_labels;
        fetch_remote(c.repo_id, token ? token : "", L.snapshot(), o);
    } else {
        throw ValidationError("no snapshot available: pass --snapshot, --repo with --issues, or enable --network", {});
    }
    return {L.snapshot()};
}

// ---- link

std::string timelines_text(const std::vector<BugFixTimeline>& timelines)
{
    std::string out;
    for (const auto& t : timelines) {
        out += fmt::format("issue {}\n", t.issue_id);
        if (t.degraded)
            out += fmt::format("  degraded: {}\n", t.note);
        out += fmt::format("  orange: {}\n", t.orange);
        out += fmt::format("  green: {}\n", join(t.green, " "));
        out += fmt::format("  gray: {}\n", join(t.gray, " "));
        out += fmt::format("  blue: {}\n", join(t.blue, " "));
    }
    return out;
}

std::vector<fs::path> run_link(const Layout& L)
{
    const auto snap = load_snapshot(L.snapshot());
    const History history(snap);
    const auto timelines = build_timelines(snap);
    for (const auto& t : timelines)
        if (t.degraded)
            spdlog::warn("issue {}: {}", t.issue_id, t.note);
    write_output(L.plan(), plan_to_text(select_analysis_commits(timelines, &history)));
    write_output(L.timelines(), timelines_text(timelines));
    return {L.plan(), L.timelines()};
}

// ---- analyze

std::vector<fs::path> run_analyze(const PipelineConfig& c, const Layout& L)
{
    if (!c.repo)
        throw ConfigError("the analyze stage needs --repo (a local clone for checkouts)");
    const auto snap = load_snapshot(L.snapshot());
    const auto plan = plan_from_text(read_file(L.plan()));
    const GitCheckout checkout(*c.repo);
    AnalysisOptions opts;
    opts.exclude_globs = c.exclude_globs;

    // Cached analyses are only valid for the same exclusion globs.
    const auto options_file = L.analysis_dir() / "options.txt";
    const auto options_text = join(c.exclude_globs, "\n") + "\n";
    if (fs::exists(options_file) && read_file(options_file) != options_text)
        fs::remove_all(L.analysis_dir());
    write_output(options_file, options_text);

    auto analyze_one = [&](const PlannedCommit& pc) {
        const auto path = L.analysis(pc.hash);
        if (fs::exists(path)) {
            try {
                auto cached = analysis_from_json(read_file(path));
                if (cached.hash == pc.hash && (cached.full || !pc.full_analysis))
                    return;
            } catch (const ParseError&) {
            }
        }
        const auto* commit = snap.commit(pc.hash);
        if (!commit)
            throw ValidationError(fmt::format("planned commit {} is not in the snapshot", pc.hash), {pc.hash});
        auto wanted = [&](const std::string& p) { return is_analyzed_path(p, opts); };
        const auto tree = checkout.tree(pc.hash, wanted);
        std::optional<SourceTree> parent;
        if (!commit->parents.empty())
            parent = checkout.tree(commit->parents.front(), wanted);
        auto a = analyze_commit(*commit, pc.full_analysis, tree, parent ? &*parent : nullptr, opts);
        write_output(path, analysis_to_json(a));
    };

    const auto jobs = static_cast<std::size_t>(std::max(1, c.jobs));
    for (std::size_t i = 0; i < plan.commits.size(); i += jobs) {
        std::vector<std::future<void>> batch;
        for (std::size_t j = i; j < std::min(plan.commits.size(), i + jobs); ++j)
            batch.push_back(std::async(std::launch::async, analyze_one, std::cref(plan.commits[j])));
        for (auto& f : batch)
            f.get();
    }
    std::vector<fs::path> outputs{options_file};
    for (const auto& pc : plan.commits)
        outputs.push_back(L.analysis(pc.hash));
    return outputs;
}

// ---- build

std::vector<fs::path> run_build(const PipelineConfig& c, const Layout& L)
{
    const auto snap = load_snapshot(L.snapshot());
    const auto plan = plan_from_text(read_file(L.plan()));
    const History history(snap);
    const auto timelines = build_timelines(snap);
    AnalysisMap analyses;
    for (const auto& pc : plan.commits)
        analyses.emplace(pc.hash, analysis_from_json(read_file(L.analysis(pc.hash))));
    TouchOptions topts;
    topts.ignore_comment_only = c.ignore_comment_only;
    std::vector<IssueTouchSet> touches;
    for (const auto& t : timelines)
        if (!t.degraded)
            touches.push_back(accumulate_issue_touches(t, snap, analyses, topts));
    std::vector<DropRecord> drops;
    const auto entries = build_entries(touches, timelines, plan, analyses, history, &drops);
    const auto dir = L.dataset(FilterStrategy::none);
    export_csv(entries, dir);
    write_output(L.drops(), drops_to_text(drops));
    std::vector<fs::path> outputs{L.drops()};
    for (const char* name : csv_names)
        outputs.push_back(dir / name);
    return outputs;
}

// ---- filter

std::vector<fs::path> run_filter(const PipelineConfig& c, const Layout& L)
{
    const auto full = L.dataset(FilterStrategy::none);
    const auto files = read_entries_csv(full / "file.csv", ElementKind::file);
    const auto classes = read_entries_csv(full / "class.csv", ElementKind::class_);
    const auto methods = read_entries_csv(full / "method-p.csv", ElementKind::method);
    std::vector<fs::path> outputs;
    for (auto s : c.filters) {
        if (s == FilterStrategy::none)
            continue;
        const auto dir = L.dataset(s);
        fs::create_directories(dir);
        export_csv(apply_filter(files, s, c.seed), ElementKind::file, false, dir / "file.csv");
        export_csv(apply_filter(classes, s, c.seed), ElementKind::class_, false, dir / "class.csv");
        const auto m = apply_filter(methods, s, c.seed);
        export_csv(m, ElementKind::method, false, dir / "method.csv");
        export_csv(m, ElementKind::method, true, dir / "method-p.csv");
        for (const char* name : csv_names)
            outputs.push_back(dir / name);
    }
    return outputs;
}

// ---- evaluate

const std::vector<std::string> results_header{"filter", "level", "algorithm", "k",      "repeats",   "tp",
                                              "fp",     "tn",    "fn",        "precision", "recall", "f_measure",
                                              "status"};

std::vector<fs::path> run_evaluate(const PipelineConfig& c, const Layout& L)
{
    std::string out_csv = csv::join_row(results_header);
    std::string out_txt = fmt::format("{:<10} {:<10} {:<14} {:>9} {:>9} {:>9}  {}\n", "filter", "level", "algorithm",
                                      "precision", "recall", "f_measure", "status");
    for (auto s : c.filters) {
        const auto dir = L.dataset(s);
        for (const auto& level : c.levels) {
            const bool projected = level == "projected";
            const auto kind = projected ? ElementKind::method : element_kind_from_string(level);
            const auto file = projected ? "method-p.csv" : level == "class" ? "class.csv" : level + ".csv";
            const auto labeled = learn::label(read_entries_csv(dir / file, kind));
            for (const auto& algo : c.algorithms) {
                std::vector<std::string> row{dir.filename().string(), level, algo};
                std::string status = "ok";
                std::optional<learn::EvalResult> res;
                try {
                    if (labeled.feature_names.empty())
                        throw ValidationError("no complete metric columns", {});
                    learn::CvOptions o;
                    o.k = c.folds;
                    o.repeats = c.repeats;
                    o.seed = c.seed;
                    res = learn::cross_validate(algo, labeled.instances, o);
                    if (projected)
                        res = learn::project_result(*res, labeled.instances);
                } catch (const ValidationError& e) {
                    status = fmt::format("skipped: {}", e.what());
                }
                if (res) {
                    row.insert(row.end(), {std::to_string(res->k), std::to_string(res->repeats),
                                           std::to_string(res->matrix.tp), std::to_string(res->matrix.fp),
                                           std::to_string(res->matrix.tn), std::to_string(res->matrix.fn),
                                           fmt::format("{}", res->scores.precision),
                                           fmt::format("{}", res->scores.recall),
                                           fmt::format("{}", res->scores.f_measure)});
                    out_txt += fmt::format("{:<10} {:<10} {:<14} {:>9.4f} {:>9.4f} {:>9.4f}  {}\n", row[0], level,
                                           algo, res->scores.precision, res->scores.recall, res->scores.f_measure,
                                           status);
                } else {
                    row.insert(row.end(), 9, "");
                    out_txt += fmt::format("{:<10} {:<10} {:<14} {:>9} {:>9} {:>9}  {}\n", row[0], level, algo, "-",
                                           "-", "-", status);
                }
                row.push_back(status);
                out_csv += csv::join_row(row);
            }
        }
    }
    write_output(L.results_csv(), out_csv);
    write_output(L.results_txt(), out_txt);
    return {L.results_csv(), L.results_txt()};
}

// ---- stats

std::vector<fs::path> run_stats(const Layout& L)
{
    const auto table = csv::read_table(L.results_csv().string());
    const auto cf = table.column("filter"), cl = table.column("level"), ca = table.column("algorithm"),
               cfm = table.column("f_measure"), cs = table.column("status");
    std::vector<std::string> filters;
    std::map<std::pair<std::string, std::string>, std::map<std::string, double>> cells;  // (level, algo) -> filter -> F
    for (const auto& r : table.rows) {
        if (std::find(filters.begin(), filters.end(), r[cf]) == filters.end())
            filters.push_back(r[cf]);
        if (r[cs] == "ok")
            cells[{r[cl], r[ca]}][r[cf]] = std::stod(r[cfm]);
    }

    std::string friedman_txt, nemenyi_txt;
    std::vector<std::vector<double>> rows;
    for (const auto& [key, by_filter] : cells) {
        if (key.first == "projected" || by_filter.size() != filters.size())
            continue;
        std::vector<double> row;
        for (const auto& f : filters)
            row.push_back(by_filter.at(f));
        rows.push_back(std::move(row));
    }
    if (rows.size() >= 2 && filters.size() >= 2 && filters.size() <= 20) {
        const stats::PairedSampleMatrix m(rows);
        const auto fr = stats::friedman(m);
        friedman_txt = fmt::format("treatments: {}\nsamples: {}\nstatistic: {:.6f}\np_value: {:.6g}\n\n",
                                   join(filters, " "), rows.size(), fr.statistic, fr.p_value);
        const auto nm = stats::nemenyi(m, 0.05);
        nemenyi_txt = fmt::format("q_crit(0.05, {}): {:.4f}\ncritical difference: {:.4f}\n\n", filters.size(),
                                  nm.q_crit, nm.critical_difference);
        nemenyi_txt += stats::format_nemenyi_table(nm, filters);
    } else {
        friedman_txt = fmt::format("insufficient data: {} complete samples over {} treatments\n", rows.size(),
                                   filters.size());
        nemenyi_txt = friedman_txt;
    }

    std::string wilcoxon_txt;
    std::vector<double> proj, cls;
    for (const auto& f : filters)
        for (const auto& [key, by_filter] : cells)
            if (key.first == "projected" && by_filter.count(f)) {
                auto it = cells.find({"class", key.second});
                if (it != cells.end() && it->second.count(f)) {
                    proj.push_back(by_filter.at(f));
                    cls.push_back(it->second.at(f));
                }
            }
    try {
        const auto w = stats::wilcoxon_signed_rank(proj, cls);
        wilcoxon_txt = fmt::format("projected vs class F-measure\npairs: {}\nnonzero: {}\nz: {:.6f}\np_value: {:.6g}\n"
                                   "significant (|z| >= {}): {}\n",
                                   proj.size(), w.n, w.z, w.p_value, stats::z_critical,
                                   std::fabs(w.z) >= stats::z_critical ? "yes" : "no");
        if (w.n > 0) {
            const auto e = stats::effect_size_r(w.z, w.n);
            wilcoxon_txt += fmt::format("effect size r: {:.4f} ({})\n", e.r, e.label);
        }
    } catch (const ValidationError& e) {
        wilcoxon_txt = fmt::format("insufficient data: {}\n", e.what());
    }
    const auto fpath = L.stats_dir() / "friedman.txt", npath = L.stats_dir() / "nemenyi.txt",
               wpath = L.stats_dir() / "wilcoxon.txt";
    write_output(fpath, friedman_txt);
    write_output(npath, nemenyi_txt);
    write_output(wpath, wilcoxon_txt);
    return {fpath, npath, wpath};
}

std::string digest_of_dir(const fs::path& dir)
{
    if (!fs::exists(dir))
        return "absent";
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files)
        acc += fs::relative(f, dir).generic_string() + ":" + file_digest(f) + "\n";
    return sha256_hex(acc);
}

std::string stage_key(const PipelineConfig& c, const Layout& L, const std::string& stage)
{
    if (stage == "fetch")
        return fetch_key(c);
    if (stage == "link")
        return key_of({stage, file_digest(L.snapshot())});
    if (stage == "analyze")
        return key_of({stage, file_digest(L.plan()), file_digest(L.snapshot()), join(c.exclude_globs, ","),
                       std::to_string(analyzer_version), c.repo ? head_of(*c.repo, c.branch) : ""});
    if (stage == "build")
        return key_of({stage, file_digest(L.snapshot()), file_digest(L.plan()), digest_of_dir(L.analysis_dir()),
                       c.ignore_comment_only ? "ignore-comment-only" : ""});
    std::vector<std::string> filters;
    for (auto f : c.filters)
        filters.emplace_back(to_string(f));
    if (stage == "filter")
        return key_of({stage, digest_of_dir(L.dataset(FilterStrategy::none)), join(filters, ","),
                       std::to_string(c.seed)});
    if (stage == "evaluate")
        return key_of({stage, digest_of_dir(L.root / "dataset"), join(filters, ","), join(c.levels, ","),
                       join(c.algorithms, ","), std::to_string(c.seed), std::to_string(c.folds),
                       std::to_string(c.repeats)});
    if (stage == "stats")
        return key_of({stage, file_digest(L.results_csv())});
    throw ConfigError(fmt::format("unknown stage '{}'", stage));
}

}  // namespace

void validate_config(const PipelineConfig& c)
{
    if (c.out_dir.empty())
        throw ConfigError("output directory must be set");
    if (c.levels.empty())
        throw ConfigError("at least one level must be selected");
    for (const auto& l : c.levels)
        if (l != "file" && l != "class" && l != "method" && l != "projected")
            throw ConfigError(fmt::format("unknown level '{}'", l));
    for (const auto& a : c.algorithms)
        if (!learn::is_algorithm(a))
            throw ConfigError(fmt::format("unknown algorithm '{}'", a));
    if (c.folds < 2)
        throw ConfigError("folds must be at least 2");
    if (c.repeats < 1)
        throw ConfigError("repeats must be at least 1");
    if (c.jobs < 1)
        throw ConfigError("jobs must be at least 1");
    if (c.filters.empty())
        throw ConfigError("at least one filter strategy must be selected");
    if (c.snapshot && !fs::exists(*c.snapshot))
        throw ConfigError(fmt::format("snapshot {} does not exist", c.snapshot->string()));
    if (c.repo && !fs::exists(*c.repo))
        throw ConfigError(fmt::format("repository {} does not exist", c.repo->string()));
    if (c.issues && !fs::exists(*c.issues))
        throw ConfigError(fmt::format("issue list {} does not exist", c.issues->string()));
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec)
        throw ConfigError(fmt::format("output directory {} is not writable: {}", c.out_dir.string(), ec.message()));
}

StageReport run_stage(const PipelineConfig& c, const std::string& stage)
{
    const Layout L{c.out_dir};
    try {
        const auto key = stage_key(c, L, stage);
        if (stamp_valid(L, stage, key)) {
            spdlog::info("{}: cached", stage);
            return {stage, "cached"};
        }
        std::vector<fs::path> outputs;
        if (stage == "fetch")
            outputs = run_fetch(c, L);
        else if (stage == "link")
            outputs = run_link(L);
        else if (stage == "analyze")
            outputs = run_analyze(c, L);
        else if (stage == "build")
            outputs = run_build(c, L);
        else if (stage == "filter")
            outputs = run_filter(c, L);
        else if (stage == "evaluate")
            outputs = run_evaluate(c, L);
        else
            outputs = run_stats(L);
        write_stamp(L, stage, key, outputs);
        spdlog::info("{}: done", stage);
        return {stage, "ran"};
    } catch (const ConfigError&) {
        throw;
    } catch (const StageError&) {
        throw;
    } catch (const ParseError& e) {
        throw StageError(stage, e.what(), exit_data);
    } catch (const ValidationError& e) {
        throw StageError(stage, e.what(), exit_data);
    } catch (const UnknownCommitError& e) {
        throw StageError(stage, e.what(), exit_data);
    } catch (const std::exception& e) {
        throw StageError(stage, e.what(), exit_stage);
    }
}

std::string build_manifest(const fs::path& out_dir)
{
    std::vector<std::string> rel;
    for (const auto& e : fs::recursive_directory_iterator(out_dir)) {
        if (!e.is_regular_file())
            continue;
        auto r = fs::relative(e.path(), out_dir).generic_string();
        if (r.starts_with(".stamps/") || r == "manifest.txt" || r.ends_with(".tmp"))
            continue;
        rel.push_back(std::move(r));
    }
    std::sort(rel.begin(), rel.end());
    std::string out;
    for (const auto& r : rel)
        out += fmt::format("{}  {}\n", sha256_hex(read_file(out_dir / r)), r);
    return out;
}

PipelineReport run_pipeline(const PipelineConfig& config)
{
    validate_config(config);
    PipelineReport report;
    for (const char* stage : stage_names)
        report.stages.push_back(run_stage(config, stage));
    const Layout L{config.out_dir};
    write_output(L.manifest(), build_manifest(config.out_dir));
    report.manifest = L.manifest();
    return report;
}

}  // namespace bugmine
