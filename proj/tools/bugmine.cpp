#include "bugmine/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

using namespace bugmine;

namespace {

struct Options {
    std::string out = "bugmine-out";
    std::string repo, from_git, snapshot, issues;
    std::string repo_id = "local/project";
    std::string branch = "master";
    std::vector<std::string> bug_labels{"bug"};
    bool network = false;
    std::string api_url = "https://api.github.com";
    std::vector<std::string> exclude{"**/test/**"};
    bool ignore_comment_only = false;
    std::vector<std::string> filters{"none", "removal", "subtract", "single", "gcf"};
    std::vector<std::string> levels{"file", "class", "method", "projected"};
    std::vector<std::string> algos{"one_r", "naive_bayes", "logistic", "decision_tree", "random_tree", "random_forest"};
    std::uint64_t seed = 1;
    int folds = 10;
    int repeats = 1;
    int jobs = 1;
    bool verbose = false;
    std::vector<std::string> combine;
};

PipelineConfig to_config(const Options& o)
{
    PipelineConfig c;
    c.out_dir = o.out;
    if (!o.repo.empty())
        c.repo = o.repo;
    if (!o.from_git.empty())
        c.repo = o.from_git;
    if (!o.snapshot.empty())
        c.snapshot = o.snapshot;
    if (!o.issues.empty())
        c.issues = o.issues;
    c.repo_id = o.repo_id;
    c.branch = o.branch;
    c.bug_labels = {o.bug_labels.begin(), o.bug_labels.end()};
    c.network = o.network;
    c.api_url = o.api_url;
    c.exclude_globs = o.exclude;
    c.ignore_comment_only = o.ignore_comment_only;
    c.filters.clear();
    for (const auto& f : o.filters) {
        try {
            c.filters.push_back(filter_strategy_from_string(f));
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    c.levels = o.levels;
    c.algorithms = o.algos;
    c.seed = o.seed;
    c.folds = o.folds;
    c.repeats = o.repeats;
    c.jobs = o.jobs;
    return c;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bug dataset builder: mines issue-linked fixes, extracts per-element metrics, filters and evaluates"};
    app.set_config("--config", "", "TOML or INI file; keys are the long option names");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("-o,--out", o.out, "Output directory")->capture_default_str();
    app.add_option("--repo", o.repo, "Local clone used for checkouts");
    app.add_option("--snapshot", o.snapshot, "Existing snapshot file");
    app.add_option("--repo-id", o.repo_id, "owner/name of the hosted repository")->capture_default_str();
    app.add_option("--branch", o.branch, "Main development branch")->capture_default_str();
    app.add_option("--bug-label", o.bug_labels, "Issue labels that mark bugs")->capture_default_str();
    app.add_flag("--network", o.network, "Allow fetching from the hosting service");
    app.add_option("--api-url", o.api_url, "Hosting service API base URL")->capture_default_str();
    app.add_option("--exclude", o.exclude, "Globs of paths left out of analysis")->capture_default_str();
    app.add_flag("--ignore-comment-only", o.ignore_comment_only, "Do not map changes that only touch comments");
    app.add_option("--filter", o.filters, "none, removal, subtract, single, gcf")->capture_default_str();
    app.add_option("--level", o.levels, "file, class, method, projected")->capture_default_str();
    app.add_option("--algo", o.algos, "Learners to evaluate")->capture_default_str();
    app.add_option("--seed", o.seed, "Seed for filtering, folds and learners")->capture_default_str();
    app.add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
    app.add_option("--repeats", o.repeats, "Cross-validation repeats")->capture_default_str();
    app.add_option("-j,--jobs", o.jobs, "Worker threads for analysis")->capture_default_str();
    app.add_flag("-v,--verbose", o.verbose, "Debug logging");

    auto* fetch = app.add_subcommand("fetch", "Create the snapshot");
    fetch->add_option("--from-git", o.from_git, "Build the snapshot from a local clone");
    fetch->add_option("--issues", o.issues, "Issue list (JSON) for --from-git");
    app.add_subcommand("link", "Classify commits and plan the analysis");
    app.add_subcommand("analyze", "Analyze planned commits");
    auto* build = app.add_subcommand("build", "Build the per-level datasets");
    build->add_option("--combine", o.combine, "Concatenate the given dataset directories into --out instead");
    app.add_subcommand("filter", "Apply the filtering strategies");
    app.add_subcommand("evaluate", "Cross-validate the learners");
    app.add_subcommand("stats", "Significance tests over the results");
    auto* run = app.add_subcommand("run", "Run every stage");
    run->add_option("--from-git", o.from_git, "Build the snapshot from a local clone");
    run->add_option("--issues", o.issues, "Issue list (JSON) for --from-git");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }
    // Logs go to stderr; stdout carries the stage report only.
    spdlog::set_default_logger(spdlog::stderr_color_mt("bugmine"));
    spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);
    spdlog::set_pattern("%l: %v");

    try {
        const auto config = to_config(o);
        const auto* sub = app.get_subcommands().front();
        const auto name = sub->get_name();
        if (name == "build" && !o.combine.empty()) {
            std::vector<std::filesystem::path> dirs(o.combine.begin(), o.combine.end());
            combine_csv(dirs, config.out_dir);
            return exit_ok;
        }
        if (name == "run") {
            const auto report = run_pipeline(config);
            for (const auto& s : report.stages)
                fmt::print("{:<9} {}\n", s.stage, s.status);
            fmt::print("manifest  {}\n", report.manifest.string());
            return exit_ok;
        }
        validate_config(config);
        const auto report = run_stage(config, name);
        fmt::print("{:<9} {}\n", report.stage, report.status);
        return exit_ok;
    } catch (const ConfigError& e) {
        spdlog::error("configuration: {}", e.what());
        return exit_config;
    } catch (const StageError& e) {
        spdlog::error("{}", e.what());
        return e.code();
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return exit_data;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_stage;
    }
}
