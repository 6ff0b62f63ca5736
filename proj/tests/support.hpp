#pragma once

#include "bugmine/util.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

namespace testsupport {

inline const std::filesystem::path fixtures = BUGMINE_FIXTURES;
inline const std::filesystem::path cli = BUGMINE_CLI;

/// Directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "bugmine")
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

/// Builds the 12-commit fixture repository at dir; its issue list lands next to it.
inline void make_fixture_repo(const std::filesystem::path& dir)
{
    auto r = bugmine::run_process({"sh", (fixtures / "make_fixture_repo.sh").string(), dir.string()});
    if (r.exit_code != 0)
        throw std::runtime_error("fixture repo script failed: " + r.err);
}

inline std::filesystem::path issues_of(const std::filesystem::path& repo)
{
    return repo.string() + ".issues.json";
}

inline std::string git(const std::filesystem::path& repo, std::vector<std::string> args)
{
    args.insert(args.begin(), "git");
    auto r = bugmine::run_process(args, {}, repo);
    if (r.exit_code != 0)
        throw std::runtime_error("git failed: " + r.err);
    return r.out;
}

/// Commit hashes of the fixture repo, oldest first (C1 at index 0).
inline std::vector<std::string> fixture_commits(const std::filesystem::path& repo)
{
    auto lines = bugmine::split_lines(git(repo, {"rev-list", "--reverse", "master"}));
    std::vector<std::string> out;
    for (auto& l : lines)
        if (!l.empty())
            out.push_back(l);
    return out;
}

/// Repository with `n` commits of random edits on master, written through
/// git fast-import. `binary` adds a file of random bytes.
inline void make_random_repo(const std::filesystem::path& dir, int n, std::uint64_t seed, bool binary)
{
    std::filesystem::create_directories(dir);
    git(dir, {"init", "-q", "-b", "master"});
    std::mt19937_64 rng(seed);
    std::vector<std::string> names{"a.txt", "src/B.java", "src/deep/c d.java", "docs/readme.md", "src/deep/E.java"};
    if (binary)
        names.push_back("bin.dat");
    std::map<std::string, std::string> files;
    std::string stream;
    for (int i = 1; i <= n; ++i) {
        std::string ops;
        const int edits = 1 + static_cast<int>(rng() % 3);
        for (int e = 0; e < edits; ++e) {
            const auto& name = names[rng() % names.size()];
            if (files.count(name) && rng() % 4 == 0) {
                files.erase(name);
                ops += "D " + name + "\n";
                continue;
            }
            // Mostly small edits of the previous version, so diffs keep context.
            auto body = files.count(name) ? files[name] : std::string();
            const auto edits_in_file = 1 + rng() % 4;
            for (std::size_t k = 0; k < edits_in_file; ++k) {
                const auto at = body.empty() ? 0 : rng() % (body.size() + 1);
                const auto cut = body.empty() ? 0 : std::min<std::size_t>(rng() % 20, body.size() - at);
                std::string insert;
                const auto len = rng() % 40;
                for (std::size_t c = 0; c < len; ++c)
                    insert += name == "bin.dat" ? static_cast<char>(rng() % 256) : "abc \n{}"[rng() % 7];
                body.replace(at, cut, insert);
            }
            files[name] = body;
            ops += fmt::format("M 100644 inline {}\ndata {}\n{}\n", name, body.size(), body);
        }
        const std::string msg = fmt::format("commit {}", i);
        stream += fmt::format("commit refs/heads/master\nmark :{}\ncommitter Dev <dev@example.com> {} +0000\ndata {}\n{}\n",
                              i, 1577836800 + i * 60, msg.size(), msg);
        if (i > 1)
            stream += fmt::format("from :{}\n", i - 1);
        stream += ops + "\n";
    }
    auto r = bugmine::run_process({"git", "fast-import", "--quiet"}, stream, dir);
    if (r.exit_code != 0)
        throw std::runtime_error("git fast-import failed: " + r.err);
}

}  // namespace testsupport
