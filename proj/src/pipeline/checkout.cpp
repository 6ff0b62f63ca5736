#include "bugmine/pipeline.hpp"

#include <fmt/format.h>

#include <memory>

namespace bugmine {

UnknownCommitError::UnknownCommitError(const std::string& hash, Reason reason)
    : Error(fmt::format("commit {} {}", hash,
                        reason == Reason::never_existed ? "never existed in the repository"
                                                        : "exists but is unreachable from any ref")),
      hash_(hash), reason_(reason)
{}

GitCheckout::GitCheckout(std::filesystem::path repo) : repo_(std::move(repo))
{
    if (!std::filesystem::exists(repo_))
        throw IoError(fmt::format("repository {} does not exist", repo_.string()));
}

std::string GitCheckout::git(std::vector<std::string> args) const
{
    args.insert(args.begin(), {"git", "-c", "core.quotepath=off"});
    auto r = run_process(args, {}, repo_);
    if (r.exit_code != 0)
        throw IoError(fmt::format("git {} failed ({}): {}", args[3], r.exit_code, r.err));
    return std::move(r.out);
}

void GitCheckout::require(const std::string& hash) const
{
    if (!is_hex_hash(hash))
        throw UnknownCommitError(hash, UnknownCommitError::Reason::never_existed);
    auto r = run_process({"git", "cat-file", "-t", hash}, {}, repo_);
    if (r.exit_code != 0 || r.out != "commit\n")
        throw UnknownCommitError(hash, UnknownCommitError::Reason::never_existed);
    std::call_once(reachable_once_, [&] {
        for (auto& line : split_lines(git({"rev-list", "--all"})))
            if (!line.empty())
                reachable_.insert(line);
    });
    if (!reachable_.count(hash))
        throw UnknownCommitError(hash, UnknownCommitError::Reason::unreachable);
}

std::map<std::string, std::string> GitCheckout::list(const std::string& hash) const
{
    require(hash);
    const auto out = git({"ls-tree", "-r", "-z", "--full-tree", hash});
    std::map<std::string, std::string> files;
    std::size_t pos = 0;
    while (pos < out.size()) {
        auto end = out.find('\0', pos);
        if (end == std::string::npos)
            end = out.size();
        std::string_view entry(out.data() + pos, end - pos);
        pos = end + 1;
        // "<mode> <type> <object>\t<path>"
        const auto tab = entry.find('\t');
        if (tab == std::string_view::npos)
            throw ParseError(fmt::format("unexpected ls-tree entry '{}'", entry));
        const auto meta = entry.substr(0, tab);
        const auto s1 = meta.find(' '), s2 = meta.rfind(' ');
        if (meta.substr(s1 + 1, s2 - s1 - 1) != "blob")
            continue;  // submodules
        files.emplace(std::string(entry.substr(tab + 1)), std::string(meta.substr(s2 + 1)));
    }
    return files;
}

std::map<std::string, std::string> GitCheckout::read_blobs(const std::vector<std::string>& ids) const
{
    std::map<std::string, std::string> blobs;
    if (ids.empty())
        return blobs;
    std::string input;
    for (const auto& id : ids)
        input += id + "\n";
    auto r = run_process({"git", "cat-file", "--batch"}, input, repo_);
    if (r.exit_code != 0)
        throw IoError(fmt::format("git cat-file --batch failed ({}): {}", r.exit_code, r.err));
    const auto& out = r.out;
    std::size_t pos = 0;
    for (const auto& id : ids) {
        const auto nl = out.find('\n', pos);
        if (nl == std::string::npos)
            throw ParseError("truncated cat-file output");
        std::string_view header(out.data() + pos, nl - pos);
        if (header.ends_with(" missing"))
            throw IoError(fmt::format("object {} missing", id));
        const auto sp = header.rfind(' ');
        const auto size = static_cast<std::size_t>(std::stoull(std::string(header.substr(sp + 1))));
        blobs.emplace(id, out.substr(nl + 1, size));
        pos = nl + 1 + size + 1;
    }
    return blobs;
}

std::map<std::string, std::string> GitCheckout::read_tree(const std::string& hash) const
{
    const auto files = list(hash);
    std::vector<std::string> ids;
    for (const auto& [path, id] : files)
        ids.push_back(id);
    const auto blobs = read_blobs(ids);
    std::map<std::string, std::string> tree;
    for (const auto& [path, id] : files)
        tree.emplace(path, blobs.at(id));
    return tree;
}

SourceTree GitCheckout::tree(const std::string& hash, std::function<bool(const std::string&)> prefetch) const
{
    struct State {
        std::mutex mutex;
        std::map<std::string, std::string> listing;
        std::map<std::string, std::string> cache;
        bool loaded = false;
    };
    auto state = std::make_shared<State>();
    state->listing = list(hash);

    SourceTree t;
    t.list = [state] {
        std::vector<std::string> paths;
        for (const auto& [p, id] : state->listing)
            paths.push_back(p);
        return paths;
    };
    t.read = [this, state, prefetch](const std::string& path) -> std::optional<std::string> {
        std::lock_guard lock(state->mutex);
        auto it = state->listing.find(path);
        if (it == state->listing.end())
            return std::nullopt;
        if (!state->loaded) {
            state->loaded = true;
            std::vector<std::string> ids;
            for (const auto& [p, id] : state->listing)
                if (!prefetch || prefetch(p))
                    ids.push_back(id);
            for (auto& [id, text] : read_blobs(ids))
                state->cache.emplace(id, std::move(text));
        }
        auto c = state->cache.find(it->second);
        if (c == state->cache.end())
            c = state->cache.emplace(it->second, read_blobs({it->second}).at(it->second)).first;
        return c->second;
    };
    return t;
}

}  // namespace bugmine
