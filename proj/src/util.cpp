#include "bugmine/util.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bugmine {

namespace {

int parse_int(std::string_view text, std::string_view whole)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError(fmt::format("bad timestamp '{}'", whole));
    return v;
}

}  // namespace

Timestamp parse_utc(std::string_view text)
{
    // 2020-01-31T12:34:56Z
    if (text.size() < 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
        text[16] != ':')
        throw ParseError(fmt::format("bad timestamp '{}'", text));
    auto tail = text.substr(19);
    if (tail != "Z" && tail != "+00:00")
        throw ParseError(fmt::format("timestamp '{}' is not UTC", text));
    using namespace std::chrono;
    const year_month_day ymd{year{parse_int(text.substr(0, 4), text)},
                             month{static_cast<unsigned>(parse_int(text.substr(5, 2), text))},
                             day{static_cast<unsigned>(parse_int(text.substr(8, 2), text))}};
    if (!ymd.ok())
        throw ParseError(fmt::format("bad date in '{}'", text));
    const int hh = parse_int(text.substr(11, 2), text);
    const int mm = parse_int(text.substr(14, 2), text);
    const int ss = parse_int(text.substr(17, 2), text);
    if (hh > 23 || mm > 59 || ss > 60)
        throw ParseError(fmt::format("bad time in '{}'", text));
    return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_utc(Timestamp t)
{
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", int(ymd.year()), unsigned(ymd.month()),
                       unsigned(ymd.day()), hms.hours().count(), hms.minutes().count(),
                       hms.seconds().count());
}

namespace {

bool glob_segment(std::string_view pat, std::string_view text)
{
    if (pat.empty())
        return text.empty();
    if (pat[0] == '*') {
        for (std::size_t i = 0; i <= text.size(); ++i) {
            if (i > 0 && text[i - 1] == '/')
                return false;
            if (glob_segment(pat.substr(1), text.substr(i)))
                return true;
        }
        return false;
    }
    if (text.empty())
        return false;
    if (pat[0] == '?' ? text[0] != '/' : pat[0] == text[0])
        return glob_segment(pat.substr(1), text.substr(1));
    return false;
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path)
{
    if (pattern.starts_with("**/")) {
        auto rest = pattern.substr(3);
        if (glob_match(rest, path))
            return true;
        for (std::size_t i = 0; i < path.size(); ++i)
            if (path[i] == '/' && glob_match(rest, path.substr(i + 1)))
                return true;
        return false;
    }
    if (pattern == "**")
        return true;
    auto star = pattern.find("/**");
    if (star != std::string_view::npos) {
        // "a/**" and "a/**/b"
        auto head = pattern.substr(0, star);
        auto tail = pattern.substr(star + 1);
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (path[i] != '/')
                continue;
            if (glob_segment(head, path.substr(0, i)) && glob_match(tail, path.substr(i + 1)))
                return true;
        }
        return false;
    }
    return glob_segment(pattern, path);
}

bool any_glob_match(std::span<const std::string> patterns, std::string_view path)
{
    for (const auto& p : patterns)
        if (glob_match(p, path))
            return true;
    return false;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError(fmt::format("cannot write '{}'", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw IoError(fmt::format("write failed for '{}'", tmp.string()));
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError(fmt::format("cannot rename into '{}': {}", path.string(), ec.message()));
    }
}

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i)
        hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

bool is_hex_hash(std::string_view s)
{
    if (s.size() != 40)
        return false;
    for (char c : s)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
            return false;
    return true;
}

std::vector<std::string> split_lines(std::string_view text)
{
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input,
                          const std::optional<std::filesystem::path>& cwd)
{
    if (argv.empty())
        throw Error("run_process: empty argv");
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
        throw IoError(fmt::format("pipe: {}", std::strerror(errno)));

    std::vector<char*> args;
    for (const auto& a : argv)
        args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    const pid_t pid = fork();
    if (pid < 0)
        throw IoError(fmt::format("fork: {}", std::strerror(errno)));
    if (pid == 0) {
        dup2(in_pipe[0], 0);
        dup2(out_pipe[1], 1);
        dup2(err_pipe[1], 2);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
            close(fd);
        if (cwd && chdir(cwd->c_str()) != 0)
            _exit(126);
        execvp(args[0], args.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);

    ProcessResult result;
    std::size_t written = 0;
    int in_fd = in_pipe[1];
    if (input.empty()) {
        close(in_fd);
        in_fd = -1;
    }
    bool out_open = true, err_open = true;
    char buf[65536];
    while (out_open || err_open) {
        pollfd fds[3];
        nfds_t n = 0;
        if (out_open)
            fds[n++] = {out_pipe[0], POLLIN, 0};
        if (err_open)
            fds[n++] = {err_pipe[0], POLLIN, 0};
        if (in_fd >= 0)
            fds[n++] = {in_fd, POLLOUT, 0};
        if (poll(fds, n, -1) < 0) {
            if (errno == EINTR)
                continue;
            break;
        }
        for (nfds_t i = 0; i < n; ++i) {
            if (fds[i].revents == 0)
                continue;
            if (fds[i].fd == in_fd) {
                auto w = write(in_fd, input.data() + written, input.size() - written);
                if (w > 0)
                    written += static_cast<std::size_t>(w);
                if (w < 0 || written == input.size()) {
                    close(in_fd);
                    in_fd = -1;
                }
                continue;
            }
            auto r = read(fds[i].fd, buf, sizeof buf);
            auto& sink = fds[i].fd == out_pipe[0] ? result.out : result.err;
            if (r > 0) {
                sink.append(buf, static_cast<std::size_t>(r));
            } else {
                (fds[i].fd == out_pipe[0] ? out_open : err_open) = false;
            }
        }
    }
    if (in_fd >= 0)
        close(in_fd);
    close(out_pipe[0]);
    close(err_pipe[0]);
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace bugmine
