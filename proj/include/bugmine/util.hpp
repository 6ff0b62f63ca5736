#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bugmine {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text or file could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Parsed data violates a documented invariant.
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::vector<std::string> offenders)
        : Error(what), offenders_(std::move(offenders)) {}
    const std::vector<std::string>& offenders() const { return offenders_; }

private:
    std::vector<std::string> offenders_;
};

class IoError : public Error {
public:
    using Error::Error;
};

using Timestamp = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (also accepts a "+00:00" suffix).
Timestamp parse_utc(std::string_view text);
std::string format_utc(Timestamp t);

/// Glob over '/'-separated paths. '*' and '?' stay inside one segment,
/// "**/" matches zero or more leading directories.
bool glob_match(std::string_view pattern, std::string_view path);
bool any_glob_match(std::span<const std::string> patterns, std::string_view path);

std::string read_file(const std::filesystem::path& path);
/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

bool is_hex_hash(std::string_view s);

std::vector<std::string> split_lines(std::string_view text);

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs argv[0] from PATH with the given stdin; never goes through a shell.
ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input = {},
                          const std::optional<std::filesystem::path>& cwd = std::nullopt);

}  // namespace bugmine
