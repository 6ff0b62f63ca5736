#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bugmine::csv {

/// RFC-4180 field quoting: quotes only when the field holds ',', '"', CR or LF.
std::string quote(std::string_view field);
/// One record terminated by LF.
std::string join_row(const std::vector<std::string>& fields);

/// Parses a whole RFC-4180 document. Accepts LF or CRLF record ends.
std::vector<std::vector<std::string>> parse(std::string_view text);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column, throws ParseError when missing.
    std::size_t column(std::string_view name) const;
};

Table read_table(const std::string& path);

}  // namespace bugmine::csv
