#include "bugmine/csv.hpp"

#include "bugmine/util.hpp"

#include <fmt/format.h>

namespace bugmine::csv {

std::string quote(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join_row(const std::vector<std::string>& fields)
{
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            line += ',';
        line += quote(fields[i]);
    }
    line += '\n';
    return line;
}

std::vector<std::vector<std::string>> parse(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_record = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        field_started = false;
    };
    while (i < text.size()) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
            } else {
                field += c;
            }
            ++i;
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty())
                throw ParseError(fmt::format("stray quote at byte {}", i));
            quoted = true;
            field_started = true;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            field_started = true;
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            end_record();
            break;
        case '\n':
            end_record();
            break;
        default:
            field += c;
            field_started = true;
        }
        ++i;
    }
    if (quoted)
        throw ParseError("unterminated quoted field");
    if (field_started || !row.empty())
        end_record();
    return rows;
}

std::size_t Table::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw ParseError(fmt::format("missing CSV column '{}'", name));
}

Table read_table(const std::string& path)
{
    auto rows = parse(read_file(path));
    Table t;
    if (rows.empty())
        throw ParseError(fmt::format("'{}' has no header", path));
    t.header = std::move(rows.front());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != t.header.size())
            throw ParseError(fmt::format("{}:{}: expected {} fields, got {}", path, r + 1,
                                         t.header.size(), rows[r].size()));
        t.rows.push_back(std::move(rows[r]));
    }
    return t;
}

}  // namespace bugmine::csv
