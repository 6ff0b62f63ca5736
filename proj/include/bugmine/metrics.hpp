#pragma once

#include "bugmine/java_structure.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bugmine::metrics {

/// Column ids of a level, in CSV order.
std::span<const std::string_view> columns(ElementKind level);
/// Ids that are part of the schema but never computed (whole-program analyses).
bool is_uncomputed(std::string_view id);

/// Metric values aligned to columns(level); nullopt = not computed.
class MetricsVector {
public:
    MetricsVector() = default;
    explicit MetricsVector(ElementKind level);

    ElementKind level() const { return level_; }
    std::optional<double> get(std::string_view id) const;
    /// Throws std::out_of_range for an id that does not belong to the level.
    double at(std::string_view id) const;
    void set(std::string_view id, double value);
    const std::vector<std::optional<double>>& values() const { return values_; }
    std::vector<std::optional<double>>& values() { return values_; }

    bool operator==(const MetricsVector&) const = default;

private:
    std::size_t index_of(std::string_view id) const;

    ElementKind level_ = ElementKind::method;
    std::vector<std::optional<double>> values_;
};

/// Shortest round-trip decimal, empty for absent values.
std::string format_value(const std::optional<double>& v);

/// Tokens, structure, and per-line flags of one source file.
class FileAnalysis {
public:
    FileAnalysis(std::string path, std::string source);

    const std::string& path() const { return path_; }
    const java::TokenStream& tokens() const { return tokens_; }
    const java::FileStructure& structure() const { return structure_; }

    int line_count() const { return tokens_.line_count(); }
    bool has_code(int line) const { return flag(code_, line); }
    bool has_comment(int line) const { return flag(comment_, line); }
    bool has_doc(int line) const { return flag(doc_, line); }

private:
    static bool flag(const std::vector<char>& v, int line)
    {
        return line >= 1 && static_cast<std::size_t>(line) < v.size() && v[static_cast<std::size_t>(line)];
    }

    std::string path_;
    java::TokenStream tokens_;
    java::FileStructure structure_;
    std::vector<char> code_, comment_, doc_;
};

/// Counts gathered by walking a method body statement by statement.
struct BodyCounts {
    int statements = 0;
    int nesting = 0;          ///< NL
    int nesting_else_if = 0;  ///< NLE
    int decisions = 0;        ///< McCC - 1
};

BodyCounts walk_body(const java::TokenStream& tokens, std::size_t body_open);

struct Halstead {
    int distinct_operators = 0;
    int distinct_operands = 0;
    int total_operators = 0;
    int total_operands = 0;
};

/// Operators and operands strictly inside the braces opened at body_open.
Halstead halstead_counts(const java::TokenStream& tokens, std::size_t body_open);

/// Decision points of the whole token stream (file McCC - 1).
int decision_points(const java::TokenStream& tokens);

MetricsVector method_metrics(const FileAnalysis& file, std::size_t method_index);
MetricsVector class_metrics(const FileAnalysis& file, std::size_t class_index,
                            std::span<const MetricsVector> local_methods);
MetricsVector file_metrics(const FileAnalysis& file);

/// Metrics for every element of the file, keyed by fqn.
std::map<std::string, MetricsVector> compute_all(const FileAnalysis& file);

}  // namespace bugmine::metrics
