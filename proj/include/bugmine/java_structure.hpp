#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bugmine {

enum class ElementKind { file, class_, method };

std::string_view to_string(ElementKind kind);
ElementKind element_kind_from_string(std::string_view text);

struct SourceElement {
    ElementKind kind = ElementKind::file;
    std::string fqn;
    std::string path;
    int start_line = 1;  ///< 1-based, inclusive
    int end_line = 1;    ///< 1-based, inclusive
    std::optional<std::string> parent_fqn;  ///< owning class, methods only

    bool operator==(const SourceElement&) const = default;
};

namespace java {

enum class TokenKind { whitespace, identifier, keyword, operator_, literal, comment, brace, unknown };
enum class CommentStyle { none, line, block, doc };

std::string_view to_string(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::unknown;
    CommentStyle comment = CommentStyle::none;
    std::size_t offset = 0;
    std::size_t length = 0;
    int line = 1;      ///< line of the first byte
    int end_line = 1;  ///< line of the last byte
    bool unterminated = false;
};

/// Owns the source text; tokens cover every byte exactly once, in order.
class TokenStream {
public:
    TokenStream() = default;
    TokenStream(std::string source, std::vector<Token> tokens, int line_count);

    const std::string& source() const { return source_; }
    const std::vector<Token>& tokens() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }
    const Token& operator[](std::size_t i) const { return tokens_[i]; }
    std::string_view lexeme(std::size_t i) const { return lexeme(tokens_[i]); }
    std::string_view lexeme(const Token& t) const { return std::string_view(source_).substr(t.offset, t.length); }

    /// Number of lines; a trailing newline does not open a new line.
    int line_count() const { return line_count_; }
    /// True when some unterminated literal or comment was closed at EOF/EOL.
    bool has_unterminated() const;

private:
    std::string source_;
    std::vector<Token> tokens_;
    int line_count_ = 0;
};

/// Total function: never throws, tolerates malformed input.
TokenStream tokenize(std::string source);

bool is_keyword(std::string_view word);

struct MethodInfo {
    std::size_t element = 0;  ///< index into FileStructure::elements
    std::string name;
    std::string return_type;  ///< empty for constructors
    std::vector<std::string> param_types;
    bool is_constructor = false;
    bool is_public = false;
    bool documented = false;
    int doc_first_line = 0;  ///< 0 when undocumented
    int doc_last_line = 0;
    std::size_t first_token = 0;  ///< stream index of the declaration's first token
    std::size_t last_token = 0;   ///< closing brace, or ';' for bodiless methods
    std::optional<std::size_t> body_open;  ///< stream index of the body '{'
};

struct FieldInfo {
    int declarators = 0;
    bool is_public = false;
};

struct ClassInfo {
    std::size_t element = 0;
    std::string name;
    bool is_interface = false;
    bool is_public = false;
    bool documented = false;
    int doc_first_line = 0;
    int doc_last_line = 0;
    std::size_t first_token = 0;
    std::size_t last_token = 0;
    std::optional<std::size_t> outer;  ///< index into FileStructure::classes
    std::vector<std::size_t> methods;  ///< indices into FileStructure::methods
    std::vector<std::size_t> nested;   ///< indices into FileStructure::classes
    std::vector<FieldInfo> fields;
};

struct FileStructure {
    std::string package;
    /// File element first, then classes and methods in declaration order.
    std::vector<SourceElement> elements;
    std::vector<ClassInfo> classes;
    std::vector<MethodInfo> methods;
    bool degraded = false;
    std::vector<std::string> diagnostics;
};

/// Structural recognition of files, classes, and methods. Anonymous and local
/// classes are not elements; their code belongs to the enclosing method.
FileStructure analyze_structure(const std::string& path, const TokenStream& tokens);

std::vector<SourceElement> parse_elements(const std::string& path, const TokenStream& tokens);

/// True when the line holds at least one token that is neither whitespace nor comment.
bool line_has_code(const TokenStream& tokens, int line);

}  // namespace java
}  // namespace bugmine
