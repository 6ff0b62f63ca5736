#include "bugmine/java_structure.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace bugmine {

std::string_view to_string(ElementKind kind)
{
    switch (kind) {
    case ElementKind::file: return "file";
    case ElementKind::class_: return "class";
    case ElementKind::method: return "method";
    }
    return "?";
}

ElementKind element_kind_from_string(std::string_view text)
{
    if (text == "file")
        return ElementKind::file;
    if (text == "class")
        return ElementKind::class_;
    if (text == "method")
        return ElementKind::method;
    throw std::invalid_argument("unknown element kind '" + std::string(text) + "'");
}

namespace java {

std::string_view to_string(TokenKind kind)
{
    switch (kind) {
    case TokenKind::whitespace: return "whitespace";
    case TokenKind::identifier: return "identifier";
    case TokenKind::keyword: return "keyword";
    case TokenKind::operator_: return "operator";
    case TokenKind::literal: return "literal";
    case TokenKind::comment: return "comment";
    case TokenKind::brace: return "brace";
    case TokenKind::unknown: return "unknown";
    }
    return "?";
}

TokenStream::TokenStream(std::string source, std::vector<Token> tokens, int line_count)
    : source_(std::move(source)), tokens_(std::move(tokens)), line_count_(line_count)
{
}

bool TokenStream::has_unterminated() const
{
    return std::any_of(tokens_.begin(), tokens_.end(), [](const Token& t) { return t.unterminated; });
}

namespace {

// Sorted for binary search.
constexpr std::array<std::string_view, 50> keywords = {
    "abstract", "assert",     "boolean",   "break",     "byte",      "case",         "catch",
    "char",     "class",      "const",     "continue",  "default",   "do",           "double",
    "else",     "enum",       "extends",   "final",     "finally",   "float",        "for",
    "goto",     "if",         "implements", "import",   "instanceof", "int",         "interface",
    "long",     "native",     "new",       "package",   "private",   "protected",    "public",
    "return",   "short",      "static",    "strictfp",  "super",     "switch",       "synchronized",
    "this",     "throw",      "throws",    "transient", "try",       "void",         "volatile",
    "while"};

// Longest first so that the first prefix match wins.
constexpr std::array<std::string_view, 41> operators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=",   "+=",  "-=",  "*=",  "/=",  "&=", "|=", "^=", "%=", "<<", ">>", "(",  ")",  "[",
    "]",    ";",   ",",   ".",   "@",   "=",  ">",  "<",  "!",  "~",  "?",  ":",  "+"};

constexpr std::string_view single_ops = "-*/&|^%";

bool ident_start(unsigned char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80;
}

bool ident_part(unsigned char c)
{
    return ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(char c)
{
    return c >= '0' && c <= '9';
}

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run()
    {
        while (pos_ < src_.size())
            next();
        return std::move(out_);
    }

    int lines() const
    {
        if (src_.empty())
            return 0;
        return src_.back() == '\n' ? line_ - 1 : line_;
    }

private:
    void emit(TokenKind kind, std::size_t start, CommentStyle style = CommentStyle::none, bool unterminated = false)
    {
        Token t;
        t.kind = kind;
        t.comment = style;
        t.offset = start;
        t.length = pos_ - start;
        t.line = start_line_;
        t.end_line = line_;
        t.unterminated = unterminated;
        // A token ending in '\n' ends on the line before the counter moved.
        if (t.length > 0 && src_[pos_ - 1] == '\n')
            t.end_line = line_ - 1;
        t.end_line = std::max(t.end_line, t.line);
        out_.push_back(t);
    }

    void advance()
    {
        if (src_[pos_] == '\n')
            ++line_;
        ++pos_;
    }

    char peek(std::size_t ahead = 0) const
    {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void next()
    {
        const std::size_t start = pos_;
        start_line_ = line_;
        const char c = src_[pos_];

        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
            while (pos_ < src_.size() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r' ||
                                          peek() == '\f'))
                advance();
            emit(TokenKind::whitespace, start);
            return;
        }
        if (c == '/' && peek(1) == '/') {
            while (pos_ < src_.size() && peek() != '\n' && peek() != '\r')
                advance();
            emit(TokenKind::comment, start, CommentStyle::line);
            return;
        }
        if (c == '/' && peek(1) == '*') {
            const bool doc = peek(2) == '*' && peek(3) != '/';
            advance();
            advance();
            bool closed = false;
            while (pos_ < src_.size()) {
                if (peek() == '*' && peek(1) == '/') {
                    advance();
                    advance();
                    closed = true;
                    break;
                }
                advance();
            }
            emit(TokenKind::comment, start, doc ? CommentStyle::doc : CommentStyle::block, !closed);
            return;
        }
        if (c == '"' && peek(1) == '"' && peek(2) == '"') {
            text_block(start);
            return;
        }
        if (c == '"' || c == '\'') {
            quoted(start, c);
            return;
        }
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
            number(start);
            return;
        }
        if (ident_start(static_cast<unsigned char>(c))) {
            while (pos_ < src_.size() && ident_part(static_cast<unsigned char>(peek())))
                advance();
            auto word = std::string_view(src_).substr(start, pos_ - start);
            if (word == "true" || word == "false" || word == "null")
                emit(TokenKind::literal, start);
            else
                emit(is_keyword(word) ? TokenKind::keyword : TokenKind::identifier, start);
            return;
        }
        if (c == '{' || c == '}') {
            advance();
            emit(TokenKind::brace, start);
            return;
        }
        auto rest = std::string_view(src_).substr(pos_);
        for (auto op : operators) {
            if (rest.starts_with(op)) {
                pos_ += op.size();
                emit(TokenKind::operator_, start);
                return;
            }
        }
        if (single_ops.find(c) != std::string_view::npos) {
            advance();
            emit(TokenKind::operator_, start);
            return;
        }
        advance();
        emit(TokenKind::unknown, start);
    }

    void quoted(std::size_t start, char quote)
    {
        advance();
        bool closed = false;
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == '\n' || c == '\r')
                break;
            if (c == '\\') {
                advance();
                if (pos_ < src_.size() && peek() != '\n')
                    advance();
                continue;
            }
            advance();
            if (c == quote) {
                closed = true;
                break;
            }
        }
        emit(TokenKind::literal, start, CommentStyle::none, !closed);
    }

    void text_block(std::size_t start)
    {
        pos_ += 3;
        bool closed = false;
        while (pos_ < src_.size()) {
            if (peek() == '\\') {
                advance();
                if (pos_ < src_.size())
                    advance();
                continue;
            }
            if (peek() == '"' && peek(1) == '"' && peek(2) == '"') {
                pos_ += 3;
                closed = true;
                break;
            }
            advance();
        }
        emit(TokenKind::literal, start, CommentStyle::none, !closed);
    }

    void number(std::size_t start)
    {
        const bool hex = peek() == '0' && (peek(1) == 'x' || peek(1) == 'X');
        while (pos_ < src_.size()) {
            char c = peek();
            if (ident_part(static_cast<unsigned char>(c)) && static_cast<unsigned char>(c) < 0x80) {
                advance();
                char prev = src_[pos_ - 1];
                bool exponent = hex ? (prev == 'p' || prev == 'P') : (prev == 'e' || prev == 'E');
                if (exponent && (peek() == '+' || peek() == '-'))
                    advance();
                continue;
            }
            if (c == '.' && is_digit(peek(1))) {
                advance();
                continue;
            }
            if (c == '.' && !hex) {
                // "1." is a valid double literal; "1.foo" is not a thing in Java.
                advance();
                continue;
            }
            break;
        }
        emit(TokenKind::literal, start);
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int start_line_ = 1;
    std::vector<Token> out_;
};

}  // namespace

bool is_keyword(std::string_view word)
{
    return std::binary_search(keywords.begin(), keywords.end(), word);
}

TokenStream tokenize(std::string source)
{
    Lexer lexer(source);
    auto tokens = lexer.run();
    const int lines = lexer.lines();
    return TokenStream(std::move(source), std::move(tokens), lines);
}

bool line_has_code(const TokenStream& tokens, int line)
{
    // Tokens are ordered by line; binary search for the first one reaching `line`.
    const auto& ts = tokens.tokens();
    auto it = std::lower_bound(ts.begin(), ts.end(), line, [](const Token& t, int l) { return t.end_line < l; });
    for (; it != ts.end() && it->line <= line; ++it)
        if (it->kind != TokenKind::whitespace && it->kind != TokenKind::comment)
            return true;
    return false;
}

}  // namespace java
}  // namespace bugmine
