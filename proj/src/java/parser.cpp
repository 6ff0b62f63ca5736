#include "bugmine/java_structure.hpp"

#include <fmt/format.h>

#include <set>

namespace bugmine::java {

namespace {

constexpr std::string_view modifier_words[] = {"public",  "protected", "private",      "static",
                                               "final",   "abstract",  "native",       "synchronized",
                                               "transient", "volatile", "strictfp",    "default"};

bool is_modifier(std::string_view w)
{
    for (auto m : modifier_words)
        if (m == w)
            return true;
    return false;
}

/// Drops balanced <...> groups from a type written as concatenated lexemes.
std::string erase_generics(std::string_view type)
{
    std::string out;
    int depth = 0;
    for (char c : type) {
        if (c == '<')
            ++depth;
        else if (c == '>')
            depth = std::max(0, depth - 1);
        else if (depth == 0)
            out += c;
    }
    return out;
}

class Parser {
public:
    Parser(const std::string& path, const TokenStream& ts) : path_(path), ts_(ts)
    {
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (ts[i].kind != TokenKind::whitespace && ts[i].kind != TokenKind::comment)
                sig_.push_back(i);
    }

    FileStructure run()
    {
        SourceElement file;
        file.kind = ElementKind::file;
        file.fqn = path_;
        file.path = path_;
        file.start_line = 1;
        file.end_line = std::max(1, ts_.line_count());
        out_.elements.push_back(file);

        if (at_keyword_after_annotations("package")) {
            skip_annotations();
            ++pos_;  // package
            std::string pkg;
            while (!at_end() && !is(";"))
                pkg += std::string(text(pos_++));
            out_.package = pkg;
            if (is(";"))
                ++pos_;
        }
        while (!at_end()) {
            if (is("import")) {
                skip_past(";");
                continue;
            }
            if (is(";")) {
                ++pos_;
                continue;
            }
            if (is("}")) {
                degrade(fmt::format("unbalanced '}}' at line {}", line()));
                ++pos_;
                continue;
            }
            member(std::nullopt);
        }
        return std::move(out_);
    }

private:
    // ---- cursor helpers over significant tokens
    bool at_end() const { return pos_ >= sig_.size(); }
    std::size_t tok(std::size_t p) const { return sig_[p]; }
    std::string_view text(std::size_t p) const { return p < sig_.size() ? ts_.lexeme(sig_[p]) : std::string_view{}; }
    std::string_view text() const { return text(pos_); }
    TokenKind kind(std::size_t p) const { return p < sig_.size() ? ts_[sig_[p]].kind : TokenKind::unknown; }
    bool is(std::string_view s) const { return !at_end() && text() == s; }
    bool is_at(std::size_t p, std::string_view s) const { return p < sig_.size() && text(p) == s; }
    int line(std::size_t p) const { return p < sig_.size() ? ts_[sig_[p]].line : std::max(1, ts_.line_count()); }
    int line() const { return line(pos_); }

    void degrade(std::string why)
    {
        out_.degraded = true;
        out_.diagnostics.push_back(std::move(why));
    }

    void skip_past(std::string_view s)
    {
        while (!at_end() && !is(s))
            ++pos_;
        if (!at_end())
            ++pos_;
    }

    /// pos_ at an opening bracket; moves past its match. Returns the match position
    /// or nullopt when the input ends first.
    std::optional<std::size_t> skip_balanced(std::string_view open, std::string_view close)
    {
        int depth = 0;
        while (!at_end()) {
            auto t = text();
            if (t == open)
                ++depth;
            else if (t == close && --depth == 0) {
                auto at = pos_++;
                return at;
            }
            ++pos_;
        }
        return std::nullopt;
    }

    /// Generic angle brackets; '>>' and '>>>' close several levels.
    void skip_angles()
    {
        int depth = 0;
        while (!at_end()) {
            auto t = text();
            if (t == "<")
                ++depth;
            else if (t == ">")
                --depth;
            else if (t == ">>")
                depth -= 2;
            else if (t == ">>>")
                depth -= 3;
            else if (t == "(" || t == "{" || t == ";")
                return;  // not a generic after all
            ++pos_;
            if (depth <= 0)
                return;
        }
    }

    bool at_annotation() const { return is("@") && !is_at(pos_ + 1, "interface"); }

    void skip_annotations()
    {
        while (at_annotation()) {
            ++pos_;
            while (!at_end() && kind(pos_) == TokenKind::identifier) {
                ++pos_;
                if (is(".") && kind(pos_ + 1) == TokenKind::identifier)
                    ++pos_;
                else
                    break;
            }
            if (is("("))
                skip_balanced("(", ")");
        }
    }

    bool at_keyword_after_annotations(std::string_view kw)
    {
        auto save = pos_;
        skip_annotations();
        bool hit = is(kw);
        pos_ = save;
        return hit;
    }

    /// Looks back from the first declaration token for an attached doc comment.
    std::pair<int, int> doc_before(std::size_t first_stream_index) const
    {
        std::size_t i = first_stream_index;
        while (i > 0) {
            --i;
            const auto& t = ts_[i];
            if (t.kind == TokenKind::whitespace)
                continue;
            if (t.kind == TokenKind::comment) {
                if (t.comment == CommentStyle::doc)
                    return {t.line, t.end_line};
                continue;
            }
            break;
        }
        return {0, 0};
    }

    std::string qualify(const std::optional<std::size_t>& outer, std::string_view name) const
    {
        if (outer)
            return fmt::format("{}.{}", out_.elements[out_.classes[*outer].element].fqn, name);
        if (out_.package.empty())
            return std::string(name);
        return fmt::format("{}.{}", out_.package, name);
    }

    bool add_element(SourceElement e)
    {
        auto key = std::make_pair(e.kind, e.fqn);
        if (!seen_.insert(key).second) {
            degrade(fmt::format("duplicate {} '{}' at line {}", to_string(e.kind), e.fqn, e.start_line));
            return false;
        }
        out_.elements.push_back(std::move(e));
        return true;
    }

    // ---- declarations

    struct Modifiers {
        bool is_public = false;
        bool is_private = false;
    };

    Modifiers modifiers()
    {
        Modifiers m;
        while (!at_end()) {
            if (at_annotation()) {
                skip_annotations();
                continue;
            }
            auto t = text();
            if (is_modifier(t) && !(t == "default" && is_at(pos_ + 1, ":"))) {
                m.is_public |= t == "public";
                m.is_private |= t == "private";
                ++pos_;
                continue;
            }
            if (t == "sealed" && kind(pos_) == TokenKind::identifier && kind(pos_ + 1) != TokenKind::operator_) {
                ++pos_;
                continue;
            }
            if (t == "non" && is_at(pos_ + 1, "-") && is_at(pos_ + 2, "sealed")) {
                pos_ += 3;
                continue;
            }
            break;
        }
        return m;
    }

    bool at_type_keyword() const
    {
        if (is("class") || is("interface") || is("enum"))
            return true;
        if (is("@") && is_at(pos_ + 1, "interface"))
            return true;
        return is("record") && kind(pos_ + 1) == TokenKind::identifier &&
               (is_at(pos_ + 2, "(") || is_at(pos_ + 2, "<"));
    }

    /// One member of a class body (or a top-level declaration when outer is empty).
    void member(std::optional<std::size_t> outer)
    {
        const std::size_t first = pos_;
        auto mods = modifiers();
        if (at_end())
            return;
        const bool in_interface = outer && out_.classes[*outer].is_interface;
        if (at_type_keyword()) {
            type_declaration(outer, first, mods.is_public || (in_interface && !mods.is_private));
            return;
        }
        if (is("{")) {
            if (!skip_balanced("{", "}"))
                degrade("unterminated initializer block");
            return;
        }
        if (is(";")) {
            ++pos_;
            return;
        }
        if (!outer) {
            // Stray tokens at top level.
            ++pos_;
            return;
        }
        if (is("<"))
            skip_angles();

        // Type (possibly empty for constructors) and name.
        std::string type;
        const std::size_t type_start = pos_;
        while (!at_end()) {
            if (is("<")) {
                auto s = pos_;
                skip_angles();
                for (auto p = s; p < pos_; ++p)
                    type += std::string(text(p));
                continue;
            }
            if (kind(pos_) == TokenKind::identifier && (is_at(pos_ + 1, "(") || is_at(pos_ + 1, "=") ||
                                                        is_at(pos_ + 1, ";") || is_at(pos_ + 1, ",") ||
                                                        (is_at(pos_ + 1, "[") && pos_ > type_start)))
                break;
            if (is("{") || is("}") || is(";") || is("("))
                break;
            if (at_annotation()) {
                skip_annotations();
                continue;
            }
            type += std::string(text());
            ++pos_;
        }
        if (at_end())
            return;
        if (kind(pos_) != TokenKind::identifier) {
            // Unrecognized member; resynchronize.
            if (is("{")) {
                skip_balanced("{", "}");
            } else if (is("}")) {
                return;
            } else {
                ++pos_;
            }
            return;
        }
        if (is_at(pos_ + 1, "("))
            method(*outer, first, std::string(text()), type, mods.is_public || (in_interface && !mods.is_private));
        else
            field(*outer, mods.is_public || in_interface);
    }

    void field(std::size_t owner, bool is_public)
    {
        FieldInfo f;
        f.is_public = is_public;
        f.declarators = 1;
        int depth = 0;
        while (!at_end()) {
            auto t = text();
            if (t == "(" || t == "[" || t == "{")
                ++depth;
            else if (t == ")" || t == "]" || t == "}") {
                if (depth == 0)
                    break;  // malformed; let the caller see the brace
                --depth;
            } else if (depth == 0 && t == ",")
                ++f.declarators;
            else if (depth == 0 && t == ";") {
                ++pos_;
                break;
            }
            ++pos_;
        }
        out_.classes[owner].fields.push_back(f);
    }

    std::vector<std::string> parameters()
    {
        // pos_ at '('
        std::vector<std::string> params;
        ++pos_;
        std::vector<std::size_t> current;
        int depth = 0;
        auto flush = [&] {
            if (current.empty())
                return;
            // Drop annotations and 'final'; last identifier is the parameter name.
            std::vector<std::string_view> parts;
            for (std::size_t k = 0; k < current.size(); ++k) {
                auto t = text(current[k]);
                if (t == "@") {
                    ++k;
                    while (k + 2 < current.size() && text(current[k + 1]) == ".")
                        k += 2;
                    if (k + 1 < current.size() && text(current[k + 1]) == "(") {
                        int d = 0;
                        for (++k; k < current.size(); ++k) {
                            if (text(current[k]) == "(")
                                ++d;
                            else if (text(current[k]) == ")" && --d == 0)
                                break;
                        }
                    }
                    continue;
                }
                if (t == "final")
                    continue;
                parts.push_back(t);
            }
            std::size_t name_at = parts.size();
            int trailing_dims = 0;
            while (name_at >= 2 && parts[name_at - 1] == "]" && parts[name_at - 2] == "[") {
                name_at -= 2;
                ++trailing_dims;
            }
            std::string type;
            for (std::size_t k = 0; k + 1 < name_at; ++k)
                type += std::string(parts[k]);
            if (name_at == 1)
                type = std::string(parts[0]);  // lone token: best effort
            type = erase_generics(type);
            for (int d = 0; d < trailing_dims; ++d)
                type += "[]";
            params.push_back(type);
            current.clear();
        };
        while (!at_end()) {
            auto t = text();
            if (t == "(" || t == "[" || t == "<")
                ++depth;
            else if (t == ">" )
                --depth;
            else if (t == ">>")
                depth -= 2;
            else if (t == ">>>")
                depth -= 3;
            else if (t == "]")
                --depth;
            else if (t == ")") {
                if (depth == 0) {
                    flush();
                    ++pos_;
                    break;
                }
                --depth;
            } else if (t == "," && depth == 0) {
                flush();
                ++pos_;
                continue;
            } else if (t == "{" || t == ";") {
                break;
            }
            current.push_back(pos_);
            ++pos_;
        }
        return params;
    }

    void method(std::size_t owner, std::size_t first, std::string name, std::string type, bool is_public)
    {
        MethodInfo m;
        m.name = name;
        m.is_constructor = type.empty();
        m.return_type = erase_generics(type);
        m.is_public = is_public;
        m.first_token = tok(first);
        ++pos_;  // name
        m.param_types = parameters();
        while (is("[")) {  // int f()[] legacy syntax
            m.return_type += "[]";
            pos_ += 2;
        }
        // throws clause / annotation default value
        while (!at_end() && !is("{") && !is(";") && !is("}"))
            ++pos_;
        int end_line = line(pos_ == 0 ? 0 : pos_ - 1);
        if (is("{")) {
            m.body_open = tok(pos_);
            auto close = skip_balanced("{", "}");
            if (!close) {
                degrade(fmt::format("unterminated body of method '{}'", name));
                m.last_token = ts_.size() - 1;
                end_line = std::max(1, ts_.line_count());
            } else {
                m.last_token = tok(*close);
                end_line = line(*close);
            }
        } else if (is(";")) {
            m.last_token = tok(pos_);
            end_line = line();
            ++pos_;
        } else {
            m.last_token = tok(pos_ - 1);
        }

        std::string sig = name + "(";
        for (std::size_t k = 0; k < m.param_types.size(); ++k) {
            if (k)
                sig += ',';
            sig += m.param_types[k];
        }
        sig += ')';
        sig += m.return_type;

        auto [doc_a, doc_b] = doc_before(m.first_token);
        m.documented = doc_a != 0;
        m.doc_first_line = doc_a;
        m.doc_last_line = doc_b;

        const auto& cls = out_.elements[out_.classes[owner].element];
        SourceElement e;
        e.kind = ElementKind::method;
        e.fqn = cls.fqn + "." + sig;
        e.path = path_;
        e.start_line = ts_[m.first_token].line;
        e.end_line = std::max(e.start_line, end_line);
        e.parent_fqn = cls.fqn;
        m.element = out_.elements.size();
        if (!add_element(std::move(e)))
            return;
        out_.classes[owner].methods.push_back(out_.methods.size());
        out_.methods.push_back(std::move(m));
    }

    void type_declaration(std::optional<std::size_t> outer, std::size_t first, bool is_public)
    {
        bool is_interface = false;
        bool is_enum = false;
        bool is_record = false;
        if (is("@")) {
            ++pos_;
            is_interface = true;
        } else {
            is_interface = is("interface");
            is_enum = is("enum");
            is_record = is("record");
        }
        ++pos_;
        if (at_end() || kind(pos_) != TokenKind::identifier) {
            degrade(fmt::format("type declaration without a name at line {}", line()));
            return;
        }
        const std::string name(text());
        ++pos_;
        if (is_record && is("<"))
            skip_angles();
        if (is_record && is("("))
            skip_balanced("(", ")");
        while (!at_end() && !is("{") && !is(";"))
            ++pos_;
        if (!is("{")) {
            degrade(fmt::format("type '{}' without a body", name));
            return;
        }

        ClassInfo ci;
        ci.name = name;
        ci.is_interface = is_interface;
        ci.is_public = is_public;
        ci.outer = outer;
        ci.first_token = tok(first);
        auto [doc_a, doc_b] = doc_before(ci.first_token);
        ci.documented = doc_a != 0;
        ci.doc_first_line = doc_a;
        ci.doc_last_line = doc_b;

        SourceElement e;
        e.kind = ElementKind::class_;
        e.fqn = qualify(outer, name);
        e.path = path_;
        e.start_line = line(first);
        e.end_line = e.start_line;
        ci.element = out_.elements.size();
        if (!add_element(e)) {
            skip_balanced("{", "}");
            return;
        }
        const std::size_t self = out_.classes.size();
        out_.classes.push_back(ci);
        if (outer)
            out_.classes[*outer].nested.push_back(self);

        ++pos_;  // '{'
        if (is_enum)
            enum_constants();
        while (!at_end() && !is("}"))
            member(self);
        auto& elem = out_.elements[out_.classes[self].element];
        if (at_end()) {
            degrade(fmt::format("unterminated body of type '{}'", name));
            elem.end_line = std::max(1, ts_.line_count());
            out_.classes[self].last_token = ts_.size() - 1;
            return;
        }
        elem.end_line = line();
        out_.classes[self].last_token = tok(pos_);
        ++pos_;  // '}'
    }

    void enum_constants()
    {
        while (!at_end()) {
            skip_annotations();
            if (is(";")) {
                ++pos_;
                return;
            }
            if (is("}"))
                return;
            if (kind(pos_) == TokenKind::identifier)
                ++pos_;
            if (is("("))
                skip_balanced("(", ")");
            if (is("{"))
                skip_balanced("{", "}");
            if (is(","))
                ++pos_;
            else if (!is(";") && !is("}"))
                ++pos_;  // resynchronize on junk
        }
    }

    const std::string& path_;
    const TokenStream& ts_;
    std::vector<std::size_t> sig_;
    std::size_t pos_ = 0;
    FileStructure out_;
    std::set<std::pair<ElementKind, std::string>> seen_;
};

}  // namespace

FileStructure analyze_structure(const std::string& path, const TokenStream& tokens)
{
    auto fs = Parser(path, tokens).run();
    if (tokens.has_unterminated()) {
        fs.degraded = true;
        fs.diagnostics.push_back("unterminated literal or comment");
    }
    return fs;
}

std::vector<SourceElement> parse_elements(const std::string& path, const TokenStream& tokens)
{
    return analyze_structure(path, tokens).elements;
}

}  // namespace bugmine::java
