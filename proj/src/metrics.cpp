#include "bugmine/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace bugmine::metrics {

using java::TokenKind;
using java::TokenStream;

namespace {

constexpr std::string_view method_cols[] = {
    "CLOC", "LOC",  "LLOC", "NL",   "NLE",  "NII",  "NOI",  "CD",   "DLOC", "TCD",
    "TCLOC", "NOS", "TLOC", "TLLOC", "TNOS", "McCC", "HCPL", "HDIF", "HEFF", "HNDB",
    "HPL",  "HPV",  "HTRP", "HVOL", "MIMS", "MI",   "MISEI", "MISM", "NUMPAR"};

constexpr std::string_view class_cols[] = {
    "CLOC", "LOC",  "LLOC", "NL",   "NLE",   "NII",   "NOI",   "CD",    "DLOC",  "TCD",  "TCLOC",
    "NOS",  "TLOC", "TLLOC", "TNOS", "PDA",  "PUA",   "LCOM5", "WMC",   "CBO",   "CBOI", "RFC",
    "AD",   "DIT",  "NOA",  "NOC",  "NOD",   "NOP",   "NA",    "NG",    "NLA",   "NLG",  "NLM",
    "NLPA", "NLPM", "NLS",  "NM",   "NPA",   "NPM",   "NS",    "TNA",   "TNG",   "TNLA", "TNLG",
    "TNLM", "TNLPA", "TNLPM", "TNLS", "TNM", "TNPA",  "TNPM",  "TNS"};

constexpr std::string_view file_cols[] = {"CLOC", "LOC", "LLOC", "McCC", "PDA", "PUA"};

constexpr std::string_view uncomputed[] = {"NII", "NOI", "LCOM5", "CBO", "CBOI", "RFC",
                                           "DIT", "NOA", "NOC",   "NOD", "NOP"};

double log_or_zero(double x, double (*fn)(double))
{
    return x > 0 ? fn(x) : 0.0;
}

double xlog2x(double x)
{
    return x > 0 ? x * std::log2(x) : 0.0;
}

std::vector<std::size_t> significant(const TokenStream& ts)
{
    std::vector<std::size_t> sig;
    sig.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i].kind != TokenKind::whitespace && ts[i].kind != TokenKind::comment)
            sig.push_back(i);
    return sig;
}

std::size_t sig_pos(const std::vector<std::size_t>& sig, std::size_t stream_index)
{
    return static_cast<std::size_t>(std::lower_bound(sig.begin(), sig.end(), stream_index) - sig.begin());
}

/// Position of the brace matching the '{' at sig position p (or sig.size()).
std::size_t match_brace(const TokenStream& ts, const std::vector<std::size_t>& sig, std::size_t p)
{
    int depth = 0;
    for (; p < sig.size(); ++p) {
        auto t = ts.lexeme(sig[p]);
        if (t == "{")
            ++depth;
        else if (t == "}" && --depth == 0)
            return p;
    }
    return sig.size();
}

/// Sig positions of the 'while' that closes each do-while loop.
std::unordered_set<std::size_t> do_while_tails(const TokenStream& ts, const std::vector<std::size_t>& sig)
{
    std::unordered_set<std::size_t> tails;
    for (std::size_t p = 0; p < sig.size(); ++p) {
        if (ts.lexeme(sig[p]) != "do" || ts[sig[p]].kind != TokenKind::keyword)
            continue;
        std::size_t q = p + 1;
        if (q < sig.size() && ts.lexeme(sig[q]) == "{") {
            q = match_brace(ts, sig, q) + 1;
        } else {
            // Unbraced body: up to its ';' (nested do bodies are rare enough to ignore).
            int depth = 0;
            for (; q < sig.size(); ++q) {
                auto t = ts.lexeme(sig[q]);
                if (t == "(" || t == "[" || t == "{")
                    ++depth;
                else if (t == ")" || t == "]" || t == "}")
                    --depth;
                else if (t == ";" && depth == 0)
                    break;
            }
            ++q;
        }
        if (q < sig.size() && ts.lexeme(sig[q]) == "while")
            tails.insert(q);
    }
    return tails;
}

bool is_wildcard(const TokenStream& ts, const std::vector<std::size_t>& sig, std::size_t p)
{
    if (p > 0 && ts.lexeme(sig[p - 1]) == "<")
        return true;
    if (p + 1 < sig.size()) {
        auto next = ts.lexeme(sig[p + 1]);
        return next == "extends" || next == "super" || next == ">" || next == "," || next == ">>" ||
               next == ">>>";
    }
    return false;
}

int count_decisions(const TokenStream& ts, const std::vector<std::size_t>& sig, std::size_t from,
                    std::size_t to, const std::unordered_set<std::size_t>& tails)
{
    int n = 0;
    for (std::size_t p = from; p < to && p < sig.size(); ++p) {
        const auto& tok = ts[sig[p]];
        auto t = ts.lexeme(tok);
        if (tok.kind == TokenKind::keyword) {
            if (t == "if" || t == "for" || t == "do" || t == "case" || t == "catch")
                ++n;
            else if (t == "while" && !tails.count(p))
                ++n;
        } else if (tok.kind == TokenKind::operator_) {
            if (t == "&&" || t == "||")
                ++n;
            else if (t == "?" && !is_wildcard(ts, sig, p))
                ++n;
        }
    }
    return n;
}

/// Recursive statement walker over a method body.
class BodyWalker {
public:
    BodyWalker(const TokenStream& ts, const std::vector<std::size_t>& sig) : ts_(ts), sig_(sig) {}

    BodyCounts walk(std::size_t open_pos)
    {
        pos_ = open_pos;
        end_ = match_brace(ts_, sig_, open_pos);
        block(0, 0);
        return counts_;
    }

private:
    bool at_end() const { return pos_ >= end_ || pos_ >= sig_.size(); }
    std::string_view text(std::size_t p) const { return p < sig_.size() ? ts_.lexeme(sig_[p]) : std::string_view{}; }
    std::string_view text() const { return text(pos_); }
    bool is(std::string_view s) const { return !at_end() && text() == s; }
    TokenKind kind(std::size_t p) const { return p < sig_.size() ? ts_[sig_[p]].kind : TokenKind::unknown; }

    void enter(int nl, int nle)
    {
        counts_.nesting = std::max(counts_.nesting, nl);
        counts_.nesting_else_if = std::max(counts_.nesting_else_if, nle);
    }

    // pos_ at '{'; statements until the matching '}'.
    void block(int nl, int nle)
    {
        ++pos_;
        while (!at_end() && !is("}"))
            statement(nl, nle);
        if (is("}"))
            ++pos_;
    }

    // Balanced group starting at an opening '(' or '['; braces inside are
    // lambda bodies, anonymous classes, or array initializers.
    void group(int nl, int nle)
    {
        int depth = 0;
        std::vector<std::size_t> opens;
        std::size_t last_closed_open = 0;
        while (!at_end()) {
            auto t = text();
            if (t == "(" || t == "[") {
                ++depth;
                opens.push_back(pos_);
            } else if (t == ")" || t == "]") {
                if (!opens.empty()) {
                    last_closed_open = opens.back();
                    opens.pop_back();
                }
                if (--depth == 0) {
                    ++pos_;
                    return;
                }
            } else if (t == "{") {
                brace_in_expression(nl, nle, last_closed_open);
                continue;
            } else if (t == "}") {
                return;
            }
            ++pos_;
        }
    }

    void brace_in_expression(int nl, int nle, std::size_t last_closed_open)
    {
        auto prev = pos_ > 0 ? text(pos_ - 1) : std::string_view{};
        if (prev == "->") {
            block(nl, nle);
        } else if (prev == ")" && last_closed_open > 0 && text(last_closed_open - 1) == "switch") {
            switch_block(nl + 1, nle + 1);
        } else if (prev == ")") {
            class_body(nl, nle);
        } else {
            pos_ = std::min(match_brace(ts_, sig_, pos_), end_) + 1;
        }
    }

    // Expression or declaration up to and including its ';'.
    void expression(int nl, int nle)
    {
        int depth = 0;
        std::vector<std::size_t> opens;
        std::size_t last_closed_open = 0;
        while (!at_end()) {
            auto t = text();
            if (t == "(" || t == "[") {
                ++depth;
                opens.push_back(pos_);
            } else if (t == ")" || t == "]") {
                if (!opens.empty()) {
                    last_closed_open = opens.back();
                    opens.pop_back();
                }
                --depth;
            } else if (t == "{") {
                brace_in_expression(nl, nle, last_closed_open);
                continue;
            } else if (t == "}") {
                return;  // missing ';'
            } else if (t == ";" && depth <= 0) {
                ++pos_;
                return;
            }
            ++pos_;
        }
    }

    // Anonymous or local class body: methods and initializers contribute
    // their statements at the current depth.
    void class_body(int nl, int nle)
    {
        ++pos_;
        while (!at_end() && !is("}")) {
            if (is("{")) {
                block(nl, nle);
                continue;
            }
            if (is(";")) {
                ++pos_;
                continue;
            }
            // Member header: up to '{' (method body), ';' or '=' (field).
            bool is_method = false;
            while (!at_end() && !is("{") && !is(";") && !is("=") && !is("}")) {
                if (is("(")) {
                    is_method = true;
                    group(nl, nle);
                    continue;
                }
                ++pos_;
            }
            if (is("{")) {
                if (is_method)
                    block(nl, nle);
                else
                    class_body(nl, nle);  // nested type
            } else if (is("=")) {
                expression(nl, nle);
            } else if (is(";")) {
                ++pos_;
            }
        }
        if (is("}"))
            ++pos_;
    }

    void switch_block(int nl, int nle)
    {
        enter(nl, nle);
        ++pos_;  // '{'
        while (!at_end() && !is("}")) {
            if (is("case") || is("default")) {
                // Label up to ':' or '->'.
                int depth = 0;
                ++pos_;
                while (!at_end()) {
                    auto t = text();
                    if (t == "(" || t == "[")
                        ++depth;
                    else if (t == ")" || t == "]")
                        --depth;
                    else if (depth == 0 && (t == ":" || t == "->"))
                        break;
                    ++pos_;
                }
                if (is("->")) {
                    ++pos_;
                    statement(nl, nle);
                } else if (is(":")) {
                    ++pos_;
                }
                continue;
            }
            statement(nl, nle);
        }
        if (is("}"))
            ++pos_;
    }

    void paren_header(int nl, int nle)
    {
        if (is("("))
            group(nl, nle);
    }

    void statement(int nl, int nle)
    {
        if (at_end())
            return;
        auto t = text();
        const bool kw = kind(pos_) == TokenKind::keyword;
        if (t == "{") {
            block(nl, nle);
            return;
        }
        if (t == ";") {
            ++pos_;
            return;
        }
        if (kw && t == "if") {
            if_statement(nl, nle);
            return;
        }
        if (kw && (t == "for" || t == "while" || t == "synchronized")) {
            ++counts_.statements;
            ++pos_;
            paren_header(nl, nle);
            enter(nl + 1, nle + 1);
            statement(nl + 1, nle + 1);
            return;
        }
        if (kw && t == "do") {
            ++counts_.statements;
            ++pos_;
            enter(nl + 1, nle + 1);
            statement(nl + 1, nle + 1);
            if (is("while")) {
                ++pos_;
                paren_header(nl, nle);
                if (is(";"))
                    ++pos_;
            }
            return;
        }
        if (kw && t == "switch") {
            ++counts_.statements;
            ++pos_;
            paren_header(nl, nle);
            if (is("{"))
                switch_block(nl + 1, nle + 1);
            return;
        }
        if (kw && t == "try") {
            ++counts_.statements;
            ++pos_;
            paren_header(nl, nle);  // resources
            enter(nl + 1, nle + 1);
            if (is("{"))
                block(nl + 1, nle + 1);
            while (is("catch")) {
                ++pos_;
                paren_header(nl, nle);
                if (is("{"))
                    block(nl + 1, nle + 1);
            }
            if (is("finally")) {
                ++pos_;
                if (is("{"))
                    block(nl + 1, nle + 1);
            }
            return;
        }
        if (kw && t == "else") {  // dangling; tolerate
            ++pos_;
            return;
        }
        if (kw && (t == "class" || t == "interface" || t == "enum")) {
            local_class(nl, nle);
            return;
        }
        if ((kw && (t == "final" || t == "abstract" || t == "static")) || t == "@") {
            // Modifiers of a local declaration: find out whether a class follows.
            auto save = pos_;
            while (!at_end() && (text() == "final" || text() == "abstract" || text() == "static" || text() == "@")) {
                if (text() == "@") {
                    pos_ += 2;
                    if (is("("))
                        group(nl, nle);
                } else {
                    ++pos_;
                }
            }
            if (is("class") || is("interface") || is("enum")) {
                local_class(nl, nle);
                return;
            }
            pos_ = save;
        }
        if (kind(pos_) == TokenKind::identifier && text(pos_ + 1) == ":" ) {
            pos_ += 2;  // label
            statement(nl, nle);
            return;
        }
        ++counts_.statements;
        expression(nl, nle);
    }

    void local_class(int nl, int nle)
    {
        while (!at_end() && !is("{"))
            ++pos_;
        if (is("{"))
            class_body(nl, nle);
    }

    void if_statement(int nl, int nle)
    {
        ++counts_.statements;
        ++pos_;
        paren_header(nl, nle);
        enter(nl + 1, nle + 1);
        statement(nl + 1, nle + 1);
        if (is("else")) {
            ++pos_;
            if (is("if")) {
                // else-if nests for NL but not for NLE
                enter(nl + 1, nle);
                if_chain(nl + 1, nle);
            } else {
                enter(nl + 1, nle + 1);
                statement(nl + 1, nle + 1);
            }
        }
    }

    void if_chain(int nl, int nle)
    {
        if_statement(nl, nle);
    }

    const TokenStream& ts_;
    const std::vector<std::size_t>& sig_;
    std::size_t pos_ = 0;
    std::size_t end_ = 0;
    BodyCounts counts_;
};

struct LineCounts {
    int loc = 0;
    int lloc = 0;
    int cloc = 0;
    int dloc = 0;
};

using Ranges = std::vector<std::pair<int, int>>;

LineCounts count_lines(const FileAnalysis& f, int first, int last, const Ranges& excluded)
{
    LineCounts c;
    for (int line = first; line <= last; ++line) {
        bool skip = false;
        for (const auto& [a, b] : excluded)
            if (line >= a && line <= b) {
                skip = true;
                break;
            }
        if (skip)
            continue;
        ++c.loc;
        c.lloc += f.has_code(line);
        c.cloc += f.has_comment(line);
        c.dloc += f.has_doc(line);
    }
    return c;
}

double density(double comment, double logical)
{
    return comment + logical > 0 ? comment / (comment + logical) : 0.0;
}

void set_line_metrics(MetricsVector& m, const LineCounts& local, const LineCounts& total, int own_doc_lines)
{
    m.set("LOC", local.loc);
    m.set("LLOC", local.lloc);
    m.set("CLOC", local.cloc);
    m.set("DLOC", local.dloc + own_doc_lines);
    m.set("CD", density(local.cloc, local.lloc));
    m.set("TLOC", total.loc);
    m.set("TLLOC", total.lloc);
    m.set("TCLOC", total.cloc);
    m.set("TCD", density(total.cloc, total.lloc));
}

bool is_getter(const java::MethodInfo& m)
{
    if (m.is_constructor || !m.param_types.empty() || m.return_type == "void")
        return false;
    return (m.name.size() > 3 && m.name.starts_with("get")) || (m.name.size() > 2 && m.name.starts_with("is"));
}

bool is_setter(const java::MethodInfo& m)
{
    return !m.is_constructor && m.param_types.size() == 1 && m.name.size() > 3 && m.name.starts_with("set");
}

struct MemberCounts {
    int methods = 0, public_methods = 0, attributes = 0, public_attributes = 0, getters = 0, setters = 0;

    MemberCounts& operator+=(const MemberCounts& o)
    {
        methods += o.methods;
        public_methods += o.public_methods;
        attributes += o.attributes;
        public_attributes += o.public_attributes;
        getters += o.getters;
        setters += o.setters;
        return *this;
    }
};

MemberCounts local_members(const java::FileStructure& fs, const java::ClassInfo& ci)
{
    MemberCounts c;
    for (auto mi : ci.methods) {
        const auto& m = fs.methods[mi];
        ++c.methods;
        c.public_methods += m.is_public;
        c.getters += is_getter(m);
        c.setters += is_setter(m);
    }
    for (const auto& f : ci.fields) {
        c.attributes += f.declarators;
        if (f.is_public)
            c.public_attributes += f.declarators;
    }
    return c;
}

MemberCounts total_members(const java::FileStructure& fs, std::size_t class_index)
{
    const auto& ci = fs.classes[class_index];
    auto c = local_members(fs, ci);
    for (auto n : ci.nested)
        c += total_members(fs, n);
    return c;
}

}  // namespace

std::span<const std::string_view> columns(ElementKind level)
{
    switch (level) {
    case ElementKind::method: return method_cols;
    case ElementKind::class_: return class_cols;
    case ElementKind::file: return file_cols;
    }
    return {};
}

bool is_uncomputed(std::string_view id)
{
    return std::find(std::begin(uncomputed), std::end(uncomputed), id) != std::end(uncomputed);
}

MetricsVector::MetricsVector(ElementKind level) : level_(level), values_(columns(level).size()) {}

std::size_t MetricsVector::index_of(std::string_view id) const
{
    auto cols = columns(level_);
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == id)
            return i;
    throw std::out_of_range(fmt::format("metric '{}' is not defined for level {}", id, to_string(level_)));
}

std::optional<double> MetricsVector::get(std::string_view id) const
{
    auto cols = columns(level_);
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == id)
            return values_[i];
    return std::nullopt;
}

double MetricsVector::at(std::string_view id) const
{
    auto v = values_[index_of(id)];
    if (!v)
        throw std::out_of_range(fmt::format("metric '{}' not computed", id));
    return *v;
}

void MetricsVector::set(std::string_view id, double value)
{
    values_[index_of(id)] = value;
}

std::string format_value(const std::optional<double>& v)
{
    if (!v)
        return {};
    if (*v == 0.0)
        return "0";  // also folds -0
    return fmt::format("{}", *v);
}

FileAnalysis::FileAnalysis(std::string path, std::string source)
    : path_(std::move(path)), tokens_(java::tokenize(std::move(source)))
{
    structure_ = java::analyze_structure(path_, tokens_);
    const auto n = static_cast<std::size_t>(tokens_.line_count()) + 2;
    code_.assign(n, 0);
    comment_.assign(n, 0);
    doc_.assign(n, 0);
    for (const auto& t : tokens_.tokens()) {
        if (t.kind == TokenKind::whitespace)
            continue;
        for (int l = t.line; l <= t.end_line && static_cast<std::size_t>(l) < n; ++l) {
            if (t.kind == TokenKind::comment) {
                comment_[static_cast<std::size_t>(l)] = 1;
                if (t.comment == java::CommentStyle::doc)
                    doc_[static_cast<std::size_t>(l)] = 1;
            } else {
                code_[static_cast<std::size_t>(l)] = 1;
            }
        }
    }
}

BodyCounts walk_body(const TokenStream& tokens, std::size_t body_open)
{
    auto sig = significant(tokens);
    auto p = sig_pos(sig, body_open);
    BodyWalker walker(tokens, sig);
    auto counts = walker.walk(p);
    auto tails = do_while_tails(tokens, sig);
    counts.decisions = count_decisions(tokens, sig, p, match_brace(tokens, sig, p), tails);
    return counts;
}

Halstead halstead_counts(const TokenStream& tokens, std::size_t body_open)
{
    auto sig = significant(tokens);
    auto open = sig_pos(sig, body_open);
    auto close = match_brace(tokens, sig, open);
    std::set<std::string_view> ops, operands;
    Halstead h;
    for (auto p = open + 1; p < close; ++p) {
        const auto& t = tokens[sig[p]];
        auto lex = tokens.lexeme(t);
        if (t.kind == TokenKind::identifier || t.kind == TokenKind::literal) {
            ++h.total_operands;
            operands.insert(lex);
        } else if (lex == ")" || lex == "]" || lex == "}") {
            // closers pair with their opener
        } else {
            ++h.total_operators;
            ops.insert(lex);
        }
    }
    h.distinct_operators = static_cast<int>(ops.size());
    h.distinct_operands = static_cast<int>(operands.size());
    return h;
}

int decision_points(const TokenStream& tokens)
{
    auto sig = significant(tokens);
    return count_decisions(tokens, sig, 0, sig.size(), do_while_tails(tokens, sig));
}

MetricsVector method_metrics(const FileAnalysis& file, std::size_t method_index)
{
    const auto& fs = file.structure();
    const auto& mi = fs.methods.at(method_index);
    const auto& elem = fs.elements[mi.element];
    MetricsVector m(ElementKind::method);

    auto lines = count_lines(file, elem.start_line, elem.end_line, {});
    const int own_doc = mi.documented ? mi.doc_last_line - mi.doc_first_line + 1 : 0;
    set_line_metrics(m, lines, lines, own_doc);

    BodyCounts body;
    Halstead h;
    if (mi.body_open) {
        body = walk_body(file.tokens(), *mi.body_open);
        h = halstead_counts(file.tokens(), *mi.body_open);
    }
    m.set("NOS", body.statements);
    m.set("TNOS", body.statements);
    m.set("NL", body.nesting);
    m.set("NLE", body.nesting_else_if);
    const double mccc = 1 + body.decisions;
    m.set("McCC", mccc);
    m.set("NUMPAR", static_cast<double>(mi.param_types.size()));

    const double eta1 = h.distinct_operators, eta2 = h.distinct_operands;
    const double n1 = h.total_operators, n2 = h.total_operands;
    const double hpv = eta1 + eta2;
    const double hpl = n1 + n2;
    const double hvol = hpv > 0 ? hpl * std::log2(hpv) : 0.0;
    const double hdif = eta2 > 0 ? (eta1 / 2.0) * (n2 / eta2) : 0.0;
    const double heff = hdif * hvol;
    m.set("HPV", hpv);
    m.set("HPL", hpl);
    m.set("HVOL", hvol);
    m.set("HCPL", xlog2x(eta1) + xlog2x(eta2));
    m.set("HDIF", hdif);
    m.set("HEFF", heff);
    m.set("HNDB", hvol / 3000.0);
    m.set("HTRP", heff / 18.0);

    const double lloc = lines.lloc;
    const double cd = m.at("CD");
    const double mi_orig = 171.0 - 5.2 * log_or_zero(hvol, std::log) - 0.23 * mccc - 16.2 * log_or_zero(lloc, std::log);
    const double comment_term = 50.0 * std::sin(std::sqrt(2.4 * cd));
    m.set("MI", mi_orig);
    m.set("MIMS", std::max(0.0, mi_orig * 100.0 / 171.0));
    m.set("MISEI", 171.0 - 5.2 * log_or_zero(hvol, std::log2) - 0.23 * mccc - 16.2 * log_or_zero(lloc, std::log2) +
                       comment_term);
    m.set("MISM", mi_orig + comment_term);
    return m;
}

MetricsVector class_metrics(const FileAnalysis& file, std::size_t class_index,
                            std::span<const MetricsVector> local_methods)
{
    const auto& fs = file.structure();
    const auto& ci = fs.classes.at(class_index);
    const auto& elem = fs.elements[ci.element];
    MetricsVector m(ElementKind::class_);

    Ranges nested;
    for (auto n : ci.nested) {
        const auto& ne = fs.elements[fs.classes[n].element];
        nested.emplace_back(ne.start_line, ne.end_line);
    }
    auto local = count_lines(file, elem.start_line, elem.end_line, nested);
    auto total = count_lines(file, elem.start_line, elem.end_line, {});
    const int own_doc = ci.documented ? ci.doc_last_line - ci.doc_first_line + 1 : 0;
    set_line_metrics(m, local, total, own_doc);

    double nos = 0, wmc = 0, nl = 0, nle = 0;
    for (const auto& mv : local_methods) {
        nos += mv.at("NOS");
        wmc += mv.at("McCC");
        nl = std::max(nl, mv.at("NL"));
        nle = std::max(nle, mv.at("NLE"));
    }
    // TNOS walks nested classes directly; their vectors are not passed in.
    double tnos = nos;
    std::vector<std::size_t> stack(ci.nested.begin(), ci.nested.end());
    while (!stack.empty()) {
        auto c = stack.back();
        stack.pop_back();
        for (auto mi : fs.classes[c].methods)
            if (fs.methods[mi].body_open)
                tnos += walk_body(file.tokens(), *fs.methods[mi].body_open).statements;
        stack.insert(stack.end(), fs.classes[c].nested.begin(), fs.classes[c].nested.end());
    }
    m.set("NOS", nos);
    m.set("TNOS", tnos);
    m.set("WMC", wmc);
    m.set("NL", nl);
    m.set("NLE", nle);

    int pda = 0, pua = 0;
    for (auto mi : ci.methods) {
        const auto& md = fs.methods[mi];
        if (!md.is_public)
            continue;
        (md.documented ? pda : pua) += 1;
    }
    m.set("PDA", pda);
    m.set("PUA", pua);
    m.set("AD", pda + pua > 0 ? static_cast<double>(pda) / (pda + pua) : 0.0);

    auto lc = local_members(fs, ci);
    auto tc = total_members(fs, class_index);
    m.set("NLM", lc.methods);
    m.set("NM", lc.methods);
    m.set("NLPM", lc.public_methods);
    m.set("NPM", lc.public_methods);
    m.set("NLA", lc.attributes);
    m.set("NA", lc.attributes);
    m.set("NLPA", lc.public_attributes);
    m.set("NPA", lc.public_attributes);
    m.set("NLG", lc.getters);
    m.set("NG", lc.getters);
    m.set("NLS", lc.setters);
    m.set("NS", lc.setters);
    m.set("TNLM", tc.methods);
    m.set("TNM", tc.methods);
    m.set("TNLPM", tc.public_methods);
    m.set("TNPM", tc.public_methods);
    m.set("TNLA", tc.attributes);
    m.set("TNA", tc.attributes);
    m.set("TNLPA", tc.public_attributes);
    m.set("TNPA", tc.public_attributes);
    m.set("TNLG", tc.getters);
    m.set("TNG", tc.getters);
    m.set("TNLS", tc.setters);
    m.set("TNS", tc.setters);
    return m;
}

MetricsVector file_metrics(const FileAnalysis& file)
{
    MetricsVector m(ElementKind::file);
    auto lines = count_lines(file, 1, file.line_count(), {});
    m.set("LOC", lines.loc);
    m.set("LLOC", lines.lloc);
    m.set("CLOC", lines.cloc);
    m.set("McCC", 1 + decision_points(file.tokens()));
    int pda = 0, pua = 0;
    for (const auto& md : file.structure().methods) {
        if (!md.is_public)
            continue;
        (md.documented ? pda : pua) += 1;
    }
    m.set("PDA", pda);
    m.set("PUA", pua);
    return m;
}

std::map<std::string, MetricsVector> compute_all(const FileAnalysis& file)
{
    const auto& fs = file.structure();
    std::map<std::string, MetricsVector> out;
    out.emplace(fs.elements.front().fqn, file_metrics(file));
    std::vector<MetricsVector> per_method(fs.methods.size());
    for (std::size_t i = 0; i < fs.methods.size(); ++i) {
        per_method[i] = method_metrics(file, i);
        out.emplace(fs.elements[fs.methods[i].element].fqn, per_method[i]);
    }
    for (std::size_t c = 0; c < fs.classes.size(); ++c) {
        std::vector<MetricsVector> locals;
        for (auto mi : fs.classes[c].methods)
            locals.push_back(per_method[mi]);
        out.emplace(fs.elements[fs.classes[c].element].fqn, class_metrics(file, c, locals));
    }
    return out;
}

}  // namespace bugmine::metrics
