#include "curvatur/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>

namespace curvatur {

namespace {

std::string join_expected(const std::vector<std::string>& e)
{
    std::string s;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (i) s += i + 1 == e.size() ? " or " : ", ";
        s += e[i];
    }
    return s;
}

std::string format_parse_error(int line, int column, const std::vector<std::string>& expected, const std::string& found,
                               const std::string& detail)
{
    std::string msg = "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
    if (!detail.empty()) msg += detail + "; ";
    if (!expected.empty()) msg += "expected " + join_expected(expected) + " but ";
    msg += "found " + found;
    return msg;
}

} // namespace

ParseError::ParseError(int line, int column, std::vector<std::string> expected, const std::string& found,
                       const std::string& detail)
    : PreconditionError(format_parse_error(line, column, expected, found, detail)), line_(line), column_(column),
      expected_(std::move(expected))
{
}

const char* to_string(GeometryKind k)
{
    switch (k) {
    case GeometryKind::curve: return "curve";
    case GeometryKind::surface: return "surface";
    case GeometryKind::metric: return "metric";
    }
    return "?";
}

namespace {

struct Token {
    enum Kind { number, ident, punct, end } kind = end;
    std::string text;
    double value = 0.0;
    int line = 1, column = 1;

    std::string describe() const
    {
        switch (kind) {
        case number: return "number '" + text + "'";
        case ident: return "'" + text + "'";
        case punct: return "'" + text + "'";
        case end: return "end of input";
        }
        return text;
    }
};

const std::vector<std::string> kOperand{"number", "identifier", "'('", "'-'"};

std::vector<Token> lex(std::string_view src)
{
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            auto digits = [&] {
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            };
            digits();
            if (j < src.size() && src[j] == '.') {
                ++j;
                digits();
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    digits();
                }
            }
            t.kind = Token::number;
            t.text = std::string(src.substr(i, j - i));
            auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
            if (r.ec != std::errc() || !std::isfinite(t.value))
                throw ParseError(line, col, {"finite number"}, "'" + t.text + "'", "number out of range");
            advance(j - i);
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = Token::ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::string_view("()[],=+-*/^").find(c) != std::string_view::npos) {
            t.kind = Token::punct;
            t.text = std::string(1, c);
            advance(1);
        } else {
            throw ParseError(line, col, {"number", "identifier", "operator", "bracket"},
                             "'" + std::string(1, c) + "'", "invalid character");
        }
        out.push_back(std::move(t));
    }
    Token e;
    e.kind = Token::end;
    e.line = line;
    e.column = col;
    out.push_back(e);
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    const Token& peek() const { return toks_[pos_]; }
    bool at_end() const { return peek().kind == Token::end; }

    [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail = {}) const
    {
        const Token& t = peek();
        throw ParseError(t.line, t.column, std::move(expected), t.describe(), detail);
    }

    bool is_punct(char c) const { return peek().kind == Token::punct && peek().text[0] == c; }
    bool is_word(const char* w) const { return peek().kind == Token::ident && peek().text == w; }

    bool accept(char c)
    {
        if (!is_punct(c)) return false;
        ++pos_;
        return true;
    }

    // after_expr: an expression just ended, so operators could also follow.
    void expect(char c, bool after_expr = false)
    {
        if (accept(c)) return;
        std::vector<std::string> e{"'" + std::string(1, c) + "'"};
        if (after_expr)
            for (const char* op : {"'+'", "'-'", "'*'", "'/'", "'^'"}) e.push_back(op);
        fail(e);
    }

    void expect_word(const char* w)
    {
        if (is_word(w)) {
            ++pos_;
            return;
        }
        fail({"'" + std::string(w) + "'"});
    }

    Token ident()
    {
        if (peek().kind != Token::ident) fail({"identifier"});
        return toks_[pos_++];
    }

    double number()
    {
        if (peek().kind != Token::number) fail({"number"});
        return toks_[pos_++].value;
    }

    ExprPtr expr()
    {
        ExprPtr a = term();
        while (is_punct('+') || is_punct('-')) {
            const bool add = toks_[pos_++].text[0] == '+';
            a = Expr::binary(add ? Expr::Op::add : Expr::Op::sub, a, term());
        }
        return a;
    }

    ExprPtr term()
    {
        ExprPtr a = unary();
        while (is_punct('*') || is_punct('/')) {
            const bool mul = toks_[pos_++].text[0] == '*';
            a = Expr::binary(mul ? Expr::Op::mul : Expr::Op::div, a, unary());
        }
        return a;
    }

    ExprPtr unary()
    {
        if (accept('-')) return Expr::unary(Expr::Op::neg, unary());
        return power();
    }

    ExprPtr power()
    {
        ExprPtr base = primary();
        if (accept('^')) return Expr::binary(Expr::Op::pow, base, unary());
        return base;
    }

    ExprPtr primary()
    {
        const Token& t = peek();
        if (t.kind == Token::number) {
            ++pos_;
            return Expr::number(t.value);
        }
        if (t.kind == Token::ident) {
            Token id = toks_[pos_++];
            if (is_punct('(')) {
                const auto& fns = expr_functions();
                if (std::find(fns.begin(), fns.end(), id.text) == fns.end()) {
                    std::vector<std::string> e;
                    for (const auto& f : fns) e.push_back("'" + f + "'");
                    throw ParseError(id.line, id.column, e, "'" + id.text + "'", "unknown function");
                }
                ++pos_;
                ExprPtr a = expr();
                expect(')', true);
                return Expr::call(id.text, a);
            }
            if (!first_use_.count(id.text)) first_use_[id.text] = {id.line, id.column};
            return Expr::variable(id.text);
        }
        if (accept('(')) {
            ExprPtr a = expr();
            expect(')', true);
            return a;
        }
        fail(kOperand);
    }

    std::map<std::string, std::pair<int, int>> first_use_;

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

void check_bound(const Parser& p, const ExprPtr& e, const std::set<std::string>& ok, const std::string& where)
{
    for (const auto& v : free_variables(*e)) {
        if (ok.count(v)) continue;
        auto it = p.first_use_.find(v);
        const int line = it == p.first_use_.end() ? 1 : it->second.first;
        const int col = it == p.first_use_.end() ? 1 : it->second.second;
        std::vector<std::string> expected;
        for (const auto& o : ok) expected.push_back("'" + o + "'");
        throw ParseError(line, col, expected, "'" + v + "'", "unbound variable in " + where);
    }
}

} // namespace

ExprPtr parse_expr(std::string_view text)
{
    Parser p(text);
    ExprPtr e = p.expr();
    if (!p.at_end()) p.fail({"end of input", "'+'", "'-'", "'*'", "'/'", "'^'"});
    return e;
}

GeometrySpec parse_geometry(std::string_view text)
{
    Parser p(text);
    GeometrySpec s;
    bool have_def = false;
    std::map<std::string, std::pair<int, int>> param_pos;
    while (!p.at_end()) {
        if (p.is_word("param")) {
            p.expect_word("param");
            Token id = p.ident();
            if (id.text == "pi" || s.params.count(id.text))
                throw ParseError(id.line, id.column, {"new parameter name"}, "'" + id.text + "'",
                                 id.text == "pi" ? "'pi' is reserved" : "duplicate parameter");
            p.expect('=');
            const bool neg = p.accept('-');
            const double v = p.number();
            s.params[id.text] = neg ? -v : v;
            param_pos[id.text] = {id.line, id.column};
            continue;
        }
        if (have_def) p.fail({"'param'", "end of input"}, "only one geometry per definition");
        if (p.is_word("curve"))
            s.kind = GeometryKind::curve;
        else if (p.is_word("surface"))
            s.kind = GeometryKind::surface;
        else if (p.is_word("metric"))
            s.kind = GeometryKind::metric;
        else
            p.fail({"'param'", "'curve'", "'surface'", "'metric'"});
        p.ident();
        have_def = true;
        s.name = p.ident().text;

        p.expect('(');
        for (;;) {
            Token c = p.ident();
            if (c.text == "pi" || c.text == "in" ||
                std::find(s.coords.begin(), s.coords.end(), c.text) != s.coords.end())
                throw ParseError(c.line, c.column, {"coordinate name"}, "'" + c.text + "'",
                                 "invalid or repeated coordinate name");
            s.coords.push_back(c.text);
            if (p.accept(',')) continue;
            if (p.is_word("in")) break;
            p.fail({"','", "'in'"});
        }
        const int want = s.kind == GeometryKind::curve ? 1 : s.kind == GeometryKind::surface ? 2 : -1;
        if (want > 0 && static_cast<int>(s.coords.size()) != want)
            p.fail({}, std::string(to_string(s.kind)) + " takes " + std::to_string(want) + " coordinate(s)");
        if (s.kind == GeometryKind::metric && (s.coords.size() < 2 || s.coords.size() > 3))
            p.fail({}, "metric takes 2 or 3 coordinates");
        p.expect_word("in");
        for (std::size_t k = 0; k < s.coords.size(); ++k) {
            if (k > 0) {
                if (!p.is_word("x")) p.fail({"'x'"}, "one interval per coordinate");
                p.expect_word("x");
            }
            p.expect('[');
            s.lo.push_back(p.expr());
            p.expect(',', true);
            s.hi.push_back(p.expr());
            p.expect(']', true);
        }
        if (p.is_word("x")) p.fail({"')'"}, "more intervals than coordinates");
        p.expect(')');
        p.expect('=');

        if (s.kind == GeometryKind::metric) {
            const std::size_t n = s.coords.size();
            std::vector<std::pair<int, int>> at;
            p.expect('[');
            for (std::size_t i = 0; i < n; ++i) {
                if (i > 0) p.expect(',');
                p.expect('[');
                for (std::size_t j = 0; j < n; ++j) {
                    if (j > 0) p.expect(',', true);
                    at.emplace_back(p.peek().line, p.peek().column);
                    s.components.push_back(p.expr());
                }
                if (p.is_punct(',')) p.fail({"']'"}, "metric row has more than " + std::to_string(n) + " entries");
                p.expect(']', true);
            }
            if (p.is_punct(',')) p.fail({"']'"}, "metric has more than " + std::to_string(n) + " rows");
            p.expect(']');
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (!equal(*s.components[i * n + j], *s.components[j * n + i]))
                        throw ParseError(at[j * n + i].first, at[j * n + i].second,
                                         {"'" + print(*s.components[i * n + j]) + "'"},
                                         "'" + print(*s.components[j * n + i]) + "'",
                                         "metric matrix must be symmetric, entry (" + std::to_string(j + 1) + "," +
                                             std::to_string(i + 1) + ") mirrors (" + std::to_string(i + 1) + "," +
                                             std::to_string(j + 1) + ")");
        } else {
            p.expect('(');
            s.components.push_back(p.expr());
            while (p.accept(',')) s.components.push_back(p.expr());
            const std::size_t m = s.components.size();
            const bool ok = s.kind == GeometryKind::curve ? (m == 2 || m == 3) : m == 3;
            const std::size_t need = s.kind == GeometryKind::curve ? 2 : 3;
            if (!ok)
                p.fail({m < need ? "','" : "')'"}, std::string(to_string(s.kind)) + " needs " +
                               (s.kind == GeometryKind::curve ? "2 or 3" : "3") + " components, got " +
                               std::to_string(m));
            p.expect(')', true);
        }
    }
    if (!have_def) p.fail({"'curve'", "'surface'", "'metric'"}, "no geometry defined");

    std::set<std::string> constants{"pi"};
    for (const auto& [k, v] : s.params) constants.insert(k);
    for (const auto& [k, pos] : param_pos)
        if (std::find(s.coords.begin(), s.coords.end(), k) != s.coords.end())
            throw ParseError(pos.first, pos.second, {"parameter name"}, "'" + k + "'",
                             "parameter shadows a coordinate");
    for (std::size_t k = 0; k < s.lo.size(); ++k) {
        check_bound(p, s.lo[k], constants, "interval bound");
        check_bound(p, s.hi[k], constants, "interval bound");
    }
    std::set<std::string> vars = constants;
    vars.insert(s.coords.begin(), s.coords.end());
    for (const auto& c : s.components) check_bound(p, c, vars, "component");
    return s;
}

bool equal(const GeometrySpec& a, const GeometrySpec& b)
{
    auto same = [](const std::vector<ExprPtr>& x, const std::vector<ExprPtr>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!equal(*x[i], *y[i])) return false;
        return true;
    };
    return a.kind == b.kind && a.name == b.name && a.coords == b.coords && a.params == b.params && same(a.lo, b.lo) &&
           same(a.hi, b.hi) && same(a.components, b.components);
}

std::string print(const GeometrySpec& s)
{
    std::string out;
    for (const auto& [k, v] : s.params) {
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof buf, v);
        out += "param " + k + " = " + std::string(buf, r.ptr) + "\n";
    }
    out += std::string(to_string(s.kind)) + " " + s.name + " (";
    for (std::size_t i = 0; i < s.coords.size(); ++i) out += (i ? "," : "") + s.coords[i];
    out += " in ";
    for (std::size_t i = 0; i < s.coords.size(); ++i)
        out += (i ? "x[" : "[") + print(*s.lo[i]) + ", " + print(*s.hi[i]) + "]";
    out += ") = ";
    if (s.kind == GeometryKind::metric) {
        const std::size_t n = s.coords.size();
        out += "[";
        for (std::size_t i = 0; i < n; ++i) {
            out += i ? ", [" : "[";
            for (std::size_t j = 0; j < n; ++j) out += (j ? ", " : "") + print(*s.components[i * n + j]);
            out += "]";
        }
        out += "]";
    } else {
        out += "(";
        for (std::size_t i = 0; i < s.components.size(); ++i) out += (i ? ", " : "") + print(*s.components[i]);
        out += ")";
    }
    out += "\n";
    return out;
}

} // namespace curvatur
