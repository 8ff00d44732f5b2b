#pragma once

#include "curvatur/error.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace curvatur {

// Expression syntax tree. Numbers are never negative: a leading minus is a
// neg node, so every tree built through the factories prints and parses back
// to itself.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Op { number, variable, neg, add, sub, mul, div, pow, call };
    Op op = Op::number;
    double value = 0.0;
    std::string name; // variable or function name
    std::vector<ExprPtr> args;

    static ExprPtr number(double v);
    static ExprPtr variable(std::string name);
    static ExprPtr unary(Op op, ExprPtr a);
    static ExprPtr binary(Op op, ExprPtr a, ExprPtr b);
    static ExprPtr call(std::string fn, ExprPtr a);
};

// Functions of one argument accepted in expressions.
const std::vector<std::string>& expr_functions();

bool equal(const Expr& a, const Expr& b);
// Minimal parentheses; numbers in shortest round-trip form.
std::string print(const Expr& e);
// Free variable names in order of first appearance.
std::vector<std::string> free_variables(const Expr& e);

// Syntax error with a 1-based position and the set of tokens that would have
// been accepted there.
class ParseError : public PreconditionError {
public:
    ParseError(int line, int column, std::vector<std::string> expected, const std::string& found,
               const std::string& detail = {});
    int line() const { return line_; }
    int column() const { return column_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    int line_, column_;
    std::vector<std::string> expected_;
};

ExprPtr parse_expr(std::string_view text);

// Straight-line program for fast evaluation on doubles or jets. Variables
// resolve to slots or to bound constants at compile time.
class ExprProgram {
public:
    ExprProgram() = default;
    // Throws PreconditionError for a variable that is neither a slot nor bound.
    ExprProgram(const Expr& e, const std::vector<std::string>& slots, const std::map<std::string, double>& bound);

    template <class T>
    T operator()(const T* x) const
    {
        using std::cos, std::cosh, std::exp, std::log, std::pow, std::sin, std::sinh, std::sqrt, std::tan;
        std::vector<T> st;
        st.reserve(code_.size());
        for (const auto& in : code_) {
            switch (in.op) {
            case Code::constant: st.push_back(T(in.value)); break;
            case Code::slot: st.push_back(x[in.index]); break;
            case Code::neg: st.back() = -st.back(); break;
            case Code::add: binop(st, [](const T& a, const T& b) { return a + b; }); break;
            case Code::sub: binop(st, [](const T& a, const T& b) { return a - b; }); break;
            case Code::mul: binop(st, [](const T& a, const T& b) { return a * b; }); break;
            case Code::div: binop(st, [](const T& a, const T& b) { return a / b; }); break;
            case Code::ipow: st.back() = pow(st.back(), in.index); break;
            case Code::rpow: st.back() = pow(st.back(), in.value); break;
            case Code::pow: binop(st, [](const T& a, const T& b) { return exp(b * log(a)); }); break;
            case Code::sin: st.back() = sin(st.back()); break;
            case Code::cos: st.back() = cos(st.back()); break;
            case Code::tan: st.back() = tan(st.back()); break;
            case Code::exp: st.back() = exp(st.back()); break;
            case Code::log: st.back() = log(st.back()); break;
            case Code::sqrt: st.back() = sqrt(st.back()); break;
            case Code::sinh: st.back() = sinh(st.back()); break;
            case Code::cosh: st.back() = cosh(st.back()); break;
            }
        }
        return st.back();
    }

private:
    enum class Code { constant, slot, neg, add, sub, mul, div, ipow, rpow, pow, sin, cos, tan, exp, log, sqrt, sinh, cosh };
    struct Instr {
        Code op;
        double value = 0.0;
        int index = 0;
    };
    template <class T, class F>
    static void binop(std::vector<T>& st, F f)
    {
        T b = std::move(st.back());
        st.pop_back();
        st.back() = f(st.back(), b);
    }
    void emit(const Expr& e, const std::vector<std::string>& slots, const std::map<std::string, double>& bound);
    std::vector<Instr> code_;
};

} // namespace curvatur
