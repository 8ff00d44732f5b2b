#include "curvatur/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace curvatur {

ExprPtr Expr::number(double v)
{
    if (!std::isfinite(v)) throw PreconditionError("expression constants must be finite");
    if (v < 0 || (v == 0 && std::signbit(v))) return unary(Op::neg, number(-v));
    auto e = std::make_shared<Expr>();
    e->op = Op::number;
    e->value = v;
    return e;
}

ExprPtr Expr::variable(std::string name)
{
    auto e = std::make_shared<Expr>();
    e->op = Op::variable;
    e->name = std::move(name);
    return e;
}

ExprPtr Expr::unary(Op op, ExprPtr a)
{
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->args = {std::move(a)};
    return e;
}

ExprPtr Expr::binary(Op op, ExprPtr a, ExprPtr b)
{
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->args = {std::move(a), std::move(b)};
    return e;
}

ExprPtr Expr::call(std::string fn, ExprPtr a)
{
    const auto& fns = expr_functions();
    if (std::find(fns.begin(), fns.end(), fn) == fns.end()) throw PreconditionError("unknown function '" + fn + "'");
    auto e = std::make_shared<Expr>();
    e->op = Op::call;
    e->name = std::move(fn);
    e->args = {std::move(a)};
    return e;
}

const std::vector<std::string>& expr_functions()
{
    static const std::vector<std::string> f{"sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh"};
    return f;
}

bool equal(const Expr& a, const Expr& b)
{
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    if (a.op == Expr::Op::number && a.value != b.value) return false;
    if ((a.op == Expr::Op::variable || a.op == Expr::Op::call) && a.name != b.name) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equal(*a.args[i], *b.args[i])) return false;
    return true;
}

namespace {

// Binding strength: sums 1, products 2, negation 3, powers 4, atoms 5.
int precedence(const Expr& e)
{
    switch (e.op) {
    case Expr::Op::add:
    case Expr::Op::sub: return 1;
    case Expr::Op::mul:
    case Expr::Op::div: return 2;
    case Expr::Op::neg: return 3;
    case Expr::Op::pow: return 4;
    default: return 5;
    }
}

void print_to(const Expr& e, int need, std::string& out)
{
    const int p = precedence(e);
    const bool paren = p < need;
    if (paren) out += '(';
    switch (e.op) {
    case Expr::Op::number: {
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof buf, e.value);
        out.append(buf, r.ptr);
        break;
    }
    case Expr::Op::variable: out += e.name; break;
    case Expr::Op::neg:
        out += '-';
        print_to(*e.args[0], 3, out);
        break;
    case Expr::Op::add:
    case Expr::Op::sub:
        print_to(*e.args[0], 1, out);
        out += e.op == Expr::Op::add ? " + " : " - ";
        print_to(*e.args[1], 2, out);
        break;
    case Expr::Op::mul:
    case Expr::Op::div:
        print_to(*e.args[0], 2, out);
        out += e.op == Expr::Op::mul ? "*" : "/";
        print_to(*e.args[1], 3, out);
        break;
    case Expr::Op::pow:
        print_to(*e.args[0], 5, out);
        out += '^';
        print_to(*e.args[1], 3, out);
        break;
    case Expr::Op::call:
        out += e.name;
        out += '(';
        print_to(*e.args[0], 0, out);
        out += ')';
        break;
    }
    if (paren) out += ')';
}

void collect(const Expr& e, std::vector<std::string>& names)
{
    if (e.op == Expr::Op::variable && std::find(names.begin(), names.end(), e.name) == names.end())
        names.push_back(e.name);
    for (const auto& a : e.args) collect(*a, names);
}

} // namespace

std::string print(const Expr& e)
{
    std::string out;
    print_to(e, 0, out);
    return out;
}

std::vector<std::string> free_variables(const Expr& e)
{
    std::vector<std::string> names;
    collect(e, names);
    return names;
}

ExprProgram::ExprProgram(const Expr& e, const std::vector<std::string>& slots,
                         const std::map<std::string, double>& bound)
{
    emit(e, slots, bound);
}

void ExprProgram::emit(const Expr& e, const std::vector<std::string>& slots, const std::map<std::string, double>& bound)
{
    using Op = Expr::Op;
    switch (e.op) {
    case Op::number: code_.push_back({Code::constant, e.value, 0}); return;
    case Op::variable: {
        auto it = std::find(slots.begin(), slots.end(), e.name);
        if (it != slots.end()) {
            code_.push_back({Code::slot, 0.0, static_cast<int>(it - slots.begin())});
            return;
        }
        auto b = bound.find(e.name);
        if (b == bound.end()) throw PreconditionError("unbound variable '" + e.name + "'");
        code_.push_back({Code::constant, b->second, 0});
        return;
    }
    case Op::neg:
        emit(*e.args[0], slots, bound);
        code_.push_back({Code::neg});
        return;
    case Op::pow: {
        emit(*e.args[0], slots, bound);
        // constant exponents avoid exp(b log a), which needs a > 0
        const Expr& b = *e.args[1];
        const bool neg = b.op == Op::neg && b.args[0]->op == Op::number;
        if (b.op == Op::number || neg) {
            const double v = neg ? -b.args[0]->value : b.value;
            if (v == std::round(v) && std::abs(v) <= 64)
                code_.push_back({Code::ipow, 0.0, static_cast<int>(v)});
            else
                code_.push_back({Code::rpow, v, 0});
            return;
        }
        emit(b, slots, bound);
        code_.push_back({Code::pow});
        return;
    }
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
        emit(*e.args[0], slots, bound);
        emit(*e.args[1], slots, bound);
        code_.push_back({e.op == Op::add   ? Code::add
                         : e.op == Op::sub ? Code::sub
                         : e.op == Op::mul ? Code::mul
                                           : Code::div});
        return;
    case Op::call: {
        emit(*e.args[0], slots, bound);
        static const std::map<std::string, Code> fn{{"sin", Code::sin},   {"cos", Code::cos},  {"tan", Code::tan},
                                                    {"exp", Code::exp},   {"log", Code::log},  {"sqrt", Code::sqrt},
                                                    {"sinh", Code::sinh}, {"cosh", Code::cosh}};
        code_.push_back({fn.at(e.name)});
        return;
    }
    }
}

} // namespace curvatur
