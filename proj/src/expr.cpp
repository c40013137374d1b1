#include "ksymp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>
#include <vector>

namespace ksymp {

namespace detail {

struct ExprNode {
    ExprKind kind;
    double value = 0.0;      // Constant payload or Pow exponent
    std::string name;        // Variable payload
    NodePtr lhs;
    NodePtr rhs;
};

namespace {

NodePtr make_const(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Constant;
    n->value = v;
    return n;
}

NodePtr make_var(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Variable;
    n->name = std::move(name);
    return n;
}

NodePtr make_unary(ExprKind k, NodePtr child) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->lhs = std::move(child);
    return n;
}

NodePtr make_binary(ExprKind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

NodePtr make_pow(NodePtr base, double exponent) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Pow;
    n->lhs = std::move(base);
    n->value = exponent;
    return n;
}

bool is_integral(double x) {
    return std::isfinite(x) && std::floor(x) == x && std::fabs(x) < 1e15;
}

double eval_int_pow(double base, long long e) {
    if (e < 0) {
        const double denom = eval_int_pow(base, -e);
        if (denom == 0.0)
            throw EvalError("division by zero in negative power");
        return 1.0 / denom;
    }
    double result = 1.0;
    double acc = base;
    while (e > 0) {
        if (e & 1)
            result *= acc;
        acc *= acc;
        e >>= 1;
    }
    return result;
}

double eval_node(const ExprNode& n, const Bindings& bindings) {
    switch (n.kind) {
    case ExprKind::Constant:
        return n.value;
    case ExprKind::Variable: {
        auto it = bindings.find(n.name);
        if (it == bindings.end())
            throw EvalError("unbound variable '" + n.name + "'");
        return it->second;
    }
    case ExprKind::Neg:
        return -eval_node(*n.lhs, bindings);
    case ExprKind::Sin:
        return std::sin(eval_node(*n.lhs, bindings));
    case ExprKind::Cos:
        return std::cos(eval_node(*n.lhs, bindings));
    case ExprKind::Exp:
        return std::exp(eval_node(*n.lhs, bindings));
    case ExprKind::Log: {
        const double v = eval_node(*n.lhs, bindings);
        if (v <= 0.0)
            throw EvalError("log of non-positive value");
        return std::log(v);
    }
    case ExprKind::Sqrt: {
        const double v = eval_node(*n.lhs, bindings);
        if (v < 0.0)
            throw EvalError("sqrt of negative value");
        return std::sqrt(v);
    }
    case ExprKind::Add:
        return eval_node(*n.lhs, bindings) + eval_node(*n.rhs, bindings);
    case ExprKind::Sub:
        return eval_node(*n.lhs, bindings) - eval_node(*n.rhs, bindings);
    case ExprKind::Mul:
        return eval_node(*n.lhs, bindings) * eval_node(*n.rhs, bindings);
    case ExprKind::Div: {
        const double denom = eval_node(*n.rhs, bindings);
        if (denom == 0.0)
            throw EvalError("division by zero");
        return eval_node(*n.lhs, bindings) / denom;
    }
    case ExprKind::Pow: {
        const double base = eval_node(*n.lhs, bindings);
        const double e = n.value;
        if (is_integral(e))
            return eval_int_pow(base, static_cast<long long>(e));
        if (base <= 0.0)
            throw EvalError("fractional power of non-positive base");
        return std::pow(base, e);
    }
    }
    throw EvalError("corrupt expression node");
}

NodePtr diff_node(const NodePtr& n, const std::string& var);

NodePtr d(const NodePtr& n, const std::string& var) { return diff_node(n, var); }

NodePtr diff_node(const NodePtr& n, const std::string& var) {
    switch (n->kind) {
    case ExprKind::Constant:
        return make_const(0.0);
    case ExprKind::Variable:
        return make_const(n->name == var ? 1.0 : 0.0);
    case ExprKind::Neg:
        return make_unary(ExprKind::Neg, d(n->lhs, var));
    case ExprKind::Sin:
        return make_binary(ExprKind::Mul, make_unary(ExprKind::Cos, n->lhs), d(n->lhs, var));
    case ExprKind::Cos:
        return make_unary(ExprKind::Neg,
                          make_binary(ExprKind::Mul, make_unary(ExprKind::Sin, n->lhs),
                                      d(n->lhs, var)));
    case ExprKind::Exp:
        return make_binary(ExprKind::Mul, make_unary(ExprKind::Exp, n->lhs), d(n->lhs, var));
    case ExprKind::Log:
        return make_binary(ExprKind::Div, d(n->lhs, var), n->lhs);
    case ExprKind::Sqrt:
        return make_binary(ExprKind::Div, d(n->lhs, var),
                           make_binary(ExprKind::Mul, make_const(2.0),
                                       make_unary(ExprKind::Sqrt, n->lhs)));
    case ExprKind::Add:
        return make_binary(ExprKind::Add, d(n->lhs, var), d(n->rhs, var));
    case ExprKind::Sub:
        return make_binary(ExprKind::Sub, d(n->lhs, var), d(n->rhs, var));
    case ExprKind::Mul:
        return make_binary(ExprKind::Add,
                           make_binary(ExprKind::Mul, d(n->lhs, var), n->rhs),
                           make_binary(ExprKind::Mul, n->lhs, d(n->rhs, var)));
    case ExprKind::Div:
        // (u'v - uv') / v^2
        return make_binary(
            ExprKind::Div,
            make_binary(ExprKind::Sub,
                        make_binary(ExprKind::Mul, d(n->lhs, var), n->rhs),
                        make_binary(ExprKind::Mul, n->lhs, d(n->rhs, var))),
            make_pow(n->rhs, 2.0));
    case ExprKind::Pow:
        // c * u^(c-1) * u'
        return make_binary(ExprKind::Mul,
                           make_binary(ExprKind::Mul, make_const(n->value),
                                       make_pow(n->lhs, n->value - 1.0)),
                           d(n->lhs, var));
    }
    throw EvalError("corrupt expression node");
}

bool node_is_const(const NodePtr& n, double* out = nullptr) {
    if (n->kind != ExprKind::Constant)
        return false;
    if (out)
        *out = n->value;
    return true;
}

bool same_tree(const NodePtr& a, const NodePtr& b) {
    if (a == b)
        return true;
    if (a->kind != b->kind || a->value != b->value || a->name != b->name)
        return false;
    if (static_cast<bool>(a->lhs) != static_cast<bool>(b->lhs) ||
        static_cast<bool>(a->rhs) != static_cast<bool>(b->rhs))
        return false;
    if (a->lhs && !same_tree(a->lhs, b->lhs))
        return false;
    if (a->rhs && !same_tree(a->rhs, b->rhs))
        return false;
    return true;
}

// View a node as coeff * core, where core strips a leading constant factor
// or negation. Enables like-term combination in sums.
void split_scale(const NodePtr& n, double& coeff, NodePtr& core) {
    coeff = 1.0;
    core = n;
    if (n->kind == ExprKind::Neg) {
        coeff = -1.0;
        core = n->lhs;
    } else if (n->kind == ExprKind::Mul && node_is_const(n->lhs, &coeff)) {
        core = n->rhs;
    } else if (n->kind == ExprKind::Mul && node_is_const(n->rhs, &coeff)) {
        core = n->lhs;
    }
}

NodePtr simplify_node(const NodePtr& n);

// c1 X + c2 X -> (c1 + c2) X for structurally equal X.
bool combine_like_terms(const NodePtr& a, const NodePtr& b, double sign, NodePtr& out) {
    double ca = 0.0, cb = 0.0;
    NodePtr xa, xb;
    split_scale(a, ca, xa);
    split_scale(b, cb, xb);
    if (!same_tree(xa, xb))
        return false;
    const double total = ca + sign * cb;
    out = simplify_node(make_binary(ExprKind::Mul, make_const(total), xa));
    return true;
}

NodePtr simplify_node(const NodePtr& n) {
    if (n->kind == ExprKind::Constant || n->kind == ExprKind::Variable)
        return n;

    NodePtr a = n->lhs ? simplify_node(n->lhs) : nullptr;
    NodePtr b = n->rhs ? simplify_node(n->rhs) : nullptr;

    // Constant folding whenever every child is a literal and the operation
    // evaluates cleanly; domain failures keep the node so eval can report
    // them.
    const bool foldable =
        (a && node_is_const(a)) && (!n->rhs || node_is_const(b));
    if (foldable) {
        ExprNode probe = *n;
        probe.lhs = a;
        probe.rhs = b;
        try {
            return make_const(eval_node(probe, Bindings{}));
        } catch (const EvalError&) {
            // fall through, keep symbolic
        }
    }

    double ca = 0.0, cb = 0.0;
    switch (n->kind) {
    case ExprKind::Neg:
        if (a->kind == ExprKind::Neg)
            return a->lhs;
        break;
    case ExprKind::Add: {
        if (node_is_const(a, &ca) && ca == 0.0)
            return b;
        if (node_is_const(b, &cb) && cb == 0.0)
            return a;
        NodePtr combined;
        if (combine_like_terms(a, b, +1.0, combined))
            return combined;
        // reassociate one level: (u + c1 X) + c2 X
        if (a->kind == ExprKind::Add) {
            if (combine_like_terms(a->rhs, b, +1.0, combined))
                return simplify_node(make_binary(ExprKind::Add, a->lhs, combined));
        }
        break;
    }
    case ExprKind::Sub: {
        if (node_is_const(b, &cb) && cb == 0.0)
            return a;
        if (node_is_const(a, &ca) && ca == 0.0)
            return simplify_node(make_unary(ExprKind::Neg, b));
        NodePtr combined;
        if (combine_like_terms(a, b, -1.0, combined))
            return combined;
        break;
    }
    case ExprKind::Mul: {
        // Canonical constant-on-the-left, so nested constants fold.
        if (node_is_const(b) && !node_is_const(a))
            std::swap(a, b);
        if (node_is_const(a, &ca)) {
            if (ca == 0.0)
                return make_const(0.0);
            if (ca == 1.0)
                return b;
            if (ca == -1.0)
                return simplify_node(make_unary(ExprKind::Neg, b));
            if (b->kind == ExprKind::Neg)
                return simplify_node(
                    make_binary(ExprKind::Mul, make_const(-ca), b->lhs));
            if (b->kind == ExprKind::Mul && node_is_const(b->lhs, &cb))
                return simplify_node(
                    make_binary(ExprKind::Mul, make_const(ca * cb), b->rhs));
        }
        if (node_is_const(b, &cb)) {
            if (cb == 0.0)
                return make_const(0.0);
            if (cb == 1.0)
                return a;
        }
        break;
    }
    case ExprKind::Div:
        if (node_is_const(b, &cb) && cb == 1.0)
            return a;
        break;
    case ExprKind::Pow:
        if (n->value == 1.0)
            return a;
        if (n->value == 0.0)
            return make_const(1.0);
        return make_pow(a, n->value);
    default:
        break;
    }

    if (!n->rhs)
        return make_unary(n->kind, a);
    return make_binary(n->kind, a, b);
}

NodePtr substitute_node(const NodePtr& n,
                        const std::unordered_map<std::string, NodePtr>& map) {
    switch (n->kind) {
    case ExprKind::Constant:
        return n;
    case ExprKind::Variable: {
        auto it = map.find(n->name);
        return it == map.end() ? n : it->second;
    }
    case ExprKind::Pow:
        return make_pow(substitute_node(n->lhs, map), n->value);
    default:
        if (!n->rhs)
            return make_unary(n->kind, substitute_node(n->lhs, map));
        return make_binary(n->kind, substitute_node(n->lhs, map),
                           substitute_node(n->rhs, map));
    }
}

void collect_vars(const NodePtr& n, std::set<std::string>& out) {
    if (n->kind == ExprKind::Variable)
        out.insert(n->name);
    if (n->lhs)
        collect_vars(n->lhs, out);
    if (n->rhs)
        collect_vars(n->rhs, out);
}

// Printing with minimal parentheses. Precedence: add/sub 1, mul/div 2,
// unary minus 3, pow 4, atoms 5.
int precedence(const ExprNode& n) {
    switch (n.kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
        return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
        return 2;
    case ExprKind::Neg:
        return 3;
    case ExprKind::Pow:
        return 4;
    default:
        return 5;
    }
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const NodePtr& child, int parent_prec, bool strict, std::string& out) {
    const int child_prec = precedence(*child);
    const bool parens = strict ? child_prec <= parent_prec : child_prec < parent_prec;
    if (parens)
        out += '(';
    print_node(*child, out);
    if (parens)
        out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
    switch (n.kind) {
    case ExprKind::Constant:
        if (n.value < 0.0) {
            out += '(';
            out += format_double(n.value);
            out += ')';
        } else {
            out += format_double(n.value);
        }
        return;
    case ExprKind::Variable:
        out += n.name;
        return;
    case ExprKind::Neg:
        out += '-';
        print_child(n.lhs, 3, true, out);
        return;
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt: {
        const char* name = n.kind == ExprKind::Sin   ? "sin"
                           : n.kind == ExprKind::Cos ? "cos"
                           : n.kind == ExprKind::Exp ? "exp"
                           : n.kind == ExprKind::Log ? "log"
                                                     : "sqrt";
        out += name;
        out += '(';
        print_node(*n.lhs, out);
        out += ')';
        return;
    }
    case ExprKind::Add:
        print_child(n.lhs, 1, false, out);
        out += " + ";
        print_child(n.rhs, 1, true, out);
        return;
    case ExprKind::Sub:
        print_child(n.lhs, 1, false, out);
        out += " - ";
        print_child(n.rhs, 1, true, out);
        return;
    case ExprKind::Mul:
        print_child(n.lhs, 2, false, out);
        out += '*';
        print_child(n.rhs, 2, true, out);
        return;
    case ExprKind::Div:
        print_child(n.lhs, 2, false, out);
        out += '/';
        print_child(n.rhs, 2, true, out);
        return;
    case ExprKind::Pow:
        print_child(n.lhs, 4, true, out);
        out += '^';
        if (n.value < 0.0) {
            out += '-';
            out += format_double(-n.value);
        } else {
            out += format_double(n.value);
        }
        return;
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }

    bool eof() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& message) {
        throw ParseError(message, pos);
    }

    NodePtr parse_expression() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (consume('+'))
                lhs = make_binary(ExprKind::Add, lhs, parse_term());
            else if (consume('-'))
                lhs = make_binary(ExprKind::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (consume('*'))
                lhs = make_binary(ExprKind::Mul, lhs, parse_unary());
            else if (consume('/'))
                lhs = make_binary(ExprKind::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (consume('-'))
            return make_unary(ExprKind::Neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (!consume('^'))
            return base;
        const std::size_t at = pos;
        NodePtr exponent = parse_unary();
        double value = 0.0;
        if (!node_is_const(simplify_node(exponent), &value))
            throw ParseError("power exponent must be a constant", at);
        return make_pow(base, value);
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= text.size())
            fail("unexpected end of input");
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return parse_identifier();
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expression();
            if (!consume(')'))
                fail("expected ')'");
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        const std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                ++pos;
        }
        if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
            std::size_t mark = pos;
            ++pos;
            if (pos < text.size() && (text[pos] == '+' || text[pos] == '-'))
                ++pos;
            if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                while (pos < text.size() &&
                       std::isdigit(static_cast<unsigned char>(text[pos])))
                    ++pos;
            } else {
                pos = mark; // 'e' starts an identifier, not an exponent
            }
        }
        const std::string token(text.substr(start, pos - start));
        if (token == ".")
            throw ParseError("malformed number", start);
        char* end = nullptr;
        const double value = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size())
            throw ParseError("malformed number '" + token + "'", start);
        return make_const(value);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        std::string name(text.substr(start, pos - start));
        skip_ws();
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            NodePtr arg = parse_expression();
            if (!consume(')'))
                fail("expected ')'");
            if (name == "sin") return make_unary(ExprKind::Sin, arg);
            if (name == "cos") return make_unary(ExprKind::Cos, arg);
            if (name == "exp") return make_unary(ExprKind::Exp, arg);
            if (name == "log") return make_unary(ExprKind::Log, arg);
            if (name == "sqrt") return make_unary(ExprKind::Sqrt, arg);
            throw ParseError("unknown function '" + name + "'", start);
        }
        return make_var(std::move(name));
    }
};

} // namespace
} // namespace detail

using detail::ExprNode;
using detail::NodePtr;

Expr::Expr() : node_(detail::make_const(0.0)) {}
Expr::Expr(NodePtr node) : node_(std::move(node)) {}

Expr Expr::constant(double value) { return Expr(detail::make_const(value)); }
Expr Expr::variable(std::string name) { return Expr(detail::make_var(std::move(name))); }
Expr Expr::neg(Expr e) { return Expr(detail::make_unary(ExprKind::Neg, e.node_)); }
Expr Expr::sin(Expr e) { return Expr(detail::make_unary(ExprKind::Sin, e.node_)); }
Expr Expr::cos(Expr e) { return Expr(detail::make_unary(ExprKind::Cos, e.node_)); }
Expr Expr::exp(Expr e) { return Expr(detail::make_unary(ExprKind::Exp, e.node_)); }
Expr Expr::log(Expr e) { return Expr(detail::make_unary(ExprKind::Log, e.node_)); }
Expr Expr::sqrt(Expr e) { return Expr(detail::make_unary(ExprKind::Sqrt, e.node_)); }
Expr Expr::add(Expr a, Expr b) { return Expr(detail::make_binary(ExprKind::Add, a.node_, b.node_)); }
Expr Expr::sub(Expr a, Expr b) { return Expr(detail::make_binary(ExprKind::Sub, a.node_, b.node_)); }
Expr Expr::mul(Expr a, Expr b) { return Expr(detail::make_binary(ExprKind::Mul, a.node_, b.node_)); }
Expr Expr::div(Expr a, Expr b) { return Expr(detail::make_binary(ExprKind::Div, a.node_, b.node_)); }
Expr Expr::pow(Expr base, double exponent) { return Expr(detail::make_pow(base.node_, exponent)); }

Expr Expr::parse(std::string_view text) {
    detail::Parser p{text};
    NodePtr root = p.parse_expression();
    if (!p.eof())
        throw ParseError("trailing input", p.pos);
    return Expr(std::move(root));
}

ExprKind Expr::kind() const { return node_->kind; }

bool Expr::is_constant(double* value) const { return detail::node_is_const(node_, value); }

double Expr::eval(const Bindings& bindings) const { return detail::eval_node(*node_, bindings); }

Expr Expr::diff(const std::string& var) const { return Expr(detail::diff_node(node_, var)); }

Expr Expr::simplified() const { return Expr(detail::simplify_node(node_)); }

Expr Expr::substitute(const std::unordered_map<std::string, Expr>& map) const {
    std::unordered_map<std::string, NodePtr> nodes;
    nodes.reserve(map.size());
    for (const auto& [name, e] : map)
        nodes.emplace(name, e.node_);
    return Expr(detail::substitute_node(node_, nodes));
}

std::set<std::string> Expr::free_variables() const {
    std::set<std::string> out;
    detail::collect_vars(node_, out);
    return out;
}

std::string Expr::str() const {
    std::string out;
    detail::print_node(*node_, out);
    return out;
}

std::string format_double(double x) {
    if (x == 0.0)
        return "0"; // avoid "-0"
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x)
            return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace ksymp
