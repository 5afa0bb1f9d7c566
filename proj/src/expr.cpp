#include "bcw/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace bcw {

struct Expr::Node {
    enum class Op { Const, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg, Fun };
    Op op = Op::Const;
    double value = 0;
    double (*fun)(double) = nullptr;
    std::unique_ptr<Node> lhs, rhs;

    double eval(double x, double y) const {
        switch (op) {
            case Op::Const: return value;
            case Op::VarX: return x;
            case Op::VarY: return y;
            case Op::Add: return lhs->eval(x, y) + rhs->eval(x, y);
            case Op::Sub: return lhs->eval(x, y) - rhs->eval(x, y);
            case Op::Mul: return lhs->eval(x, y) * rhs->eval(x, y);
            case Op::Div: return lhs->eval(x, y) / rhs->eval(x, y);
            case Op::Pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
            case Op::Neg: return -lhs->eval(x, y);
            case Op::Fun: return fun(lhs->eval(x, y));
        }
        return 0;
    }
};

namespace {

using Node = Expr::Node;
using NodePtr = std::unique_ptr<Node>;

struct Parser {
    const std::string& s;
    size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("expression error at position " + std::to_string(pos) +
                                    ": " + what);
    }

    NodePtr make(Node::Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }
    NodePtr number(double v) {
        auto n = std::make_unique<Node>();
        n->value = v;
        return n;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (eat('+')) n = make(Node::Op::Add, std::move(n), term());
            else if (eat('-')) n = make(Node::Op::Sub, std::move(n), term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = factor();
        for (;;) {
            if (eat('*')) n = make(Node::Op::Mul, std::move(n), factor());
            else if (eat('/')) n = make(Node::Op::Div, std::move(n), factor());
            else return n;
        }
    }

    NodePtr factor() {
        if (eat('-')) return make(Node::Op::Neg, factor());
        NodePtr base = primary();
        if (eat('^')) return make(Node::Op::Pow, std::move(base), factor());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos >= s.size()) fail("unexpected end");
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            double v;
            try {
                v = std::stod(s.substr(pos), &used);
            } catch (...) {
                fail("bad number");
            }
            pos += used;
            return number(v);
        }
        if (c == '(') {
            ++pos;
            NodePtr n = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t end = pos;
            while (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) ++end;
            const std::string name = s.substr(pos, end - pos);
            pos = end;
            if (name == "x") return make(Node::Op::VarX);
            if (name == "y") return make(Node::Op::VarY);
            if (name == "pi") return number(std::acos(-1.0));
            static const std::pair<const char*, double (*)(double)> funcs[] = {
                {"sin", std::sin}, {"cos", std::cos}, {"tan", std::tan},
                {"exp", std::exp}, {"log", std::log}, {"sqrt", std::sqrt},
                {"abs", std::fabs},
            };
            for (const auto& [fname, fptr] : funcs) {
                if (name == fname) {
                    if (!eat('(')) fail("expected '(' after " + name);
                    NodePtr arg = expr();
                    if (!eat(')')) fail("expected ')'");
                    auto n = make(Node::Op::Fun, std::move(arg));
                    n->fun = fptr;
                    return n;
                }
            }
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    NodePtr root = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    return Expr(std::move(root));
}

double Expr::eval(double x, double y) const { return root_->eval(x, y); }

Expr::Expr(std::unique_ptr<Node> root) : root_(std::move(root)) {}
Expr::Expr(Expr&&) noexcept = default;
Expr& Expr::operator=(Expr&&) noexcept = default;
Expr::~Expr() = default;

}  // namespace bcw
