#pragma once

#include <memory>
#include <string>

namespace bcw {

/// Minimal arithmetic expression over variables x and y: numbers, + - * / ^,
/// parentheses, pi, and sin cos tan exp log sqrt abs. Used for user-defined
/// speed fields.
class Expr {
public:
    static Expr parse(const std::string& text);
    double eval(double x, double y) const;

    Expr(Expr&&) noexcept;
    Expr& operator=(Expr&&) noexcept;
    ~Expr();

    struct Node;

private:
    explicit Expr(std::unique_ptr<Node> root);
    std::unique_ptr<Node> root_;
};

}  // namespace bcw
