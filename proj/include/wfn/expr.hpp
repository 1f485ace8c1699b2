#pragma once

#include <memory>
#include <string>

namespace wfn {

// Arithmetic expression in one variable u: + - * / ^, unary minus, parentheses,
// the constants pi and e, and the functions exp log sqrt sin cos tan abs pow min max.
class Expression {
public:
    static Expression parse(const std::string& text);

    double operator()(double u) const;
    const std::string& source() const noexcept { return source_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string source_;
};

} // namespace wfn
