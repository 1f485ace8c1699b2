#include "wfn/expr.hpp"

#include "wfn/numerics.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace wfn {

struct Expression::Node {
    enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    double value = 0.0;
    std::string name;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(double u) const {
        switch (kind) {
        case Kind::Number: return value;
        case Kind::Var: return u;
        case Kind::Neg: return -args[0]->eval(u);
        case Kind::Add: return args[0]->eval(u) + args[1]->eval(u);
        case Kind::Sub: return args[0]->eval(u) - args[1]->eval(u);
        case Kind::Mul: return args[0]->eval(u) * args[1]->eval(u);
        case Kind::Div: return args[0]->eval(u) / args[1]->eval(u);
        case Kind::Pow: return std::pow(args[0]->eval(u), args[1]->eval(u));
        case Kind::Call: break;
        }
        const double x = args[0]->eval(u);
        if (name == "exp") return std::exp(x);
        if (name == "log") return std::log(x);
        if (name == "sqrt") return std::sqrt(x);
        if (name == "sin") return std::sin(x);
        if (name == "cos") return std::cos(x);
        if (name == "tan") return std::tan(x);
        if (name == "abs") return std::abs(x);
        const double y = args[1]->eval(u);
        if (name == "pow") return std::pow(x, y);
        if (name == "min") return std::min(x, y);
        return std::max(x, y);
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, std::vector<NodePtr> args = {}, double v = 0.0, std::string name = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->args = std::move(args);
    n->value = v;
    n->name = std::move(name);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        auto e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        std::ostringstream os;
        os << "expression error at column " << pos_ + 1 << ": " << why << " in \"" << s_ << "\"";
        throw ConfigError(os.str());
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (eat('+')) lhs = make(Kind::Add, {lhs, term()});
            else if (eat('-')) lhs = make(Kind::Sub, {lhs, term()});
            else return lhs;
        }
    }

    NodePtr term() {
        auto lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make(Kind::Mul, {lhs, unary()});
            else if (eat('/')) lhs = make(Kind::Div, {lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Kind::Neg, {unary()});
        if (eat('+')) return unary();
        return power();
    }

    // Right associative; binds tighter than unary minus on its left operand.
    NodePtr power() {
        auto base = primary();
        if (eat('^')) return make(Kind::Pow, {base, unary()});
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        if (eat('(')) {
            auto e = expr();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            pos_ += used;
            return make(Kind::Number, {}, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string id;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                id += s_[pos_++];
            if (id == "u") return make(Kind::Var);
            if (id == "pi") return make(Kind::Number, {}, std::numbers::pi);
            if (id == "e") return make(Kind::Number, {}, std::numbers::e);
            int arity = 0;
            if (id == "exp" || id == "log" || id == "sqrt" || id == "sin" || id == "cos" || id == "tan" || id == "abs")
                arity = 1;
            else if (id == "pow" || id == "min" || id == "max")
                arity = 2;
            else
                fail("unknown identifier '" + id + "'");
            if (!eat('(')) fail("expected '(' after " + id);
            std::vector<NodePtr> args{expr()};
            for (int i = 1; i < arity; ++i) {
                if (!eat(',')) fail("expected ',' in call to " + id);
                args.push_back(expr());
            }
            if (!eat(')')) fail("missing ')' after arguments of " + id);
            return make(Kind::Call, std::move(args), 0.0, id);
        }
        fail(std::string("unexpected '") + c + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = Parser(text).parse();
    e.source_ = text;
    return e;
}

double Expression::operator()(double u) const { return root_->eval(u); }

} // namespace wfn
