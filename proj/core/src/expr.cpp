#include "odesel/expr.hpp"

#include <cmath>
#include <sstream>

namespace odesel {

namespace {

ExprPtr make_node(Expr&& e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr Expr::constant(double value) {
  Expr e;
  e.kind_ = Kind::Constant;
  e.value_ = value;
  return make_node(std::move(e));
}

ExprPtr Expr::state(int index) {
  Expr e;
  e.kind_ = Kind::State;
  e.index_ = index;
  return make_node(std::move(e));
}

ExprPtr Expr::param(int index) {
  Expr e;
  e.kind_ = Kind::Param;
  e.index_ = index;
  return make_node(std::move(e));
}

ExprPtr Expr::time() {
  Expr e;
  e.kind_ = Kind::Time;
  return make_node(std::move(e));
}

ExprPtr Expr::unary(UnaryOp op, ExprPtr operand) {
  Expr e;
  e.kind_ = Kind::Unary;
  e.unary_op_ = op;
  e.lhs_ = std::move(operand);
  return make_node(std::move(e));
}

ExprPtr Expr::binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind_ = Kind::Binary;
  e.binary_op_ = op;
  e.lhs_ = std::move(lhs);
  e.rhs_ = std::move(rhs);
  return make_node(std::move(e));
}

double evaluate(const Expr& e, std::span<const double> state, std::span<const double> params,
                double t) {
  switch (e.kind()) {
    case Expr::Kind::Constant: return e.value();
    case Expr::Kind::State: return state[static_cast<std::size_t>(e.index())];
    case Expr::Kind::Param: return params[static_cast<std::size_t>(e.index())];
    case Expr::Kind::Time: return t;
    case Expr::Kind::Unary: {
      double v = evaluate(*e.lhs(), state, params, t);
      switch (e.unary_op()) {
        case UnaryOp::Neg: return -v;
        case UnaryOp::Exp: return std::exp(v);
        case UnaryOp::Log: return std::log(v);
        case UnaryOp::Sqrt: return std::sqrt(v);
        case UnaryOp::Sin: return std::sin(v);
        case UnaryOp::Cos: return std::cos(v);
      }
      return 0.0;
    }
    case Expr::Kind::Binary: {
      double a = evaluate(*e.lhs(), state, params, t);
      double b = evaluate(*e.rhs(), state, params, t);
      switch (e.binary_op()) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow: return std::pow(a, b);
      }
      return 0.0;
    }
  }
  return 0.0;
}

namespace {

// Smart builders: fold constants and apply the local identities on the fly.
// Both simplify() and the differentiation rules construct through these, so
// derivative trees come out compact instead of littered with 0/1 factors.

bool is_const(const ExprPtr& e) { return e->kind() == Expr::Kind::Constant; }

double fold_unary(UnaryOp op, double v) {
  switch (op) {
    case UnaryOp::Neg: return -v;
    case UnaryOp::Exp: return std::exp(v);
    case UnaryOp::Log: return std::log(v);
    case UnaryOp::Sqrt: return std::sqrt(v);
    case UnaryOp::Sin: return std::sin(v);
    case UnaryOp::Cos: return std::cos(v);
  }
  return 0.0;
}

double fold_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return a / b;
    case BinaryOp::Pow: return std::pow(a, b);
  }
  return 0.0;
}

ExprPtr sunary(UnaryOp op, ExprPtr a) {
  if (is_const(a)) return Expr::constant(fold_unary(op, a->value()));
  if (op == UnaryOp::Neg && a->kind() == Expr::Kind::Unary && a->unary_op() == UnaryOp::Neg) {
    return a->lhs();
  }
  return Expr::unary(op, std::move(a));
}

ExprPtr sbinary(BinaryOp op, ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b)) return Expr::constant(fold_binary(op, a->value(), b->value()));
  switch (op) {
    case BinaryOp::Add:
      if (a->is_constant(0.0)) return b;
      if (b->is_constant(0.0)) return a;
      break;
    case BinaryOp::Sub:
      if (b->is_constant(0.0)) return a;
      if (a->is_constant(0.0)) return sunary(UnaryOp::Neg, std::move(b));
      break;
    case BinaryOp::Mul:
      if (a->is_constant(0.0) || b->is_constant(0.0)) return Expr::constant(0.0);
      if (a->is_constant(1.0)) return b;
      if (b->is_constant(1.0)) return a;
      break;
    case BinaryOp::Div:
      if (b->is_constant(1.0)) return a;
      if (a->is_constant(0.0)) return Expr::constant(0.0);
      break;
    case BinaryOp::Pow:
      if (b->is_constant(1.0)) return a;
      if (b->is_constant(0.0)) return Expr::constant(1.0);  // pow(v, 0) == 1 for every v
      break;
  }
  return Expr::binary(op, std::move(a), std::move(b));
}

ExprPtr add(ExprPtr a, ExprPtr b) { return sbinary(BinaryOp::Add, std::move(a), std::move(b)); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return sbinary(BinaryOp::Sub, std::move(a), std::move(b)); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return sbinary(BinaryOp::Mul, std::move(a), std::move(b)); }
ExprPtr divi(ExprPtr a, ExprPtr b) { return sbinary(BinaryOp::Div, std::move(a), std::move(b)); }

bool matches(const Expr& e, VarRef v) {
  switch (v.kind) {
    case VarRef::Kind::State: return e.kind() == Expr::Kind::State && e.index() == v.index;
    case VarRef::Kind::Param: return e.kind() == Expr::Kind::Param && e.index() == v.index;
    case VarRef::Kind::Time: return e.kind() == Expr::Kind::Time;
  }
  return false;
}

ExprPtr diff(const ExprPtr& e, VarRef wrt) {
  switch (e->kind()) {
    case Expr::Kind::Constant: return Expr::constant(0.0);
    case Expr::Kind::State:
    case Expr::Kind::Param:
    case Expr::Kind::Time: return Expr::constant(matches(*e, wrt) ? 1.0 : 0.0);
    case Expr::Kind::Unary: {
      const ExprPtr& a = e->lhs();
      ExprPtr da = diff(a, wrt);
      switch (e->unary_op()) {
        case UnaryOp::Neg: return sunary(UnaryOp::Neg, da);
        case UnaryOp::Exp: return mul(e, da);
        case UnaryOp::Log: return divi(da, a);
        case UnaryOp::Sqrt: return divi(da, mul(Expr::constant(2.0), e));
        case UnaryOp::Sin: return mul(sunary(UnaryOp::Cos, a), da);
        case UnaryOp::Cos: return sunary(UnaryOp::Neg, mul(sunary(UnaryOp::Sin, a), da));
      }
      return Expr::constant(0.0);
    }
    case Expr::Kind::Binary: {
      const ExprPtr& a = e->lhs();
      const ExprPtr& b = e->rhs();
      switch (e->binary_op()) {
        case BinaryOp::Add: return add(diff(a, wrt), diff(b, wrt));
        case BinaryOp::Sub: return sub(diff(a, wrt), diff(b, wrt));
        case BinaryOp::Mul: return add(mul(diff(a, wrt), b), mul(a, diff(b, wrt)));
        case BinaryOp::Div:
          // a'/b - a b'/b^2
          return sub(divi(diff(a, wrt), b), divi(mul(a, diff(b, wrt)), mul(b, b)));
        case BinaryOp::Pow: {
          if (is_const(b)) {
            // c a^(c-1) a'
            double c = b->value();
            return mul(mul(b, sbinary(BinaryOp::Pow, a, Expr::constant(c - 1.0))),
                       diff(a, wrt));
          }
          // General rule via a^b = exp(b log a); defined for a > 0 at
          // evaluation time: (a^b)' = a^b (b' log a + b a'/a).
          ExprPtr term1 = mul(diff(b, wrt), sunary(UnaryOp::Log, a));
          ExprPtr term2 = divi(mul(b, diff(a, wrt)), a);
          return mul(e, add(term1, term2));
        }
      }
      return Expr::constant(0.0);
    }
  }
  return Expr::constant(0.0);
}

}  // namespace

ExprPtr differentiate(const ExprPtr& e, VarRef wrt) { return diff(e, wrt); }

ExprPtr simplify(const ExprPtr& e) {
  switch (e->kind()) {
    case Expr::Kind::Constant:
    case Expr::Kind::State:
    case Expr::Kind::Param:
    case Expr::Kind::Time: return e;
    case Expr::Kind::Unary: return sunary(e->unary_op(), simplify(e->lhs()));
    case Expr::Kind::Binary:
      return sbinary(e->binary_op(), simplify(e->lhs()), simplify(e->rhs()));
  }
  return e;
}

namespace {

// Precedence levels used by the printer to insert the minimal parentheses:
// additive < multiplicative < unary minus < power < atom.
int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Binary:
      switch (e.binary_op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
      return 1;
    case Expr::Kind::Unary: return e.unary_op() == UnaryOp::Neg ? 3 : 5;
    case Expr::Kind::Constant: return e.value() < 0.0 ? 3 : 5;
    default: return 5;
  }
}

void print(std::ostringstream& out, const Expr& e, std::span<const std::string> states,
           std::span<const std::string> params) {
  auto child = [&](const Expr& c, int min_prec) {
    bool parens = precedence(c) < min_prec;
    if (parens) out << '(';
    print(out, c, states, params);
    if (parens) out << ')';
  };

  switch (e.kind()) {
    case Expr::Kind::Constant: {
      std::ostringstream num;
      num.precision(17);
      num << e.value();
      out << num.str();
      return;
    }
    case Expr::Kind::State:
      if (static_cast<std::size_t>(e.index()) < states.size()) {
        out << states[static_cast<std::size_t>(e.index())];
      } else {
        out << 'x' << e.index() + 1;
      }
      return;
    case Expr::Kind::Param:
      if (static_cast<std::size_t>(e.index()) < params.size()) {
        out << params[static_cast<std::size_t>(e.index())];
      } else {
        out << "psi" << e.index() + 1;
      }
      return;
    case Expr::Kind::Time: out << 't'; return;
    case Expr::Kind::Unary:
      switch (e.unary_op()) {
        case UnaryOp::Neg:
          out << '-';
          child(*e.lhs(), 4);
          return;
        case UnaryOp::Exp: out << "exp("; break;
        case UnaryOp::Log: out << "log("; break;
        case UnaryOp::Sqrt: out << "sqrt("; break;
        case UnaryOp::Sin: out << "sin("; break;
        case UnaryOp::Cos: out << "cos("; break;
      }
      print(out, *e.lhs(), states, params);
      out << ')';
      return;
    case Expr::Kind::Binary: {
      switch (e.binary_op()) {
        case BinaryOp::Add:
          child(*e.lhs(), 1);
          out << " + ";
          child(*e.rhs(), 2);
          return;
        case BinaryOp::Sub:
          child(*e.lhs(), 1);
          out << " - ";
          child(*e.rhs(), 2);
          return;
        case BinaryOp::Mul:
          child(*e.lhs(), 2);
          out << " * ";
          child(*e.rhs(), 3);
          return;
        case BinaryOp::Div:
          child(*e.lhs(), 2);
          out << " / ";
          child(*e.rhs(), 3);
          return;
        case BinaryOp::Pow:
          child(*e.lhs(), 5);
          out << " ^ ";
          child(*e.rhs(), 4);
          return;
      }
    }
  }
}

}  // namespace

std::string render(const Expr& e, std::span<const std::string> state_names,
                   std::span<const std::string> param_names) {
  std::ostringstream out;
  print(out, e, state_names, param_names);
  return out.str();
}

}  // namespace odesel
