#pragma once

#include <memory>
#include <span>
#include <string>

namespace odesel {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class UnaryOp { Neg, Exp, Log, Sqrt, Sin, Cos };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/// Reference to a differentiation variable: a state component, a rate
/// parameter, or the time variable.
struct VarRef {
  enum class Kind { State, Param, Time };
  Kind kind;
  int index = 0;

  static VarRef state(int i) { return {Kind::State, i}; }
  static VarRef param(int i) { return {Kind::Param, i}; }
  static VarRef time() { return {Kind::Time, 0}; }
};

/// Immutable expression tree over states, parameters, time and constants.
/// Nodes are shared and never mutated, so expressions are safe to evaluate
/// from any number of threads concurrently.
class Expr {
 public:
  enum class Kind { Constant, State, Param, Time, Unary, Binary };

  static ExprPtr constant(double value);
  static ExprPtr state(int index);
  static ExprPtr param(int index);
  static ExprPtr time();
  static ExprPtr unary(UnaryOp op, ExprPtr operand);
  static ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  int index() const { return index_; }
  UnaryOp unary_op() const { return unary_op_; }
  BinaryOp binary_op() const { return binary_op_; }
  const ExprPtr& lhs() const { return lhs_; }
  const ExprPtr& rhs() const { return rhs_; }

  bool is_constant(double v) const { return kind_ == Kind::Constant && value_ == v; }

 private:
  Expr() = default;

  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  int index_ = 0;
  UnaryOp unary_op_ = UnaryOp::Neg;
  BinaryOp binary_op_ = BinaryOp::Add;
  ExprPtr lhs_;
  ExprPtr rhs_;
};

/// Evaluates with plain IEEE arithmetic. Out-of-domain arguments produce
/// inf/nan rather than throwing; the integrator treats non-finite right-hand
/// sides as rejected steps.
double evaluate(const Expr& e, std::span<const double> state, std::span<const double> params,
                double t);

/// Exact symbolic partial derivative, returned in simplified form.
ExprPtr differentiate(const ExprPtr& e, VarRef wrt);

/// Local rewrite simplification: constant folding plus the identities
/// 0+e, e+0, e-0, 0*e, e*0, 1*e, e*1, e/1, e^1, e^0, -(-e), -(const).
/// The result evaluates identically wherever both trees are finite.
ExprPtr simplify(const ExprPtr& e);

/// Debug printer. `state_names`/`param_names` may be empty, in which case
/// placeholder names x<i+1>/psi<i+1> are used.
std::string render(const Expr& e, std::span<const std::string> state_names = {},
                   std::span<const std::string> param_names = {});

}  // namespace odesel
