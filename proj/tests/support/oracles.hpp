#pragma once

// Test-side oracles kept independent of the library's computation paths:
// finite differences, random expression trees, and small closed forms.

#include <cmath>
#include <functional>
#include <vector>

#include "odesel/expr.hpp"
#include "odesel/model.hpp"
#include "odesel/rng.hpp"

namespace oracles {

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Mixed second derivative d2 f / dx dy by the four-point stencil.
inline double mixed_diff(const std::function<double(double, double)>& f, double x, double y,
                         double hx, double hy) {
  return (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy)) /
         (4.0 * hx * hy);
}

// Random expression tree over `d` states and `p` params. Smoothness is not
// guaranteed everywhere; FD-based property tests skip sample points where the
// evaluations are non-finite.
inline odesel::ExprPtr random_expr(odesel::RngStream& rng, int d, int p, int depth) {
  using odesel::Expr;
  double pick = rng.uniform();
  if (depth <= 0 || pick < 0.3) {
    double leaf = rng.uniform();
    if (leaf < 0.35 && d > 0) return Expr::state(static_cast<int>(rng.uniform(0, d)));
    if (leaf < 0.7 && p > 0) return Expr::param(static_cast<int>(rng.uniform(0, p)));
    if (leaf < 0.8) return Expr::time();
    return Expr::constant(rng.uniform(-2.0, 2.0));
  }
  if (pick < 0.55) {
    auto ops = {odesel::UnaryOp::Neg, odesel::UnaryOp::Exp, odesel::UnaryOp::Log,
                odesel::UnaryOp::Sqrt, odesel::UnaryOp::Sin, odesel::UnaryOp::Cos};
    int k = static_cast<int>(rng.uniform(0, 6));
    return Expr::unary(*(ops.begin() + k), random_expr(rng, d, p, depth - 1));
  }
  auto ops = {odesel::BinaryOp::Add, odesel::BinaryOp::Sub, odesel::BinaryOp::Mul,
              odesel::BinaryOp::Div, odesel::BinaryOp::Pow};
  int k = static_cast<int>(rng.uniform(0, 5));
  odesel::ExprPtr lhs = random_expr(rng, d, p, depth - 1);
  odesel::ExprPtr rhs = random_expr(rng, d, p, depth - 1);
  // Keep exponents small constants most of the time so values stay tame.
  if (*(ops.begin() + k) == odesel::BinaryOp::Pow && rng.uniform() < 0.8) {
    rhs = Expr::constant(static_cast<double>(static_cast<int>(rng.uniform(0, 4))));
  }
  return Expr::binary(*(ops.begin() + k), lhs, rhs);
}

}  // namespace oracles
