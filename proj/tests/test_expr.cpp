#include <doctest.h>

#include <cmath>
#include <limits>

#include "odesel/expr.hpp"
#include "odesel/rng.hpp"
#include "support/oracles.hpp"

using namespace odesel;

namespace {

double eval_at(const ExprPtr& e, std::vector<double> x, std::vector<double> psi, double t) {
  return evaluate(*e, x, psi, t);
}

}  // namespace

TEST_CASE("evaluate: constants and arithmetic") {
  CHECK(eval_at(Expr::constant(3.5), {}, {}, 0.0) == 3.5);

  // psi1 * x1 at x1 = 100, psi1 = -0.05
  ExprPtr e = Expr::binary(BinaryOp::Mul, Expr::param(0), Expr::state(0));
  CHECK(eval_at(e, {100.0}, {-0.05}, 0.0) == doctest::Approx(-5.0));

  CHECK(eval_at(Expr::time(), {}, {}, 2.5) == 2.5);
}

TEST_CASE("evaluate: non-finite values propagate instead of throwing") {
  ExprPtr log_x = Expr::unary(UnaryOp::Log, Expr::state(0));
  CHECK(eval_at(log_x, {0.0}, {}, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(std::isnan(eval_at(log_x, {-1.0}, {}, 0.0)));

  ExprPtr div = Expr::binary(BinaryOp::Div, Expr::constant(1.0), Expr::state(0));
  CHECK(std::isinf(eval_at(div, {0.0}, {}, 0.0)));
}

TEST_CASE("differentiate: product with constant factor") {
  // d(psi1 * x1)/dpsi1 = x1
  ExprPtr e = Expr::binary(BinaryOp::Mul, Expr::param(0), Expr::state(0));
  ExprPtr de = differentiate(e, VarRef::param(0));
  CHECK(render(*de) == "x1");

  // d2(psi1 * x1)/dpsi1 dx1 = 1
  ExprPtr d2 = differentiate(de, VarRef::state(0));
  REQUIRE(d2->kind() == Expr::Kind::Constant);
  CHECK(d2->value() == 1.0);
}

TEST_CASE("differentiate: lotka-volterra product term against finite differences") {
  // d(psi2 psi3 x1 x2)/dx1 = psi2 psi3 x2, checked at 100 random points.
  ExprPtr e = Expr::binary(
      BinaryOp::Mul,
      Expr::binary(BinaryOp::Mul, Expr::binary(BinaryOp::Mul, Expr::param(1), Expr::param(2)),
                   Expr::state(0)),
      Expr::state(1));
  ExprPtr de = differentiate(e, VarRef::state(0));

  RngStream rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x = {rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0)};
    std::vector<double> psi = {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
                               rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
    double analytic = evaluate(*de, x, psi, 0.0);
    CHECK(analytic == doctest::Approx(psi[1] * psi[2] * x[1]).epsilon(1e-12));
    auto f = [&](double v) {
      std::vector<double> xs = x;
      xs[0] = v;
      return evaluate(*e, xs, psi, 0.0);
    };
    double fd = oracles::central_diff(f, x[0], 1e-6);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("differentiate: power with non-constant exponent uses exp(b log a)") {
  // d(x1^psi1)/dpsi1 = x1^psi1 log(x1), valid for x1 > 0
  ExprPtr e = Expr::binary(BinaryOp::Pow, Expr::state(0), Expr::param(0));
  ExprPtr de = differentiate(e, VarRef::param(0));
  double x = 1.7, psi = 0.8;
  double expect = std::pow(x, psi) * std::log(x);
  CHECK(eval_at(de, {x}, {psi}, 0.0) == doctest::Approx(expect).epsilon(1e-12));

  ExprPtr da = differentiate(e, VarRef::state(0));
  CHECK(eval_at(da, {x}, {psi}, 0.0) ==
        doctest::Approx(psi * std::pow(x, psi - 1.0)).epsilon(1e-12));
}

TEST_CASE("property: derivatives match central finite differences on random trees") {
  RngStream rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 600 && checked < 120; ++trial) {
    ExprPtr e = oracles::random_expr(rng, 2, 2, 4);
    VarRef wrt = trial % 2 == 0 ? VarRef::state(trial / 2 % 2) : VarRef::param(trial / 2 % 2);
    ExprPtr de = differentiate(e, wrt);

    std::vector<double> x = {rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)};
    std::vector<double> psi = {rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)};
    double t = rng.uniform(0.1, 2.0);

    auto f = [&](double v) {
      std::vector<double> xs = x;
      std::vector<double> ps = psi;
      if (wrt.kind == VarRef::Kind::State) {
        xs[static_cast<std::size_t>(wrt.index)] = v;
      } else {
        ps[static_cast<std::size_t>(wrt.index)] = v;
      }
      return evaluate(*e, xs, ps, t);
    };
    double at = wrt.kind == VarRef::Kind::State ? x[static_cast<std::size_t>(wrt.index)]
                                                : psi[static_cast<std::size_t>(wrt.index)];
    double h = 1e-6 * (1.0 + std::abs(at));
    double f_minus = f(at - h), f_plus = f(at + h), f_mid = f(at);
    double analytic = evaluate(*de, x, psi, t);
    // Skip points where the expression is not smooth/finite.
    if (!std::isfinite(f_minus) || !std::isfinite(f_plus) || !std::isfinite(f_mid) ||
        !std::isfinite(analytic)) {
      continue;
    }
    if (std::abs(f_plus - f_minus) > 1e6 * h) continue;  // near-singular
    double fd = (f_plus - f_minus) / (2.0 * h);
    double scale = 1.0 + std::abs(analytic) + std::abs(f_mid);
    if (std::abs(analytic - fd) > 1e-5 * scale) {
      CAPTURE(render(*e));
      CHECK(std::abs(analytic - fd) <= 1e-5 * scale);
    }
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("simplify: the listed identities") {
  // 0 * x1 + psi1 -> psi1
  ExprPtr a = Expr::binary(BinaryOp::Add,
                           Expr::binary(BinaryOp::Mul, Expr::constant(0.0), Expr::state(0)),
                           Expr::param(0));
  CHECK(render(*simplify(a)) == "psi1");

  // (1 * x1)^1 -> x1
  ExprPtr b = Expr::binary(BinaryOp::Pow,
                           Expr::binary(BinaryOp::Mul, Expr::constant(1.0), Expr::state(0)),
                           Expr::constant(1.0));
  CHECK(render(*simplify(b)) == "x1");

  // 2 * 3 * x1 -> 6 * x1 (left-associated constant folding)
  ExprPtr c = Expr::binary(BinaryOp::Mul,
                           Expr::binary(BinaryOp::Mul, Expr::constant(2.0), Expr::constant(3.0)),
                           Expr::state(0));
  CHECK(render(*simplify(c)) == "6 * x1");

  // x1 - 0 -> x1 and x1^0 -> 1
  ExprPtr d = Expr::binary(BinaryOp::Sub, Expr::state(0), Expr::constant(0.0));
  CHECK(render(*simplify(d)) == "x1");
  ExprPtr e = Expr::binary(BinaryOp::Pow, Expr::state(0), Expr::constant(0.0));
  CHECK(render(*simplify(e)) == "1");
}

TEST_CASE("property: simplify preserves evaluation") {
  RngStream rng(7);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    ExprPtr e = oracles::random_expr(rng, 2, 2, 5);
    ExprPtr s = simplify(e);
    for (int pt = 0; pt < 5; ++pt) {
      std::vector<double> x = {rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0)};
      std::vector<double> psi = {rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0)};
      double t = rng.uniform(0.0, 2.0);
      double v0 = evaluate(*e, x, psi, t);
      double v1 = evaluate(*s, x, psi, t);
      if (!std::isfinite(v0) || !std::isfinite(v1)) continue;
      CHECK(std::abs(v0 - v1) <= 1e-12 * (1.0 + std::abs(v0)));
      ++checked;
    }
  }
  CHECK(checked >= 500);
}

TEST_CASE("render: precedence-aware printing") {
  ExprPtr e = Expr::binary(
      BinaryOp::Mul,
      Expr::unary(UnaryOp::Neg, Expr::binary(BinaryOp::Add, Expr::state(0), Expr::param(0))),
      Expr::binary(BinaryOp::Pow, Expr::state(1), Expr::constant(2.0)));
  CHECK(render(*e) == "-(x1 + psi1) * x2 ^ 2");
}
