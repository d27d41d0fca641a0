#pragma once

// Closed-form score vector and Hessian of the Gaussian log-density for the
// three-state exponential system
//   x1' = psi1 x1, x2' = psi2 x2, x3' = (psi1 + psi2) x3,
// whose solution is x_j = xi_j exp(r_j t) with r = (psi1, psi2, psi1+psi2).
// These are test oracles derived directly from that solution; they never call
// into the sensitivity machinery they are used to check.

#include <Eigen/Core>
#include <cmath>

namespace oracles {

struct TripleExpPoint {
  Eigen::Vector3d y;
  double t;
  Eigen::Vector3d sigma2;
  Eigen::Vector3d xi;
  double psi1;
  double psi2;
};

inline Eigen::Vector3d triple_exp_solution(const TripleExpPoint& p) {
  Eigen::Vector3d r(p.psi1, p.psi2, p.psi1 + p.psi2);
  Eigen::Vector3d x;
  for (int j = 0; j < 3; ++j) x[j] = p.xi[j] * std::exp(r[j] * p.t);
  return x;
}

inline double triple_exp_loglik(const TripleExpPoint& p) {
  Eigen::Vector3d x = triple_exp_solution(p);
  double acc = -1.5 * std::log(2.0 * M_PI);
  for (int j = 0; j < 3; ++j) {
    double g = p.y[j] - x[j];
    acc += -0.5 * std::log(p.sigma2[j]) - g * g / (2.0 * p.sigma2[j]);
  }
  return acc;
}

// Theta layout: (sigma2_1..3, xi_1..3, psi1, psi2), dimension 8.
inline Eigen::VectorXd triple_exp_score(const TripleExpPoint& p) {
  Eigen::Vector3d r(p.psi1, p.psi2, p.psi1 + p.psi2);
  Eigen::Vector3d e;
  for (int j = 0; j < 3; ++j) e[j] = std::exp(r[j] * p.t);
  Eigen::Vector3d x = p.xi.cwiseProduct(e);
  Eigen::Vector3d g = p.y - x;

  Eigen::VectorXd score(8);
  for (int j = 0; j < 3; ++j) {
    score[j] = -0.5 / p.sigma2[j] + g[j] * g[j] / (2.0 * p.sigma2[j] * p.sigma2[j]);
  }
  for (int j = 0; j < 3; ++j) {
    score[3 + j] = e[j] * g[j] / p.sigma2[j];
  }
  score[6] = p.xi[0] * p.t * e[0] * g[0] / p.sigma2[0] +
             p.xi[2] * p.t * e[2] * g[2] / p.sigma2[2];
  score[7] = p.xi[1] * p.t * e[1] * g[1] / p.sigma2[1] +
             p.xi[2] * p.t * e[2] * g[2] / p.sigma2[2];
  return score;
}

inline Eigen::MatrixXd triple_exp_hessian(const TripleExpPoint& p) {
  Eigen::Vector3d r(p.psi1, p.psi2, p.psi1 + p.psi2);
  Eigen::Vector3d e;
  for (int j = 0; j < 3; ++j) e[j] = std::exp(r[j] * p.t);
  Eigen::Vector3d x = p.xi.cwiseProduct(e);
  Eigen::Vector3d g = p.y - x;
  const Eigen::Vector3d& s2 = p.sigma2;
  const double t = p.t;

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(8, 8);

  // sigma2-sigma2 block (diagonal).
  for (int j = 0; j < 3; ++j) {
    h(j, j) = 0.5 / (s2[j] * s2[j]) - g[j] * g[j] / (s2[j] * s2[j] * s2[j]);
  }
  // sigma2-xi cross terms, diagonal in the state index.
  for (int j = 0; j < 3; ++j) {
    h(j, 3 + j) = h(3 + j, j) = -e[j] * g[j] / (s2[j] * s2[j]);
  }
  // sigma2-psi cross terms; psi1 touches states 1 and 3, psi2 states 2 and 3.
  h(0, 6) = h(6, 0) = -t * p.xi[0] * e[0] * g[0] / (s2[0] * s2[0]);
  h(1, 7) = h(7, 1) = -t * p.xi[1] * e[1] * g[1] / (s2[1] * s2[1]);
  h(2, 6) = h(6, 2) = -t * p.xi[2] * e[2] * g[2] / (s2[2] * s2[2]);
  h(2, 7) = h(7, 2) = -t * p.xi[2] * e[2] * g[2] / (s2[2] * s2[2]);
  // xi-xi block.
  for (int j = 0; j < 3; ++j) {
    h(3 + j, 3 + j) = -e[j] * e[j] / s2[j];
  }
  // xi-psi cross terms.
  h(3, 6) = h(6, 3) = t * e[0] * (p.y[0] - 2.0 * p.xi[0] * e[0]) / s2[0];
  h(4, 7) = h(7, 4) = t * e[1] * (p.y[1] - 2.0 * p.xi[1] * e[1]) / s2[1];
  h(5, 6) = h(6, 5) = t * e[2] * (p.y[2] - 2.0 * p.xi[2] * e[2]) / s2[2];
  h(5, 7) = h(7, 5) = t * e[2] * (p.y[2] - 2.0 * p.xi[2] * e[2]) / s2[2];
  // psi-psi block.
  auto curvature = [&](int j) {
    return t * t * (p.xi[j] * p.y[j] * e[j] - 2.0 * p.xi[j] * p.xi[j] * e[j] * e[j]) / s2[j];
  };
  h(6, 6) = curvature(0) + curvature(2);
  h(7, 7) = curvature(1) + curvature(2);
  h(6, 7) = h(7, 6) = t * t * p.xi[2] * e[2] * (p.y[2] - 2.0 * p.xi[2] * e[2]) / s2[2];
  return h;
}

}  // namespace oracles
