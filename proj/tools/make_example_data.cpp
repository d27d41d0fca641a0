// Regenerates the bundled example datasets under data/. The files are
// synthetic reconstructions (see data/PROVENANCE.md); this tool keeps them
// reproducible from fixed seeds. Generation parameters were calibrated so the
// bundled regression tests probe the documented decision patterns.

#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "odesel/io.hpp"
#include "odesel/rng.hpp"
#include "odesel/simulation.hpp"

using namespace odesel;

namespace {

std::string csv(const Dataset& data, int decimals) {
  std::ostringstream out;
  out << "t";
  for (const auto& name : data.names) out << "," << name;
  out << "\n";
  out << std::fixed;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << std::setprecision(decimals) << data.times[i];
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      out << "," << std::setprecision(decimals) << data.obs(i, j);
    }
    out << "\n";
  }
  return out.str();
}

double round_to(double v, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

void round_dataset(Dataset& data, int decimals) {
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      data.obs(i, j) = round_to(data.obs(i, j), decimals);
    }
  }
}

// Neutral-cycle predator-prey series: plain Lotka-Volterra dynamics observed
// daily with additive noise, rounded to one decimal.
Dataset make_gause_aurelia() {
  OdeModel model = parse_model(
      "name: lv_dgp\n"
      "states: predator, prey\n"
      "params: psi1, psi2, psi3, psi4\n"
      "predator' = psi2 * psi3 * predator * prey - psi4 * predator\n"
      "prey' = psi1 * prey - psi2 * predator * prey\n");
  ThetaVector theta;
  theta.sigma2 = Eigen::VectorXd::Constant(2, 16.0);
  theta.xi = Eigen::VectorXd(2);
  theta.xi << 101.2, 116.0;
  theta.psi = Eigen::VectorXd(4);
  theta.psi << 0.660, 0.012, 1.450, 1.122;
  DgpSpec spec{model, theta, 19, TimeSampling::Equispaced, 18.0, 12345};
  Dataset data = simulate_dataset(spec);
  round_dataset(data, 1);
  return data;
}

// Damped-oscillation predator-prey series: logistic prey growth plus a mild
// prey-abundance saturation of the predation kinetics.
Dataset make_gause_bursaria() {
  OdeModel model = parse_model(
      "name: damped_dgp\n"
      "states: predator, prey\n"
      "params: psi1, psi2, psi3, psi4, psi5, psi6\n"
      "predator' = psi2 * psi3 * predator * prey / (1 + psi6 * prey) - psi4 * predator\n"
      "prey' = psi1 * prey * (1 - prey / psi5) - psi2 * predator * prey / (1 + psi6 * prey)\n");
  ThetaVector theta;
  theta.sigma2 = Eigen::VectorXd::Constant(2, 8.5 * 8.5);
  theta.xi = Eigen::VectorXd(2);
  theta.xi << 20.0, 80.0;
  theta.psi = Eigen::VectorXd(6);
  theta.psi << 1.2, 0.012, 1.0, 0.9, 220.0, 0.005;
  DgpSpec spec{model, theta, 21, TimeSampling::Equispaced, 20.0, 71};
  Dataset data = simulate_dataset(spec);
  round_dataset(data, 1);
  return data;
}

// Yield-versus-soil-phosphorus survey: 20 fields, truth blended between the
// exponential-asymptote and inverse-linear response shapes.
Dataset make_phosphorus() {
  Eigen::VectorXd p_values(20);
  p_values << 1.2, 1.9, 2.4, 3.0, 3.6, 4.1, 4.7, 5.3, 6.0, 6.8, 7.5, 8.4, 9.3, 10.4, 11.6, 13.1,
      15.0, 17.4, 20.6, 25.0;

  auto exponential = [](double s) { return 7.0 - 3.8 * std::exp(-0.26 * s); };
  auto inverse_linear = [](double s) { return 7.6 - 4.4 / (1.0 + 0.28 * s); };

  RngStream noise(38, 7);
  Dataset data;
  data.times = p_values;
  data.obs.resize(20, 1);
  data.names = {"yield"};
  for (int i = 0; i < 20; ++i) {
    double truth = 0.35 * exponential(p_values[i]) + 0.65 * inverse_linear(p_values[i]);
    data.obs(i, 0) = round_to(truth + 0.35 * noise.normal(), 2);
  }
  return data;
}

}  // namespace

int main(int argc, char** argv) {
  std::string dir = argc > 1 ? argv[1] : "data";
  write_text_file(dir + "/gause_aurelia_exiguus.csv", csv(make_gause_aurelia(), 1));
  write_text_file(dir + "/gause_bursaria_pombe.csv", csv(make_gause_bursaria(), 1));
  write_text_file(dir + "/phosphorus_yield.csv", csv(make_phosphorus(), 2));
  std::cout << "wrote 3 datasets to " << dir << "\n";
  return 0;
}
