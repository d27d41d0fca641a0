#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "odesel/io.hpp"

namespace {

std::string bin_path() {
  const char* bin = std::getenv("ODESEL_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "ODESEL_BIN must point at the odesel executable");
  return bin;
}

std::string root_path() {
  const char* root = std::getenv("ODESEL_ROOT");
  REQUIRE_MESSAGE(root != nullptr, "ODESEL_ROOT must point at the source tree");
  return root;
}

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  std::string command = bin_path() + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  std::array<char, 4096> buffer;
  while (std::size_t got = fread(buffer.data(), 1, buffer.size(), pipe)) {
    output.append(buffer.data(), got);
  }
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, output};
}

// A tiny self-contained fixture: exponential-decay data and model files.
struct Fixture {
  std::string dir;
  std::string data;
  std::string model;
  std::string model2;

  Fixture() {
    dir = "/tmp/odesel_cli_test";
    std::system(("mkdir -p " + dir).c_str());
    data = dir + "/decay.csv";
    model = dir + "/decay.ode";
    model2 = dir + "/decay2.ode";
    std::ofstream csv(data);
    csv << "t,x\n";
    // x = 10 e^{-0.3 t} plus a deterministic wiggle standing in for noise.
    for (int i = 0; i <= 20; ++i) {
      double t = 0.25 * i;
      double y = 10.0 * std::exp(-0.3 * t) + 0.05 * std::sin(3.7 * i);
      csv << t << "," << y << "\n";
    }
    csv.close();
    std::ofstream ode(model);
    ode << "name: decay\nstates: x\nparams: k = 0.2\nx' = -k * x\n";
    ode.close();
    std::ofstream ode2(model2);
    ode2 << "name: decay2\nstates: x\nparams: k = 0.2, c = 0.1\nx' = -k * x + c\n";
    ode2.close();
  }
};

}  // namespace

TEST_CASE("cli: fit produces a schema-shaped json report with estimates") {
  Fixture fx;
  RunResult r = run("fit --data " + fx.data + " --model " + fx.model + " --init k=0.25");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"version\": \"1\"") != std::string::npos);
  CHECK(r.output.find("\"theta\"") != std::string::npos);
  CHECK(r.output.find("\"total_loglik\"") != std::string::npos);
  CHECK(r.output.find("\"H_hat\"") != std::string::npos);
}

TEST_CASE("cli: missing data file exits 1 and names the path") {
  Fixture fx;
  RunResult r = run("fit --data /nonexistent/nope.csv --model " + fx.model);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("/nonexistent/nope.csv") != std::string::npos);
}

TEST_CASE("cli: model/data column mismatch exits 1 naming the mismatch") {
  Fixture fx;
  std::string bad_model = fx.dir + "/two_state.ode";
  std::ofstream ode(bad_model);
  ode << "name: two\nstates: a, b\nparams: k\na' = -k * a\nb' = k * a\n";
  ode.close();
  RunResult r = run("fit --data " + fx.data + " --model " + bad_model);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("2 state(s)") != std::string::npos);
}

TEST_CASE("cli: test requires exactly two models; tournament at least two") {
  Fixture fx;
  RunResult one = run("test --data " + fx.data + " --model " + fx.model);
  CHECK(one.exit_code == 1);
  RunResult t = run("tournament --data " + fx.data + " --model " + fx.model);
  CHECK(t.exit_code == 1);
}

TEST_CASE("cli: test of two models reports a decision") {
  Fixture fx;
  RunResult r =
      run("test --data " + fx.data + " --model " + fx.model + " --model " + fx.model2);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"decision\"") != std::string::npos);
  CHECK(r.output.find("\"t_stat\"") != std::string::npos);
  CHECK(r.output.find("\"h_n\"") != std::string::npos);
}

TEST_CASE("cli: markdown format renders the pairwise table") {
  Fixture fx;
  RunResult r = run("test --data " + fx.data + " --model " + fx.model + " --model " +
                    fx.model2 + " --format markdown");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("| Model A | Model B | S-W statistic |") != std::string::npos);
}

TEST_CASE("cli: integration failure at the optimum exits 2") {
  Fixture fx;
  std::string blowup = fx.dir + "/blowup.ode";
  std::ofstream ode(blowup);
  ode << "name: blowup\nstates: x\nparams:\nx' = x ^ 3 + 1000\n";
  ode.close();
  RunResult r = run("fit --data " + fx.data + " --model " + blowup);
  CHECK(r.exit_code == 2);
}

TEST_CASE("cli: simulate with reps = 0 exits 1") {
  RunResult r = run("simulate --study size --reps 0 --deltas 0.3 --n 30");
  CHECK(r.exit_code == 1);
}

TEST_CASE("cli: fixed-seed simulate runs are byte-identical") {
  std::string dir = "/tmp/odesel_cli_test";
  std::system(("mkdir -p " + dir).c_str());
  std::string out = dir + "/study.json";
  std::string args = "simulate --study size --reps 6 --deltas 0.3 --n 40 --seed 42 --out " + out;
  RunResult r1 = run(args);
  std::string first = odesel::read_text_file(out);
  RunResult r2 = run(args);
  std::string second = odesel::read_text_file(out);
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  CHECK(first == second);
  CHECK(first.find("\"study\"") != std::string::npos);
}

TEST_CASE("cli: the same model twice stays finite and flags the nested regime") {
  Fixture fx;
  RunResult r =
      run("test --data " + fx.data + " --model " + fx.model + " --model " + fx.model);
  CHECK(r.exit_code == 0);
  // Identical fits collapse the log-ratio variance; the regularization keeps
  // the statistic finite and the unit-ratio fallback is flagged.
  CHECK(r.output.find("\"fallback_unit_ratio\": true") != std::string::npos);
  CHECK(r.output.find("\"t_stat\"") != std::string::npos);
  CHECK(r.output.find("nan") == std::string::npos);
}

TEST_CASE("cli: bundled agricultural example runs end to end") {
  std::string root = root_path();
  RunResult r = run("fit --data " + root + "/data/phosphorus_yield.csv --model " + root +
                    "/models/exponential_yield.ode");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"psi\"") != std::string::npos);
  CHECK(r.output.find("\"sigma2\"") != std::string::npos);
  CHECK(r.output.find("\"total_loglik\"") != std::string::npos);
}
