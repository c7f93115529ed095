#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "qcsa/error.hpp"
#include "qcsa/simulate.hpp"

using namespace qcsa;

namespace {

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ac = a.array() - a.mean();
  const Eigen::VectorXd bc = b.array() - b.mean();
  return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

double variance(const Eigen::VectorXd& v) {
  const Eigen::VectorXd c = v.array() - v.mean();
  return c.squaredNorm() / static_cast<double>(v.size() - 1);
}

SimDesign correct_design(Signal s, int K) {
  SimDesign d;
  d.family = SimFamily::Correct;
  d.signal = s;
  d.K = K;
  return d;
}

}  // namespace

TEST_CASE("equicorrelated normals") {
  const Eigen::MatrixXd a = gen_equicorrelated_normal(20000, 4, 0.9, 1);
  CHECK(a == gen_equicorrelated_normal(20000, 4, 0.9, 1));
  const double se = (1.0 - 0.81) / std::sqrt(20000.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(variance(a.col(i)) - 1.0) < 0.05);
    for (int j = i + 1; j < 4; ++j) CHECK(std::abs(corr(a.col(i), a.col(j)) - 0.9) < 3.5 * se);
  }
  const Eigen::MatrixXd b = gen_equicorrelated_normal(20000, 3, 0.0, 2);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(corr(b.col(i), b.col(j))) < 4.0 / std::sqrt(20000.0));
  }
  CHECK_THROWS_AS(gen_equicorrelated_normal(5, 2, 1.0, 1), InvalidParameter);
}

TEST_CASE("signal scale for a target R2") {
  SimDesign d;
  d.R2 = 0.0;
  CHECK(solve_theta_for_r2(d, design_coefficients(d)) == 0.0);

  // Closed form against a Monte Carlo variance of the weighted sum.
  for (double rho : {0.0, 0.9}) {
    d.R2 = 0.5;
    d.rho_x = rho;
    const Eigen::VectorXd beta = design_coefficients(d);
    CHECK(beta.size() == 1000);
    const double theta = solve_theta_for_r2(d, beta);
    const int draws = 20000;
    const Eigen::MatrixXd Z = gen_equicorrelated_normal(draws, 999, rho, 5);
    const Eigen::VectorXd s = Z * beta.tail(999);
    const double v = variance(s);
    const double se = v * std::sqrt(2.0 / draws);
    const double V = (0.5 / 0.5) / (theta * theta);
    CHECK(std::abs(v - V) < 3.0 * se);
    if (rho == 0.0) {
      double sum = 0.0;
      for (int j = 2; j <= 1000; ++j) sum += 1.0 / (static_cast<double>(j) * j);
      CHECK(V == doctest::Approx(sum).epsilon(1e-12));
    }
  }

  SimDesign sparse = correct_design(Signal::Sparse, 1);
  CHECK_THROWS_AS(solve_theta_for_r2(sparse, design_coefficients(sparse)), InvalidParameter);
}

TEST_CASE("correct family coefficients") {
  const Eigen::VectorXd dec = design_coefficients(correct_design(Signal::Decreasing, 5));
  const Eigen::VectorXd con = design_coefficients(correct_design(Signal::Constant, 5));
  const Eigen::VectorXd spa = design_coefficients(correct_design(Signal::Sparse, 5));
  REQUIRE(dec.size() == 5);
  for (int j = 0; j < 5; ++j) {
    CHECK(dec[j] == (j == 0 ? 0.0 : 1.0 / j));
    CHECK(con[j] == (j == 0 ? 0.0 : 1.0));
    CHECK(spa[j] == (j == 1 || j == 2 ? 1.0 : 0.0));
  }
  const Replication rep = gen_replication(correct_design(Signal::Sparse, 5), 4);
  CHECK(rep.train.p() == 5);
  CHECK((rep.train.X.col(0).array() == 1.0).all());
}

TEST_CASE("realized R2 matches the target") {
  for (Signal s : {Signal::Decreasing, Signal::Constant, Signal::Sparse}) {
    SimDesign d = correct_design(s, 10);
    d.n = 100000;
    d.R2 = 0.6;
    const Replication rep = gen_replication(d, 3);
    const double theta = solve_theta_for_r2(d, design_coefficients(d));
    const Eigen::VectorXd signal = theta * (rep.train.X * design_coefficients(d));
    const double r2 = variance(signal) / variance(rep.train.y);
    CHECK(std::abs(r2 - 0.6) < 0.01);
    const Eigen::VectorXd noise = rep.train.y - signal;
    CHECK(std::abs(variance(noise) - 1.0) < 0.02);
  }
}

TEST_CASE("misspecified replication layout") {
  SimDesign d;
  d.n = 50;
  d.n_test = 100;
  const Replication rep = gen_replication(d, 9);
  CHECK(rep.train.p() == 15);
  CHECK(rep.train.n() == 50);
  CHECK(rep.test.n() == 100);
  CHECK(rep.train.X.col(0).isOnes());
  CHECK(rep.test.X.col(0).isOnes());
  CHECK(rep.train.intercept_col == 0);
  const Replication again = gen_replication(d, 9);
  CHECK(rep.train.y == again.train.y);
  CHECK(rep.test.X == again.test.X);
  d.n = 150;
  CHECK(d.observed() == 20);
  CHECK(gen_replication(d, 1).train.p() == 20);
}

TEST_CASE("misspecified outcome variance") {
  SimDesign d;
  d.n = 30000;
  d.n_test = 1;
  d.R2 = 0.5;
  d.rho_x = 0.5;
  const Replication rep = gen_replication(d, 4);
  const double theta = solve_theta_for_r2(d, design_coefficients(d));
  const Eigen::VectorXd beta = design_coefficients(d).tail(999);
  const double V = (1 - d.rho_x) * beta.squaredNorm() + d.rho_x * beta.sum() * beta.sum();
  const double vy = variance(rep.train.y);
  CHECK(std::abs(vy - theta * theta * V - 1.0) < 3.0 * vy * std::sqrt(2.0 / d.n));
}

TEST_CASE("FPE") {
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
  CHECK(fpe_of(y, y, 0.3) == 0.0);
  CHECK(fpe_of(Eigen::VectorXd::Zero(4), y, 0.5) == doctest::Approx(0.5));
  Eigen::VectorXd yy(5), pred(5);
  yy << 1.0, -2.0, 0.5, 3.0, 0.0;
  pred << 0.0, 0.0, 1.0, 1.0, 0.0;
  const double tau = 0.2;
  const double by_hand = (0.2 * 1.0 + 0.8 * 2.0 + 0.8 * 0.5 + 0.2 * 2.0 + 0.0) / 5.0;
  CHECK(fpe_of(pred, yy, tau) == doctest::Approx(by_hand));
  CHECK_THROWS_AS(fpe_of(pred, Eigen::VectorXd::Zero(3), tau), DimensionMismatch);
}

TEST_CASE("summary metrics and ties") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd one(3, 1);
  one << 0.4, 0.5, 0.6;
  auto s = summarize_fpe({"CSA"}, one, 0);
  CHECK(*s[0].winning_ratio == 1.0);
  CHECK_FALSE(s[0].loss_to_csa.has_value());

  Eigen::MatrixXd twin(3, 2);
  twin << 0.4, 0.4, 0.5, 0.5, 0.6, 0.6;
  s = summarize_fpe({"CSA", "COPY"}, twin, 0);
  CHECK(*s[0].winning_ratio == 0.0);
  CHECK(*s[1].winning_ratio == 0.0);
  CHECK(*s[1].loss_to_csa == 0.0);

  Eigen::MatrixXd mixed(4, 3);
  mixed << 0.4, 0.5, 0.6,
           0.5, 0.4, nan,
           0.3, 0.3, 0.5,
           0.2, 0.1, 0.3;
  int complete = 0;
  s = summarize_fpe({"CSA", "A", "B"}, mixed, 0, &complete);
  CHECK(complete == 3);
  CHECK(*s[0].winning_ratio == doctest::Approx(1.0 / 3));
  CHECK(*s[1].winning_ratio == doctest::Approx(1.0 / 3));
  CHECK(*s[0].winning_ratio + *s[1].winning_ratio + *s[2].winning_ratio <= 1.0);
  CHECK(*s[1].loss_to_csa == doctest::Approx(0.25));
  CHECK(*s[2].loss_to_csa == doctest::Approx(1.0));
  CHECK(s[2].failures == 1);
  CHECK(*s[2].avg_fpe == doctest::Approx((0.6 + 0.5 + 0.3) / 3));
  CHECK(*s[0].sd_fpe == doctest::Approx(std::sqrt(((0.4 - 0.35) * (0.4 - 0.35) + 0.15 * 0.15 + 0.05 * 0.05 + 0.15 * 0.15) / 3)));

  Eigen::MatrixXd dead(2, 2);
  dead << 0.4, nan, 0.5, nan;
  s = summarize_fpe({"CSA", "X"}, dead, 0);
  CHECK_FALSE(s[1].avg_fpe.has_value());
  CHECK_FALSE(s[1].loss_to_csa.has_value());
  CHECK_FALSE(s[0].winning_ratio.has_value());
}

TEST_CASE("study is deterministic across thread counts") {
  SimDesign d;
  d.n = 40;
  d.R = 4;
  d.n_test = 20;
  MethodSpec csa;
  csa.kind = MethodKind::Csa;
  csa.cap = 10;
  MethodSpec unc;
  unc.kind = MethodKind::Unconditional;
  const StudyResult a = run_study(d, {csa, unc}, 5, 1);
  const StudyResult b = run_study(d, {csa, unc}, 5, 3);
  CHECK(a.fpe == b.fpe);
  CHECK(a.k_hat == b.k_hat);
  CHECK(a.complete == 4);
  CHECK((a.fpe.array() >= 0.0).all());
  CHECK(a.summary[1].loss_to_csa.has_value());
}

TEST_CASE("a failing method is counted, not fatal") {
  SimDesign d = correct_design(Signal::Decreasing, 5);
  d.n = 8;
  d.R = 2;
  d.n_test = 5;
  MethodSpec csa;
  csa.kind = MethodKind::Csa;
  csa.cv = CvMode::bfold(2);
  MethodSpec unc;
  unc.kind = MethodKind::Unconditional;
  const StudyResult r = run_study(d, {csa, unc}, 1);
  CHECK(r.summary[0].failures == 2);
  CHECK(r.summary[1].failures == 0);
  CHECK(r.failure_messages.size() == 2);
  CHECK(r.complete == 0);
}

TEST_CASE("design validation") {
  SimDesign d;
  d.R2 = 1.0;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  d = SimDesign{};
  d.rho_x = -0.1;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  d = SimDesign{};
  d.tau = 1.0;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  d = SimDesign{};
  d.n_test = 0;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  d = SimDesign{};
  d.K = 1001;
  CHECK_THROWS_AS(d.validate(), InvalidParameter);
  CHECK(parse_family("correct") == SimFamily::Correct);
  CHECK(parse_signal("sparse") == Signal::Sparse);
  CHECK_THROWS_AS(parse_signal("dense"), InvalidParameter);
}
