#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fixpoint/canonical_terms.hpp"

using fixpoint::CanonicalTerm;
using fixpoint::DomainError;
using fixpoint::TermKind;

namespace {

Eigen::MatrixXd unit1x1() {
  Eigen::MatrixXd d(1, 1);
  d << 1.0;
  return d;
}

}  // namespace

TEST_CASE("family values at hand-checked points") {
  const auto expo = CanonicalTerm::exponential(6.0, unit1x1());
  const auto quart = CanonicalTerm::quartic(8.0, 1.0, unit1x1());
  const auto logq = CanonicalTerm::log_quadratic(-8.0, 10.0, unit1x1());

  CHECK(expo.V(0.0) == Catch::Approx(6.0));
  CHECK(quart.V(1.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(logq.V(1.0) == Catch::Approx(-8.0));

  CHECK(expo.dV(0.0) == Catch::Approx(6.0));
  CHECK(quart.dV(1.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(logq.dV(std::exp(-1.0)) == Catch::Approx(-8.0));

  CHECK(expo.Vstar(6.0) == Catch::Approx(-6.0));
  CHECK(quart.Vstar(0.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(logq.Vstar(2.0) == Catch::Approx(10.0));

  CHECK(expo.dVstar(6.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(quart.dVstar(8.0) == Catch::Approx(2.0));
  CHECK(logq.dVstar(2.0) == Catch::Approx(1.0));

  CHECK(expo.d2Vstar(2.0) == Catch::Approx(0.5));
  CHECK(quart.d2Vstar(123.0) == Catch::Approx(0.125));
  CHECK(logq.d2Vstar(2.0) == Catch::Approx(0.1));
}

TEST_CASE("dual domains") {
  const auto expo = CanonicalTerm::exponential(6.0, unit1x1());
  const auto quart = CanonicalTerm::quartic(8.0, 1.0, unit1x1());
  const auto logq = CanonicalTerm::log_quadratic(-15.0, 9.0, unit1x1());

  CHECK(expo.dual_domain().lo == 0.0);
  CHECK(expo.dual_domain().hi == fixpoint::kInf);
  CHECK_FALSE(expo.in_dual_domain(0.0));
  CHECK(expo.in_dual_domain(1e-12));
  CHECK(quart.in_dual_domain(-1e9));
  CHECK(logq.in_dual_domain(-1e9));
  CHECK(logq.in_dual_domain(1e9));
}

TEST_CASE("constructor parameter validation") {
  CHECK_THROWS_AS(CanonicalTerm::exponential(0.0, unit1x1()), std::invalid_argument);
  CHECK_THROWS_AS(CanonicalTerm::exponential(-1.0, unit1x1()), std::invalid_argument);
  CHECK_THROWS_AS(CanonicalTerm::quartic(-2.0, 1.0, unit1x1()), std::invalid_argument);
  CHECK_THROWS_AS(CanonicalTerm::log_quadratic(0.0, 0.0, unit1x1()), std::invalid_argument);
}

TEST_CASE("measure metric per family") {
  Eigen::MatrixXd d(2, 2);
  d << 1, 2, 0, 3;
  const Eigen::MatrixXd dtd = d.transpose() * d;

  const auto quart = CanonicalTerm::quartic(1.0, 0.0, d);
  CHECK((quart.A() - dtd).cwiseAbs().maxCoeff() < 1e-14);

  const auto logq = CanonicalTerm::log_quadratic(-1.0, 1.0, d);
  CHECK((logq.A() - 2.0 * dtd).cwiseAbs().maxCoeff() < 1e-14);

  // log-quadratic measure equals |Dx|^2, the others |Dx|^2 / 2
  const Eigen::Vector2d x(0.7, -0.4);
  CHECK(logq.xi(x) == Catch::Approx((d * x).squaredNorm()));
  CHECK(quart.xi(x) == Catch::Approx(0.5 * (d * x).squaredNorm()));

  // PSD and symmetric
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(logq.A());
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("domain errors") {
  const auto logq = CanonicalTerm::log_quadratic(-8.0, 10.0, unit1x1());
  CHECK_THROWS_AS(logq.V(0.0), DomainError);
  CHECK_THROWS_AS(logq.V(-1.0), DomainError);
  CHECK_THROWS_AS(logq.dV(0.0), DomainError);
  const auto expo = CanonicalTerm::exponential(2.0, unit1x1());
  CHECK_THROWS_AS(expo.Vstar(0.0), DomainError);
  CHECK_THROWS_AS(expo.Vstar(-3.0), DomainError);
  CHECK_THROWS_AS(expo.dVstar(0.0), DomainError);
}

namespace {

struct FamilyCase {
  CanonicalTerm term;
  // in-domain samplers for the property sweeps
  double sigma_lo, sigma_hi;
  double xi_lo, xi_hi;
};

std::vector<FamilyCase> property_cases() {
  return {
      {CanonicalTerm::exponential(6.0, unit1x1()), 1e-3, 50.0, -8.0, 4.0},
      {CanonicalTerm::exponential(0.37, unit1x1()), 1e-3, 50.0, -8.0, 4.0},
      {CanonicalTerm::quartic(8.0, 1.0, unit1x1()), -50.0, 50.0, -20.0, 20.0},
      {CanonicalTerm::quartic(0.25, -3.0, unit1x1()), -50.0, 50.0, -20.0, 20.0},
      {CanonicalTerm::log_quadratic(-8.0, 10.0, unit1x1()), -80.0, 40.0, 1e-6, 30.0},
      {CanonicalTerm::log_quadratic(-15.0, 9.0, unit1x1()), -80.0, 40.0, 1e-6, 30.0},
  };
}

}  // namespace

TEST_CASE("Legendre roundtrips and Fenchel-Young equality") {
  std::mt19937 rng(20240901);
  for (const FamilyCase& fc : property_cases()) {
    std::uniform_real_distribution<double> us(fc.sigma_lo, fc.sigma_hi);
    std::uniform_real_distribution<double> ux(fc.xi_lo, fc.xi_hi);
    for (int i = 0; i < 1000; ++i) {
      const double sigma = us(rng);
      const double xi_back = fc.term.dVstar(sigma);
      CHECK(fc.term.dV(xi_back) == Catch::Approx(sigma).epsilon(1e-12));

      const double xi = ux(rng);
      const double sig = fc.term.dV(xi);
      if (!fc.term.in_dual_domain(sig)) continue;  // exp underflow to 0 at very negative xi
      CHECK(fc.term.dVstar(sig) == Catch::Approx(xi).epsilon(1e-12).margin(1e-12));
      CHECK(fc.term.V(xi) + fc.term.Vstar(sig) == Catch::Approx(xi * sig).margin(1e-10));
    }
  }
}

TEST_CASE("derivatives match central differences") {
  std::mt19937 rng(77);
  const double h = 1e-5;
  for (const FamilyCase& fc : property_cases()) {
    std::uniform_real_distribution<double> us(fc.sigma_lo, fc.sigma_hi);
    // keep an h-margin to the domain edge
    std::uniform_real_distribution<double> ux(fc.xi_lo + 2 * h, fc.xi_hi);
    for (int i = 0; i < 200; ++i) {
      const double xi = ux(rng);
      const double fd_dv = (fc.term.V(xi + h) - fc.term.V(xi - h)) / (2 * h);
      CHECK(fd_dv == Catch::Approx(fc.term.dV(xi)).epsilon(1e-6).margin(1e-6));

      double sigma = us(rng);
      if (sigma - h <= 0 && fc.term.kind() == TermKind::Exponential) sigma += 2 * h;
      const double fd_dvs = (fc.term.Vstar(sigma + h) - fc.term.Vstar(sigma - h)) / (2 * h);
      CHECK(fd_dvs == Catch::Approx(fc.term.dVstar(sigma)).epsilon(1e-6).margin(1e-6));
    }
  }
}

TEST_CASE("conjugates are strictly convex on their domains") {
  std::mt19937 rng(5150);
  for (const FamilyCase& fc : property_cases()) {
    std::uniform_real_distribution<double> us(fc.sigma_lo, fc.sigma_hi);
    for (int i = 0; i < 500; ++i) CHECK(fc.term.d2Vstar(us(rng)) > 0.0);
  }
}
