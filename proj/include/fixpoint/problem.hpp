#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fixpoint/canonical_terms.hpp"

namespace fixpoint {

/// A fixed-point problem x = F(x) for the potential operator
///   F(x) = sum_i dV_i(xi_i(x)) A_i x - f
/// together with its target
///   Pi(x) = sum_i V_i(xi_i(x)) - |x|^2/2 - x'f,
/// whose stationary points are exactly the fixed points of F.
class FixedPointProblem {
 public:
  FixedPointProblem(Eigen::VectorXd f, std::vector<CanonicalTerm> terms)
      : f_(std::move(f)), terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("problem needs at least one term");
    if (f_.size() == 0) throw std::invalid_argument("problem dimension must be positive");
    max_a_norm_ = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (terms_[i].cols() != f_.size())
        throw std::invalid_argument("term " + std::to_string(i) + ": D has " +
                                    std::to_string(terms_[i].cols()) +
                                    " columns, expected " + std::to_string(f_.size()));
      max_a_norm_ = std::max(max_a_norm_, terms_[i].a_norm());
    }
  }

  [[nodiscard]] Eigen::Index dim() const { return f_.size(); }        // n
  [[nodiscard]] Eigen::Index dual_dim() const {                       // m
    return static_cast<Eigen::Index>(terms_.size());
  }
  [[nodiscard]] const Eigen::VectorXd& f() const { return f_; }
  [[nodiscard]] const std::vector<CanonicalTerm>& terms() const { return terms_; }
  [[nodiscard]] const CanonicalTerm& term(std::size_t i) const { return terms_[i]; }
  [[nodiscard]] double max_a_norm() const { return max_a_norm_; }

  /// Measures xi_i(x) for all terms; throws DomainError with the offending
  /// term index when a log-quadratic measure hits the singularity floor.
  [[nodiscard]] Eigen::VectorXd measures(const Eigen::VectorXd& x) const {
    Eigen::VectorXd xi(dual_dim());
    for (Eigen::Index i = 0; i < dual_dim(); ++i) {
      xi[i] = terms_[i].xi(x);
      if (!terms_[i].in_primal_domain(xi[i]))
        throw DomainError("term " + std::to_string(i) + ": measure " +
                              std::to_string(xi[i]) + " outside primal domain",
                          static_cast<int>(i));
    }
    return xi;
  }

  [[nodiscard]] double pi(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd xi = measures(x);
    double w = 0.0;
    for (Eigen::Index i = 0; i < dual_dim(); ++i) w += terms_[i].V(xi[i]);
    return w - 0.5 * x.squaredNorm() - x.dot(f_);
  }

  [[nodiscard]] Eigen::VectorXd grad_pi(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd xi = measures(x);
    Eigen::VectorXd g = -x - f_;
    for (Eigen::Index i = 0; i < dual_dim(); ++i)
      g += terms_[i].dV(xi[i]) * (terms_[i].A() * x);
    return g;
  }

  [[nodiscard]] Eigen::MatrixXd hess_pi(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd xi = measures(x);
    Eigen::MatrixXd h = -Eigen::MatrixXd::Identity(dim(), dim());
    for (Eigen::Index i = 0; i < dual_dim(); ++i) {
      const Eigen::VectorXd ax = terms_[i].A() * x;
      h += terms_[i].dV(xi[i]) * terms_[i].A();
      h += terms_[i].d2V(xi[i]) * (ax * ax.transpose());
    }
    return h;
  }

  /// The operator F evaluated through the gradient of Pi, so that
  /// F(x) - x == grad_pi(x) holds identically.
  [[nodiscard]] Eigen::VectorXd F(const Eigen::VectorXd& x) const {
    return grad_pi(x) + x;
  }

  /// Independent route to F straight from the per-family formulas and the
  /// raw maps D, bypassing the cached A and the dV dispatch.
  [[nodiscard]] Eigen::VectorXd F_direct(const Eigen::VectorXd& x) const {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim());
    for (Eigen::Index i = 0; i < dual_dim(); ++i) {
      const CanonicalTerm& t = terms_[i];
      const Eigen::VectorXd w = t.D() * x;
      const double s = w.squaredNorm();
      switch (t.kind()) {
        case TermKind::Exponential:
          acc += t.alpha() * std::exp(0.5 * s) * (t.D().transpose() * w);
          break;
        case TermKind::Quartic:
          acc += t.beta() * (0.5 * s - t.lambda()) * (t.D().transpose() * w);
          break;
        case TermKind::LogQuadratic:
          if (s < kXiFloor)
            throw DomainError("term " + std::to_string(i) + ": |Dx|^2 vanishes",
                              static_cast<int>(i));
          acc += (2.0 * t.c1() + 2.0 * t.c2() * (std::log(s) + 1.0)) *
                 (t.D().transpose() * w);
          break;
      }
    }
    return acc - f_;
  }

  /// Fixed-point residual |F(x) - x|; equals |grad Pi(x)| for this operator.
  [[nodiscard]] double residual(const Eigen::VectorXd& x) const {
    return grad_pi(x).norm();
  }

 private:
  Eigen::VectorXd f_;
  std::vector<CanonicalTerm> terms_;
  double max_a_norm_ = 0.0;
};

}  // namespace fixpoint
