#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace fixpoint {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Lower bound on the log-quadratic measure; below it the potential is
/// treated as undefined (log singularity at zero).
inline constexpr double kXiFloor = 1e-300;

/// Thrown when a canonical measure or a dual variable leaves the domain of
/// its scalar family. term_index is -1 when no term context is available.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what, int term_index = -1)
      : std::domain_error(what), term_index(term_index) {}
  int term_index;
};

/// Open interval (lo, hi). Infinite endpoints mean unbounded.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  [[nodiscard]] bool contains(double v) const { return v > lo && v < hi; }
};

enum class TermKind { Exponential, Quartic, LogQuadratic };

[[nodiscard]] inline const char* to_string(TermKind k) {
  switch (k) {
    case TermKind::Exponential: return "exponential";
    case TermKind::Quartic: return "quartic";
    case TermKind::LogQuadratic: return "log_quadratic";
  }
  return "unknown";
}

/// One scalar potential family paired with its quadratic measure.
///
/// The measure is xi = 1/2 x'Ax with A derived from the per-term map D:
///   exponential:    V(xi) = alpha*exp(xi),                A = D'D
///   quartic:        V(xi) = beta/2*(xi - lambda)^2,       A = D'D
///   log-quadratic:  V(xi) = c1*xi + c2*xi*log(xi),        A = 2 D'D
/// so that the log-quadratic measure equals |Dx|^2 while the other two use
/// |Dx|^2/2. Conjugates V* and their derivatives are closed forms; the dual
/// map xi <-> sigma is a bijection on the stated domains.
class CanonicalTerm {
 public:
  [[nodiscard]] static CanonicalTerm exponential(double alpha, Eigen::MatrixXd D) {
    if (!(alpha > 0.0)) throw std::invalid_argument("exponential term requires alpha > 0");
    return CanonicalTerm(TermKind::Exponential, alpha, 0.0, std::move(D), 1.0);
  }

  [[nodiscard]] static CanonicalTerm quartic(double beta, double lambda, Eigen::MatrixXd D) {
    if (!(beta > 0.0)) throw std::invalid_argument("quartic term requires beta > 0");
    return CanonicalTerm(TermKind::Quartic, beta, lambda, std::move(D), 1.0);
  }

  [[nodiscard]] static CanonicalTerm log_quadratic(double c1, double c2, Eigen::MatrixXd D) {
    if (!(c2 > 0.0)) throw std::invalid_argument("log_quadratic term requires c2 > 0");
    return CanonicalTerm(TermKind::LogQuadratic, c1, c2, std::move(D), 2.0);
  }

  [[nodiscard]] TermKind kind() const { return kind_; }
  [[nodiscard]] const Eigen::MatrixXd& D() const { return D_; }
  [[nodiscard]] const Eigen::MatrixXd& A() const { return A_; }
  [[nodiscard]] Eigen::Index cols() const { return D_.cols(); }

  /// Spectral norm of A (largest eigenvalue; A is PSD).
  [[nodiscard]] double a_norm() const { return a_norm_; }

  [[nodiscard]] double alpha() const { return p0_; }
  [[nodiscard]] double beta() const { return p0_; }
  [[nodiscard]] double lambda() const { return p1_; }
  [[nodiscard]] double c1() const { return p0_; }
  [[nodiscard]] double c2() const { return p1_; }

  /// Canonical measure xi = 1/2 x'Ax.
  [[nodiscard]] double xi(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(A_ * x);
  }

  /// True when xi is inside the family's primal domain.
  [[nodiscard]] bool in_primal_domain(double xi) const {
    return kind_ != TermKind::LogQuadratic || xi >= kXiFloor;
  }

  [[nodiscard]] double V(double xi) const {
    switch (kind_) {
      case TermKind::Exponential: return p0_ * std::exp(xi);
      case TermKind::Quartic: {
        const double d = xi - p1_;
        return 0.5 * p0_ * d * d;
      }
      case TermKind::LogQuadratic:
        check_xi(xi);
        return p0_ * xi + p1_ * xi * std::log(xi);
    }
    return 0.0;
  }

  [[nodiscard]] double dV(double xi) const {
    switch (kind_) {
      case TermKind::Exponential: return p0_ * std::exp(xi);
      case TermKind::Quartic: return p0_ * (xi - p1_);
      case TermKind::LogQuadratic:
        check_xi(xi);
        return p0_ + p1_ * (std::log(xi) + 1.0);
    }
    return 0.0;
  }

  [[nodiscard]] double d2V(double xi) const {
    switch (kind_) {
      case TermKind::Exponential: return p0_ * std::exp(xi);
      case TermKind::Quartic: return p0_;
      case TermKind::LogQuadratic:
        check_xi(xi);
        return p1_ / xi;
    }
    return 0.0;
  }

  /// Dual domain on which V* and its derivatives are finite. Open at zero
  /// for the exponential family, where log(sigma/alpha) diverges.
  [[nodiscard]] Interval dual_domain() const {
    if (kind_ == TermKind::Exponential) return {0.0, kInf};
    return {-kInf, kInf};
  }

  [[nodiscard]] bool in_dual_domain(double sigma) const {
    return dual_domain().contains(sigma);
  }

  [[nodiscard]] double Vstar(double sigma) const {
    check_sigma(sigma);
    switch (kind_) {
      case TermKind::Exponential: return sigma * (std::log(sigma / p0_) - 1.0);
      case TermKind::Quartic: return sigma * sigma / (2.0 * p0_) + p1_ * sigma;
      case TermKind::LogQuadratic: return p1_ * conj_exp(sigma);
    }
    return 0.0;
  }

  /// Inverse duality map xi = dV*(sigma).
  [[nodiscard]] double dVstar(double sigma) const {
    check_sigma(sigma);
    switch (kind_) {
      case TermKind::Exponential: return std::log(sigma / p0_);
      case TermKind::Quartic: return sigma / p0_ + p1_;
      case TermKind::LogQuadratic: return conj_exp(sigma);
    }
    return 0.0;
  }

  /// Second derivative of V*; strictly positive on the dual domain.
  [[nodiscard]] double d2Vstar(double sigma) const {
    check_sigma(sigma);
    switch (kind_) {
      case TermKind::Exponential: return 1.0 / sigma;
      case TermKind::Quartic: return 1.0 / p0_;
      case TermKind::LogQuadratic: return conj_exp(sigma) / p1_;
    }
    return 0.0;
  }

 private:
  CanonicalTerm(TermKind kind, double p0, double p1, Eigen::MatrixXd D, double a_factor)
      : kind_(kind), p0_(p0), p1_(p1), D_(std::move(D)) {
    if (D_.size() == 0) throw std::invalid_argument("term map D must be nonempty");
    A_ = a_factor * (D_.transpose() * D_);
    A_ = 0.5 * (A_ + A_.transpose()).eval();  // kill rounding asymmetry
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_, Eigen::EigenvaluesOnly);
    a_norm_ = es.eigenvalues().cwiseAbs().maxCoeff();
  }

  double conj_exp(double sigma) const {
    return std::exp((sigma - p0_) / p1_ - 1.0);
  }

  void check_xi(double xi) const {
    if (xi < kXiFloor)
      throw DomainError("log_quadratic measure must be positive, got xi = " +
                        std::to_string(xi));
  }

  void check_sigma(double sigma) const {
    if (!in_dual_domain(sigma))
      throw DomainError(std::string(to_string(kind_)) +
                        " dual variable outside domain: sigma = " + std::to_string(sigma));
  }

  TermKind kind_;
  double p0_ = 0.0;  // alpha | beta | c1
  double p1_ = 0.0;  // unused | lambda | c2
  Eigen::MatrixXd D_;
  Eigen::MatrixXd A_;
  double a_norm_ = 0.0;
};

}  // namespace fixpoint
