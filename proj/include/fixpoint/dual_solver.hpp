#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fixpoint/problem.hpp"

namespace fixpoint {

/// Thrown when the dual objective is evaluated at (or too close to) a
/// singularity of G.
class PoleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverTolerances {
  double gtol = 1e-10;          // |grad Pi^d| at accepted stationary points
  int max_newton_iter = 100;
  double singular_scale = 1e-8; // eps_def = scale*(1 + |sigma|*max|A_i|)
  double dedup_scale = 1e-6;    // dedup radius = scale*(1 + |sigma|)
  double gap_tol = 1e-6;        // |Pi - Pi^d| on accepted records
  double res_tol = 1e-8;        // |F(x) - x| after polish
};

enum class GClass { PosDef, NegDef, Indefinite, NearSingular };

[[nodiscard]] inline const char* to_string(GClass c) {
  switch (c) {
    case GClass::PosDef: return "pos_def";
    case GClass::NegDef: return "neg_def";
    case GClass::Indefinite: return "indefinite";
    case GClass::NearSingular: return "near_singular";
  }
  return "unknown";
}

/// A stationary point of the dual objective Pi^d.
struct DualPoint {
  Eigen::VectorXd sigma;
  double value = 0.0;
  double grad_norm = 0.0;
  GClass g_class = GClass::Indefinite;
  Eigen::VectorXd g_eigs;  // eigenvalues of G(sigma), ascending
};

struct AxisRange {
  double lo = -200.0;
  double hi = 200.0;
  int steps = 401;
};

/// Rectangular sigma-grid used for seeding and landscape export.
struct ScanGrid {
  std::vector<AxisRange> axes;

  /// Per-axis [-200, 200] with 401 nodes for m <= 2. Dimensions three and
  /// up keep the same multistart path but drop to 51 nodes per axis; the
  /// seed count then grows as 51^m, so expect long runtimes.
  [[nodiscard]] static ScanGrid defaults(Eigen::Index m) {
    ScanGrid g;
    g.axes.assign(static_cast<std::size_t>(m), AxisRange{-200.0, 200.0, m <= 2 ? 401 : 51});
    return g;
  }
};

/// Scale-aware eigenvalue threshold separating definite from near-singular.
[[nodiscard]] inline double definiteness_eps(const FixedPointProblem& p,
                                             const Eigen::VectorXd& sigma,
                                             const SolverTolerances& tol = {}) {
  return tol.singular_scale * (1.0 + sigma.norm() * p.max_a_norm());
}

/// G(sigma) = sum_i sigma_i A_i - I. Defined for every sigma; singularity is
/// the callers' concern.
[[nodiscard]] inline Eigen::MatrixXd build_G(const FixedPointProblem& p,
                                             const Eigen::VectorXd& sigma) {
  Eigen::MatrixXd g = -Eigen::MatrixXd::Identity(p.dim(), p.dim());
  for (Eigen::Index i = 0; i < p.dual_dim(); ++i) g += sigma[i] * p.term(i).A();
  return g;
}

[[nodiscard]] inline double det_G(const FixedPointProblem& p, const Eigen::VectorXd& sigma) {
  return build_G(p, sigma).determinant();
}

namespace detail {

inline void check_dual_domain(const FixedPointProblem& p, const Eigen::VectorXd& sigma) {
  if (sigma.size() != p.dual_dim())
    throw std::invalid_argument("sigma has wrong dimension");
  for (Eigen::Index i = 0; i < p.dual_dim(); ++i)
    if (!p.term(i).in_dual_domain(sigma[i]))
      throw DomainError("term " + std::to_string(i) + ": sigma outside dual domain",
                        static_cast<int>(i));
}

/// One LU factorization of G(sigma), shared by value/gradient/Hessian.
struct GFactor {
  Eigen::MatrixXd G;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double min_pivot = 0.0;

  GFactor(const FixedPointProblem& p, const Eigen::VectorXd& sigma)
      : G(build_G(p, sigma)), lu(G) {
    min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  }

  [[nodiscard]] bool near_singular(double eps) const { return !(min_pivot > eps); }
};

}  // namespace detail

/// Pi^d(sigma) = -1/2 f'G(sigma)^{-1}f - sum_i V_i*(sigma_i), computed via a
/// linear solve.
[[nodiscard]] inline double eval_pid(const FixedPointProblem& p, const Eigen::VectorXd& sigma,
                                     const SolverTolerances& tol = {}) {
  detail::check_dual_domain(p, sigma);
  detail::GFactor fac(p, sigma);
  if (fac.near_singular(definiteness_eps(p, sigma, tol)))
    throw PoleError("G(sigma) is singular at this sigma");
  const Eigen::VectorXd x = fac.lu.solve(p.f());
  double v = -0.5 * p.f().dot(x);
  for (Eigen::Index i = 0; i < p.dual_dim(); ++i) v -= p.term(i).Vstar(sigma[i]);
  return v;
}

/// Canonical-equation form of the dual gradient:
/// d Pi^d / d sigma_i = xi_i(x(sigma)) - dV_i*(sigma_i) with x(sigma) = G^{-1}f.
[[nodiscard]] inline Eigen::VectorXd grad_pid(const FixedPointProblem& p,
                                              const Eigen::VectorXd& sigma,
                                              const SolverTolerances& tol = {}) {
  detail::check_dual_domain(p, sigma);
  detail::GFactor fac(p, sigma);
  if (fac.near_singular(definiteness_eps(p, sigma, tol)))
    throw PoleError("G(sigma) is singular at this sigma");
  const Eigen::VectorXd x = fac.lu.solve(p.f());
  Eigen::VectorXd g(p.dual_dim());
  for (Eigen::Index i = 0; i < p.dual_dim(); ++i)
    g[i] = p.term(i).xi(x) - p.term(i).dVstar(sigma[i]);
  return g;
}

/// Dual Hessian: H_ij = -(A_i x)' G^{-1} (A_j x) - delta_ij d2V_i*(sigma_i).
[[nodiscard]] inline Eigen::MatrixXd hess_pid(const FixedPointProblem& p,
                                              const Eigen::VectorXd& sigma,
                                              const SolverTolerances& tol = {}) {
  detail::check_dual_domain(p, sigma);
  detail::GFactor fac(p, sigma);
  if (fac.near_singular(definiteness_eps(p, sigma, tol)))
    throw PoleError("G(sigma) is singular at this sigma");
  const Eigen::VectorXd x = fac.lu.solve(p.f());
  const Eigen::Index m = p.dual_dim();
  Eigen::MatrixXd b(p.dim(), m);
  for (Eigen::Index i = 0; i < m; ++i) b.col(i) = p.term(i).A() * x;
  Eigen::MatrixXd h = -b.transpose() * fac.lu.solve(b);
  for (Eigen::Index i = 0; i < m; ++i) h(i, i) -= p.term(i).d2Vstar(sigma[i]);
  return 0.5 * (h + h.transpose()).eval();
}

struct GClassification {
  GClass cls = GClass::Indefinite;
  Eigen::VectorXd eigs;  // ascending
};

[[nodiscard]] inline GClassification classify_G(const FixedPointProblem& p,
                                                const Eigen::VectorXd& sigma,
                                                const SolverTolerances& tol = {}) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_G(p, sigma));
  GClassification r;
  r.eigs = es.eigenvalues();
  const double eps = definiteness_eps(p, sigma, tol);
  if (r.eigs.cwiseAbs().minCoeff() <= eps)
    r.cls = GClass::NearSingular;
  else if (r.eigs.minCoeff() > eps)
    r.cls = GClass::PosDef;
  else if (r.eigs.maxCoeff() < -eps)
    r.cls = GClass::NegDef;
  else
    r.cls = GClass::Indefinite;
  return r;
}

/// Singularities of G for a single-term problem: sigma = 1/lambda_k over the
/// positive eigenvalues of A. Ascending, deduplicated.
[[nodiscard]] inline std::vector<double> dual_poles(const FixedPointProblem& p) {
  if (p.dual_dim() != 1)
    throw std::invalid_argument("dual_poles requires a single-term problem");
  const CanonicalTerm& t = p.term(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.A(), Eigen::EigenvaluesOnly);
  std::vector<double> poles;
  const double floor = 1e-14 * std::max(1.0, t.a_norm());
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lam = es.eigenvalues()[k];
    if (lam > floor) poles.push_back(1.0 / lam);
  }
  std::sort(poles.begin(), poles.end());
  poles.erase(std::unique(poles.begin(), poles.end(),
                          [](double a, double b) {
                            return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a));
                          }),
              poles.end());
  return poles;
}

struct SearchDiagnostics {
  long seeds = 0;
  long masked_seeds = 0;
  long converged = 0;
  long discarded = 0;        // diverged or line search failed
  long rejected_singular = 0;
  long brackets = 0;         // sign changes located (one-dimensional path)
};

namespace detail {

inline std::optional<AxisRange> intersect_axis(AxisRange ax, const Interval& dom) {
  // keep a hair inside open domain ends so V* stays finite
  if (std::isfinite(dom.lo)) ax.lo = std::max(ax.lo, dom.lo + 1e-9 * (1.0 + std::abs(dom.lo)));
  if (std::isfinite(dom.hi)) ax.hi = std::min(ax.hi, dom.hi - 1e-9 * (1.0 + std::abs(dom.hi)));
  if (!(ax.lo < ax.hi)) return std::nullopt;
  return ax;
}

inline std::vector<double> linspace(double lo, double hi, int steps) {
  std::vector<double> v(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i)
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (steps - 1);
  return v;
}

/// Scalar dual derivative for the one-dimensional search. Returns NaN where
/// the objective is not evaluable.
struct Scalar1D {
  const FixedPointProblem& p;
  const SolverTolerances& tol;

  double grad(double s) const {
    try {
      return grad_pid(p, Eigen::VectorXd::Constant(1, s), tol)[0];
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  double hess(double s) const {
    try {
      return hess_pid(p, Eigen::VectorXd::Constant(1, s), tol)(0, 0);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
};

/// Safeguarded Newton-bisection on a bracketing interval of grad Pi^d.
inline std::optional<double> refine_bracket(const Scalar1D& fn, double a, double b,
                                            double fa, double gtol, int max_iter) {
  double t = 0.5 * (a + b);
  for (int it = 0; it < max_iter + 100; ++it) {
    const double g = fn.grad(t);
    if (std::isfinite(g) && std::abs(g) <= gtol) return t;
    if (!std::isfinite(g)) return std::nullopt;
    if ((g > 0) == (fa > 0)) {
      a = t;
      fa = g;
    } else {
      b = t;
    }
    const double h = fn.hess(t);
    double next = (std::isfinite(h) && h != 0.0) ? t - g / h : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    t = next;
    if (b - a <= 1e-15 * (1.0 + std::abs(t))) {
      const double gf = fn.grad(t);
      if (std::isfinite(gf) && std::abs(gf) <= gtol) return t;
      return std::nullopt;
    }
  }
  const double gf = fn.grad(t);
  if (std::isfinite(gf) && std::abs(gf) <= gtol) return t;
  return std::nullopt;
}

/// One-dimensional search: partition the box at the poles of G, scan each
/// open interval for sign changes of the dual derivative (uniform nodes plus
/// geometrically graded nodes toward both ends), refine every bracket.
inline std::vector<Eigen::VectorXd> stationary_1d(const FixedPointProblem& p,
                                                  const AxisRange& ax,
                                                  const SolverTolerances& tol,
                                                  SearchDiagnostics& diag) {
  const Scalar1D fn{p, tol};
  std::vector<double> cuts{ax.lo};
  for (double pole : dual_poles(p))
    if (pole > ax.lo && pole < ax.hi) cuts.push_back(pole);
  cuts.push_back(ax.hi);

  std::vector<Eigen::VectorXd> roots;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const bool pole_lo = k > 0;
    const bool pole_hi = k + 2 < cuts.size();
    const double pad_lo = pole_lo ? 1e-6 * (1.0 + std::abs(cuts[k])) : 0.0;
    const double pad_hi = pole_hi ? 1e-6 * (1.0 + std::abs(cuts[k + 1])) : 0.0;
    const double a = cuts[k] + pad_lo;
    const double b = cuts[k + 1] - pad_hi;
    if (!(a < b)) continue;

    const double span = ax.hi - ax.lo;
    const int n_uniform = std::max(65, static_cast<int>(ax.steps * (b - a) / span) + 1);
    std::vector<double> nodes = linspace(a, b, n_uniform);
    for (int j = 1; j <= 12; ++j) {
      const double off = (b - a) * std::pow(10.0, -j);
      nodes.push_back(a + off);
      nodes.push_back(b - off);
    }
    std::sort(nodes.begin(), nodes.end());

    double prev_s = 0.0, prev_g = std::numeric_limits<double>::quiet_NaN();
    for (double s : nodes) {
      const double g = fn.grad(s);
      ++diag.seeds;
      if (!std::isfinite(g)) {
        ++diag.masked_seeds;
        prev_g = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      if (std::isfinite(prev_g) && ((g > 0) != (prev_g > 0) || g == 0.0)) {
        ++diag.brackets;
        const auto r = g == 0.0
                           ? std::optional<double>(s)
                           : refine_bracket(fn, prev_s, s, prev_g, tol.gtol,
                                            tol.max_newton_iter);
        if (r) {
          ++diag.converged;
          roots.push_back(Eigen::VectorXd::Constant(1, *r));
        } else {
          ++diag.discarded;
        }
      }
      prev_s = s;
      prev_g = g;
    }
  }
  return roots;
}

/// Damped Newton iteration on grad Pi^d from one grid seed. Armijo halving
/// on the squared gradient norm; diverging iterates are abandoned.
inline std::optional<Eigen::VectorXd> newton_from_seed(const FixedPointProblem& p,
                                                       const Eigen::VectorXd& seed,
                                                       const std::vector<AxisRange>& axes,
                                                       const SolverTolerances& tol) {
  const Eigen::Index m = p.dual_dim();
  Eigen::VectorXd sigma = seed;
  auto merit = [&](const Eigen::VectorXd& s) -> double {
    try {
      return 0.5 * grad_pid(p, s, tol).squaredNorm();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  for (int it = 0; it < tol.max_newton_iter; ++it) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double span = axes[static_cast<std::size_t>(j)].hi - axes[static_cast<std::size_t>(j)].lo;
      const double mid = 0.5 * (axes[static_cast<std::size_t>(j)].hi + axes[static_cast<std::size_t>(j)].lo);
      if (std::abs(sigma[j] - mid) > 0.75 * span) return std::nullopt;  // left the box
    }
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    try {
      g = grad_pid(p, sigma, tol);
      h = hess_pid(p, sigma, tol);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (!g.allFinite()) return std::nullopt;
    if (g.norm() <= tol.gtol) return sigma;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
    Eigen::VectorXd d;
    const double hmin = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    const Eigen::VectorXd merit_grad = h * g;
    if (hmin > 1e-14 * (1.0 + h.cwiseAbs().maxCoeff()))
      d = lu.solve(-g);
    else
      d = -merit_grad;  // singular Hessian: fall back to merit descent
    if (!d.allFinite()) return std::nullopt;
    double slope = merit_grad.dot(d);
    if (!(slope < 0)) {
      d = -merit_grad;
      slope = -merit_grad.squaredNorm();
      if (!(slope < 0)) return std::nullopt;
    }

    const double phi0 = 0.5 * g.squaredNorm();
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      const Eigen::VectorXd trial = sigma + alpha * d;
      if (merit(trial) <= phi0 + 1e-4 * alpha * slope) {
        sigma = trial;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return std::nullopt;
  }
  return std::nullopt;
}

inline bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace detail

/// All stationary points of Pi^d found inside the grid box, classified and
/// sorted (descending sigma when m = 1, descending dual value otherwise).
/// The search is best effort: a bracketing sweep between poles in one
/// dimension, damped Newton from every unmasked grid node otherwise.
[[nodiscard]] inline std::vector<DualPoint> find_dual_stationary_points(
    const FixedPointProblem& p, const ScanGrid& grid, const SolverTolerances& tol = {},
    SearchDiagnostics* diag_out = nullptr) {
  const Eigen::Index m = p.dual_dim();
  if (static_cast<Eigen::Index>(grid.axes.size()) != m)
    throw std::invalid_argument("grid dimension does not match the dual dimension");
  SearchDiagnostics diag;

  std::vector<Eigen::VectorXd> candidates;
  std::vector<AxisRange> axes;
  bool empty_box = false;
  for (Eigen::Index j = 0; j < m; ++j) {
    auto ax = detail::intersect_axis(grid.axes[static_cast<std::size_t>(j)],
                                     p.term(j).dual_domain());
    if (!ax) {
      empty_box = true;
      break;
    }
    axes.push_back(*ax);
  }

  if (!empty_box && m == 1) {
    candidates = detail::stationary_1d(p, axes[0], tol, diag);
  } else if (!empty_box) {
    std::vector<std::vector<double>> nodes;
    for (const auto& ax : axes) nodes.push_back(detail::linspace(ax.lo, ax.hi, ax.steps));
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    Eigen::VectorXd seed(m);
    bool done = false;
    while (!done) {
      for (Eigen::Index j = 0; j < m; ++j)
        seed[j] = nodes[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
      ++diag.seeds;
      detail::GFactor fac(p, seed);
      if (fac.near_singular(definiteness_eps(p, seed, tol))) {
        ++diag.masked_seeds;
      } else if (auto s = detail::newton_from_seed(p, seed, axes, tol)) {
        ++diag.converged;
        candidates.push_back(*s);
      } else {
        ++diag.discarded;
      }
      // odometer over the grid
      Eigen::Index j = m - 1;
      for (;; --j) {
        if (++idx[static_cast<std::size_t>(j)] <
            nodes[static_cast<std::size_t>(j)].size())
          break;
        idx[static_cast<std::size_t>(j)] = 0;
        if (j == 0) {
          done = true;
          break;
        }
      }
    }
  }

  // attach values up front so sorting and dedup stay exception-free
  struct Candidate {
    Eigen::VectorXd sigma;
    double value;
  };
  std::vector<Candidate> valued;
  for (auto& s : candidates) {
    try {
      const double value = eval_pid(p, s, tol);
      valued.push_back({std::move(s), value});
    } catch (const std::exception&) {
      ++diag.rejected_singular;  // converged onto a pole or out of domain
    }
  }
  // deterministic order before dedup
  std::sort(valued.begin(), valued.end(), [&](const Candidate& a, const Candidate& b) {
    if (m == 1 && a.sigma[0] != b.sigma[0]) return a.sigma[0] > b.sigma[0];
    if (m > 1 && a.value != b.value) return a.value > b.value;
    return detail::lex_less(a.sigma, b.sigma);
  });

  std::vector<DualPoint> points;
  for (const auto& c : valued) {
    bool dup = false;
    for (const auto& kept : points)
      if ((c.sigma - kept.sigma).norm() <= tol.dedup_scale * (1.0 + kept.sigma.norm())) {
        dup = true;
        break;
      }
    if (dup) continue;
    GClassification cls = classify_G(p, c.sigma, tol);
    if (cls.cls == GClass::NearSingular) {
      ++diag.rejected_singular;
      continue;
    }
    DualPoint dp;
    dp.sigma = c.sigma;
    dp.value = c.value;
    dp.grad_norm = grad_pid(p, c.sigma, tol).norm();
    dp.g_class = cls.cls;
    dp.g_eigs = cls.eigs;
    points.push_back(std::move(dp));
  }
  if (diag_out) *diag_out = diag;
  return points;
}

/// Dense evaluation of Pi^d over a grid for external plotting. Nodes outside
/// a dual domain, near-singular nodes, and nodes whose grid cell straddles a
/// sign change of det G are masked.
struct ScanResult {
  std::vector<std::vector<double>> axis_nodes;  // one vector per axis
  std::vector<double> pid;                      // NaN where masked
  std::vector<std::uint8_t> mask;               // row-major, last axis fastest
};

[[nodiscard]] inline ScanResult scan_dual(const FixedPointProblem& p, const ScanGrid& grid,
                                          const SolverTolerances& tol = {}) {
  const Eigen::Index m = p.dual_dim();
  if (m > 2) throw std::invalid_argument("scan supports m <= 2");
  if (static_cast<Eigen::Index>(grid.axes.size()) != m)
    throw std::invalid_argument("grid dimension does not match the dual dimension");

  ScanResult res;
  for (const auto& ax : grid.axes) {
    if (!(ax.lo < ax.hi) || ax.steps < 2) throw std::invalid_argument("invalid scan axis");
    res.axis_nodes.push_back(detail::linspace(ax.lo, ax.hi, ax.steps));
  }

  auto det_at = [&](double s0, double s1) {
    Eigen::VectorXd s(m);
    s[0] = s0;
    if (m == 2) s[1] = s1;
    return det_G(p, s);
  };

  if (m == 1) {
    const auto& nodes = res.axis_nodes[0];
    const double h = nodes.size() > 1 ? nodes[1] - nodes[0] : 0.0;
    for (double s : nodes) {
      bool masked = !p.term(0).in_dual_domain(s);
      if (!masked && h > 0 &&
          (det_at(s - 0.5 * h, 0) > 0) != (det_at(s + 0.5 * h, 0) > 0))
        masked = true;  // pole inside this cell
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!masked) {
        try {
          v = eval_pid(p, Eigen::VectorXd::Constant(1, s), tol);
        } catch (const std::exception&) {
          masked = true;
        }
      }
      res.pid.push_back(v);
      res.mask.push_back(masked ? 1 : 0);
    }
  } else {
    const auto& n0 = res.axis_nodes[0];
    const auto& n1 = res.axis_nodes[1];
    const double h0 = n0.size() > 1 ? n0[1] - n0[0] : 0.0;
    const double h1 = n1.size() > 1 ? n1[1] - n1[0] : 0.0;
    Eigen::VectorXd s(2);
    for (double a : n0) {
      for (double b : n1) {
        s[0] = a;
        s[1] = b;
        bool masked = !p.term(0).in_dual_domain(a) || !p.term(1).in_dual_domain(b);
        if (!masked && h0 > 0 && h1 > 0) {
          const bool c00 = det_at(a - 0.5 * h0, b - 0.5 * h1) > 0;
          const bool c01 = det_at(a - 0.5 * h0, b + 0.5 * h1) > 0;
          const bool c10 = det_at(a + 0.5 * h0, b - 0.5 * h1) > 0;
          const bool c11 = det_at(a + 0.5 * h0, b + 0.5 * h1) > 0;
          if (c00 != c01 || c00 != c10 || c00 != c11) masked = true;
        }
        double v = std::numeric_limits<double>::quiet_NaN();
        if (!masked) {
          try {
            v = eval_pid(p, s, tol);
          } catch (const std::exception&) {
            masked = true;
          }
        }
        res.pid.push_back(v);
        res.mask.push_back(masked ? 1 : 0);
      }
    }
  }
  return res;
}

/// CSV export: header sigma_1[,sigma_2],pid,mask; masked nodes emit an empty
/// pid field.
inline void write_scan_csv(std::ostream& os, const ScanResult& res) {
  const std::size_t m = res.axis_nodes.size();
  os << (m == 1 ? "sigma_1,pid,mask\n" : "sigma_1,sigma_2,pid,mask\n");
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::size_t row = 0;
  if (m == 1) {
    for (std::size_t i = 0; i < res.axis_nodes[0].size(); ++i, ++row) {
      os << fmt(res.axis_nodes[0][i]) << ',';
      if (!res.mask[row]) os << fmt(res.pid[row]);
      os << ',' << int(res.mask[row]) << '\n';
    }
  } else {
    for (std::size_t i = 0; i < res.axis_nodes[0].size(); ++i)
      for (std::size_t j = 0; j < res.axis_nodes[1].size(); ++j, ++row) {
        os << fmt(res.axis_nodes[0][i]) << ',' << fmt(res.axis_nodes[1][j]) << ',';
        if (!res.mask[row]) os << fmt(res.pid[row]);
        os << ',' << int(res.mask[row]) << '\n';
      }
  }
}

}  // namespace fixpoint
