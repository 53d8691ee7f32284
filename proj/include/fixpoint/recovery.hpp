#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fixpoint/dual_solver.hpp"
#include "fixpoint/problem.hpp"

namespace fixpoint {

enum class Stability {
  GlobalStable,
  LocalStableFixedPoint,
  LocalUnstableFixedPoint,
  Indeterminate
};

enum class StabilitySource {
  TrialityMinMax,
  TrialityDoubleMin,
  TrialityDoubleMax,
  PrimalHessianFallback
};

enum class TrialityVerdict { MinMax, DoubleMax, DoubleMin, NotApplicable };

[[nodiscard]] inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::GlobalStable: return "global_stable";
    case Stability::LocalStableFixedPoint: return "local_stable";
    case Stability::LocalUnstableFixedPoint: return "local_unstable";
    case Stability::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

[[nodiscard]] inline const char* to_string(StabilitySource s) {
  switch (s) {
    case StabilitySource::TrialityMinMax: return "triality_min_max";
    case StabilitySource::TrialityDoubleMin: return "triality_double_min";
    case StabilitySource::TrialityDoubleMax: return "triality_double_max";
    case StabilitySource::PrimalHessianFallback: return "primal_hessian_fallback";
  }
  return "unknown";
}

[[nodiscard]] inline const char* to_string(TrialityVerdict v) {
  switch (v) {
    case TrialityVerdict::MinMax: return "min_max";
    case TrialityVerdict::DoubleMax: return "double_max";
    case TrialityVerdict::DoubleMin: return "double_min";
    case TrialityVerdict::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

/// One solved fixed point: the primal/dual pair, its values, checks, and the
/// stability assessment. Both the triality verdict and the primal-Hessian
/// fallback verdict are kept so reports can show them side by side.
struct SolutionRecord {
  Eigen::VectorXd x;
  Eigen::VectorXd sigma;
  double pi_value = 0.0;
  double pid_value = 0.0;
  double gap = 0.0;          // |pi - pid|
  double fp_residual = 0.0;  // |F(x) - x|
  GClass g_class = GClass::Indefinite;
  Eigen::VectorXd g_eigs;
  Stability stability = Stability::Indeterminate;
  StabilitySource stability_source = StabilitySource::PrimalHessianFallback;
  TrialityVerdict triality = TrialityVerdict::NotApplicable;
  std::string triality_note;   // e.g. "not applicable (n != m)"
  Stability fallback_label = Stability::Indeterminate;
  bool verdict_conflict = false;  // triality and fallback disagree; fallback won
  bool from_pole = false;         // recovered on det G = 0 (f orthogonal to the null space)
};

/// x = G(sigma)^{-1} f. Refuses near-singular points.
[[nodiscard]] inline Eigen::VectorXd recover_primal(const FixedPointProblem& p,
                                                    const DualPoint& dp,
                                                    const SolverTolerances& tol = {}) {
  if (dp.g_class == GClass::NearSingular)
    throw PoleError("cannot recover a primal point at a pole of G");
  detail::GFactor fac(p, dp.sigma);
  if (fac.near_singular(definiteness_eps(p, dp.sigma, tol)))
    throw PoleError("G(sigma) is singular; no unique primal recovery");
  return fac.lu.solve(p.f());
}

[[nodiscard]] inline double duality_gap(const FixedPointProblem& p, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& sigma,
                                        const SolverTolerances& tol = {}) {
  return std::abs(p.pi(x) - eval_pid(p, sigma, tol));
}

/// Safeguarded Newton polish on grad Pi. Steps are clipped to a trust radius
/// of 0.1 (1 + |x|) and rejected when they do not reduce the residual.
[[nodiscard]] inline Eigen::VectorXd polish_primal(const FixedPointProblem& p,
                                                   Eigen::VectorXd x, int steps = 1) {
  for (int it = 0; it < steps; ++it) {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    try {
      g = p.grad_pi(x);
      h = p.hess_pi(x);
    } catch (const DomainError&) {
      return x;
    }
    if (!g.allFinite()) return x;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <=
        1e-14 * (1.0 + h.cwiseAbs().maxCoeff()))
      return x;
    Eigen::VectorXd d = lu.solve(-g);
    const double trust = 0.1 * (1.0 + x.norm());
    if (d.norm() > trust) d *= trust / d.norm();
    try {
      if (p.grad_pi(x + d).norm() < g.norm()) x += d;
      else return x;
    } catch (const DomainError&) {
      return x;
    }
  }
  return x;
}

struct StabilityAssessment {
  Stability label = Stability::Indeterminate;
  StabilitySource source = StabilitySource::PrimalHessianFallback;
  TrialityVerdict triality = TrialityVerdict::NotApplicable;
  std::string triality_note;
  Stability fallback = Stability::Indeterminate;
  bool conflict = false;
};

namespace detail {

inline Stability fallback_from_hessian(const FixedPointProblem& p, const Eigen::VectorXd& x,
                                       const SolverTolerances& tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.hess_pi(x), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& e = es.eigenvalues();
  const double eps = tol.singular_scale * (1.0 + e.cwiseAbs().maxCoeff());
  if (e.minCoeff() > eps) return Stability::LocalStableFixedPoint;
  if (e.maxCoeff() < -eps) return Stability::LocalUnstableFixedPoint;
  return Stability::Indeterminate;
}

inline std::optional<Stability> triality_expected(TrialityVerdict v) {
  switch (v) {
    case TrialityVerdict::MinMax: return Stability::GlobalStable;
    case TrialityVerdict::DoubleMax: return Stability::LocalUnstableFixedPoint;
    case TrialityVerdict::DoubleMin: return Stability::LocalStableFixedPoint;
    case TrialityVerdict::NotApplicable: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace detail

/// Extremum-type label for a recovered pair (x, sigma).
///
/// G positive definite gives the global min-max case. G negative definite
/// combines with the dual Hessian: a dual local max is the double-max case,
/// a dual local min is the double-min case but only in matching dimensions
/// (n = m). Every other combination is outside the theory and the primal
/// Hessian decides. The fallback verdict is always computed; when it
/// contradicts an applicable triality verdict the fallback wins and the
/// record is flagged.
[[nodiscard]] inline StabilityAssessment label_stability(const FixedPointProblem& p,
                                                         const Eigen::VectorXd& x,
                                                         const Eigen::VectorXd& sigma,
                                                         GClass g_class,
                                                         const SolverTolerances& tol = {}) {
  StabilityAssessment out;
  out.fallback = detail::fallback_from_hessian(p, x, tol);

  switch (g_class) {
    case GClass::PosDef:
      out.triality = TrialityVerdict::MinMax;
      break;
    case GClass::NegDef: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess_pid(p, sigma, tol),
                                                        Eigen::EigenvaluesOnly);
      const Eigen::VectorXd& e = es.eigenvalues();
      const double eps = tol.singular_scale * (1.0 + e.cwiseAbs().maxCoeff());
      if (e.maxCoeff() < -eps) {
        out.triality = TrialityVerdict::DoubleMax;
      } else if (e.minCoeff() > eps) {
        if (p.dim() == p.dual_dim()) {
          out.triality = TrialityVerdict::DoubleMin;
        } else {
          out.triality = TrialityVerdict::NotApplicable;
          out.triality_note = "not applicable (n != m)";
        }
      } else {
        out.triality = TrialityVerdict::NotApplicable;
        out.triality_note = "not applicable (dual Hessian not definite)";
      }
      break;
    }
    case GClass::Indefinite:
      out.triality = TrialityVerdict::NotApplicable;
      out.triality_note = "not applicable (G indefinite)";
      break;
    case GClass::NearSingular:
      out.triality = TrialityVerdict::NotApplicable;
      out.triality_note = "not applicable (G singular)";
      break;
  }

  const auto expected = detail::triality_expected(out.triality);
  if (!expected) {
    out.label = out.fallback;
    out.source = StabilitySource::PrimalHessianFallback;
    return out;
  }

  const bool fallback_definite = out.fallback != Stability::Indeterminate;
  const bool compatible =
      out.fallback == *expected ||
      (*expected == Stability::GlobalStable && out.fallback == Stability::LocalStableFixedPoint);
  if (fallback_definite && !compatible) {
    out.conflict = true;  // direct check contradicts the triality claim
    out.label = out.fallback;
    out.source = StabilitySource::PrimalHessianFallback;
    return out;
  }
  out.label = *expected;
  switch (out.triality) {
    case TrialityVerdict::MinMax: out.source = StabilitySource::TrialityMinMax; break;
    case TrialityVerdict::DoubleMax: out.source = StabilitySource::TrialityDoubleMax; break;
    case TrialityVerdict::DoubleMin: out.source = StabilitySource::TrialityDoubleMin; break;
    case TrialityVerdict::NotApplicable: break;
  }
  return out;
}

struct SolveOptions {
  std::optional<ScanGrid> grid;  // defaults to ScanGrid::defaults(m)
  SolverTolerances tol;
  int polish_steps = 1;
  bool include_pole_roots = true;  // single-term problems only
};

struct SolveDiagnostics {
  SearchDiagnostics search;
  int rejected_gap = 0;
  int rejected_residual = 0;
  int pole_candidates = 0;
  std::vector<std::string> notes;
};

struct SolveResult {
  std::vector<SolutionRecord> records;  // ascending pi_value
  SolveDiagnostics diagnostics;
};

namespace detail {

inline SolutionRecord make_record(const FixedPointProblem& p, Eigen::VectorXd x,
                                  Eigen::VectorXd sigma, double pid_value, GClass g_class,
                                  Eigen::VectorXd g_eigs, bool from_pole,
                                  const SolverTolerances& tol) {
  SolutionRecord rec;
  rec.x = std::move(x);
  rec.sigma = std::move(sigma);
  rec.pi_value = p.pi(rec.x);
  rec.pid_value = pid_value;
  rec.gap = std::abs(rec.pi_value - rec.pid_value);
  rec.fp_residual = p.residual(rec.x);
  rec.g_class = g_class;
  rec.g_eigs = std::move(g_eigs);
  rec.from_pole = from_pole;
  const StabilityAssessment sa = label_stability(p, rec.x, rec.sigma, rec.g_class, tol);
  rec.stability = sa.label;
  rec.stability_source = sa.source;
  rec.triality = sa.triality;
  rec.triality_note = sa.triality_note;
  rec.fallback_label = sa.fallback;
  rec.verdict_conflict = sa.conflict;
  return rec;
}

/// Candidate fixed points sitting on a pole of G. With a singular G the
/// canonical equilibrium equation G x = f only has solutions when f is
/// orthogonal to the null space; the null component is then pinned by the
/// canonical measure equation xi(x) = dV*(sigma). Isolated poles exist only
/// for single-term problems.
inline void pole_sweep(const FixedPointProblem& p, const AxisRange& ax,
                       const SolveOptions& opt, std::vector<SolutionRecord>& records,
                       SolveDiagnostics& diag) {
  const SolverTolerances& tol = opt.tol;
  const CanonicalTerm& t = p.term(0);
  for (double pole : dual_poles(p)) {
    if (pole < ax.lo || pole > ax.hi || !t.in_dual_domain(pole)) continue;
    const Eigen::VectorXd sigma = Eigen::VectorXd::Constant(1, pole);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_G(p, sigma));
    const Eigen::VectorXd& e = es.eigenvalues();
    const double eps = definiteness_eps(p, sigma, tol);
    std::vector<Eigen::Index> null_idx;
    for (Eigen::Index k = 0; k < e.size(); ++k)
      if (std::abs(e[k]) <= eps) null_idx.push_back(k);
    if (null_idx.size() != 1) {
      if (!null_idx.empty())
        diag.notes.push_back("pole at sigma = " + std::to_string(pole) +
                             " has a degenerate null space; skipped");
      continue;
    }
    const Eigen::VectorXd null_vec = es.eigenvectors().col(null_idx[0]);
    if (std::abs(null_vec.dot(p.f())) > 1e-10 * (1.0 + p.f().norm())) continue;

    // particular solution through the pseudo-inverse, then the null component
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(p.dim());
    for (Eigen::Index k = 0; k < e.size(); ++k)
      if (k != null_idx[0])
        x0 += es.eigenvectors().col(k).dot(p.f()) / e[k] * es.eigenvectors().col(k);

    double target;
    try {
      target = t.dVstar(pole);
    } catch (const DomainError&) {
      continue;
    }
    const double qa = 0.5 * null_vec.dot(t.A() * null_vec);
    const double qb = null_vec.dot(t.A() * x0);
    const double qc = 0.5 * x0.dot(t.A() * x0) - target;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (!(qa > 0.0) || disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    double pid_value;
    try {
      pid_value = -0.5 * p.f().dot(x0) - t.Vstar(pole);
    } catch (const DomainError&) {
      continue;
    }
    for (double tcoef : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
      Eigen::VectorXd x = polish_primal(p, x0 + tcoef * null_vec, opt.polish_steps);
      double res, pi;
      try {
        res = p.residual(x);
        pi = p.pi(x);
      } catch (const DomainError&) {
        continue;
      }
      if (res > tol.res_tol) {
        ++diag.rejected_residual;
        continue;
      }
      if (std::abs(pi - pid_value) > tol.gap_tol) {
        ++diag.rejected_gap;
        continue;
      }
      bool dup = false;
      for (const auto& r : records)
        if ((r.x - x).norm() <= tol.dedup_scale * (1.0 + r.x.norm())) dup = true;
      if (dup) continue;
      ++diag.pole_candidates;
      GClassification cls = classify_G(p, sigma, tol);
      records.push_back(make_record(p, std::move(x), sigma, pid_value, GClass::NearSingular,
                                    cls.eigs, true, tol));
    }
  }
}

}  // namespace detail

/// End-to-end pipeline: dual search, primal recovery, one polish step, gap
/// and residual checks, stability labels. Records come back sorted by
/// ascending primal value; rejected candidates are tallied in diagnostics.
[[nodiscard]] inline SolveResult solve(const FixedPointProblem& p,
                                       const SolveOptions& opt = {}) {
  const SolverTolerances& tol = opt.tol;
  SolveResult out;
  const ScanGrid grid = opt.grid ? *opt.grid : ScanGrid::defaults(p.dual_dim());

  const std::vector<DualPoint> duals =
      find_dual_stationary_points(p, grid, tol, &out.diagnostics.search);

  for (const DualPoint& dp : duals) {
    Eigen::VectorXd x;
    try {
      x = recover_primal(p, dp, tol);
    } catch (const PoleError& e) {
      out.diagnostics.notes.push_back(e.what());
      continue;
    }
    x = polish_primal(p, x, opt.polish_steps);
    double res, pi;
    try {
      res = p.residual(x);
      pi = p.pi(x);
    } catch (const DomainError& e) {
      out.diagnostics.notes.push_back(std::string("recovered point left the domain: ") +
                                      e.what());
      continue;
    }
    if (res > tol.res_tol) {
      ++out.diagnostics.rejected_residual;
      continue;
    }
    if (std::abs(pi - dp.value) > tol.gap_tol) {
      ++out.diagnostics.rejected_gap;
      continue;
    }
    out.records.push_back(
        detail::make_record(p, std::move(x), dp.sigma, dp.value, dp.g_class, dp.g_eigs,
                            false, tol));
  }

  if (opt.include_pole_roots && p.dual_dim() == 1) {
    auto ax = detail::intersect_axis(grid.axes[0], p.term(0).dual_domain());
    if (ax) detail::pole_sweep(p, *ax, opt, out.records, out.diagnostics);
  }

  std::sort(out.records.begin(), out.records.end(),
            [](const SolutionRecord& a, const SolutionRecord& b) {
              if (a.pi_value != b.pi_value) return a.pi_value < b.pi_value;
              return detail::lex_less(a.x, b.x);
            });
  return out;
}

}  // namespace fixpoint
