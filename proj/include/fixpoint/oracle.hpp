#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fixpoint/problem.hpp"
#include "fixpoint/recovery.hpp"

namespace fixpoint {

/// One stationary point of Pi found by the primal multistart search.
struct OraclePoint {
  Eigen::VectorXd x;
  double pi_value = 0.0;
  double grad_norm = 0.0;
  int hess_pos = 0;  // inertia of hess Pi at x
  int hess_neg = 0;
  int hess_zero = 0;
};

struct OracleOptions {
  double gtol = 1e-10;         // refinement target
  double accept_tol = 1e-8;    // accepted points satisfy |grad Pi| <= this
  int max_iter = 120;
  double dedup_scale = 1e-5;   // radius = scale*(1 + |x|)
};

namespace detail {

inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

/// Damped Newton on grad Pi with line search on |grad Pi|^2. Returns the
/// converged point or nothing.
inline std::optional<Eigen::VectorXd> primal_newton(const FixedPointProblem& p,
                                                    Eigen::VectorXd x,
                                                    const std::vector<Interval>& box,
                                                    const OracleOptions& opt) {
  auto merit = [&](const Eigen::VectorXd& y) -> double {
    try {
      return 0.5 * p.grad_pi(y).squaredNorm();
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  for (int it = 0; it < opt.max_iter; ++it) {
    for (std::size_t j = 0; j < box.size(); ++j) {
      const double span = box[j].hi - box[j].lo;
      const double mid = 0.5 * (box[j].hi + box[j].lo);
      if (std::abs(x[static_cast<Eigen::Index>(j)] - mid) > 0.75 * span)
        return std::nullopt;
    }
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    try {
      g = p.grad_pi(x);
      h = p.hess_pi(x);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    if (!g.allFinite() || !h.allFinite()) return std::nullopt;
    if (g.norm() <= opt.gtol) return x;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
    const Eigen::VectorXd merit_grad = h * g;
    Eigen::VectorXd d;
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() >
        1e-14 * (1.0 + h.cwiseAbs().maxCoeff()))
      d = lu.solve(-g);
    else
      d = -merit_grad;
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
      const Eigen::VectorXd trial = x + alpha * d;
      if (merit(trial) <= phi0 + 1e-4 * alpha * slope) {
        x = trial;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return std::nullopt;
  }
  try {
    if (p.grad_pi(x).norm() <= opt.accept_tol) return x;
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

}  // namespace detail

/// Brute-force enumeration of the stationary points of Pi inside a box,
/// from a low-discrepancy (Halton) start set. Deterministic for a given
/// seed: the seed only shifts the sequence offset. Desk-scale guard n <= 6.
[[nodiscard]] inline std::vector<OraclePoint> multistart_stationary_search(
    const FixedPointProblem& p, const std::vector<Interval>& box, int n_starts,
    std::uint64_t seed, const OracleOptions& opt = {}) {
  static constexpr std::array<std::uint64_t, 6> kBases{2, 3, 5, 7, 11, 13};
  const Eigen::Index n = p.dim();
  if (n > 6) throw std::invalid_argument("oracle search supports n <= 6");
  if (static_cast<Eigen::Index>(box.size()) != n)
    throw std::invalid_argument("box dimension does not match the problem");
  for (const Interval& iv : box)
    if (!(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo < iv.hi))
      throw std::invalid_argument("oracle box must be finite");

  const std::uint64_t offset = 17 + seed % 65537;
  std::vector<Eigen::VectorXd> found;
  Eigen::VectorXd x0(n);
  for (int s = 0; s < n_starts; ++s) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double u = detail::halton(offset + static_cast<std::uint64_t>(s),
                                      kBases[static_cast<std::size_t>(j)]);
      x0[j] = box[static_cast<std::size_t>(j)].lo +
              u * (box[static_cast<std::size_t>(j)].hi - box[static_cast<std::size_t>(j)].lo);
    }
    // starts on a log-quadratic singularity get nudged outward once
    bool ok = true;
    try {
      (void)p.measures(x0);
    } catch (const DomainError&) {
      x0.array() += 1e-6 / std::sqrt(static_cast<double>(n));
      try {
        (void)p.measures(x0);
      } catch (const DomainError&) {
        ok = false;
      }
    }
    if (!ok) continue;
    if (auto r = detail::primal_newton(p, x0, box, opt)) found.push_back(*r);
  }

  // deterministic merge: sort by value then lexicographically, dedup
  std::vector<std::pair<double, Eigen::VectorXd>> tagged;
  tagged.reserve(found.size());
  for (auto& x : found) tagged.emplace_back(p.pi(x), std::move(x));
  std::sort(tagged.begin(), tagged.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return detail::lex_less(a.second, b.second);
  });
  std::vector<OraclePoint> out;
  for (auto& [value, x] : tagged) {
    bool dup = false;
    for (const auto& kept : out)
      if ((x - kept.x).norm() <= opt.dedup_scale * (1.0 + kept.x.norm())) {
        dup = true;
        break;
      }
    if (dup) continue;
    OraclePoint pt;
    pt.x = std::move(x);
    pt.pi_value = value;
    pt.grad_norm = p.grad_pi(pt.x).norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.hess_pi(pt.x),
                                                      Eigen::EigenvaluesOnly);
    const double eps = 1e-8 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double e = es.eigenvalues()[k];
      if (e > eps) ++pt.hess_pos;
      else if (e < -eps) ++pt.hess_neg;
      else ++pt.hess_zero;
    }
    out.push_back(std::move(pt));
  }
  return out;
}

struct MatchedPair {
  std::size_t record_idx = 0;
  std::size_t oracle_idx = 0;
  double distance = 0.0;
  double value_diff = 0.0;
};

/// Pairing of the canonical-dual records against the oracle's stationary
/// set: greedy nearest matching with a scale-aware distance threshold.
struct OracleReport {
  std::vector<OraclePoint> points;
  std::vector<MatchedPair> matched;
  std::vector<std::size_t> unmatched_dual;    // record indices with no partner
  std::vector<std::size_t> unmatched_oracle;  // oracle indices with no partner
  std::vector<MatchedPair> value_mismatches;  // matched but |dPi| > 1e-4

  [[nodiscard]] bool consistent() const {
    return unmatched_dual.empty() && unmatched_oracle.empty() && value_mismatches.empty();
  }
};

[[nodiscard]] inline OracleReport cross_validate(const std::vector<SolutionRecord>& records,
                                                 std::vector<OraclePoint> oracle_pts,
                                                 double pair_scale = 1e-3,
                                                 double value_tol = 1e-4) {
  OracleReport rep;
  rep.points = std::move(oracle_pts);
  std::vector<bool> rec_used(records.size(), false);
  std::vector<bool> orc_used(rep.points.size(), false);

  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    bool any = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (rec_used[i]) continue;
      for (std::size_t j = 0; j < rep.points.size(); ++j) {
        if (orc_used[j]) continue;
        const double d = (records[i].x - rep.points[j].x).norm();
        if (d <= pair_scale * (1.0 + rep.points[j].x.norm()) && d < best) {
          best = d;
          bi = i;
          bj = j;
          any = true;
        }
      }
    }
    if (!any) break;
    rec_used[bi] = true;
    orc_used[bj] = true;
    MatchedPair mp{bi, bj, best,
                   std::abs(records[bi].pi_value - rep.points[bj].pi_value)};
    if (mp.value_diff > value_tol) rep.value_mismatches.push_back(mp);
    rep.matched.push_back(mp);
  }
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!rec_used[i]) rep.unmatched_dual.push_back(i);
  for (std::size_t j = 0; j < rep.points.size(); ++j)
    if (!orc_used[j]) rep.unmatched_oracle.push_back(j);
  return rep;
}

}  // namespace fixpoint
