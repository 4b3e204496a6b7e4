#pragma once

// Dense nonnegative-matrix routines used by the chain and effective
// capacity code. Written against Eigen::MatrixBase so they accept fixed-size
// 10x10 blocks, dynamic matrices and expressions alike.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cogcap {

struct PowerIterationOptions {
  double relative_tolerance = 1e-12;
  int max_iterations = 100000;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct PerronResult {
  Scalar radius{};
  Scalar gap{};  // final Collatz-Wielandt upper minus lower bound
  int iterations = 0;
};

namespace detail {

// One Collatz-Wielandt power iteration on (m + shift I). Returns true once
// the min/max ratio bounds agree to the tolerance. x must stay positive,
// which holds for irreducible m.
template <typename Mat, typename Vec>
bool collatz_wielandt_step(const Mat& m, typename Mat::Scalar shift, Vec& x,
                           typename Mat::Scalar tol, PerronResult<typename Mat::Scalar>& out) {
  using Scalar = typename Mat::Scalar;
  Vec y = m * x;
  if (shift != Scalar(0)) y += shift * x;
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  Scalar hi = Scalar(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar r = y(i) / x(i);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  out.radius = Scalar(0.5) * (lo + hi) - shift;
  out.gap = hi - lo;
  ++out.iterations;
  x = y / y.maxCoeff();
  return out.gap <= tol * std::max(std::abs(out.radius), std::numeric_limits<Scalar>::min());
}

// Strongly connected components of the pattern m(i, j) > 0, as index lists.
template <typename Derived>
std::vector<std::vector<Eigen::Index>> strong_components(const Eigen::MatrixBase<Derived>& m) {
  const Eigen::Index n = m.rows();
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reach = (m.array() > 0).matrix();
  for (Eigen::Index i = 0; i < n; ++i) reach(i, i) = true;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      if (reach(i, k))
        for (Eigen::Index j = 0; j < n; ++j) reach(i, j) = reach(i, j) || reach(k, j);

  std::vector<std::vector<Eigen::Index>> out;
  std::vector<bool> placed(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (placed[static_cast<std::size_t>(i)]) continue;
    auto& comp = out.emplace_back();
    for (Eigen::Index j = i; j < n; ++j) {
      if (reach(i, j) && reach(j, i)) {
        comp.push_back(j);
        placed[static_cast<std::size_t>(j)] = true;
      }
    }
  }
  return out;
}

// Perron root of an irreducible block. Plain iteration first; periodic
// blocks never settle, so the rest of the budget runs on m + cI with c at the
// scale of the root, which makes the block primitive.
template <typename Mat>
PerronResult<typename Mat::Scalar> irreducible_root(const Mat& m, typename Mat::Scalar tol,
                                                    int max_iterations) {
  using Scalar = typename Mat::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  PerronResult<Scalar> out;
  if (m.rows() == 1) {
    out.radius = m(0, 0);
    return out;
  }
  Vec x = Vec::Ones(m.rows());
  const int plain_budget = std::min(max_iterations, 1000);
  while (out.iterations < plain_budget)
    if (collatz_wielandt_step(m, Scalar(0), x, tol, out)) return out;

  // row sums bracket the root of a nonnegative matrix
  const Scalar shift = Scalar(0.5) * m.rowwise().sum().maxCoeff();
  x = Vec::Ones(m.rows());
  while (out.iterations < max_iterations)
    if (collatz_wielandt_step(m, shift, x, tol, out)) return out;

  std::ostringstream msg;
  msg << "perron_root: no convergence after " << out.iterations
      << " iterations (bound gap " << out.gap << ")";
  throw ConvergenceError(msg.str());
}

}  // namespace detail

/// Perron root of an entrywise nonnegative square matrix.
///
/// The matrix is split into its strongly connected components, the
/// irreducible diagonal blocks of its Frobenius normal form; the root is the
/// largest block root. Entries below max * sqrt(DBL_MIN) are treated as zero.
/// Each block is solved by power iteration from the
/// all-ones vector, bracketed by Collatz-Wielandt bounds, which close only
/// because the block is irreducible.
template <typename Derived>
PerronResult<typename Derived::Scalar> perron_root(const Eigen::MatrixBase<Derived>& m,
                                                   PowerIterationOptions opts = {}) {
  using Scalar = typename Derived::Scalar;
  using Block = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols()) throw std::invalid_argument("perron_root: matrix must be square");
  if ((m.array() < Scalar(0)).any())
    throw std::invalid_argument("perron_root: matrix must be entrywise nonnegative");

  // Entries this far below the largest leave subnormal components in the
  // iterate, where the ratio bounds lose their precision; they are dropped.
  const Scalar floor = m.maxCoeff() * std::sqrt(std::numeric_limits<Scalar>::min());
  const Block work = (m.array() < floor).select(Scalar(0), m);

  const Scalar tol = static_cast<Scalar>(opts.relative_tolerance);
  PerronResult<Scalar> best;
  for (const auto& comp : detail::strong_components(work)) {
    const auto k = static_cast<Eigen::Index>(comp.size());
    Block sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        sub(i, j) = work(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
    const auto r = detail::irreducible_root(sub, tol, opts.max_iterations);
    if (r.radius > best.radius) best.radius = r.radius, best.gap = r.gap;
    best.iterations += r.iterations;
  }
  return best;
}

/// Spectral radius of a nonnegative matrix (the Perron root).
template <typename Derived>
typename Derived::Scalar spectral_radius(const Eigen::MatrixBase<Derived>& m,
                                         PowerIterationOptions opts = {}) {
  return perron_root(m, opts).radius;
}

class StationaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Indices kept after repeatedly excising states that receive no probability
/// from any remaining state.
template <typename Derived>
std::vector<Eigen::Index> recurrent_support(const Eigen::MatrixBase<Derived>& transition) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = transition.rows();
  std::vector<bool> kept(static_cast<std::size_t>(n), true);
  for (bool changed = true; changed;) {
    changed = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!kept[j]) continue;
      Scalar inflow(0);
      for (Eigen::Index i = 0; i < n; ++i)
        if (kept[i]) inflow += transition(i, j);
      if (inflow == Scalar(0)) {
        kept[j] = false;
        changed = true;
      }
    }
  }
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < n; ++j)
    if (kept[j]) out.push_back(j);
  return out;
}

template <typename Scalar>
struct StationarySolve {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pi;
  Scalar residual{};  // || pi P - pi ||_inf
  bool used_power_iteration = false;
};

/// Stationary row vector of a row-stochastic matrix.
///
/// Excised states get exactly zero mass. The remaining block is solved as
/// (P^T - I) pi = 0 stacked with sum(pi) = 1; if the direct residual exceeds
/// `residual_tolerance` the solve falls back to power iteration on P^T.
template <typename Derived>
StationarySolve<typename Derived::Scalar> stationary_distribution(
    const Eigen::MatrixBase<Derived>& transition, typename Derived::Scalar residual_tolerance = 1e-10,
    PowerIterationOptions fallback = {}) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Eigen::Index n = transition.rows();
  if (n != transition.cols()) throw std::invalid_argument("stationary_distribution: not square");

  const auto support = recurrent_support(transition);
  const auto k = static_cast<Eigen::Index>(support.size());
  if (k == 0) throw StationaryError("stationary_distribution: every state was excised");

  Mat sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = transition(support[a], support[b]);

  Mat generator = sub.transpose() - Mat::Identity(k, k);
  Eigen::FullPivLU<Mat> lu(generator);
  lu.setThreshold(Scalar(1e-13));
  if (lu.rank() < k - 1) {
    std::ostringstream msg;
    msg << "stationary_distribution: " << (k - lu.rank())
        << " independent stationary vectors on the recurrent support; no unique steady state";
    throw StationaryError(msg.str());
  }

  Mat system(k + 1, k);
  system.topRows(k) = generator;
  system.row(k).setOnes();
  Vec rhs = Vec::Zero(k + 1);
  rhs(k) = Scalar(1);
  Vec local = system.colPivHouseholderQr().solve(rhs);

  auto finish = [&](Vec v, bool power) {
    v = v.cwiseMax(Scalar(0));
    v /= v.sum();
    StationarySolve<Scalar> out;
    out.pi = Vec::Zero(n);
    for (Eigen::Index a = 0; a < k; ++a) out.pi(support[a]) = v(a);
    out.residual = (transition.transpose() * out.pi - out.pi).template lpNorm<Eigen::Infinity>();
    out.used_power_iteration = power;
    return out;
  };

  auto direct = finish(local, false);
  if (direct.residual <= residual_tolerance) return direct;

  Vec v = Vec::Constant(k, Scalar(1) / Scalar(k));
  const Mat step = sub.transpose();
  for (int it = 0; it < fallback.max_iterations; ++it) {
    Vec next = step * v;
    next /= next.sum();
    const Scalar change = (next - v).template lpNorm<Eigen::Infinity>();
    v = next;
    if (change <= Scalar(fallback.relative_tolerance)) break;
  }
  auto iterated = finish(v, true);
  if (iterated.residual > residual_tolerance && iterated.residual >= direct.residual) {
    std::ostringstream msg;
    msg << "stationary_distribution: residual " << std::min(direct.residual, iterated.residual)
        << " exceeds tolerance " << residual_tolerance
        << " (chain may be periodic or numerically singular)";
    throw StationaryError(msg.str());
  }
  return iterated.residual < direct.residual ? iterated : direct;
}

}  // namespace cogcap
