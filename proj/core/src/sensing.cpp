// SPDX-License-Identifier: Apache-2.0
//
// fdjcas: full-duplex DMA joint communications and sensing simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "fdjcas/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/tools/minima.hpp>

namespace fdjcas {

namespace {

constexpr double kEigFloor = 1e-12;
constexpr double kDenominatorFloor = 1e-12;

CMatrix orthonormal_columns(const CMatrix& a) {
  Eigen::HouseholderQR<CMatrix> qr(a);
  return qr.householderQ() * CMatrix::Identity(a.rows(), a.cols());
}

}  // namespace

CMatrix SubspaceState::noise_projector() const {
  const Eigen::Index m = basis.rows();
  return CMatrix::Identity(m, m) - basis * basis.adjoint();
}

CMatrix sample_covariance(const CMatrix& snapshots) {
  if (snapshots.cols() == 0) throw ConfigError("sample_covariance: no snapshots");
  return snapshots * snapshots.adjoint() / static_cast<double>(snapshots.cols());
}

CMatrix whitening_matrix(const CMatrix& noise_cov) {
  if (noise_cov.rows() != noise_cov.cols() || noise_cov.rows() == 0) {
    throw ConfigError("whitening_matrix: covariance must be square and non-empty");
  }
  const Eigen::LLT<CMatrix> llt(noise_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("whitening_matrix: covariance is not positive definite");
  }
  return llt.matrixL().solve(CMatrix::Identity(noise_cov.rows(), noise_cov.cols()));
}

SubspaceState music_init(const CMatrix& covariance, int k, double forget, int reorth_period) {
  const Eigen::Index m = covariance.rows();
  if (covariance.cols() != m) throw ConfigError("music_init: covariance must be square");
  if (k < 1 || k >= m) {
    throw ConfigError("music_init: source count " + std::to_string(k) +
                      " must be in [1, N_RF - 1] with N_RF = " + std::to_string(m));
  }
  if (!(forget > 0.0) || forget > 1.0) throw ConfigError("music_init: forget must be in (0, 1]");
  const CMatrix herm = 0.5 * (covariance + covariance.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> evd(herm);
  if (evd.info() != Eigen::Success) throw NumericalError("music_init: eigendecomposition failed");
  SubspaceState s;
  s.basis.resize(m, k);
  s.eigvals.resize(k);
  // Eigen sorts ascending.
  for (int c = 0; c < k; ++c) {
    s.basis.col(c) = evd.eigenvectors().col(m - 1 - c);
    s.eigvals(c) = std::max(evd.eigenvalues()(m - 1 - c), 0.0);
  }
  s.forget = forget;
  s.reorth_period = reorth_period;
  return s;
}

SubspaceState reorthonormalize(SubspaceState state) {
  for (Eigen::Index c = 0; c < state.basis.cols(); ++c) {
    for (Eigen::Index p = 0; p < c; ++p) {
      const cd proj = state.basis.col(p).dot(state.basis.col(c));
      state.basis.col(c) -= proj * state.basis.col(p);
    }
    const double nrm = state.basis.col(c).norm();
    if (nrm > 0.0) state.basis.col(c) /= nrm;
  }
  return state;
}

SubspaceState pastd_update(const SubspaceState& state, const CVector& y, Diagnostics* diag) {
  if (y.size() != state.basis.rows()) throw ConfigError("pastd_update: snapshot size mismatch");
  SubspaceState next = state;
  CVector x = y;
  for (Eigen::Index k = 0; k < next.basis.cols(); ++k) {
    auto w = next.basis.col(k);
    const cd a = w.dot(x);  // w^H x
    double& d = next.eigvals(k);
    d = next.forget * d + std::norm(a);
    if (d < kEigFloor) {
      if (diag != nullptr) ++diag->pastd_skips;
      continue;
    }
    const CVector e = x - w * a;
    w += e * (std::conj(a) / d);
    x -= w * a;
  }
  ++next.snapshots_seen;
  if (next.reorth_period > 0 &&
      next.snapshots_seen % static_cast<std::size_t>(next.reorth_period) == 0) {
    next = reorthonormalize(std::move(next));
  }
  return next;
}

SpectrumGrid music_spectrum(const SubspaceState& state, const std::vector<double>& r_axis,
                            const std::vector<double>& theta_axis, double phi_fixed,
                            const SteeringFn& steering, Diagnostics* diag) {
  if (state.basis.cols() == 0) throw ConfigError("music_spectrum: empty signal subspace");
  SpectrumGrid grid{r_axis, theta_axis,
                    Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r_axis.size()),
                                          static_cast<Eigen::Index>(theta_axis.size())),
                    phi_fixed};
  const CMatrix& u = state.basis;
  for (std::size_t ir = 0; ir < r_axis.size(); ++ir) {
    for (std::size_t it = 0; it < theta_axis.size(); ++it) {
      CVector b = steering(r_axis[ir], theta_axis[it], phi_fixed);
      const double nrm = b.norm();
      if (!(nrm > 0.0)) {
        if (diag != nullptr) ++diag->zero_steering;
        continue;
      }
      b /= nrm;
      const double denom = (b - u * (u.adjoint() * b)).squaredNorm();
      grid.values(static_cast<Eigen::Index>(ir), static_cast<Eigen::Index>(it)) =
          1.0 / std::max(denom, kDenominatorFloor);
    }
  }
  return grid;
}

namespace {

double parabolic_offset(double left, double mid, double right) {
  const auto lg = [](double v) { return std::log(std::max(v, 1e-300)); };
  const double l = lg(left), m = lg(mid), r = lg(right);
  const double curv = l - 2.0 * m + r;
  if (!(curv < 0.0)) return 0.0;
  return std::clamp(0.5 * (l - r) / curv, -0.5, 0.5);
}

PeakEstimate refine_cell(const SpectrumGrid& s, int ir, int it) {
  const auto& v = s.values;
  const int nr = static_cast<int>(v.rows());
  const int nt = static_cast<int>(v.cols());
  PeakEstimate p;
  p.r_index = ir;
  p.theta_index = it;
  p.value = v(ir, it);
  p.r = s.r_axis[ir];
  p.theta = s.theta_axis[it];
  if (ir > 0 && ir + 1 < nr) {
    const double step = 0.5 * (s.r_axis[ir + 1] - s.r_axis[ir - 1]);
    p.r += step * parabolic_offset(v(ir - 1, it), v(ir, it), v(ir + 1, it));
  }
  if (it > 0 && it + 1 < nt) {
    const double step = 0.5 * (s.theta_axis[it + 1] - s.theta_axis[it - 1]);
    p.theta += step * parabolic_offset(v(ir, it - 1), v(ir, it), v(ir, it + 1));
  }
  return p;
}

bool ranks_before(const PeakEstimate& a, const PeakEstimate& b) {
  if (a.value != b.value) return a.value > b.value;
  return std::tie(a.r_index, a.theta_index) < std::tie(b.r_index, b.theta_index);
}

}  // namespace

std::vector<PeakEstimate> peak_pick(const SpectrumGrid& spectrum, int k, Diagnostics* diag) {
  const auto& v = spectrum.values;
  const int nr = static_cast<int>(v.rows());
  const int nt = static_cast<int>(v.cols());
  std::vector<PeakEstimate> maxima;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> taken =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(nr, nt, false);
  for (int ir = 0; ir < nr; ++ir) {
    for (int it = 0; it < nt; ++it) {
      const double c = v(ir, it);
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dt = -1; dt <= 1; ++dt) {
          if (dr == 0 && dt == 0) continue;
          const int jr = ir + dr, jt = it + dt;
          if (jr < 0 || jr >= nr || jt < 0 || jt >= nt) continue;
          const double o = v(jr, jt);
          // Plateaus: keep only the first cell in scan order.
          const bool earlier = dr < 0 || (dr == 0 && dt < 0);
          if (o > c || (earlier && o == c)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) {
        maxima.push_back(refine_cell(spectrum, ir, it));
        taken(ir, it) = true;
      }
    }
  }
  std::sort(maxima.begin(), maxima.end(), ranks_before);
  if (static_cast<int>(maxima.size()) > k) maxima.resize(static_cast<std::size_t>(k));
  if (static_cast<int>(maxima.size()) < k) {
    std::vector<PeakEstimate> rest;
    for (int ir = 0; ir < nr; ++ir) {
      for (int it = 0; it < nt; ++it) {
        if (!taken(ir, it)) rest.push_back(refine_cell(spectrum, ir, it));
      }
    }
    std::sort(rest.begin(), rest.end(), ranks_before);
    for (const auto& p : rest) {
      if (static_cast<int>(maxima.size()) >= k) break;
      maxima.push_back(p);
      if (diag != nullptr) ++diag->peak_pads;
    }
  }
  return maxima;
}

namespace {

std::vector<double> axis(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) v[q] = n == 1 ? lo : lo + (hi - lo) * q / (n - 1);
  return v;
}

// Normalized projection residual |(I - U U^H) b|^2 / |b|^2, the reciprocal
// of the pseudo-spectrum before flooring. Degenerate steering scores 1.
double null_residual(const CMatrix& u, const SteeringFn& steering, double r, double theta,
                     double phi) {
  CVector b = steering(r, theta, phi);
  const double nrm = b.norm();
  if (!(nrm > 0.0)) return 1.0;
  b /= nrm;
  return (b - u * (u.adjoint() * b)).squaredNorm();
}

}  // namespace

std::vector<double> coarse_r_axis(const SearchGrid& grid) {
  return axis(grid.r_min, grid.r_max, grid.coarse_r);
}

std::vector<double> coarse_theta_axis(const SearchGrid& grid) {
  return axis(grid.theta_min, grid.theta_max, grid.coarse_theta);
}

SteeringTable make_steering_table(const SearchGrid& grid, const SteeringFn& steering,
                                  Diagnostics* diag) {
  SteeringTable t;
  t.r_axis = coarse_r_axis(grid);
  t.theta_axis = coarse_theta_axis(grid);
  t.phi = grid.phi;
  const Eigen::Index nt = grid.coarse_theta;
  for (Eigen::Index ir = 0; ir < grid.coarse_r; ++ir) {
    for (Eigen::Index it = 0; it < nt; ++it) {
      CVector b = steering(t.r_axis[ir], t.theta_axis[it], grid.phi);
      if (t.vectors.size() == 0) t.vectors = CMatrix::Zero(b.size(), grid.coarse_r * nt);
      const double nrm = b.norm();
      if (!(nrm > 0.0)) {
        if (diag != nullptr) ++diag->zero_steering;
        continue;
      }
      t.vectors.col(ir * nt + it) = b / nrm;
    }
  }
  return t;
}

SpectrumGrid music_spectrum(const SubspaceState& state, const SteeringTable& table) {
  if (state.basis.cols() == 0) throw ConfigError("music_spectrum: empty signal subspace");
  const auto nr = static_cast<Eigen::Index>(table.r_axis.size());
  const auto nt = static_cast<Eigen::Index>(table.theta_axis.size());
  if (table.vectors.cols() != nr * nt || table.vectors.rows() != state.basis.rows()) {
    throw ConfigError("music_spectrum: steering table does not match the subspace");
  }
  SpectrumGrid grid{table.r_axis, table.theta_axis, Eigen::MatrixXd::Zero(nr, nt), table.phi};
  const CMatrix& u = state.basis;
  const CMatrix resid = table.vectors - u * (u.adjoint() * table.vectors);
  for (Eigen::Index ir = 0; ir < nr; ++ir) {
    for (Eigen::Index it = 0; it < nt; ++it) {
      const Eigen::Index c = ir * nt + it;
      if (table.vectors.col(c).squaredNorm() == 0.0) continue;
      grid.values(ir, it) = 1.0 / std::max(resid.col(c).squaredNorm(), kDenominatorFloor);
    }
  }
  return grid;
}

std::vector<SphericalState> locate_targets(const SubspaceState& state, const SearchGrid& grid,
                                           int k, const SteeringFn& steering, Diagnostics* diag,
                                           const SteeringTable* coarse_table) {
  const SpectrumGrid coarse =
      coarse_table != nullptr
          ? music_spectrum(state, *coarse_table)
          : music_spectrum(state, coarse_r_axis(grid), coarse_theta_axis(grid), grid.phi,
                           steering, diag);
  const auto& coarse_r = coarse.r_axis;
  const auto& coarse_t = coarse.theta_axis;
  const double dr = coarse_r.size() > 1 ? coarse_r[1] - coarse_r[0] : 0.0;
  const double dt = coarse_t.size() > 1 ? coarse_t[1] - coarse_t[0] : 0.0;

  // Near the Fraunhofer distance the null is a long, thin valley that runs
  // mostly along r and is far narrower in theta than any grid step. So for
  // each coarse peak: minimize the residual over theta (Brent) on every
  // coarse range cell, keep the best cell, then a nested Brent over r.
  const int bits = std::max(16, std::numeric_limits<double>::digits / 2);
  std::vector<SphericalState> out;
  for (const PeakEstimate& p : peak_pick(coarse, k, diag)) {
    const double tc = coarse_t[p.theta_index];
    const double t_lo = std::max(grid.theta_min, tc - grid.ridge_halfwidth * dt);
    const double t_hi = std::min(grid.theta_max, tc + grid.ridge_halfwidth * dt);
    const auto best_theta = [&](double r) {
      if (!(t_hi > t_lo)) return std::pair{t_lo, null_residual(state.basis, steering, r, t_lo, grid.phi)};
      return boost::math::tools::brent_find_minima(
          [&](double t) { return null_residual(state.basis, steering, r, t, grid.phi); }, t_lo,
          t_hi, bits);
    };
    double r_best = coarse_r[p.r_index];
    double res_best = best_theta(r_best).second;
    for (const double r : coarse_r) {
      const double res = best_theta(r).second;
      if (res < res_best) std::tie(r_best, res_best) = std::pair{r, res};
    }
    const double r_lo = std::max(grid.r_min, r_best - dr);
    const double r_hi = std::min(grid.r_max, r_best + dr);
    if (r_hi > r_lo) {
      const auto rr = boost::math::tools::brent_find_minima(
          [&](double r) { return best_theta(r).second; }, r_lo, r_hi, bits);
      if (rr.second < res_best) r_best = rr.first;
    }
    out.push_back({r_best, best_theta(r_best).first, grid.phi});
  }
  return out;
}

double refined_cell_diagonal(const SearchGrid& grid, double r) {
  const double dr = 2.0 * (grid.r_max - grid.r_min) / (grid.coarse_r - 1) / (grid.refine - 1);
  const double dt =
      2.0 * (grid.theta_max - grid.theta_min) / (grid.coarse_theta - 1) / (grid.refine - 1);
  return std::hypot(dr, r * dt);
}

AssociationResult associate_and_rmse(const std::vector<SphericalState>& estimates,
                                     const std::vector<SphericalState>& truths,
                                     double miss_penalty) {
  struct Pair {
    double dist;
    std::size_t est;
    std::size_t truth;
  };
  std::vector<Pair> pairs;
  for (std::size_t e = 0; e < estimates.size(); ++e) {
    const Eigen::Vector3d pe = to_cartesian(estimates[e]);
    for (std::size_t t = 0; t < truths.size(); ++t) {
      pairs.push_back({(pe - to_cartesian(truths[t])).norm(), e, t});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.truth, a.est) < std::tie(b.dist, b.truth, b.est);
  });
  AssociationResult res;
  res.tracks.resize(truths.size());
  std::vector<bool> est_used(estimates.size(), false);
  std::vector<bool> truth_used(truths.size(), false);
  for (const Pair& p : pairs) {
    if (est_used[p.est] || truth_used[p.truth]) continue;
    est_used[p.est] = truth_used[p.truth] = true;
    res.tracks[p.truth] = {estimates[p.est], static_cast<int>(p.truth), p.dist};
  }
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < truths.size(); ++t) {
    if (!truth_used[t]) res.tracks[t] = {SphericalState{}, -1, miss_penalty};
    sum_sq += res.tracks[t].position_error * res.tracks[t].position_error;
  }
  res.rmse = truths.empty() ? 0.0 : std::sqrt(sum_sq / static_cast<double>(truths.size()));
  return res;
}

double rmse_over(const AssociationResult& assoc, const std::vector<bool>& mask) {
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < assoc.tracks.size() && t < mask.size(); ++t) {
    if (!mask[t]) continue;
    sum_sq += assoc.tracks[t].position_error * assoc.tracks[t].position_error;
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(count));
}

double subspace_affinity(const CMatrix& a, const CMatrix& b) {
  const CMatrix qa = orthonormal_columns(a);
  const CMatrix qb = orthonormal_columns(b);
  Eigen::JacobiSVD<CMatrix> svd(qa.adjoint() * qb);
  const RVector s = svd.singularValues();
  return s.size() == 0 ? 0.0 : std::min(1.0, s.mean());
}

}  // namespace fdjcas
