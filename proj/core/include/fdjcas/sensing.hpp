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

#pragma once

#include <functional>
#include <vector>

#include "fdjcas/geometry.hpp"
#include "fdjcas/types.hpp"

namespace fdjcas {

/// Tracked signal subspace: orthonormal-ish basis columns and their
/// eigenvalue estimates.
struct SubspaceState {
  CMatrix basis;    // N_RF x K
  RVector eigvals;  // K
  double forget = 0.98;
  std::size_t snapshots_seen = 0;
  int reorth_period = 50;  // <= 0 disables re-orthonormalization

  [[nodiscard]] int rank() const { return static_cast<int>(basis.cols()); }
  /// I - U U^H.
  [[nodiscard]] CMatrix noise_projector() const;
};

/// (1/T) sum y y^H over the columns of `snapshots`.
CMatrix sample_covariance(const CMatrix& snapshots);

/// G with G R G^H = I for a Hermitian positive-definite noise covariance R
/// (inverse lower Cholesky factor). MUSIC's noise subspace is only unbiased
/// for white noise, and W_RX^H P_RX^H gives every RF chain its own gain.
CMatrix whitening_matrix(const CMatrix& noise_cov);

/// Top-k eigenpairs of a Hermitian covariance.
SubspaceState music_init(const CMatrix& covariance, int k, double forget = 0.98,
                         int reorth_period = 50);

/// Modified Gram-Schmidt on the basis columns; eigenvalues untouched.
SubspaceState reorthonormalize(SubspaceState state);

/// One PASTd deflation sweep for snapshot y. Every reorth_period snapshots
/// the basis is re-orthonormalized.
SubspaceState pastd_update(const SubspaceState& state, const CVector& y,
                           Diagnostics* diag = nullptr);

using SteeringFn = std::function<CVector(double r, double theta, double phi)>;

struct SpectrumGrid {
  std::vector<double> r_axis;
  std::vector<double> theta_axis;
  Eigen::MatrixXd values;  // r x theta
  double phi_fixed = kPi / 2.0;
};

/// 1 / ||(I - U U^H) b||^2 over the grid, b the normalized steering vector.
SpectrumGrid music_spectrum(const SubspaceState& state, const std::vector<double>& r_axis,
                            const std::vector<double>& theta_axis, double phi_fixed,
                            const SteeringFn& steering, Diagnostics* diag = nullptr);

struct PeakEstimate {
  double r = 0.0;
  double theta = 0.0;
  double value = 0.0;
  int r_index = 0;
  int theta_index = 0;
};

/// The k highest 8-neighbourhood local maxima, each refined by one
/// log-domain parabolic step per axis. Missing peaks are padded from the
/// global ranking.
std::vector<PeakEstimate> peak_pick(const SpectrumGrid& spectrum, int k,
                                    Diagnostics* diag = nullptr);

struct SearchGrid {
  double r_min = 1.0;
  double r_max = 20.0;
  double theta_min = 0.0;
  double theta_max = kPi / 2.0;
  int coarse_r = 64;
  int coarse_theta = 64;
  int refine = 16;
  double ridge_halfwidth = 2.0;  // theta search half-width around a peak, in coarse cells
  double phi = kPi / 2.0;
};

/// Normalized steering vectors for the coarse grid, reused across refreshes.
struct SteeringTable {
  std::vector<double> r_axis;
  std::vector<double> theta_axis;
  double phi = kPi / 2.0;
  CMatrix vectors;  // N_RF x (r * theta), r-major; zero columns mark degenerate points
};

std::vector<double> coarse_r_axis(const SearchGrid& grid);
std::vector<double> coarse_theta_axis(const SearchGrid& grid);

SteeringTable make_steering_table(const SearchGrid& grid, const SteeringFn& steering,
                                  Diagnostics* diag = nullptr);

SpectrumGrid music_spectrum(const SubspaceState& state, const SteeringTable& table);

/// Coarse MUSIC scan and k peaks, then a ridge search per peak: the null
/// residual is minimized over theta (within ridge_halfwidth coarse cells) at
/// every coarse range, and the best range is polished within one coarse cell.
/// `coarse` must match `grid` when given; it only replaces the coarse scan.
std::vector<SphericalState> locate_targets(const SubspaceState& state, const SearchGrid& grid,
                                           int k, const SteeringFn& steering,
                                           Diagnostics* diag = nullptr,
                                           const SteeringTable* coarse = nullptr);

/// Diagonal of one refined grid cell, in meters, at the given range.
double refined_cell_diagonal(const SearchGrid& grid, double r);

struct TrackEstimate {
  SphericalState estimate;
  int truth_index = -1;  // -1 when no estimate was available for a truth
  double position_error = 0.0;
};

struct AssociationResult {
  std::vector<TrackEstimate> tracks;       // one per truth, in truth order
  double rmse = 0.0;
};

/// Greedy nearest-neighbour association in Cartesian space. Truths left
/// without an estimate get `miss_penalty` as their error.
AssociationResult associate_and_rmse(const std::vector<SphericalState>& estimates,
                                     const std::vector<SphericalState>& truths,
                                     double miss_penalty = 40.0);

/// RMSE over the tracks whose truth is selected by `mask`.
double rmse_over(const AssociationResult& assoc, const std::vector<bool>& mask);

/// Mean cosine of the principal angles between two subspaces.
double subspace_affinity(const CMatrix& a, const CMatrix& b);

}  // namespace fdjcas
