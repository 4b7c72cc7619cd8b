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

#include "fdjcas/txdesign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace fdjcas {

std::vector<double> linspace(double first, double last, int count) {
  if (count < 1) throw ConfigError("linspace: count must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = first;
    return v;
  }
  const double step = (last - first) / static_cast<double>(count - 1);
  for (int k = 0; k < count; ++k) v[k] = first + step * static_cast<double>(k);
  v.back() = last;
  return v;
}

BeamCodebook build_codebook(const ArrayLayout& layout_tx, const PropagationParams& params,
                            int bits, const std::vector<double>& r_grid,
                            const std::vector<double>& theta_grid, double phi) {
  if (bits < 0 || bits > 20) throw ConfigError("build_codebook: bits out of range");
  const std::size_t expected = std::size_t{1} << bits;
  if (r_grid.size() * theta_grid.size() != expected) {
    throw ConfigError("build_codebook: grid has " +
                      std::to_string(r_grid.size() * theta_grid.size()) +
                      " focus points, expected 2^" + std::to_string(bits));
  }
  const ArrayLayout tx = layout_tx.with_side(PanelSide::kTx);
  BeamCodebook cb;
  cb.bits = bits;
  cb.phi = phi;
  cb.entries.resize(tx.total(), static_cast<Eigen::Index>(expected));
  Eigen::Index col = 0;
  for (double r : r_grid) {
    for (double theta : theta_grid) {
      const SphericalState focus{r, theta, phi};
      for (int i = 0; i < tx.n_rf; ++i) {
        for (int n = 0; n < tx.n_e; ++n) {
          const double dist = exact_distance_target(focus, i, n, tx);
          cb.entries(tx.flat_index(i, n), col) = std::polar(1.0, -2.0 * kPi * dist / params.lambda);
        }
      }
      cb.focus_points.emplace_back(r, theta);
      ++col;
    }
  }
  return cb;
}

BeamCodebook build_codebook(const ArrayLayout& layout_tx, const PropagationParams& params,
                            int bits, double r_min, double r_max, double theta_min,
                            double theta_max, double phi) {
  const int r_bits = (bits + 1) / 2;
  const int theta_bits = bits - r_bits;
  return build_codebook(layout_tx, params, bits, linspace(r_min, r_max, 1 << r_bits),
                        linspace(theta_min, theta_max, 1 << theta_bits), phi);
}

CMatrix place_codeword(const CVector& codeword, const ArrayLayout& layout) {
  if (codeword.size() != layout.total()) {
    throw ConfigError("place_codeword: codeword length does not match the panel");
  }
  CMatrix w = CMatrix::Zero(layout.total(), layout.n_rf);
  for (int i = 0; i < layout.n_rf; ++i) {
    w.block(i * layout.n_e, i, layout.n_e, 1) = codeword.segment(i * layout.n_e, layout.n_e);
  }
  return w;
}

RVector op1_objectives(const CMatrix& h_r_est, const BeamCodebook& codebook,
                       const ArrayLayout& layout) {
  if (codebook.size() == 0) throw ConfigError("op1_search: empty codebook");
  if (h_r_est.cols() != layout.total() || codebook.entries.rows() != layout.total()) {
    throw ConfigError("op1_search: channel/codebook dimensions do not match the panel");
  }
  RVector obj = RVector::Zero(codebook.size());
  const int ne = layout.n_e;
  for (int j = 0; j < layout.n_rf; ++j) {
    const auto block = h_r_est.middleCols(j * ne, ne);
    const CMatrix gram = block.adjoint() * block;
    const auto w = codebook.entries.middleRows(j * ne, ne);
    const CMatrix gw = gram * w;
    obj += (w.conjugate().cwiseProduct(gw)).colwise().sum().real().transpose();
  }
  return obj;
}

Op1Result op1_search(const ChannelMatrix& h_r_est, const BeamCodebook& codebook,
                     const ArrayLayout& layout) {
  const RVector obj = op1_objectives(h_r_est.entries, codebook, layout);
  Op1Result best;
  best.objective = obj(0);
  for (Eigen::Index e = 1; e < obj.size(); ++e) {
    if (obj(e) > best.objective) {
      best.objective = obj(e);
      best.index = static_cast<int>(e);
    }
  }
  best.w_tilde = place_codeword(codebook.entries.col(best.index), layout);
  return best;
}

AnalogBfMatrix finalize_tx_weights(const CMatrix& w_tilde,
                                   const std::vector<MicrostripParams>& strips,
                                   const ArrayLayout& layout) {
  if (static_cast<int>(strips.size()) != layout.n_rf) {
    throw ConfigError("finalize_tx_weights: microstrip count mismatch");
  }
  CMatrix grid(layout.n_rf, layout.n_e);
  for (int i = 0; i < layout.n_rf; ++i) {
    const auto& s = strips[static_cast<std::size_t>(i)];
    for (int n = 0; n < layout.n_e; ++n) {
      grid(i, n) = map_unconstrained(w_tilde(layout.flat_index(i, n), i), s.rho[n], s.beta).value;
    }
  }
  return assemble_analog(grid, BeamRole::kTx);
}

void PowerBudget::validate() const {
  if (!(p_max > 0.0) || !(gamma > 0.0) || !(sigma_sq_rx > 0.0)) {
    throw ConfigError("PowerBudget: p_max, gamma and sigma_sq_rx must be positive");
  }
  for (double s : sigma_sq_ue) {
    if (!(s > 0.0)) throw ConfigError("PowerBudget: UE noise variances must be positive");
  }
}

CMatrix zf_precoder(const CMatrix& h_eff, int streams_per_ue, const PropagationMatrix& p_tx,
                    const AnalogBfMatrix& w_tx, double p_max) {
  const Eigen::Index streams = h_eff.rows();
  if (streams == 0 || streams_per_ue < 1) throw ConfigError("zf_precoder: no streams");
  if (streams > h_eff.cols()) {
    throw ConfigError("zf_precoder: U*L = " + std::to_string(streams) + " exceeds N_RF = " +
                      std::to_string(h_eff.cols()));
  }
  Eigen::ColPivHouseholderQR<CMatrix> qr(h_eff.adjoint());
  qr.setThreshold(1e-12);
  if (qr.rank() < streams) {
    std::set<int> ues;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < streams; ++k) ues.insert(perm(k) / streams_per_ue);
    std::ostringstream msg;
    msg << "zf_precoder: effective channel is rank deficient; dependent streams of UE(s)";
    for (int u : ues) msg << ' ' << u;
    throw SingularChannelError(msg.str(), std::vector<int>(ues.begin(), ues.end()));
  }
  const CMatrix gram = h_eff * h_eff.adjoint();
  const CMatrix v0 = h_eff.adjoint() * gram.ldlt().solve(CMatrix::Identity(streams, streams));
  const double radiated = (p_tx * (w_tx.entries * v0)).squaredNorm();
  if (!(radiated > 0.0)) throw NumericalError("zf_precoder: precoder radiates no power");
  return v0 * std::sqrt(p_max / radiated);
}

CMatrix rx_combiner(const PropagationMatrix& p_rx, const AnalogBfMatrix& w_rx) {
  return w_rx.entries.adjoint() * p_rx.diagonal().conjugate().asDiagonal();
}

CMatrix analog_si_map(const CMatrix& h_si, const PropagationMatrix& p_rx,
                      const AnalogBfMatrix& w_rx, const PropagationMatrix& p_tx,
                      const AnalogBfMatrix& w_tx) {
  const CMatrix front = rx_combiner(p_rx, w_rx) * h_si * p_tx;
  return front * w_tx.entries;
}

CMatrix digital_canceller(const CMatrix& h_si_est, const PropagationMatrix& p_rx,
                          const AnalogBfMatrix& w_rx, const PropagationMatrix& p_tx,
                          const AnalogBfMatrix& w_tx) {
  return -analog_si_map(h_si_est, p_rx, w_rx, p_tx, w_tx);
}

SiCheck si_constraint_check(const CMatrix& si_map, const CMatrix& v, double gamma) {
  const CMatrix term = si_map * v;
  SiCheck check;
  for (Eigen::Index i = 0; i < term.rows(); ++i) {
    const double p = term.row(i).squaredNorm();
    check.residual_per_strip.push_back(p);
    check.strip_pass.push_back(p <= gamma);
    check.pass = check.pass && p <= gamma;
  }
  return check;
}

SiCheck si_constraint_check(const CMatrix& h_si, const PropagationMatrix& p_rx,
                            const AnalogBfMatrix& w_rx, const PropagationMatrix& p_tx,
                            const AnalogBfMatrix& w_tx, const CMatrix& v, double gamma) {
  return si_constraint_check(analog_si_map(h_si, p_rx, w_rx, p_tx, w_tx), v, gamma);
}

AnalogBfMatrix broad_tx_beam(const ArrayLayout& layout) {
  const CMatrix grid = CMatrix::Constant(layout.n_rf, layout.n_e, lorentzian(0.0).value);
  return assemble_analog(grid, BeamRole::kTx);
}

namespace {

AnalogBfMatrix random_lorentzian(const ArrayLayout& layout, BeamRole role, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(-kPi / 2.0, kPi / 2.0);
  CMatrix grid(layout.n_rf, layout.n_e);
  for (int i = 0; i < layout.n_rf; ++i) {
    for (int n = 0; n < layout.n_e; ++n) grid(i, n) = lorentzian(phase(rng)).value;
  }
  return assemble_analog(grid, role);
}

}  // namespace

AnalogBfMatrix wide_tx_beam(const ArrayLayout& layout, std::mt19937_64& rng) {
  return random_lorentzian(layout, BeamRole::kTx, rng);
}

AnalogBfMatrix wide_rx_combiner(const ArrayLayout& layout, std::mt19937_64& rng) {
  return random_lorentzian(layout, BeamRole::kRx, rng);
}

TxDesign design_tx(const TxDesignProblem& problem, const BeamCodebook& codebook) {
  problem.budget.validate();
  const ArrayLayout& tx = problem.layout_tx;
  const PropagationMatrix p_tx = propagation_matrix(problem.strips_tx, tx);
  const PropagationMatrix p_rx = propagation_matrix(problem.strips_rx, problem.layout_rx);

  const CMatrix h_r_est = reflection_channel(problem.target_estimates, tx, problem.layout_rx,
                                             problem.params, problem.estimate_model)
                              .entries;
  const RVector obj = op1_objectives(h_r_est, codebook, tx);
  std::vector<int> order(static_cast<std::size_t>(obj.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return obj(a) > obj(b); });

  std::vector<CMatrix> h_dl_est;
  int streams_per_ue = 0;
  for (const auto& ue : problem.ue_estimates) {
    h_dl_est.push_back(dl_channel(ue, tx, problem.params, problem.estimate_model).entries);
    streams_per_ue = ue.l_antennas;
  }
  Eigen::Index total_streams = 0;
  for (const auto& h : h_dl_est) total_streams += h.rows();
  CMatrix h_dl_stack(total_streams, tx.total());
  {
    Eigen::Index row = 0;
    for (const auto& h : h_dl_est) {
      h_dl_stack.middleRows(row, h.rows()) = h;
      row += h.rows();
    }
  }
  const CMatrix si_front = rx_combiner(p_rx, problem.w_rx) * problem.h_si_est * p_tx;

  TxDesign best;
  bool have_feasible = false;
  std::string last_error;
  int tried = 0;
  for (int idx : order) {
    ++tried;
    const CMatrix w_tilde = place_codeword(codebook.entries.col(idx), tx);
    AnalogBfMatrix w_tx = finalize_tx_weights(w_tilde, problem.strips_tx, tx);
    const CMatrix h_eff = h_dl_stack * (p_tx * w_tx.entries);
    CMatrix v;
    try {
      v = zf_precoder(h_eff, streams_per_ue, p_tx, w_tx, problem.budget.p_max);
    } catch (const SingularChannelError& e) {
      last_error = e.what();
      continue;
    }
    const CMatrix si_map = si_front * w_tx.entries;
    const SiCheck check = si_constraint_check(si_map, v, problem.budget.gamma);
    if (!have_feasible || check.pass) {
      best.w_tx = std::move(w_tx);
      best.v = v;
      best.d = -si_map;
      best.chosen_codeword = idx;
      best.residual_si_per_strip = check.residual_per_strip;
      best.si_satisfied = check.pass;
      have_feasible = true;
    }
    if (check.pass) break;
  }
  if (!have_feasible) {
    throw SingularChannelError("design_tx: no codeword yields an invertible effective channel (" +
                                   last_error + ")",
                               {});
  }
  best.w_rx = problem.w_rx;
  best.candidates_evaluated = tried;
  best.tx_power = (p_tx * (best.w_tx.entries * best.v)).squaredNorm();
  return best;
}

}  // namespace fdjcas
