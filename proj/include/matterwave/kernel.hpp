#pragma once
// a single atom-light interaction kernel: two-port Rabi mixing of the (A, B)
// atom fields driven by balanced control/passive optical channels, with
// linearized fluctuation transport, optical noise injection, signal-phase
// source, input-output optics, and control-reuse back-action.

#include <array>

#include "matterwave/mode_algebra.hpp"

namespace matterwave {

struct mat2 {
  cplx m00{}, m01{}, m10{}, m11{};

  std::array<cplx, 2> apply(const std::array<cplx, 2>& v) const {
    return {m00 * v[0] + m01 * v[1], m10 * v[0] + m11 * v[1]};
  }
  mat2 mul(const mat2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }
  mat2 adjoint() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }
};

struct kernel_params {
  double chi = 0.0;           // two-photon coupling rate per amplitude pair
  double a_c_amp = 0.0;       // control field amplitude |a_c| (real, >= 0)
  double a_p_amp = 0.0;       // passive field amplitude |a_p|
  double phi_c = 0.0;         // control field phase
  double phi_p = 0.0;         // passive field phase
  double duration = 0.0;      // kernel duration tau (local time window [0, tau])
  double signal_phase = 0.0;  // linear signal source strength

  double omega() const { return chi * a_c_amp * a_p_amp; }  // Rabi rate, >= 0
  double phi() const { return phi_c - phi_p; }
  double theta() const { return omega() * duration; }
  bool balanced() const { return a_c_amp == a_p_amp; }
  double chi_a() const { return chi * a_c_amp; }  // atom-side noise coupling
  void validate() const;  // negative values -> invalid_argument
};

// two-port mixing matrix: diag cos(theta), off-diagonal -i sin(theta) e^{+-i phi}
mat2 transfer_matrix(double theta, double phi);
// maps the (plus, minus) normal-mode pair to the (A, B) species pair;
// its adjoint inverts.  T(0) (1,1)^T = (sqrt(2), 0)^T.
mat2 basis_change(double phi);

// zeroth-order mean evolution at time t within the kernel; t outside [0, tau]
// -> invalid_argument
std::array<cplx, 2> rabi_mean(const kernel_params& p, const std::array<cplx, 2>& mean_in,
                              double t);

// exit-field shift per unit signal phase, linear in the entry mean
std::array<cplx, 2> signal_unit_shift(const kernel_params& p,
                                      const std::array<cplx, 2>& mean_in);

struct kernel_record {
  kernel_params params;
  mode_id chan_c{}, chan_p{};
  double t_start = 0.0, t_end = 0.0;
  std::array<cplx, 2> mean_in{}, mean_out{};
  std::array<exp_sum, 2> mean_traj;      // A/B mean trajectories over local time
  std::array<cplx, 2> signal_shift{};    // this kernel's own exit shift, linear in phi_s
  std::array<operator_expr, 2> atom_in;  // discrete-mode part of the entry fluctuations
  std::array<operator_expr, 2> out;      // exit expressions; mean = zeroth-order mean_out
  // pure optical injections in the normal-mode basis (rows: plus, minus)
  std::array<operator_expr, 2> inj_common;        // from the common amplitude quadrature
  std::array<operator_expr, 2> inj_differential;  // from the differential phase quadrature
};

// propagates means and fluctuations through one balanced kernel.
// unbalanced params -> invalid_argument (use force_decomposition for the
// dynamical-force path); channel ids must be distinct filtered channels.
kernel_record evolve_fluctuations(const kernel_params& p, const operator_expr& in_A,
                                  const operator_expr& in_B, mode_id chan_c, mode_id chan_p,
                                  const mode_registry& reg);

struct force_terms {
  std::array<operator_expr, 2> flu;  // optical vacuum (Langevin) force densities
  std::array<cplx, 2> cl;            // mean-field force; carries |a_p|^2 - |a_c|^2
  std::array<operator_expr, 2> dy;   // Rabi-modifying force; same common factor
};

force_terms force_decomposition(const kernel_params& p, const std::array<cplx, 2>& mean,
                                const operator_expr& fluct_A, const operator_expr& fluct_B,
                                mode_id chan_c, mode_id chan_p, const mode_registry& reg);

struct optical_output {
  operator_expr control_out;
  operator_expr passive_out;
  // relative size of the neglected pure-optical scattering term
  double dropped_term_ratio = 0.0;
};

// input-output relation for the light leaving the kernel, represented on the
// duration-averaged channel mode; atom-content terms use the mean trajectory
// and the discrete-mode lineage of the record
optical_output output_optical(const kernel_record& rec, const mode_registry& reg);

// correction to the downstream kernel's exit fluctuations from reuse of the
// control field that already passed the upstream kernel.  requires the shared
// control channel and matching Rabi rate/duration; mismatch -> invalid_argument
std::array<operator_expr, 2> apply_back_action(const kernel_record& downstream,
                                               const kernel_record& upstream);

}  // namespace matterwave
