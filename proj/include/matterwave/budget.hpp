#pragma once
// laboratory-to-model parameter mapping, error-scaling budget, and the
// back-action/shot-noise optimum (the photon-shot-noise floor).

#include "matterwave/kernel.hpp"

namespace matterwave {

inline constexpr double speed_of_light_si = 299792458.0;  // m/s

struct lab_params {
  double pulse_length = 0.0;   // l_a, meters
  double photon_number = 0.0;  // N_L per pulse
  double atom_number = 0.0;    // N_a
  double omega_laser = 0.0;    // laser angular frequency, rad/s
  double omega_atom = 0.0;     // atomic transition angular frequency, rad/s
  double g13 = 0.0, g23 = 0.0; // dipole couplings of the two legs
  double detuning = 0.0;       // single-photon detuning of the upper level, rad/s
  double omega30 = 0.0;        // upper-level frequency, rad/s
  double beam_area = 0.0;      // m^2
  // all fields must be > 0; zero detuning invalidates the two-photon reduction
  void validate() const;
};

struct derived_constants {
  double g_eff = 0.0;           // g13 g23 / (detuning * omega30)
  double chi_effective = 0.0;   // signed two-photon rate, -g_eff / (2 omega_laser)
  double light_amplitude = 0.0; // a_L = sqrt(N_L c / l_a)
  double tau = 0.0;             // pulse duration l_a / c
  double rabi_rate = 0.0;       // Omega = |chi| a_L^2
  double chi_a = 0.0;           // atom-side coupling |chi| a_L
  double pulse_area = 0.0;      // k = Omega l_a / c (equals the mixing angle)
  bool validity_warning = false;  // N_a >= N_L / 10: linearization stretched
  kernel_params kernel;           // ready-to-use balanced kernel parameters
};

// by construction chi_a^2 / Omega = (Omega l_a / c) / N_L holds exactly
derived_constants map_params(const lab_params& lab);

// dimensionless phase-noise scaling estimates
struct noise_budget {
  double back_action = 0.0;  // (N_a / N_L^2) k^2
  double atom_shot = 0.0;    // 2 / N_a
  double optical = 0.0;      // 1 / N_L
  double total = 0.0;        // exact sum of the three parts
  double atom_number_optimum = 0.0;  // sqrt(2) N_L / k
  double sql_value = 0.0;    // 1 / N_L
  bool validity_warning = false;     // N_a >= N_L / 10
};
noise_budget error_budget(double atom_number, double photon_number, double k = 1.0);

struct budget_optimum {
  double atom_number = 0.0;  // continuous minimizer of back_action + atom_shot
  double sigma2_min = 0.0;   // total (including the optical floor) at the optimum
  double ratio_to_sql = 0.0; // sigma2_min / (1 / N_L)
};
budget_optimum optimize_atom_number(double photon_number, double k = 1.0);

}  // namespace matterwave
