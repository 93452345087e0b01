#pragma once
// three-step Mach-Zehnder composition of interaction kernels: splitter,
// parallel mirror kernels on the two arms (sharing one control field), and
// recombiner.  produces the particle-number-difference readout, its linear
// signal transfer, and the noise decomposition, for one interferometer or a
// control-linked pair.

#include <array>
#include <string>

#include "matterwave/kernel.hpp"

namespace matterwave {

struct sequence_spec {
  double coupling = 0.0;           // two-photon rate chi
  double light_amplitude = 0.0;    // balanced field amplitude a_L
  double initial_amplitude = 0.0;  // entry mean amplitude in port A
  std::array<double, 3> signal_phases{0.0, 0.0, 0.0};
  // canonical Mach-Zehnder: quarter, half, quarter mixing with the final
  // pulse phase offset by pi/2
  std::array<double, 3> mixing_angles{0.78539816339744830962, 1.57079632679489661923,
                                      0.78539816339744830962};
  std::array<double, 3> pulse_phases{0.0, 0.0, 1.57079632679489661923};

  double omega() const { return coupling * light_amplitude * light_amplitude; }
  double chi_a() const { return coupling * light_amplitude; }
  double duration(int step) const { return mixing_angles[step] / omega(); }
  double interrogation_time() const {
    return (mixing_angles[0] + mixing_angles[1] + mixing_angles[2]) / omega();
  }
  // model-unit constructor from (Rabi rate, atom-side coupling, amplitude)
  static sequence_spec from_rates(double omega, double chi_a, double abar,
                                  std::array<double, 3> signal_phases = {0.0, 0.0, 0.0});
  void validate() const;  // non-canonical angles/phases -> invalid_argument
};

struct noise_decomposition {
  double atom_shot = 0.0;       // entry-port atom fluctuations
  double back_action = 0.0;     // mid-sequence open-port atom fluctuations
  double optical = 0.0;         // filtered optical channels
  double from_companion = 0.0;  // other interferometer's atom modes (pair runs)
  double total() const { return atom_shot + back_action + optical + from_companion; }
};

struct interferometer_output {
  double initial_amplitude = 0.0;
  std::array<cplx, 2> mean_out{};
  std::array<double, 2> mean_number{};
  double signal_coefficient = 0.0;          // weight on (phi_s1 - 2 phi_s2 + phi_s3)
  std::array<double, 3> signal_weights{};   // per-phase weights composed step by step
  std::array<std::array<cplx, 2>, 3> signal_fields{};  // per-phase exit field shifts
  double delta_n_signal = 0.0;
  operator_expr delta_n;                    // hermitian fluctuation expression, mean 0
  double variance = 0.0;
  noise_decomposition noise;
  std::array<kernel_record, 4> records;     // steps 1, 2a, 2b, 3 (post back-action)
  mode_id atom_a_in{}, atom_b_in{}, atom_a_mid{}, atom_b_mid{};
  std::array<mode_id, 3> control{};
  std::array<mode_id, 4> passive{};
  double interrogation_time = 0.0;
};

// runs one canonical sequence; registers its modes in reg with label_prefix
interferometer_output run_sequence(const sequence_spec& spec, mode_registry& reg,
                                   const std::string& label_prefix = "");

struct estimator_result {
  double estimate = 0.0;       // noiseless estimate of phi_s1 - 2 phi_s2 + phi_s3
  double sigma2_s = 0.0;       // phase-equivalent noise variance
  double interrogation_time = 0.0;
};
// zero amplitude or zero signal coefficient -> invalid_argument
estimator_result estimator(const interferometer_output& out);

struct pair_output {
  interferometer_output first, second;
  double covariance = 0.0;
  double differential_signal = 0.0;
  double differential_variance = 0.0;  // var_first + var_second - 2 cov
};

// two sequences sharing control fields; the second also receives back-action
// from the first through each shared channel.  severed_control_link gives the
// second interferometer fresh channels and no cross links (reference case).
pair_output run_pair(const sequence_spec& first, const sequence_spec& second,
                     mode_registry& reg, bool severed_control_link = false);

struct gw_params {
  double omega = 0.0;               // signal angular frequency, rad/s
  double strain = 0.0;              // h
  double baseline = 0.0;            // L
  double interrogation_time = 0.0;  // T
  double wavenumber = 0.0;          // k
  double eval_time = 0.0;           // t
  double speed_of_light = 1.0;      // set to SI c when lengths are in meters
};
// phase signature k h L sin^2(wT/2) (sin(wL/c)/w) sin(wt); 0 at w = 0
double gw_phase_response(const gw_params& g);

}  // namespace matterwave
