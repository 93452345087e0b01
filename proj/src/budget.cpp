#include "matterwave/budget.hpp"

#include <cmath>
#include <stdexcept>

namespace matterwave {

void lab_params::validate() const {
  if (detuning == 0.0)
    throw std::invalid_argument("lab_params: zero detuning, two-photon reduction invalid");
  const bool positive = pulse_length > 0.0 && photon_number > 0.0 && atom_number > 0.0 &&
                        omega_laser > 0.0 && omega_atom > 0.0 && g13 > 0.0 && g23 > 0.0 &&
                        detuning > 0.0 && omega30 > 0.0 && beam_area > 0.0;
  if (!positive) throw std::invalid_argument("lab_params: all fields must be positive");
}

derived_constants map_params(const lab_params& lab) {
  lab.validate();
  derived_constants d;
  d.g_eff = lab.g13 * lab.g23 / (lab.detuning * lab.omega30);
  d.chi_effective = -d.g_eff / (2.0 * lab.omega_laser);
  d.light_amplitude = std::sqrt(lab.photon_number * speed_of_light_si / lab.pulse_length);
  d.tau = lab.pulse_length / speed_of_light_si;
  const double chi_mag = std::abs(d.chi_effective);
  d.rabi_rate = chi_mag * d.light_amplitude * d.light_amplitude;
  d.chi_a = chi_mag * d.light_amplitude;
  d.pulse_area = d.rabi_rate * d.tau;
  d.validity_warning = lab.atom_number >= lab.photon_number / 10.0;

  d.kernel.chi = chi_mag;
  d.kernel.a_c_amp = d.light_amplitude;
  d.kernel.a_p_amp = d.light_amplitude;
  d.kernel.duration = d.tau;
  return d;
}

noise_budget error_budget(double atom_number, double photon_number, double k) {
  if (atom_number <= 0.0 || photon_number <= 0.0 || k <= 0.0)
    throw std::invalid_argument("error_budget: inputs must be positive");
  noise_budget b;
  b.back_action = (atom_number / (photon_number * photon_number)) * k * k;
  b.atom_shot = 2.0 / atom_number;
  b.optical = 1.0 / photon_number;
  b.total = b.back_action + b.atom_shot + b.optical;
  b.atom_number_optimum = std::sqrt(2.0) * photon_number / k;
  b.sql_value = 1.0 / photon_number;
  b.validity_warning = atom_number >= photon_number / 10.0;
  return b;
}

budget_optimum optimize_atom_number(double photon_number, double k) {
  if (photon_number <= 0.0 || k <= 0.0)
    throw std::invalid_argument("optimize_atom_number: inputs must be positive");
  budget_optimum o;
  o.atom_number = std::sqrt(2.0) * photon_number / k;
  const noise_budget at = error_budget(o.atom_number, photon_number, k);
  o.sigma2_min = at.total;
  o.ratio_to_sql = o.sigma2_min * photon_number;
  return o;
}

}  // namespace matterwave
