#include "matterwave/interferometer.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace matterwave {

namespace {

constexpr double quarter_turn = 0.78539816339744830962;  // pi/4
constexpr double half_turn = 1.57079632679489661923;     // pi/2

operator_expr fluct_part(const operator_expr& x) {
  operator_expr y = x;
  y.mean = cplx{};
  return y;
}

kernel_params step_params(const sequence_spec& s, int step) {
  kernel_params p;
  p.chi = s.coupling;
  p.a_c_amp = s.light_amplitude;
  p.a_p_amp = s.light_amplitude;
  p.phi_c = s.pulse_phases[step];
  p.phi_p = 0.0;
  p.duration = s.duration(step);
  p.signal_phase = s.signal_phases[step];
  return p;
}

struct chain_links {
  std::vector<const kernel_record*> step1, step2a, step2b, step3;
};

void add_back_action(kernel_record& down, const std::vector<const kernel_record*>& ups) {
  for (const kernel_record* up : ups) {
    const auto d = apply_back_action(down, *up);
    down.out[0] = combine({{cplx{1.0, 0.0}, down.out[0]}, {cplx{1.0, 0.0}, d[0]}});
    down.out[1] = combine({{cplx{1.0, 0.0}, down.out[1]}, {cplx{1.0, 0.0}, d[1]}});
  }
}

// one full sequence; shared_controls reuses pre-registered control channels and
// links lists the upstream records whose control reuse acts on each step
interferometer_output run_chain(const sequence_spec& spec, mode_registry& reg,
                                const std::string& prefix,
                                const std::array<mode_id, 3>* shared_controls,
                                const chain_links& links) {
  spec.validate();

  interferometer_output out;
  out.initial_amplitude = spec.initial_amplitude;
  out.interrogation_time = spec.interrogation_time();

  out.atom_a_in = reg.register_mode(prefix + "atom_a_in", mode_kind::discrete_atom,
                                    cplx{spec.initial_amplitude, 0.0});
  out.atom_b_in = reg.register_mode(prefix + "atom_b_in", mode_kind::discrete_atom);
  // open ports of the two parallel mirror kernels (vacuum at entry)
  out.atom_a_mid = reg.register_mode(prefix + "atom_a_mid", mode_kind::discrete_atom);
  out.atom_b_mid = reg.register_mode(prefix + "atom_b_mid", mode_kind::discrete_atom);

  auto control_id = [&](int k, const char* label) {
    if (shared_controls) return (*shared_controls)[k];
    return reg.register_mode(prefix + label, mode_kind::filtered_optical);
  };

  // step 1: splitter
  const kernel_params p1 = step_params(spec, 0);
  const mode_id c1 = control_id(0, "control_1");
  const mode_id q1 = reg.register_mode(prefix + "passive_1", mode_kind::filtered_optical);
  kernel_record r1 = evolve_fluctuations(p1, make_operator(reg, out.atom_a_in),
                                         make_operator(reg, out.atom_b_in), c1, q1, reg);
  add_back_action(r1, links.step1);

  // step 2: parallel mirror kernels, one per arm, sharing one control field
  const kernel_params p2 = step_params(spec, 1);
  const mode_id c2 = control_id(1, "control_2");
  const mode_id q2a = reg.register_mode(prefix + "passive_2a", mode_kind::filtered_optical);
  const mode_id q2b = reg.register_mode(prefix + "passive_2b", mode_kind::filtered_optical);
  kernel_record r2a = evolve_fluctuations(p2, r1.out[0], make_operator(reg, out.atom_b_mid),
                                          c2, q2a, reg);
  add_back_action(r2a, links.step2a);
  kernel_record r2b = evolve_fluctuations(p2, make_operator(reg, out.atom_a_mid), r1.out[1],
                                          c2, q2b, reg);
  add_back_action(r2b, links.step2b);
  add_back_action(r2b, {&r2a});  // control reuse within the step

  // step 3: recombiner takes the occupied arm of each mirror kernel
  const kernel_params p3 = step_params(spec, 2);
  const mode_id c3 = control_id(2, "control_3");
  const mode_id q3 = reg.register_mode(prefix + "passive_3", mode_kind::filtered_optical);
  kernel_record r3 = evolve_fluctuations(p3, r2b.out[0], r2a.out[1], c3, q3, reg);
  add_back_action(r3, links.step3);

  // detector convention references port B with opposite sign; records keep the
  // raw kernel exits, the readout quantities below carry the sign
  out.mean_out = {r3.mean_out[0], -r3.mean_out[1]};
  out.mean_number = {std::norm(out.mean_out[0]), std::norm(out.mean_out[1])};

  // signal transfer: per-step unit field shifts composed through the rest of
  // the sequence; step 2 sources enter through both mirror kernels
  const mat2 m2 = transfer_matrix(p2.theta(), p2.phi());
  const mat2 m3 = transfer_matrix(p3.theta(), p3.phi());
  const auto u1 = signal_unit_shift(p1, r1.mean_in);
  const auto u2a = signal_unit_shift(p2, r2a.mean_in);
  const auto u2b = signal_unit_shift(p2, r2b.mean_in);
  const auto u3 = signal_unit_shift(p3, r3.mean_in);
  auto through_step3 = [&](const std::array<cplx, 2>& v) -> std::array<cplx, 2> {
    const auto w = m3.apply(v);
    return {w[0], -w[1]};
  };
  {
    const auto va = m2.apply({u1[0], cplx{}});
    const auto vb = m2.apply({cplx{}, u1[1]});
    out.signal_fields[0] = through_step3({vb[0], va[1]});
  }
  out.signal_fields[1] = through_step3({u2b[0], u2a[1]});
  out.signal_fields[2] = {u3[0], -u3[1]};
  for (int j = 0; j < 3; ++j) {
    out.signal_weights[j] =
        2.0 * std::real(std::conj(out.mean_out[0]) * out.signal_fields[j][0]) -
        2.0 * std::real(std::conj(out.mean_out[1]) * out.signal_fields[j][1]);
  }
  const double a2 = spec.initial_amplitude * spec.initial_amplitude;
  out.signal_coefficient = -a2;
  out.delta_n_signal = out.signal_coefficient *
                       ((spec.signal_phases[0] + spec.signal_phases[2]) -
                        2.0 * spec.signal_phases[1]);

  // particle-number difference, linearized about the mean field
  const operator_expr f_a = fluct_part(r3.out[0]);
  const operator_expr f_b = combine({{cplx{-1.0, 0.0}, fluct_part(r3.out[1])}});
  const operator_expr half = combine(
      {{std::conj(out.mean_out[0]), f_a}, {-std::conj(out.mean_out[1]), f_b}});
  out.delta_n = combine({{cplx{1.0, 0.0}, half}, {cplx{1.0, 0.0}, dagger(half)}});
  out.delta_n.mean = cplx{};
  out.variance = vacuum_variance(out.delta_n);

  out.noise.atom_shot =
      vacuum_variance(restrict_to_modes(out.delta_n, {out.atom_a_in, out.atom_b_in}));
  out.noise.back_action =
      vacuum_variance(restrict_to_modes(out.delta_n, {out.atom_a_mid, out.atom_b_mid}));
  out.noise.optical = vacuum_variance(restrict_to_channels(out.delta_n));
  std::vector<mode_id> companion;
  for (const auto& [id, c] : out.delta_n.discrete) {
    if (id == out.atom_a_in || id == out.atom_b_in || id == out.atom_a_mid ||
        id == out.atom_b_mid)
      continue;
    companion.push_back(id);
  }
  out.noise.from_companion = vacuum_variance(restrict_to_modes(out.delta_n, companion));

  out.records = {r1, r2a, r2b, r3};
  out.control = {c1, c2, c3};
  out.passive = {q1, q2a, q2b, q3};
  return out;
}

}  // namespace

sequence_spec sequence_spec::from_rates(double omega, double chi_a, double abar,
                                        std::array<double, 3> signal_phases) {
  if (omega <= 0.0 || chi_a <= 0.0)
    throw std::invalid_argument("sequence_spec: rates must be > 0");
  sequence_spec s;
  s.coupling = chi_a * chi_a / omega;
  s.light_amplitude = omega / chi_a;
  s.initial_amplitude = abar;
  s.signal_phases = signal_phases;
  return s;
}

void sequence_spec::validate() const {
  if (coupling <= 0.0 || light_amplitude <= 0.0)
    throw std::invalid_argument("sequence_spec: coupling and light amplitude must be > 0");
  if (initial_amplitude < 0.0)
    throw std::invalid_argument("sequence_spec: initial amplitude must be >= 0");
  const double tol = 1e-12;
  const bool canonical = std::abs(mixing_angles[0] - quarter_turn) <= tol &&
                         std::abs(mixing_angles[1] - half_turn) <= tol &&
                         std::abs(mixing_angles[2] - quarter_turn) <= tol &&
                         std::abs(pulse_phases[0]) <= tol && std::abs(pulse_phases[1]) <= tol &&
                         std::abs(pulse_phases[2] - half_turn) <= tol;
  if (!canonical)
    throw std::invalid_argument(
        "sequence_spec: only the canonical quarter/half/quarter sequence with final pulse "
        "phase pi/2 is supported");
}

interferometer_output run_sequence(const sequence_spec& spec, mode_registry& reg,
                                   const std::string& label_prefix) {
  return run_chain(spec, reg, label_prefix, nullptr, chain_links{});
}

estimator_result estimator(const interferometer_output& out) {
  if (out.initial_amplitude <= 0.0 || out.signal_coefficient == 0.0)
    throw std::invalid_argument("estimator: zero initial amplitude");
  estimator_result r;
  r.estimate = out.delta_n_signal / out.signal_coefficient;
  const double a2 = out.initial_amplitude * out.initial_amplitude;
  r.sigma2_s = out.variance / (a2 * a2);
  r.interrogation_time = out.interrogation_time;
  return r;
}

pair_output run_pair(const sequence_spec& first, const sequence_spec& second,
                     mode_registry& reg, bool severed_control_link) {
  first.validate();
  second.validate();
  if (!severed_control_link &&
      (first.coupling != second.coupling || first.light_amplitude != second.light_amplitude))
    throw std::invalid_argument(
        "run_pair: shared control fields require identical coupling and light amplitude");

  pair_output po;
  po.first = run_chain(first, reg, "first.", nullptr, chain_links{});
  if (severed_control_link) {
    po.second = run_chain(second, reg, "second.", nullptr, chain_links{});
  } else {
    chain_links links;
    links.step1 = {&po.first.records[0]};
    links.step2a = {&po.first.records[1], &po.first.records[2]};
    links.step2b = {&po.first.records[1], &po.first.records[2]};
    links.step3 = {&po.first.records[3]};
    po.second = run_chain(second, reg, "second.", &po.first.control, links);
  }
  po.covariance = covariance(po.first.delta_n, po.second.delta_n).real();
  po.differential_signal = po.first.delta_n_signal - po.second.delta_n_signal;
  po.differential_variance =
      po.first.variance + po.second.variance - 2.0 * po.covariance;
  return po;
}

double gw_phase_response(const gw_params& g) {
  if (g.omega == 0.0) return 0.0;
  const double half = std::sin(0.5 * g.omega * g.interrogation_time);
  return g.wavenumber * g.strain * g.baseline * half * half *
         (std::sin(g.omega * g.baseline / g.speed_of_light) / g.omega) *
         std::sin(g.omega * g.eval_time);
}

}  // namespace matterwave
