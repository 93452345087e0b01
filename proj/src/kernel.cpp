#include "matterwave/kernel.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace matterwave {

namespace {

constexpr cplx kI{0.0, 1.0};

cplx phase(double x) { return std::polar(1.0, x); }

operator_expr fluct_part(const operator_expr& x) {
  operator_expr y = x;
  y.mean = cplx{};
  return y;
}

// per-mode lineage coefficients along a kernel's zeroth-order rotation:
// [A_ann, A_cre, B_ann, B_cre] as exp_sums in local time
struct lineage {
  std::map<mode_id, std::array<exp_sum, 4>> modes;
};

lineage propagate_lineage(const kernel_record& r) {
  const double om = r.params.omega();
  const cplx eip = phase(r.params.phi());
  const cplx eim = phase(-r.params.phi());
  const exp_sum cos_t{{{cplx{0.5, 0.0}, om}, {cplx{0.5, 0.0}, -om}}};
  const exp_sum sin_t{{{cplx{0.0, -0.5}, om}, {cplx{0.0, 0.5}, -om}}};
  const exp_sum sin_ab = es_scale(sin_t, -kI * eip);  // B -> A mixing
  const exp_sum sin_ba = es_scale(sin_t, -kI * eim);  // A -> B mixing

  std::set<mode_id> ids;
  for (const auto& [id, c] : r.atom_in[0].discrete) ids.insert(id);
  for (const auto& [id, c] : r.atom_in[1].discrete) ids.insert(id);

  lineage lin;
  for (mode_id id : ids) {
    discrete_coeff a0, b0;
    if (auto it = r.atom_in[0].discrete.find(id); it != r.atom_in[0].discrete.end())
      a0 = it->second;
    if (auto it = r.atom_in[1].discrete.find(id); it != r.atom_in[1].discrete.end())
      b0 = it->second;
    std::array<exp_sum, 4> c;
    c[0] = es_add(es_scale(cos_t, a0.ann), es_scale(sin_ab, b0.ann));
    c[1] = es_add(es_scale(cos_t, a0.cre), es_scale(sin_ab, b0.cre));
    c[2] = es_add(es_scale(sin_ba, a0.ann), es_scale(cos_t, b0.ann));
    c[3] = es_add(es_scale(sin_ba, a0.cre), es_scale(cos_t, b0.cre));
    lin.modes[id] = c;
  }
  return lin;
}

void check_channels(const mode_registry& reg, mode_id chan_c, mode_id chan_p) {
  if (reg.kind(chan_c) != mode_kind::filtered_optical ||
      reg.kind(chan_p) != mode_kind::filtered_optical)
    throw std::invalid_argument("optical channels must be filtered modes");
  if (chan_c == chan_p)
    throw std::invalid_argument("control and passive channels must be distinct");
}

}  // namespace

void kernel_params::validate() const {
  if (chi < 0.0) throw std::invalid_argument("kernel_params: chi must be >= 0");
  if (a_c_amp < 0.0 || a_p_amp < 0.0)
    throw std::invalid_argument("kernel_params: field amplitudes must be >= 0");
  if (duration < 0.0) throw std::invalid_argument("kernel_params: duration must be >= 0");
}

mat2 transfer_matrix(double theta, double phi) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {cplx{c, 0.0}, -kI * s * phase(phi), -kI * s * phase(-phi), cplx{c, 0.0}};
}

mat2 basis_change(double phi) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx u = phase(phi / 2.0) * r;
  const cplx v = phase(-phi / 2.0) * r;
  return {u, u, v, -v};
}

std::array<cplx, 2> rabi_mean(const kernel_params& p, const std::array<cplx, 2>& mean_in,
                              double t) {
  p.validate();
  if (t < 0.0 || t > p.duration)
    throw std::invalid_argument("rabi_mean: t outside the kernel window [0, tau]");
  return transfer_matrix(p.omega() * t, p.phi()).apply(mean_in);
}

std::array<cplx, 2> signal_unit_shift(const kernel_params& p,
                                      const std::array<cplx, 2>& mean_in) {
  const mat2 T = basis_change(p.phi());
  const auto pm0 = T.adjoint().apply(mean_in);
  const double s = std::sin(p.theta());
  // exit shift -+ mean_{-+}(0) sin(theta) per normal-mode row
  return T.apply({-pm0[1] * s, +pm0[0] * s});
}

kernel_record evolve_fluctuations(const kernel_params& p, const operator_expr& in_A,
                                  const operator_expr& in_B, mode_id chan_c, mode_id chan_p,
                                  const mode_registry& reg) {
  p.validate();
  if (!p.balanced())
    throw std::invalid_argument(
        "evolve_fluctuations: unbalanced fields; use force_decomposition for the "
        "dynamical-force path");
  check_channels(reg, chan_c, chan_p);

  const double om = p.omega();
  const double tau = p.duration;
  const double theta = p.theta();
  const double ph = p.phi();
  const double chi_a = p.chi_a();

  kernel_record rec;
  rec.params = p;
  rec.chan_c = chan_c;
  rec.chan_p = chan_p;
  rec.t_start = 0.0;
  rec.t_end = tau;
  rec.mean_in = {in_A.mean, in_B.mean};

  const mat2 T = basis_change(ph);
  const mat2 Td = T.adjoint();
  const mat2 M = transfer_matrix(theta, ph);
  rec.mean_out = M.apply(rec.mean_in);

  // normal-mode means at entry; plus rotates as e^{-i om t}, minus as e^{+i om t}
  const auto pm0 = Td.apply(rec.mean_in);
  rec.mean_traj[0] = es_normalize(
      {{{T.m00 * pm0[0], -om}, {T.m01 * pm0[1], om}}});
  rec.mean_traj[1] = es_normalize(
      {{{T.m10 * pm0[0], -om}, {T.m11 * pm0[1], om}}});

  const auto unit_shift = signal_unit_shift(p, rec.mean_in);
  rec.signal_shift = {p.signal_phase * unit_shift[0], p.signal_phase * unit_shift[1]};

  // fluctuation transport in the normal-mode basis
  const operator_expr fA = fluct_part(in_A);
  const operator_expr fB = fluct_part(in_B);
  const operator_expr fplus = combine({{Td.m00, fA}, {Td.m01, fB}});
  const operator_expr fminus = combine({{Td.m10, fA}, {Td.m11, fB}});

  rec.atom_in[0] = restrict_to_modes(fA, [&] {
    std::vector<mode_id> ids;
    for (const auto& [id, c] : fA.discrete) ids.push_back(id);
    return ids;
  }());
  rec.atom_in[1] = restrict_to_modes(fB, [&] {
    std::vector<mode_id> ids;
    for (const auto& [id, c] : fB.discrete) ids.push_back(id);
    return ids;
  }());

  std::array<operator_expr, 2> out_pm;
  for (int s = 0; s < 2; ++s) {
    const double sgn = (s == 0) ? 1.0 : -1.0;  // +1 for plus row, -1 for minus row
    const operator_expr& free_in = (s == 0) ? fplus : fminus;
    operator_expr inj_c, inj_d;
    inj_c.registry = &reg;
    inj_d.registry = &reg;
    if (tau > 0.0 && chi_a > 0.0) {
      // exit-form injections: constant kernel from the common amplitude
      // quadrature, e^{+-2i om t} kernel from the differential phase quadrature
      const cplx K = -kI * sgn * chi_a * pm0[s] * phase(-sgn * theta);
      const cplx L = sgn * chi_a * pm0[1 - s] * phase(-sgn * theta);
      const double rate = sgn * 2.0 * om;
      const cplx ec = phase(p.phi_c), ecb = phase(-p.phi_c);
      const cplx ep = phase(-p.phi_p), epb = phase(p.phi_p);
      // common quadrature: (a_c e^{i phi_c} + h.c. + a_p e^{-i phi_p} + h.c.)/2
      filtered_coeff cc, cp;
      cc.ann = kernel_constant(K * ec * 0.5, 0.0, tau);
      cc.cre = kernel_constant(K * ecb * 0.5, 0.0, tau);
      cp.ann = kernel_constant(K * ep * 0.5, 0.0, tau);
      cp.cre = kernel_constant(K * epb * 0.5, 0.0, tau);
      inj_c.filtered[chan_c] = cc;
      inj_c.filtered[chan_p] = cp;
      // differential quadrature: (a_c e^{i phi_c} - h.c. - a_p e^{-i phi_p} + h.c.)/(2i)
      const cplx mihalf = cplx{0.0, -0.5};  // 1/(2i)
      filtered_coeff dc, dp;
      dc.ann = kernel_exponential(L * ec * mihalf, rate, 0.0, tau);
      dc.cre = kernel_exponential(-L * ecb * mihalf, rate, 0.0, tau);
      dp.ann = kernel_exponential(-L * ep * mihalf, rate, 0.0, tau);
      dp.cre = kernel_exponential(L * epb * mihalf, rate, 0.0, tau);
      inj_d.filtered[chan_c] = dc;
      inj_d.filtered[chan_p] = dp;
    }
    rec.inj_common[s] = inj_c;
    rec.inj_differential[s] = inj_d;
    out_pm[s] = combine({{phase(-sgn * theta), free_in},
                         {cplx{1.0, 0.0}, inj_c},
                         {cplx{1.0, 0.0}, inj_d}});
  }

  rec.out[0] = combine({{T.m00, out_pm[0]}, {T.m01, out_pm[1]}});
  rec.out[1] = combine({{T.m10, out_pm[0]}, {T.m11, out_pm[1]}});
  rec.out[0].mean = rec.mean_out[0];
  rec.out[1].mean = rec.mean_out[1];
  return rec;
}

force_terms force_decomposition(const kernel_params& p, const std::array<cplx, 2>& mean,
                                const operator_expr& fluct_A, const operator_expr& fluct_B,
                                mode_id chan_c, mode_id chan_p, const mode_registry& reg) {
  p.validate();
  check_channels(reg, chan_c, chan_p);
  const double tau = p.duration;
  const cplx mA = mean[0], mB = mean[1];
  const double delta = p.a_p_amp * p.a_p_amp - p.a_c_amp * p.a_c_amp;

  force_terms f;
  // vacuum force: -i chi meanB (|a_p| e^{-i phi_p} a_c+ + |a_c| e^{i phi_c} a_p), and
  //               -i chi meanA (|a_p| e^{i phi_p} a_c  + |a_c| e^{-i phi_c} a_p+)
  operator_expr fluA, fluB;
  fluA.registry = &reg;
  fluB.registry = &reg;
  {
    filtered_coeff c, q;
    c.ann = weight_kernel{{}, 0.0, tau};
    c.cre = kernel_constant(-kI * p.chi * mB * p.a_p_amp * phase(-p.phi_p), 0.0, tau);
    q.ann = kernel_constant(-kI * p.chi * mB * p.a_c_amp * phase(p.phi_c), 0.0, tau);
    q.cre = weight_kernel{{}, 0.0, tau};
    fluA.filtered[chan_c] = c;
    fluA.filtered[chan_p] = q;
  }
  {
    filtered_coeff c, q;
    c.ann = kernel_constant(-kI * p.chi * mA * p.a_p_amp * phase(p.phi_p), 0.0, tau);
    c.cre = weight_kernel{{}, 0.0, tau};
    q.ann = weight_kernel{{}, 0.0, tau};
    q.cre = kernel_constant(-kI * p.chi * mA * p.a_c_amp * phase(-p.phi_c), 0.0, tau);
    fluB.filtered[chan_c] = c;
    fluB.filtered[chan_p] = q;
  }
  f.flu = {fluA, fluB};

  const double half_chi2 = 0.5 * p.chi * p.chi;
  f.cl = {half_chi2 * std::norm(mB) * mA * delta, half_chi2 * std::norm(mA) * mB * delta};

  const cplx gA = half_chi2 * delta;
  f.dy[0] = combine({{gA * mA * mB, dagger(fluct_part(fluct_B))},
                     {gA * std::norm(mB), fluct_part(fluct_A)}});
  f.dy[1] = combine({{gA * mB * mA, dagger(fluct_part(fluct_A))},
                     {gA * std::norm(mA), fluct_part(fluct_B)}});
  return f;
}

optical_output output_optical(const kernel_record& rec, const mode_registry& reg) {
  const kernel_params& p = rec.params;
  const double tau = p.duration;
  if (tau <= 0.0) throw std::invalid_argument("output_optical: zero-duration kernel");
  const double a_l = p.a_c_amp;
  const double rt = 1.0 / std::sqrt(tau);
  const lineage lin = propagate_lineage(rec);

  optical_output oo;
  oo.control_out.registry = &reg;
  oo.passive_out.registry = &reg;

  // duration-averaged channel modes carry the incoming fluctuations unchanged
  filtered_coeff self_c;
  self_c.ann = kernel_constant(cplx{rt, 0.0}, 0.0, tau);
  self_c.cre = weight_kernel{{}, 0.0, tau};
  oo.control_out.filtered[rec.chan_c] = self_c;
  oo.passive_out.filtered[rec.chan_p] = self_c;

  // atom-content terms, coefficient -i chi a_L e^{-i phi_(other)}
  const cplx cc = -kI * p.chi * a_l * phase(-p.phi_p);  // on control output
  const cplx cp = -kI * p.chi * a_l * phase(-p.phi_c);  // on passive output
  const exp_sum trajA = rec.mean_traj[0];
  const exp_sum trajB = rec.mean_traj[1];
  for (const auto& [id, c] : lin.modes) {
    const exp_sum& A_ann = c[0];
    const exp_sum& A_cre = c[1];
    const exp_sum& B_ann = c[2];
    const exp_sum& B_cre = c[3];
    // control: meanB(t) A+(t) + meanA*(t) B(t)
    discrete_coeff dc;
    dc.ann = cc * rt *
             (es_integral(es_mul(trajB, es_conj(A_cre)), 0.0, tau) +
              es_integral(es_mul(es_conj(trajA), B_ann), 0.0, tau));
    dc.cre = cc * rt *
             (es_integral(es_mul(trajB, es_conj(A_ann)), 0.0, tau) +
              es_integral(es_mul(es_conj(trajA), B_cre), 0.0, tau));
    if (dc.ann != cplx{} || dc.cre != cplx{}) oo.control_out.discrete[id] = dc;
    // passive: meanA(t) B+(t) + meanB*(t) A(t)
    discrete_coeff dp;
    dp.ann = cp * rt *
             (es_integral(es_mul(trajA, es_conj(B_cre)), 0.0, tau) +
              es_integral(es_mul(es_conj(trajB), A_ann), 0.0, tau));
    dp.cre = cp * rt *
             (es_integral(es_mul(trajA, es_conj(B_ann)), 0.0, tau) +
              es_integral(es_mul(es_conj(trajB), A_cre), 0.0, tau));
    if (dp.ann != cplx{} || dp.cre != cplx{}) oo.passive_out.discrete[id] = dp;
  }

  // mean displacement: incoming flat amplitude plus the classical scattering shift
  oo.control_out.mean =
      a_l * phase(-p.phi_c) * std::sqrt(tau) +
      cc * rt * es_integral(es_mul(es_conj(trajA), trajB), 0.0, tau);
  oo.passive_out.mean =
      a_l * phase(-p.phi_p) * std::sqrt(tau) +
      cp * rt * es_integral(es_mul(trajA, es_conj(trajB)), 0.0, tau);

  const double n_atom = std::norm(rec.mean_in[0]) + std::norm(rec.mean_in[1]);
  const double n_light = a_l * a_l * tau;
  oo.dropped_term_ratio = (n_light > 0.0) ? std::sqrt(n_atom / n_light) : 0.0;
  return oo;
}

std::array<operator_expr, 2> apply_back_action(const kernel_record& downstream,
                                               const kernel_record& upstream) {
  if (!(downstream.chan_c == upstream.chan_c))
    throw std::invalid_argument("apply_back_action: kernels do not share a control channel");
  if (downstream.params.omega() != upstream.params.omega() ||
      downstream.params.duration != upstream.params.duration)
    throw std::invalid_argument("apply_back_action: mismatched Rabi rate or duration");

  const double om = downstream.params.omega();
  const double tau = downstream.params.duration;
  const cplx kappa{downstream.params.chi_a() * upstream.params.chi_a(), 0.0};

  std::array<operator_expr, 2> delta;
  delta[0].registry = upstream.atom_in[0].registry;
  delta[1].registry = delta[0].registry;
  if (kappa == cplx{} || tau <= 0.0) return delta;

  const lineage lin = propagate_lineage(upstream);
  const exp_sum& dA = downstream.mean_traj[0];
  const exp_sum& dB = downstream.mean_traj[1];
  const exp_sum uA = upstream.mean_traj[0];
  const exp_sum uB = upstream.mean_traj[1];
  const exp_sum uAc = es_conj(uA);
  const exp_sum uBc = es_conj(uB);

  // free propagation from the force time t' to the exit tau
  const cplx eot = phase(om * tau);
  const exp_sum cos_g{{{0.5 * eot, -om}, {0.5 * std::conj(eot), om}}};
  const exp_sum sin_g{{{cplx{0.0, -0.5} * eot, -om}, {cplx{0.0, 0.5} * std::conj(eot), om}}};
  const exp_sum g01 = es_scale(sin_g, -kI * phase(downstream.params.phi()));
  const exp_sum g10 = es_scale(sin_g, -kI * phase(-downstream.params.phi()));

  for (const auto& [id, c] : lin.modes) {
    const exp_sum& A_ann = c[0];
    const exp_sum& A_cre = c[1];
    const exp_sum& B_ann = c[2];
    const exp_sum& B_cre = c[3];
    // force rows on (ann, cre) components:
    //   F_A = +kappa meanB_down [conj(meanB_up) A_up + meanA_up B_up+]
    //   F_B = -kappa meanA_down [meanB_up A_up+ + conj(meanA_up) B_up]
    std::array<exp_sum, 2> FA, FB;
    FA[0] = es_scale(es_mul(dB, es_add(es_mul(uBc, A_ann), es_mul(uA, es_conj(B_cre)))),
                     kappa);
    FA[1] = es_scale(es_mul(dB, es_add(es_mul(uBc, A_cre), es_mul(uA, es_conj(B_ann)))),
                     kappa);
    FB[0] = es_scale(es_mul(dA, es_add(es_mul(uB, es_conj(A_cre)), es_mul(uAc, B_ann))),
                     -kappa);
    FB[1] = es_scale(es_mul(dA, es_add(es_mul(uB, es_conj(A_ann)), es_mul(uAc, B_cre))),
                     -kappa);

    discrete_coeff da, db;
    da.ann = es_integral(es_add(es_mul(cos_g, FA[0]), es_mul(g01, FB[0])), 0.0, tau);
    da.cre = es_integral(es_add(es_mul(cos_g, FA[1]), es_mul(g01, FB[1])), 0.0, tau);
    db.ann = es_integral(es_add(es_mul(g10, FA[0]), es_mul(cos_g, FB[0])), 0.0, tau);
    db.cre = es_integral(es_add(es_mul(g10, FA[1]), es_mul(cos_g, FB[1])), 0.0, tau);
    if (da.ann != cplx{} || da.cre != cplx{}) delta[0].discrete[id] = da;
    if (db.ann != cplx{} || db.cre != cplx{}) delta[1].discrete[id] = db;
  }
  return delta;
}

}  // namespace matterwave
