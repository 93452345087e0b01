#pragma once
// linear operator algebra over bosonic modes: discrete (atom) modes and filtered
// continuum (optical) channels.  an operator_expr is a c-number mean plus a linear
// form in mode operators; vacuum moments follow from
//   <a a+> = 1, <a+ a> = <a a> = 0            (discrete modes)
//   [a(t), a+(t')] = delta(t - t')            (continuum, per channel)

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace matterwave {

using cplx = std::complex<double>;

// ---- closed-form time kernels: finite sums of amp * exp(i rate t) ----

struct exp_term {
  cplx amp{};
  double rate = 0.0;
};

struct exp_sum {
  std::vector<exp_term> terms;
  bool empty() const;
};

exp_sum es_constant(cplx amp);
exp_sum es_exponential(cplx amp, double rate);  // amp * e^{i rate t}
exp_sum es_sinusoid(cplx amp, double rate);     // amp * sin(rate t)
exp_sum es_add(const exp_sum& a, const exp_sum& b);
exp_sum es_scale(const exp_sum& a, cplx z);
exp_sum es_conj(const exp_sum& a);              // pointwise complex conjugate
exp_sum es_mul(const exp_sum& a, const exp_sum& b);  // pointwise product
// merge bit-identical rates, drop zero amplitudes; rates built from the same
// inputs collide exactly, so merging needs no tolerance
exp_sum es_normalize(const exp_sum& a);
cplx es_eval(const exp_sum& a, double t);
// closed form per term, with a series branch for |rate*(t1-t0)| << 1
cplx es_integral(const exp_sum& a, double t0, double t1);
double es_max_abs(const exp_sum& a);

// ---- filtered-channel coefficient: kernel over a fixed window ----

struct weight_kernel {
  exp_sum f;
  double t_start = 0.0;
  double t_end = 0.0;
};

weight_kernel kernel_constant(cplx pref, double t_start, double t_end);
weight_kernel kernel_exponential(cplx pref, double rate, double t_start, double t_end);
weight_kernel kernel_sinusoid(cplx pref, double rate, double t_start, double t_end);

// ---- mode registry ----

enum class mode_kind { discrete_atom, filtered_optical };

struct mode_id {
  std::uint32_t value = 0;
  friend bool operator<(mode_id a, mode_id b) { return a.value < b.value; }
  friend bool operator==(mode_id a, mode_id b) { return a.value == b.value; }
};

class mode_registry {
 public:
  // duplicate label -> invalid_argument
  mode_id register_mode(const std::string& label, mode_kind kind,
                        cplx coherent_amplitude = cplx{0.0, 0.0});
  mode_kind kind(mode_id id) const;
  cplx coherent_amplitude(mode_id id) const;
  const std::string& label(mode_id id) const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct entry {
    std::string label;
    mode_kind kind;
    cplx amp;
  };
  const entry& at(mode_id id) const;  // unregistered id -> out_of_range
  std::vector<entry> entries_;
  std::map<std::string, std::uint32_t> by_label_;
};

// ---- operator expressions ----

struct discrete_coeff {
  cplx ann{};  // coefficient on the annihilation operator
  cplx cre{};  // coefficient on the creation operator
};

struct filtered_coeff {
  weight_kernel ann;  // kernel integrated against a(t)
  weight_kernel cre;  // kernel integrated against a+(t); shares the window
};

struct operator_expr {
  const mode_registry* registry = nullptr;
  cplx mean{};
  std::map<mode_id, discrete_coeff> discrete;
  std::map<mode_id, filtered_coeff> filtered;
};

// annihilation operator of a discrete mode (mean = coherent amplitude)
operator_expr make_operator(const mode_registry& reg, mode_id id);
// filtered annihilation of a continuum channel: integral of w(t) a(t) dt
operator_expr make_operator(const mode_registry& reg, mode_id id, const weight_kernel& w);

operator_expr dagger(const operator_expr& x);
// linear combination; mixed registries or window mismatch -> invalid_argument
operator_expr combine(const std::vector<std::pair<cplx, operator_expr>>& terms);

bool is_hermitian(const operator_expr& x, double tol = 1e-12);

// vacuum <dx dy> over the fluctuation parts (normal-ordered contraction a a+)
cplx second_moment(const operator_expr& x, const operator_expr& y);
// symmetrized (1/2)<xy + yx> - <x><y>
cplx covariance(const operator_expr& x, const operator_expr& y);
// <(x - <x>)^2> for hermitian x; non-hermitian -> invalid_argument
double vacuum_variance(const operator_expr& x);
// c-number commutator <[x, y]>
cplx commutator(const operator_expr& x, const operator_expr& y);

// expr restricted to a subset of discrete modes (drops mean and channels)
operator_expr restrict_to_modes(const operator_expr& x, const std::vector<mode_id>& keep);
// expr with only the filtered-channel part (drops mean and discrete modes)
operator_expr restrict_to_channels(const operator_expr& x);

}  // namespace matterwave
