#include "matterwave/mode_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace matterwave {

namespace {

constexpr cplx kI{0.0, 1.0};

// windows must match exactly; kernels on one channel always share a window
void check_window(const weight_kernel& a, const weight_kernel& b) {
  if (a.f.terms.empty() || b.f.terms.empty()) return;
  if (a.t_start != b.t_start || a.t_end != b.t_end)
    throw std::invalid_argument("weight_kernel window mismatch on shared channel");
}

}  // namespace

bool exp_sum::empty() const {
  for (const auto& t : terms)
    if (t.amp != cplx{0.0, 0.0}) return false;
  return true;
}

exp_sum es_constant(cplx amp) { return exp_sum{{{amp, 0.0}}}; }

exp_sum es_exponential(cplx amp, double rate) { return exp_sum{{{amp, rate}}}; }

exp_sum es_sinusoid(cplx amp, double rate) {
  // sin(rt) = (e^{irt} - e^{-irt}) / 2i
  const cplx half = amp / (2.0 * kI);
  return exp_sum{{{half, rate}, {-half, -rate}}};
}

exp_sum es_add(const exp_sum& a, const exp_sum& b) {
  exp_sum out = a;
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  return es_normalize(out);
}

exp_sum es_scale(const exp_sum& a, cplx z) {
  exp_sum out = a;
  for (auto& t : out.terms) t.amp *= z;
  return out;
}

exp_sum es_conj(const exp_sum& a) {
  exp_sum out = a;
  for (auto& t : out.terms) {
    t.amp = std::conj(t.amp);
    t.rate = -t.rate;
  }
  return out;
}

exp_sum es_mul(const exp_sum& a, const exp_sum& b) {
  exp_sum out;
  out.terms.reserve(a.terms.size() * b.terms.size());
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) out.terms.push_back({ta.amp * tb.amp, ta.rate + tb.rate});
  return es_normalize(out);
}

exp_sum es_normalize(const exp_sum& a) {
  exp_sum out = a;
  std::sort(out.terms.begin(), out.terms.end(),
            [](const exp_term& x, const exp_term& y) { return x.rate < y.rate; });
  exp_sum merged;
  for (const auto& t : out.terms) {
    if (!merged.terms.empty() && merged.terms.back().rate == t.rate)
      merged.terms.back().amp += t.amp;
    else
      merged.terms.push_back(t);
  }
  exp_sum cleaned;
  for (const auto& t : merged.terms)
    if (std::abs(t.amp) > 1e-300) cleaned.terms.push_back(t);
  return cleaned;
}

cplx es_eval(const exp_sum& a, double t) {
  cplx v{};
  for (const auto& term : a.terms) v += term.amp * std::exp(kI * term.rate * t);
  return v;
}

cplx es_integral(const exp_sum& a, double t0, double t1) {
  cplx v{};
  const double dt = t1 - t0;
  for (const auto& term : a.terms) {
    const double x = term.rate * dt;
    if (std::abs(x) < 1e-8) {
      // midpoint series: dt e^{ir(t0+t1)/2} (1 - x^2/24), error O(x^4)
      const cplx mid = std::exp(kI * (term.rate * 0.5 * (t0 + t1)));
      v += term.amp * dt * mid * (1.0 - x * x / 24.0);
    } else {
      v += term.amp * (std::exp(kI * term.rate * t1) - std::exp(kI * term.rate * t0)) /
           (kI * term.rate);
    }
  }
  return v;
}

double es_max_abs(const exp_sum& a) {
  double m = 0.0;
  for (const auto& t : a.terms) m = std::max(m, std::abs(t.amp));
  return m;
}

weight_kernel kernel_constant(cplx pref, double t_start, double t_end) {
  return {es_constant(pref), t_start, t_end};
}

weight_kernel kernel_exponential(cplx pref, double rate, double t_start, double t_end) {
  return {es_exponential(pref, rate), t_start, t_end};
}

weight_kernel kernel_sinusoid(cplx pref, double rate, double t_start, double t_end) {
  return {es_sinusoid(pref, rate), t_start, t_end};
}

mode_id mode_registry::register_mode(const std::string& label, mode_kind kind,
                                     cplx coherent_amplitude) {
  if (by_label_.count(label))
    throw std::invalid_argument("mode label already registered: " + label);
  const auto idx = static_cast<std::uint32_t>(entries_.size());
  entries_.push_back({label, kind, coherent_amplitude});
  by_label_[label] = idx;
  return mode_id{idx};
}

const mode_registry::entry& mode_registry::at(mode_id id) const {
  if (id.value >= entries_.size()) throw std::out_of_range("unregistered mode id");
  return entries_[id.value];
}

mode_kind mode_registry::kind(mode_id id) const { return at(id).kind; }
cplx mode_registry::coherent_amplitude(mode_id id) const { return at(id).amp; }
const std::string& mode_registry::label(mode_id id) const { return at(id).label; }

operator_expr make_operator(const mode_registry& reg, mode_id id) {
  if (reg.kind(id) != mode_kind::discrete_atom)
    throw std::invalid_argument("filtered channel needs a weight kernel");
  operator_expr x;
  x.registry = &reg;
  x.mean = reg.coherent_amplitude(id);
  x.discrete[id] = {cplx{1.0, 0.0}, cplx{0.0, 0.0}};
  return x;
}

operator_expr make_operator(const mode_registry& reg, mode_id id, const weight_kernel& w) {
  if (reg.kind(id) != mode_kind::filtered_optical)
    throw std::invalid_argument("weight kernel applies to filtered channels only");
  operator_expr x;
  x.registry = &reg;
  // flat coherent amplitude over the window
  x.mean = reg.coherent_amplitude(id) * es_integral(w.f, w.t_start, w.t_end);
  filtered_coeff c;
  c.ann = w;
  c.cre = weight_kernel{{}, w.t_start, w.t_end};
  x.filtered[id] = c;
  return x;
}

operator_expr dagger(const operator_expr& x) {
  operator_expr out;
  out.registry = x.registry;
  out.mean = std::conj(x.mean);
  for (const auto& [id, c] : x.discrete)
    out.discrete[id] = {std::conj(c.cre), std::conj(c.ann)};
  for (const auto& [id, c] : x.filtered) {
    filtered_coeff d;
    d.ann = weight_kernel{es_conj(c.cre.f), c.cre.t_start, c.cre.t_end};
    d.cre = weight_kernel{es_conj(c.ann.f), c.ann.t_start, c.ann.t_end};
    check_window(d.ann, d.cre);
    out.filtered[id] = d;
  }
  return out;
}

operator_expr combine(const std::vector<std::pair<cplx, operator_expr>>& terms) {
  operator_expr out;
  for (const auto& [z, x] : terms) {
    if (x.registry != nullptr) {
      if (out.registry == nullptr) out.registry = x.registry;
      else if (out.registry != x.registry)
        throw std::invalid_argument("combine: expressions from different registries");
    }
    out.mean += z * x.mean;
    for (const auto& [id, c] : x.discrete) {
      auto& acc = out.discrete[id];
      acc.ann += z * c.ann;
      acc.cre += z * c.cre;
    }
    for (const auto& [id, c] : x.filtered) {
      auto it = out.filtered.find(id);
      if (it == out.filtered.end()) {
        filtered_coeff d;
        d.ann = weight_kernel{es_scale(c.ann.f, z), c.ann.t_start, c.ann.t_end};
        d.cre = weight_kernel{es_scale(c.cre.f, z), c.cre.t_start, c.cre.t_end};
        out.filtered[id] = d;
      } else {
        check_window(it->second.ann, c.ann);
        check_window(it->second.cre, c.cre);
        check_window(it->second.ann, c.cre);
        check_window(it->second.cre, c.ann);
        // adopt the window of whichever side carries terms
        double t0 = it->second.ann.t_start, t1 = it->second.ann.t_end;
        if (it->second.ann.f.terms.empty() && it->second.cre.f.terms.empty() &&
            (!c.ann.f.terms.empty() || !c.cre.f.terms.empty())) {
          t0 = c.ann.t_start;
          t1 = c.ann.t_end;
        }
        it->second.ann.f = es_add(it->second.ann.f, es_scale(c.ann.f, z));
        it->second.cre.f = es_add(it->second.cre.f, es_scale(c.cre.f, z));
        it->second.ann.t_start = it->second.cre.t_start = t0;
        it->second.ann.t_end = it->second.cre.t_end = t1;
      }
    }
  }
  return out;
}

bool is_hermitian(const operator_expr& x, double tol) {
  if (std::abs(x.mean.imag()) > tol * std::max(1.0, std::abs(x.mean))) return false;
  for (const auto& [id, c] : x.discrete) {
    const double scale = std::max(1.0, std::abs(c.ann) + std::abs(c.cre));
    if (std::abs(c.ann - std::conj(c.cre)) > tol * scale) return false;
  }
  for (const auto& [id, c] : x.filtered) {
    const exp_sum diff =
        es_normalize(es_add(c.ann.f, es_scale(es_conj(c.cre.f), cplx{-1.0, 0.0})));
    const double scale = std::max({1.0, es_max_abs(c.ann.f), es_max_abs(c.cre.f)});
    if (es_max_abs(diff) > tol * scale) return false;
  }
  return true;
}

cplx second_moment(const operator_expr& x, const operator_expr& y) {
  cplx m{};
  for (const auto& [id, cx] : x.discrete) {
    auto it = y.discrete.find(id);
    if (it != y.discrete.end()) m += cx.ann * it->second.cre;
  }
  for (const auto& [id, cx] : x.filtered) {
    auto it = y.filtered.find(id);
    if (it == y.filtered.end()) continue;
    const auto& cy = it->second;
    if (cx.ann.f.terms.empty() || cy.cre.f.terms.empty()) continue;
    check_window(cx.ann, cy.cre);
    m += es_integral(es_mul(cx.ann.f, cy.cre.f), cx.ann.t_start, cx.ann.t_end);
  }
  return m;
}

cplx covariance(const operator_expr& x, const operator_expr& y) {
  return 0.5 * (second_moment(x, y) + second_moment(y, x));
}

double vacuum_variance(const operator_expr& x) {
  if (!is_hermitian(x)) throw std::invalid_argument("vacuum_variance: non-hermitian expression");
  if (x.registry != nullptr) {
    for (const auto& [id, c] : x.discrete) (void)x.registry->kind(id);
    for (const auto& [id, c] : x.filtered) (void)x.registry->kind(id);
  }
  // hermitian path: sum of |ann|^2 contributions, nonnegative up to rounding
  double v = 0.0;
  for (const auto& [id, c] : x.discrete) v += std::norm(c.ann);
  for (const auto& [id, c] : x.filtered) {
    if (c.ann.f.terms.empty()) continue;
    const cplx q =
        es_integral(es_mul(c.ann.f, es_conj(c.ann.f)), c.ann.t_start, c.ann.t_end);
    v += q.real();
  }
  // the exact value is a sum of squares; clear sub-epsilon rounding dust only
  if (v < 0.0 && v > -64.0 * 1e-16 * std::max(1.0, std::abs(v))) v = 0.0;
  return v;
}

cplx commutator(const operator_expr& x, const operator_expr& y) {
  cplx c{};
  for (const auto& [id, cx] : x.discrete) {
    auto it = y.discrete.find(id);
    if (it != y.discrete.end()) c += cx.ann * it->second.cre - cx.cre * it->second.ann;
  }
  for (const auto& [id, cx] : x.filtered) {
    auto it = y.filtered.find(id);
    if (it == y.filtered.end()) continue;
    const auto& cy = it->second;
    if (!cx.ann.f.terms.empty() && !cy.cre.f.terms.empty()) {
      check_window(cx.ann, cy.cre);
      c += es_integral(es_mul(cx.ann.f, cy.cre.f), cx.ann.t_start, cx.ann.t_end);
    }
    if (!cx.cre.f.terms.empty() && !cy.ann.f.terms.empty()) {
      check_window(cx.cre, cy.ann);
      c -= es_integral(es_mul(cx.cre.f, cy.ann.f), cx.cre.t_start, cx.cre.t_end);
    }
  }
  return c;
}

operator_expr restrict_to_modes(const operator_expr& x, const std::vector<mode_id>& keep) {
  operator_expr out;
  out.registry = x.registry;
  for (mode_id id : keep) {
    auto it = x.discrete.find(id);
    if (it != x.discrete.end()) out.discrete[id] = it->second;
  }
  return out;
}

operator_expr restrict_to_channels(const operator_expr& x) {
  operator_expr out;
  out.registry = x.registry;
  out.filtered = x.filtered;
  return out;
}

}  // namespace matterwave
