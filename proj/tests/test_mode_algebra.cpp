#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "matterwave/mode_algebra.hpp"
#include "matterwave/rng.hpp"

using namespace matterwave;

namespace {

constexpr cplx I{0.0, 1.0};

// composite simpson on [a, b]
template <typename F>
cplx simpson(F f, double a, double b, int n) {
  cplx acc = f(a) + f(b);
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("exp_sum_algebra_matches_pointwise_evaluation") {
  const exp_sum a = es_add(es_constant({1.0, 2.0}), es_exponential({0.5, -1.0}, 3.0));
  const exp_sum b = es_sinusoid({2.0, 0.0}, 1.5);
  const double t = 0.7;
  const cplx av = cplx{1.0, 2.0} + cplx{0.5, -1.0} * std::exp(I * 3.0 * t);
  const cplx bv = 2.0 * std::sin(1.5 * t);
  CHECK(std::abs(es_eval(a, t) - av) < 1e-14);
  CHECK(std::abs(es_eval(b, t) - bv) < 1e-14);
  CHECK(std::abs(es_eval(es_mul(a, b), t) - av * bv) < 1e-13);
  CHECK(std::abs(es_eval(es_conj(a), t) - std::conj(av)) < 1e-14);
  CHECK(std::abs(es_eval(es_scale(a, {0.0, 2.0}), t) - cplx{0.0, 2.0} * av) < 1e-13);
}

TEST_CASE("exp_sum_integral_matches_quadrature_including_small_rates") {
  for (const double rate : {0.0, 1e-9, 1e-4, 2.5, -40.0}) {
    const exp_sum s = es_exponential({1.3, -0.4}, rate);
    const cplx got = es_integral(s, 0.2, 1.9);
    const cplx want =
        simpson([&](double t) { return es_eval(s, t); }, 0.2, 1.9, 20000);
    CHECK(std::abs(got - want) < 1e-12);
  }
}

TEST_CASE("exp_sum_normalize_merges_equal_rates_and_drops_zeros") {
  exp_sum s;
  s.terms = {{{1.0, 0.0}, 2.0}, {{2.0, 1.0}, 2.0}, {{-3.0, -0.5}, 2.0}, {{0.0, 0.0}, 7.0}};
  const exp_sum n = es_normalize(s);
  REQUIRE(n.terms.size() == 1);
  CHECK(n.terms[0].rate == 2.0);
  CHECK(std::abs(n.terms[0].amp - cplx{0.0, 0.5}) < 1e-15);

  // exactly cancelling amplitudes leave an empty sum
  exp_sum z;
  z.terms = {{{1.0, 1.0}, 2.0}, {{-1.0, -1.0}, 2.0}};
  CHECK(es_normalize(z).terms.empty());
  CHECK(z.empty() == false);
  CHECK(es_normalize(z).empty());
}

TEST_CASE("registry_rejects_duplicate_labels_and_unknown_ids") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom, {2.0, -1.0});
  CHECK(reg.kind(a) == mode_kind::discrete_atom);
  CHECK(reg.coherent_amplitude(a) == cplx{2.0, -1.0});
  CHECK(reg.label(a) == "a");
  CHECK_THROWS_AS(reg.register_mode("a", mode_kind::filtered_optical), std::invalid_argument);
  CHECK_THROWS_AS(reg.kind(mode_id{99}), std::out_of_range);
  CHECK_THROWS_AS((void)make_operator(reg, mode_id{99}), std::out_of_range);
}

TEST_CASE("coherent_amplitude_becomes_the_operator_mean") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom, {3.0, 4.0});
  const auto x = make_operator(reg, a);
  CHECK(x.mean == cplx{3.0, 4.0});
  CHECK(dagger(x).mean == cplx{3.0, -4.0});
  CHECK(dagger(x).discrete.at(a).cre == cplx{1.0, 0.0});
  CHECK(dagger(x).discrete.at(a).ann == cplx{0.0, 0.0});
}

TEST_CASE("quadrature_variance_is_one_and_scales_quadratically") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom);
  const auto b = reg.register_mode("b", mode_kind::discrete_atom);
  const auto qa = combine({{1.0, make_operator(reg, a)}, {1.0, dagger(make_operator(reg, a))}});
  CHECK(is_hermitian(qa));
  CHECK(vacuum_variance(qa) == doctest::Approx(1.0).epsilon(1e-14));

  // amplified quadrature of an independent mode: amp^2 * 1
  const double amp = 1e3;
  const auto qb = combine({{amp, make_operator(reg, b)}, {amp, dagger(make_operator(reg, b))}});
  CHECK(vacuum_variance(qb) == doctest::Approx(1e6).epsilon(1e-13));

  // independent contributions add
  const auto s = combine({{1.0, qa}, {1.0, qb}});
  CHECK(vacuum_variance(s) == doctest::Approx(1.0 + 1e6).epsilon(1e-13));
}

TEST_CASE("mean_offset_does_not_contribute_to_variance") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom, {3.5, 0.0});
  const auto x = combine({{1.0, make_operator(reg, a)}, {1.0, dagger(make_operator(reg, a))}});
  CHECK(x.mean == cplx{7.0, 0.0});
  CHECK(vacuum_variance(x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("variance_rejects_non_hermitian_expressions") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom);
  CHECK_FALSE(is_hermitian(make_operator(reg, a)));
  CHECK_THROWS_AS(vacuum_variance(make_operator(reg, a)), std::invalid_argument);
}

TEST_CASE("covariance_counts_only_shared_modes") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom);
  const auto b = reg.register_mode("b", mode_kind::discrete_atom);
  const auto qa = combine({{1.0, make_operator(reg, a)}, {1.0, dagger(make_operator(reg, a))}});
  const auto qb = combine({{1.0, make_operator(reg, b)}, {1.0, dagger(make_operator(reg, b))}});
  const auto sum = combine({{1.0, qa}, {1.0, qb}});
  CHECK(std::abs(covariance(qa, qb)) < 1e-14);
  CHECK(std::abs(covariance(qa, sum) - cplx{1.0, 0.0}) < 1e-14);
  CHECK(std::abs(covariance(sum, sum) - cplx{2.0, 0.0}) < 1e-14);

  // conjugate quadratures of one mode: zero symmetrized covariance
  const auto pa = combine({{I, dagger(make_operator(reg, a))}, {-I, make_operator(reg, a)}});
  CHECK(is_hermitian(pa));
  CHECK(std::abs(covariance(qa, pa)) < 1e-14);
}

TEST_CASE("commutator_is_canonical_antisymmetric_and_bilinear") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom);
  const auto b = reg.register_mode("b", mode_kind::discrete_atom);
  const auto va = make_operator(reg, a);
  const auto vb = make_operator(reg, b);
  CHECK(std::abs(commutator(va, dagger(va)) - cplx{1.0, 0.0}) < 1e-14);
  CHECK(std::abs(commutator(va, dagger(vb))) < 1e-14);
  CHECK(std::abs(commutator(va, vb)) < 1e-14);

  // conjugate quadratures: [q, p] = 2i
  const auto qa = combine({{1.0, va}, {1.0, dagger(va)}});
  const auto pa = combine({{I, dagger(va)}, {-I, va}});
  CHECK(std::abs(commutator(qa, pa) - cplx{0.0, 2.0}) < 1e-14);

  xoshiro256pp rng = xoshiro256pp::seeded(11);
  auto rnd = [&] { return cplx{2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0}; };
  for (int i = 0; i < 50; ++i) {
    const auto x = combine({{rnd(), va}, {rnd(), dagger(va)}, {rnd(), vb}, {rnd(), dagger(vb)}});
    const auto y = combine({{rnd(), va}, {rnd(), dagger(va)}, {rnd(), vb}, {rnd(), dagger(vb)}});
    const auto z = combine({{rnd(), va}, {rnd(), dagger(vb)}});
    CHECK(std::abs(commutator(x, y) + commutator(y, x)) < 1e-13);
    const cplx al = rnd(), be = rnd();
    const auto lin = combine({{al, x}, {be, y}});
    CHECK(std::abs(commutator(lin, z) - (al * commutator(x, z) + be * commutator(y, z))) <
          1e-12);
  }
}

TEST_CASE("combine_rejects_mixed_registries_and_window_mismatch") {
  mode_registry r1, r2;
  const auto a1 = r1.register_mode("a", mode_kind::discrete_atom);
  const auto a2 = r2.register_mode("a", mode_kind::discrete_atom);
  CHECK_THROWS_AS(combine({{1.0, make_operator(r1, a1)}, {1.0, make_operator(r2, a2)}}),
                  std::invalid_argument);

  const auto c = r1.register_mode("chan", mode_kind::filtered_optical);
  const auto f1 = make_operator(r1, c, kernel_constant({1.0, 0.0}, 0.0, 1.0));
  const auto f2 = make_operator(r1, c, kernel_constant({1.0, 0.0}, 0.0, 2.0));
  CHECK_THROWS_AS(combine({{1.0, f1}, {1.0, f2}}), std::invalid_argument);
}

TEST_CASE("filtered_moments_match_quadrature_for_all_kernel_form_pairs") {
  mode_registry reg;
  const auto c = reg.register_mode("chan", mode_kind::filtered_optical);
  const double t0 = 0.3, t1 = 1.7;
  std::vector<weight_kernel> forms = {
      kernel_constant({0.8, -0.3}, t0, t1),
      kernel_exponential({-0.4, 1.1}, 2.7, t0, t1),
      kernel_sinusoid({1.2, 0.5}, 1.9, t0, t1),
  };
  for (const auto& w1 : forms) {
    for (const auto& w2 : forms) {
      const auto x = make_operator(reg, c, w1);
      const auto y = make_operator(reg, c, w2);
      // <x y+> = integral of w1 conj(w2) over the window
      const cplx got = second_moment(x, dagger(y));
      const cplx want = simpson(
          [&](double t) { return es_eval(w1.f, t) * std::conj(es_eval(w2.f, t)); }, t0, t1,
          20000);
      CHECK(std::abs(got - want) < 1e-10);
      CHECK(std::abs(second_moment(dagger(y), x)) < 1e-14);  // normal order: <a+ a> = 0
    }
  }
}

TEST_CASE("filtered_channels_are_independent_of_discrete_modes") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom);
  const auto c = reg.register_mode("chan", mode_kind::filtered_optical);
  const auto x = make_operator(reg, a);
  const auto f = make_operator(reg, c, kernel_constant({1.0, 0.0}, 0.0, 1.0));
  CHECK(std::abs(second_moment(x, dagger(f))) < 1e-14);
  CHECK(std::abs(commutator(x, dagger(f))) < 1e-14);
  // filtered canonical commutator: [F[w], F[w]+] = integral |w|^2
  CHECK(std::abs(commutator(f, dagger(f)) - cplx{1.0, 0.0}) < 1e-13);
}

TEST_CASE("randomized_hermitian_expressions_have_nonnegative_variance") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom);
  const auto b = reg.register_mode("b", mode_kind::discrete_atom);
  const auto c1 = reg.register_mode("c1", mode_kind::filtered_optical);
  const auto c2 = reg.register_mode("c2", mode_kind::filtered_optical);
  xoshiro256pp rng = xoshiro256pp::seeded(7);
  auto rnd = [&] { return cplx{2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0}; };
  for (int i = 0; i < 1000; ++i) {
    const auto z = combine({
        {rnd(), make_operator(reg, a)},
        {rnd(), dagger(make_operator(reg, b))},
        {rnd(), make_operator(reg, c1, kernel_exponential(rnd(), rng.uniform01(), 0.0, 1.0))},
        {rnd(), make_operator(reg, c2, kernel_sinusoid(rnd(), 1.0 + rng.uniform01(), 0.0, 1.0))},
    });
    const auto h = combine({{1.0, z}, {1.0, dagger(z)}});
    REQUIRE(is_hermitian(h));
    CHECK(vacuum_variance(h) >= -1e-12);
  }
}

TEST_CASE("restriction_keeps_only_the_requested_parts") {
  mode_registry reg;
  const auto a = reg.register_mode("a", mode_kind::discrete_atom, {1.0, 0.0});
  const auto b = reg.register_mode("b", mode_kind::discrete_atom);
  const auto c = reg.register_mode("chan", mode_kind::filtered_optical);
  const auto x = combine({
      {cplx{2.0, 0.0}, make_operator(reg, a)},
      {cplx{0.0, 3.0}, dagger(make_operator(reg, b))},
      {cplx{1.0, 0.0}, make_operator(reg, c, kernel_constant({1.0, 0.0}, 0.0, 1.0))},
  });
  const auto xa = restrict_to_modes(x, {a});
  CHECK(xa.mean == cplx{0.0, 0.0});
  CHECK(xa.discrete.size() == 1);
  CHECK(xa.discrete.count(a) == 1);
  CHECK(xa.filtered.empty());

  const auto xc = restrict_to_channels(x);
  CHECK(xc.mean == cplx{0.0, 0.0});
  CHECK(xc.discrete.empty());
  CHECK(xc.filtered.size() == 1);

  // variance decomposes exactly across disjoint restrictions
  const auto h = combine({{1.0, x}, {1.0, dagger(x)}});
  const auto ha = combine({{1.0, restrict_to_modes(h, {a})}});
  const auto hb = combine({{1.0, restrict_to_modes(h, {b})}});
  const auto hc = combine({{1.0, restrict_to_channels(h)}});
  CHECK(vacuum_variance(h) ==
        doctest::Approx(vacuum_variance(ha) + vacuum_variance(hb) + vacuum_variance(hc))
            .epsilon(1e-12));
}
