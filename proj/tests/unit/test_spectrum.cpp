#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "kinkflow/errors.hpp"
#include "kinkflow/exact.hpp"
#include "kinkflow/instance.hpp"
#include "kinkflow/spectrum.hpp"
#include "oracles/oracles.hpp"

using namespace kinkflow;

namespace {

ChainInstance uniform_chain(int n, double j) {
  ChainInstance inst;
  inst.n_logical = n;
  inst.block_size = 1;
  inst.logical_couplings.assign(static_cast<std::size_t>(n - 1), j);
  inst.couplings = inst.logical_couplings;
  inst.validate();
  return inst;
}

}  // namespace

TEST_CASE("generator layout interleaves fields and bonds") {
  ChainInstance inst;
  inst.n_logical = 3;
  inst.logical_couplings = {0.4, 0.7};
  inst.couplings = inst.logical_couplings;
  inst.validate();
  const double s = 0.3;
  const auto gen = build_generator(inst, s);
  REQUIRE(gen.dim == 6);
  REQUIRE(gen.superdiag.size() == 5);
  CHECK(gen.scale == 2.0);
  CHECK(gen.superdiag[0] == doctest::Approx(1.0 - s));
  CHECK(gen.superdiag[1] == doctest::Approx(s * 0.4));
  CHECK(gen.superdiag[2] == doctest::Approx(1.0 - s));
  CHECK(gen.superdiag[3] == doctest::Approx(s * 0.7));
  CHECK(gen.superdiag[4] == doctest::Approx(1.0 - s));
  CHECK(generator_norm(gen) == doctest::Approx(2.0 * 0.7));
}

TEST_CASE("single particle energies match a dense eigensolver") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto inst = sample_logical(11, DisorderSpec::strong(seed));
    for (double s : {0.15, 0.5, 0.85}) {
      const auto gen = build_generator(inst, s);
      const auto sp = single_particle_energies(gen);
      const auto ref = oracles::dense_energies(gen);
      REQUIRE(sp.energies.size() == ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) {
        CHECK(sp.energies[k] == doctest::Approx(ref[k]).epsilon(1e-9));
      }
      CHECK(std::is_sorted(sp.energies.begin(), sp.energies.end()));
      CHECK(sp.gap == doctest::Approx(2.0 * (sp.energies[0] + sp.energies[1])));
      CHECK(spectrum_at(inst, s).s == s);
    }
  }
}

TEST_CASE("bidiagonal path keeps relative accuracy for tiny energies") {
  // The product of all single-particle energies equals (1-s)^n exactly, so the
  // log-sum exposes any relative-accuracy loss in the smallest values far
  // below the norm of the generator.
  const auto inst = sample_logical(120, DisorderSpec::strong(17));
  const double s = 0.9;
  const auto sp = spectrum_at(inst, s);
  double log_sum = 0.0;
  for (double e : sp.energies) {
    CHECK(e > 0.0);
    log_sum += std::log(e);
  }
  const double expected = 120.0 * std::log(1.0 - s);
  CHECK(log_sum == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("many body levels from occupation numbers") {
  const std::vector<double> eps = {0.25, 1.0, 3.0};
  const auto mb = many_body_spectrum(eps);
  REQUIRE(mb.size() == 8);
  const double e0 = -(0.25 + 1.0 + 3.0);
  std::vector<double> want = {e0,
                              e0 + 2 * 0.25,
                              e0 + 2 * 1.0,
                              e0 + 2 * 1.25,
                              e0 + 2 * 3.0,
                              e0 + 2 * 3.25,
                              e0 + 2 * 4.0,
                              e0 + 2 * 4.25};
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(mb[i] == doctest::Approx(want[i]).epsilon(1e-14));
  }
  CHECK_THROWS_AS(many_body_spectrum(std::vector<double>(21, 1.0)), ValidationError);
}

TEST_CASE("free fermion spectrum equals dense diagonalization") {
  for (std::uint64_t seed : {5u, 6u}) {
    const auto inst = sample_logical(7, DisorderSpec::strong(seed));
    for (double s : {0.2, 0.6, 0.9}) {
      const auto sp = spectrum_at(inst, s);
      const auto mb = many_body_spectrum(sp.energies);
      const auto ex = exact_spectrum(inst, s);
      REQUIRE(mb.size() == ex.size());
      for (std::size_t i = 0; i < mb.size(); ++i) {
        CHECK(std::abs(mb[i] - ex[i]) < 1e-10);
      }
    }
  }
}

TEST_CASE("uniform chain minimum gap sits at the self-dual point") {
  const auto inst = uniform_chain(64, 0.6);
  const auto mg = minimum_gap(inst);
  // Criticality at gamma = J maps to s = 1 / (1 + J).
  CHECK(mg.s_c == doctest::Approx(1.0 / 1.6).epsilon(0.03));
  CHECK(mg.gap > 0.0);
  CHECK(!mg.precision_flag);
}

TEST_CASE("gap curve brackets the minimum") {
  const auto inst = uniform_chain(32, 0.5);
  const auto curve = gap_curve(inst, 0.1, 0.9, 33);
  REQUIRE(curve.size() == 33);
  CHECK(curve.front().first == doctest::Approx(0.1));
  CHECK(curve.back().first == doctest::Approx(0.9));
  const auto mg = minimum_gap(inst);
  for (const auto& [s, gap] : curve) {
    CHECK(gap >= mg.gap - 1e-12);
  }
}

TEST_CASE("deep ordered phase trips the precision flag") {
  const auto inst = uniform_chain(400, 0.9);
  // gamma = (1-s)/s = 1/19 far below J = 0.9: the lowest energy collapses
  // below the relative resolution of the generator scale.
  const auto sp = spectrum_at(inst, 0.95);
  CHECK(sp.precision_flag);
  CHECK(sp.energies[0] < 1e-14 * generator_norm(build_generator(inst, 0.95)));
}

TEST_CASE("invalid inputs are rejected") {
  BandedSkewGenerator gen;
  gen.dim = 5;  // odd dimension cannot be a spin chain doubling
  gen.superdiag.assign(4, 0.5);
  CHECK_THROWS_AS(single_particle_energies(gen), ValidationError);
  const auto inst = sample_logical(4, DisorderSpec::strong(1));
  CHECK_THROWS_AS(spectrum_at(inst, -0.1), ValidationError);
  CHECK_THROWS_AS(spectrum_at(inst, 1.1), ValidationError);
}
