#include <cmath>
#include <set>

#include "effham/basis.hpp"
#include "effham/error.hpp"
#include "effham/linalg.hpp"
#include "effham/multilevel.hpp"
#include "support.hpp"

using namespace effham;
using testing::max_abs;

namespace {

CascadeModel model(std::vector<double> d, std::vector<double> g, int atoms = 1, int max_exc = 5) {
  const int levels = int(d.size());
  return CascadeModel::from_detunings(levels, atoms, std::move(d), std::move(g), HalfInteger::from_int(max_exc));
}

cplx at(const Operator& h, const StateSpace& s, const BasisState& r, const BasisState& c) {
  return h.matrix(Eigen::Index(s.index_of(r)), Eigen::Index(s.index_of(c)));
}

// Random resonant spec with every one-photon |alpha| <= amax and no accidental resonances.
CascadeModel random_resonant(Rng& rng, int levels, double amax, int atoms = 1, int max_exc = 5) {
  for (;;) {
    std::vector<double> d(levels, 0.0), g(levels - 1);
    for (int j = 1; j + 1 < levels; ++j) d[j] = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(5, 40);
    for (auto& x : g) x = rng.uniform(0.3, 1.5);
    bool ok = true;
    for (int j = 0; j + 1 < levels; ++j) ok = ok && std::abs(g[j] / (d[j + 1] - d[j])) <= amax;
    for (int j = 0; j + 2 < levels; ++j)
      if (j + 2 != levels - 1 || levels != 3) ok = ok && std::abs(d[j + 2] - d[j]) > 1.0;
    if (levels == 4) ok = ok && std::abs(d[1] + d[2]) > 1.0 && std::abs(2 * d[1] - d[2]) > 1.0 && std::abs(2 * d[2] - d[1]) > 1.0;
    if (ok) return model(d, g, atoms, max_exc);
  }
}

}  // namespace

TEST_CASE("detunings") {
  CHECK(detunings(1.0, {0, 0.9, 2.0}) == std::vector<double>{0, 0.9 - 1.0, 0});
  const auto m3 = CascadeModel::from_frequencies(3, 1, 1.0, {0, 0.9, 2.0}, {0.1, 0.1}, HalfInteger::from_int(3));
  CHECK(m3.delta(3) == 0.0);
  CHECK_NOTHROW(require_resonance(m3));
  CHECK(m3.mean_frequency() == doctest::Approx(1.0));
  const auto flat = detunings(1.5, {0.2, 1.7, 3.2, 4.7});
  for (double x : flat) CHECK(std::abs(x) <= 1e-15);
  const auto m4 = CascadeModel::from_frequencies(4, 1, 2.0, {1, 2.5, 4.0, 7.0}, {1, 1, 1}, HalfInteger::from_int(3));
  CHECK(m4.delta(4) == 0.0);
  CHECK(m4.level_frequencies()[2] == doctest::Approx(4.0));
  CHECK_THROWS_AS(CascadeModel::from_frequencies(3, 1, 1.0, {0, 2.5, 2.0}, {1, 1}, HalfInteger::from_int(3)), Error);
  CHECK_THROWS_AS(require_resonance(model({0, 10, 1}, {1, 1})), Error);
  CHECK_THROWS_AS(model({1, 10, 0}, {1, 1}), Error);
  CHECK_THROWS_AS(model({0, 10, 0}, {1}), Error);
  CHECK_THROWS_AS(alpha1(model({0, 0, 0}, {0.1, 0.1})), Error);
}

TEST_CASE("full Hamiltonian") {
  SUBCASE("Jaynes-Cummings block") {
    const double g = 0.3, d2 = 2.0;
    const auto m = model({0, d2}, {g}, 1, 1);
    const SectorBasis sec = build_sector(2, 1, HalfInteger::from_twice(1));
    REQUIRE(sec.space.size() == 2);
    const Operator h = build_full_h(m, sec.space);
    const BasisState low{1, {1, 0}}, up{0, {0, 1}};
    CHECK(at(h, sec.space, low, low) == cplx(0));
    CHECK(at(h, sec.space, up, up) == cplx(d2));
    CHECK(at(h, sec.space, up, low) == cplx(g));
  }
  SUBCASE("three-level sector") {
    const double g1 = 0.7, g2 = 1.3, d2 = 9.0;
    const auto m = model({0, d2, 0}, {g1, g2});
    for (int n = 2; n <= 5; ++n) {
      const SectorBasis sec = build_sector(3, 1, HalfInteger::from_int(n - 1));
      REQUIRE(sec.space.size() == 3);
      const Operator h = build_full_h(m, sec.space);
      const BasisState s1{n, {1, 0, 0}}, s2{n - 1, {0, 1, 0}}, s3{n - 2, {0, 0, 1}};
      CHECK(std::abs(at(h, sec.space, s2, s1) - g1 * std::sqrt(double(n))) <= 1e-15);
      CHECK(std::abs(at(h, sec.space, s3, s2) - g2 * std::sqrt(n - 1.0)) <= 1e-15);
      CHECK(at(h, sec.space, s3, s1) == cplx(0));
      CHECK(at(h, sec.space, s2, s2) == cplx(d2));
      CHECK(at(h, sec.space, s1, s1) == cplx(0));
    }
  }
  SUBCASE("free part") {
    const auto m = CascadeModel::from_frequencies(3, 2, 1.0, {0.5, 1.3, 2.5}, {0.2, 0.2}, HalfInteger::from_int(2));
    const FullBasis b = build_full_basis(3, 2, m.max_excitation);
    const Operator full = build_full_h(m, b, true);
    const Operator hint = build_full_h(m, b, false);
    const Operator diff = full - hint;
    // w_f Nhat + w A, constant on every sector
    for (std::size_t k = 0; k < b.sectors().size(); ++k) {
      const double expect = m.omega_f * b.sectors()[k].excitation.value() + m.mean_frequency() * 2;
      for (std::size_t i = 0; i < b.sectors()[k].space.size(); ++i) {
        const auto ii = Eigen::Index(b.offset(k) + i);
        CHECK(diff.matrix(ii, ii).real() == doctest::Approx(expect).epsilon(1e-13));
      }
    }
    CHECK(offdiag_norm(diff) == 0.0);
  }
  SUBCASE("hermitian and conserves Nhat") {
    Rng rng(17);
    for (int levels = 2; levels <= 4; ++levels)
      for (int atoms = 1; atoms <= 3; ++atoms) {
        std::vector<double> d(levels, 0.0), g(levels - 1);
        for (int j = 1; j < levels; ++j) d[j] = rng.uniform(-20, 20);
        for (auto& x : g) x = rng.uniform(0.1, 1);
        const auto m = model(d, g, atoms, 3);
        const FullBasis b = build_full_basis(levels, atoms, m.max_excitation);
        const Operator h = build_full_h(m, b, true);
        CHECK(hermiticity_residual(h) <= 1e-12);
        CHECK(frobenius_norm(commutator(h, excitation_op(b.space()))) <= 1e-12);
      }
  }
  CHECK_THROWS_AS(build_full_h(model({0, 10, 0}, {1, 1}), product_space(4, 1, 0, 2)), Error);
}

TEST_CASE("one-photon constants") {
  const auto a3 = alpha1(model({0, 10, 0}, {1, 2}));
  CHECK(a3[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(a3[1] == doctest::Approx(-0.2).epsilon(1e-15));
  const auto a4 = alpha1(model({0, 10, 15, 0}, {1, 1, 1}));
  CHECK(a4[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(a4[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(a4[2] == doctest::Approx(-1.0 / 15).epsilon(1e-15));

  std::vector<std::string> warnings;
  alpha1(model({0, 4, 0}, {1, 1}), {}, &warnings);
  CHECK(warnings.size() == 2);
  try {
    alpha1(model({0, 10, 10, 0}, {1, 1, 1}));
    FAIL("expected a one-photon resonance error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("levels 2 and 3") != std::string::npos);
  }
  CHECK_THROWS_AS(alpha1(model({0, 1.5, 0}, {1, 1})), Error);  // |alpha| > 0.5
  SmallnessPolicy loose;
  loose.fail = 2;
  CHECK_NOTHROW(alpha1(model({0, 1.5, 0}, {1, 1}), loose));
}

TEST_CASE("multiphoton constants") {
  const auto p3 = psi_ladder(model({0, 10, 0}, {1, 2}));
  CHECK(p3[0] == std::vector<double>{1, 2});
  CHECK(p3[1][0] == doctest::Approx(-0.4).epsilon(1e-15));

  const auto m4 = model({0, 10, 15, 0}, {1, 1, 1});
  const auto p4 = psi_ladder(m4);
  REQUIRE(p4.size() == 3);
  CHECK(p4[1].size() == 2);
  CHECK(p4[2].size() == 1);
  CHECK(p4[1][0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(p4[1][1] == doctest::Approx(-4.0 / 15).epsilon(1e-14));
  CHECK(std::abs(p4[2][0] - 0.02) <= 1e-16);

  const auto a2 = alpha2(m4);
  CHECK(a2[0] == doctest::Approx(0.1 / 15).epsilon(1e-14));
  CHECK(a2[1] == doctest::Approx((-4.0 / 15) / (-10)).epsilon(1e-14));
  const auto b = beta(m4);
  CHECK(b(2, 0) == doctest::Approx((-1.0 / 15) / (-25)).epsilon(1e-14));
  for (int i = 0; i < 3; ++i) CHECK(std::isnan(b(i, i)));
  CHECK(b(0, 1) == doctest::Approx(0.1 * 1 / (10 + 10 - 15)).epsilon(1e-14));

  // Two-photon resonance between levels 1 and 3 kills alpha_1^(2).
  const auto res = model({0, 10, 0, -12}, {1, 1, 1});
  CHECK_THROWS_AS(alpha2(res), Error);
  const CouplingLadder lad = coupling_ladder(res);
  CHECK(std::isnan(lad.alpha2[0]));
  CHECK(std::isfinite(lad.alpha2[1]));
  CHECK(lad.psi_at(1, 1) == 1.0);
  CHECK(lad.psi_at(2, 2) == doctest::Approx(p3[1][0] * 0 + psi_ladder(res)[1][1]));
}

TEST_CASE("psi ladder against closed forms") {
  Rng rng(2024);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m3 = random_resonant(rng, 3, 0.2);
    const double c3 = -2 * m3.g(1) * m3.g(2) / m3.delta(2);
    worst = std::max(worst, std::abs(psi_ladder(m3)[1][0] - c3) / std::abs(c3));

    const auto m = random_resonant(rng, 4, 0.2);
    const double g1 = m.g(1), g2 = m.g(2), g3 = m.g(3), d2 = m.delta(2), d3 = m.delta(3);
    const auto p = psi_ladder(m);
    const double p12 = g1 * g2 * (2 * d2 - d3) / (d2 * (d3 - d2));
    const double p22 = g2 * g3 * (2 * d3 - d2) / (d3 * (d2 - d3));
    const double p13 = 3 * g1 * g2 * g3 / (d3 * d2);
    // scale each comparison by the size of the terms that cancel in the recurrence
    const double s2a = std::abs(g1 * g2 / d2) + std::abs(g1 * g2 / (d3 - d2));
    const double s2b = std::abs(g2 * g3 / d3) + std::abs(g2 * g3 / (d3 - d2));
    const double s3 = std::abs(g3 / d3 * p[1][0]) + std::abs(g1 / d2 * p[1][1]);
    worst = std::max({worst, std::abs(p[1][0] - p12) / s2a, std::abs(p[1][1] - p22) / s2b, std::abs(p[2][0] - p13) / s3});
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("order hierarchy") {
  // |psi^(k+1)| <= c max|alpha| |psi^(k)| level by level, c = 5. Compared as the
  // largest entry of each order: a single psi_j^(k) can vanish by cancellation
  // (2 D2 = D3 for psi_1^(2)) while the next order does not.
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    for (int levels : {3, 4, 5}) {
      auto m = random_resonant(rng, levels, 0.1);
      const auto a = alpha1(m);
      double amax = 0;
      for (double x : a) amax = std::max(amax, std::abs(x));
      const auto p = psi_ladder(m);
      for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        double lo = 0, hi = 0;
        for (double x : p[k]) lo = std::max(lo, std::abs(x));
        for (double x : p[k + 1]) hi = std::max(hi, std::abs(x));
        CHECK(hi <= 5 * amax * lo);
      }
    }
  }
}

TEST_CASE("first transformation") {
  SUBCASE("T1 removes the one-photon couplings") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const int levels = 3 + trial % 2;
      const auto m = random_resonant(rng, levels, 0.2, 1 + trial % 3, 4);
      const FullBasis b = build_full_basis(levels, m.atoms, m.max_excitation);
      const Operator t = t1_generator(m, b.space());
      const Operator h0 = reference_h0(m, b.space());
      CHECK(antihermiticity_residual(t) == 0.0);
      CHECK(frobenius_norm(commutator(t, h0) + coupling_v(m, b.space())) <= 1e-10);
    }
  }
  SUBCASE("two-level generator is the spin-1/2 rotation") {
    const double g = 0.2, d = 4.0;
    const auto m = model({0, d}, {g}, 1, 1);
    const SectorBasis sec = build_sector(2, 1, HalfInteger::from_twice(1));
    const Operator t = t1_generator(m, sec.space);
    const BasisState low{1, {1, 0}}, up{0, {0, 1}};
    CHECK(std::abs(at(t, sec.space, up, low) - g / d) <= 1e-16);
    CHECK(std::abs(at(t, sec.space, low, up) + g / d) <= 1e-16);
  }
  SUBCASE("one-photon residual after conjugation is second order") {
    std::vector<double> eps, rel;
    for (double s : {1.0, 0.5, 0.25}) {
      const auto m = model({0, 20 / s, 0}, {1, 1.2});
      const FullBasis b = build_full_basis(3, 1, m.max_excitation);
      const Operator h = build_full_h(m, b);
      const Operator hk = conjugate(expm_antihermitian(t1_generator(m, b.space())), h);
      // one-photon matrix elements are those of V
      const Operator v = coupling_v(m, b.space());
      double left = 0;
      for (Eigen::Index r = 0; r < v.dim(); ++r)
        for (Eigen::Index c = 0; c < v.dim(); ++c)
          if (v.matrix(r, c) != cplx(0)) left += std::norm(hk.matrix(r, c));
      const double amax = 1.2 * s / 20;
      eps.push_back(amax);
      rel.push_back(std::sqrt(left) / frobenius_norm(v));
      // photon-number factors up to n = 5 enter the prefactor
      CHECK(rel.back() <= 10 * amax * amax);
    }
    CHECK(testing::slope(eps, rel) == doctest::Approx(2).epsilon(0.05));
  }
}

TEST_CASE("first-order diagonal terms") {
  SUBCASE("second-order level shifts") {
    // Every state shifts by sum |V_sr|^2 / (E_s - E_r) over its one-photon partners.
    Rng rng(31);
    for (int trial = 0; trial < 12; ++trial) {
      const int levels = 3 + trial % 2;
      const auto m = random_resonant(rng, levels, 0.2, 1 + trial % 3, 4);
      const FullBasis b = build_full_basis(levels, m.atoms, m.max_excitation);
      const StateSpace& sp = b.space();
      const Operator hd = h_diag_first(m, sp);
      CHECK(offdiag_norm(hd) == 0.0);
      for (std::size_t s = 0; s < sp.size(); ++s) {
        double es = 0;
        for (int j = 1; j <= levels; ++j) es += m.delta(j) * sp[s].occupations[j - 1];
        double shift = 0;
        for (int j = 1; j < levels; ++j) {
          const auto& o = sp[s].occupations;
          // a S_+^{j,j+1}: photon absorbed, j -> j+1
          if (sp[s].photons > 0 && o[j - 1] > 0)
            shift += m.g(j) * m.g(j) * sp[s].photons * o[j - 1] * (o[j] + 1) / (m.delta(j) - m.delta(j + 1));
          // a^dag S_-^{j,j+1}: photon emitted, j+1 -> j
          if (o[j] > 0)
            shift += m.g(j) * m.g(j) * (sp[s].photons + 1) * o[j] * (o[j - 1] + 1) / (m.delta(j + 1) - m.delta(j));
        }
        CHECK(std::abs(hd.matrix(Eigen::Index(s), Eigen::Index(s)).real() - shift) <= 1e-12 * std::max(1.0, std::abs(shift)));
        (void)es;
      }
    }
  }
  SUBCASE("state (n, level 1)") {
    const double g1 = 0.8;
    const auto m = model({0, 12, 0}, {g1, 1.1});
    const FullBasis b = build_full_basis(3, 1, m.max_excitation);
    const Operator hd = h_diag_first(m, b.space());
    const double a1 = g1 / 12;
    for (int n = 0; n <= 5; ++n) {
      const BasisState s{n, {1, 0, 0}};
      // -1/2 g1 a1 (2n + 1) + 1/2 g1 a1 <{S+, S-}>, the anticommutator being 1
      CHECK(at(hd, b.space(), s, s).real() == doctest::Approx(-0.5 * g1 * a1 * (2 * n + 1) + 0.5 * g1 * a1).epsilon(1e-14));
    }
  }
  SUBCASE("quoted normalization halves the inversion") {
    const auto m = model({0, 12, 0}, {0.8, 1.1}, 2);
    const FullBasis b = build_full_basis(3, 2, m.max_excitation);
    const Operator diff = h_diag_first(m, b.space(), StarkConvention::quoted) - h_diag_first(m, b.space());
    const auto a = alpha1(m);
    for (std::size_t s = 0; s < b.space().size(); ++s) {
      const auto& st = b.space()[s];
      double expect = 0;
      for (int j = 1; j < 3; ++j)
        expect -= 0.25 * m.g(j) * a[j - 1] * (st.occupations[j] - st.occupations[j - 1]) * (2 * st.photons + 1);
      CHECK(diff.matrix(Eigen::Index(s), Eigen::Index(s)).real() == doctest::Approx(expect).epsilon(1e-13));
    }
  }
  SUBCASE("no coupling") {
    const auto m = model({0, 12, 0}, {0, 0});
    const FullBasis b = build_full_basis(3, 1, m.max_excitation);
    CHECK(max_abs(h_diag_first(m, b.space()).matrix) == 0.0);
  }
  SUBCASE("diagonal of the conjugated Hamiltonian to third order") {
    std::vector<double> eps, err;
    for (double s : {1.0, 0.5, 0.25}) {
      const auto m = model({0, 8 / s, 3 / s, 14 / s}, {1, 0.9, 1.1}, 1, 4);
      const FullBasis b = build_full_basis(4, 1, m.max_excitation);
      const Operator h = build_full_h(m, b);
      const Operator hk = conjugate(expm_antihermitian(t1_generator(m, b.space())), h);
      const RealVector target = (reference_h0(m, b.space()) + h_diag_first(m, b.space())).real_diagonal();
      double amax = 0;
      for (double x : alpha1(m)) amax = std::max(amax, std::abs(x));
      eps.push_back(amax);
      err.push_back((hk.real_diagonal() - target).cwiseAbs().maxCoeff());
    }
    CHECK(testing::slope(eps, err) >= 2.5);
  }
}

TEST_CASE("two-photon effective Hamiltonian") {
  const double g1 = 0.9, g2 = 1.2, d2 = 15;
  const auto m = model({0, d2, 0}, {g1, g2}, 1, 6);
  const FullBasis b = build_full_basis(3, 1, m.max_excitation);
  const StateSpace& sp = b.space();
  const Operator h = effective_two_photon(m, sp);
  CHECK(hermiticity_residual(h) <= 1e-15);
  CHECK(frobenius_norm(commutator(h, excitation_op(sp))) <= 1e-12);
  for (int n = 2; n <= 6; ++n) {
    const BasisState s1{n, {1, 0, 0}}, s3{n - 2, {0, 0, 1}};
    CHECK(std::abs(at(h, sp, s3, s1)) == doctest::Approx(g1 * g2 / d2 * std::sqrt(n * (n - 1.0))).epsilon(1e-14));
    // Stark shifts equal the second-order shifts from the empty middle level.
    CHECK(at(h, sp, s1, s1).real() == doctest::Approx(-g1 * g1 * n / d2).epsilon(1e-14));
    CHECK(at(h, sp, s3, s3).real() == doctest::Approx(-g2 * g2 * (n - 1) / d2).epsilon(1e-14));
  }
  CHECK(std::abs(at(h, sp, {0, {0, 0, 1}}, {2, {1, 0, 0}})) == doctest::Approx(g1 * g2 / d2 * std::sqrt(2.0)));
  // level 2 is projected out
  for (std::size_t s = 0; s < sp.size(); ++s)
    if (sp[s].occupations[1] > 0) CHECK(h.matrix.row(Eigen::Index(s)).norm() == 0.0);

  SUBCASE("quoted sign") {
    const Operator q = effective_two_photon(m, sp, true, StarkConvention::quoted);
    CHECK(max_abs(q.matrix + h.matrix) <= 1e-15);
  }
  SUBCASE("symmetric couplings") {
    const double g = 0.7;
    const auto ms = model({0, d2, 0}, {g, g}, 2, 4);
    const FullBasis bs = build_full_basis(3, 2, ms.max_excitation);
    const Operator hs = effective_two_photon(ms, bs.space(), true, StarkConvention::quoted);
    for (std::size_t s = 0; s < bs.space().size(); ++s) {
      const auto& st = bs.space()[s];
      if (st.occupations[1] > 0) continue;
      const double sz = 0.5 * (st.occupations[2] - st.occupations[0]);
      CHECK(hs.matrix(Eigen::Index(s), Eigen::Index(s)).real() ==
            doctest::Approx((sz + 1) * g * g / d2 + 2 * g * g / d2 * st.photons).epsilon(1e-14));
    }
  }
  SUBCASE("unprojected form") {
    const Operator u = effective_two_photon(m, sp, false);
    const Operator expect = reference_h0(m, sp) + h_diag_first(m, sp) + 0.5 * psi_ladder(m)[1][0] * multiphoton_coupling(sp, 1, 2);
    CHECK(max_abs(u.matrix - expect.matrix) <= 1e-15);
  }
  SUBCASE("block eigenvalues against the exact sector") {
    std::vector<double> eps, err;
    for (double s : {1.0, 0.5, 0.25}) {
      const auto ms = model({0, 10 / s, 0}, {g1, g2}, 1, 4);
      const SectorBasis sec = build_sector(3, 1, HalfInteger::from_int(3));  // n = 4
      const RealVector exact = testing::oracle_eigenvalues(build_full_h(ms, sec.space).matrix);
      const Operator he = effective_two_photon(ms, sec.space);
      const BasisState s1{4, {1, 0, 0}}, s3{2, {0, 0, 1}};
      const auto i1 = Eigen::Index(sec.space.index_of(s1)), i3 = Eigen::Index(sec.space.index_of(s3));
      Matrix blk(2, 2);
      blk << he.matrix(i1, i1), he.matrix(i1, i3), he.matrix(i3, i1), he.matrix(i3, i3);
      const RealVector approx = testing::oracle_eigenvalues(blk);
      // the two exact levels near zero; the third sits near Delta_2
      double e = 0;
      for (int k = 0; k < 2; ++k) {
        double best = 1e300;
        for (int q = 0; q < 3; ++q) best = std::min(best, std::abs(exact(q) - approx(k)));
        e = std::max(e, best);
      }
      eps.push_back(std::max(g1, g2) * s / 10);
      err.push_back(e);
    }
    CHECK(testing::slope(eps, err) >= 2.0);
  }
  CHECK_THROWS_AS(effective_two_photon(model({0, 10, 1}, {1, 1}), sp), Error);
  CHECK_THROWS_AS(effective_two_photon(model({0, 10, 15, 0}, {1, 1, 1}), product_space(4, 1, 0, 2)), Error);
}

TEST_CASE("three-photon effective Hamiltonian") {
  const std::vector<double> g{0.8, 1.1, 0.9};
  const double d2 = 20, d3 = 32;
  const auto m = model({0, d2, d3, 0}, g, 1, 7);
  const FullBasis b = build_full_basis(4, 1, m.max_excitation);
  const StateSpace& sp = b.space();
  const Operator h = effective_three_photon(m, sp);
  CHECK(hermiticity_residual(h) <= 1e-15);
  CHECK(frobenius_norm(commutator(h, excitation_op(sp))) <= 1e-12);
  for (int n = 3; n <= 7; ++n) {
    const BasisState s1{n, {1, 0, 0, 0}}, s4{n - 3, {0, 0, 0, 1}};
    CHECK(std::abs(at(h, sp, s4, s1)) ==
          doctest::Approx(g[0] * g[1] * g[2] / (d2 * d3) * std::sqrt(n * (n - 1.0) * (n - 2.0))).epsilon(1e-13));
    CHECK(at(h, sp, s1, s1).real() == doctest::Approx(-g[0] * g[0] * n / d2).epsilon(1e-14));
    CHECK(at(h, sp, s4, s4).real() == doctest::Approx(-g[2] * g[2] * (n - 2) / d3).epsilon(1e-14));
  }
  SUBCASE("quoted Stark terms") {
    const Operator q = effective_three_photon(m, sp, false, StarkConvention::quoted);
    for (int n = 3; n <= 7; ++n) {
      const BasisState s1{n, {1, 0, 0, 0}}, s4{n - 3, {0, 0, 0, 1}};
      CHECK(at(q, sp, s1, s1).real() == doctest::Approx(-0.5 * g[0] * g[0] / d2 * (n - 0.5)).epsilon(1e-14));
      CHECK(at(q, sp, s4, s4).real() == doctest::Approx(-0.5 * g[2] * g[2] / d3 * (n - 3 + 1.5)).epsilon(1e-14));
    }
  }
  SUBCASE("coupling and Stark terms scale differently") {
    auto parts = [&](double s) {
      const auto ms = model({0, s * d2, s * d3, 0}, g, 1, 7);
      const Operator hs = effective_three_photon(ms, sp);
      const Operator diag = Operator::diagonal(hs.real_diagonal(), hs.basis_tag);
      return std::pair{frobenius_norm(hs - diag), frobenius_norm(diag)};
    };
    const auto [c1, s1] = parts(1);
    const auto [c2, s2] = parts(2);
    CHECK(c1 / c2 == doctest::Approx(4).epsilon(0.1));
    CHECK(s1 / s2 == doctest::Approx(2).epsilon(0.1));
  }
  SUBCASE("higher-order terms") {
    const auto p = psi_ladder(m);
    const auto a2 = alpha2(m);
    const Operator diff = effective_three_photon(m, sp, true) - h;
    for (int n = 3; n <= 7; ++n) {
      const BasisState s1{n, {1, 0, 0, 0}}, s4{n - 3, {0, 0, 0, 1}};
      const double k = n - 3;
      CHECK(at(diff, sp, s1, s1).real() == doctest::Approx(-0.25 * a2[0] * p[1][0] * n * (n - 1)).epsilon(1e-13));
      CHECK(at(diff, sp, s4, s4).real() == doctest::Approx(0.25 * a2[1] * p[1][1] * (k + 1) * (k + 2)).epsilon(1e-13));
    }
    CHECK(offdiag_norm(diff) == 0.0);
    // the collective shift needs both levels occupied
    const auto m2 = model({0, d2, d3, 0}, g, 2, 6);
    const FullBasis b2 = build_full_basis(4, 2, m2.max_excitation);
    const Operator d2c = effective_three_photon(m2, b2.space(), true) - effective_three_photon(m2, b2.space());
    const Operator d2q = effective_three_photon(m2, b2.space(), true, StarkConvention::quoted) -
                         effective_three_photon(m2, b2.space(), false, StarkConvention::quoted);
    const BasisState mix{4, {1, 0, 0, 1}};
    const double photon_terms = -0.25 * (a2[0] * p[1][0] * 4 * 3 - a2[1] * p[1][1] * 5 * 6);
    const double c = 0.5 * (g[0] / d2 * g[2] - g[2] / d3 * g[0]);
    CHECK(at(d2c, b2.space(), mix, mix).real() == doctest::Approx(photon_terms - c * c / (d2 + d3)).epsilon(1e-13));
    CHECK(at(d2q, b2.space(), mix, mix).real() == doctest::Approx(photon_terms - 0.5 * beta(m2)(2, 0)).epsilon(1e-13));
    // 1/Delta^3 against 1/Delta
    const auto mb = model({0, 2 * d2, 2 * d3, 0}, g, 1, 7);
    const double r = frobenius_norm(effective_three_photon(m, sp, true) - h) /
                     frobenius_norm(effective_three_photon(mb, sp, true) - effective_three_photon(mb, sp));
    CHECK(r == doctest::Approx(8).epsilon(1e-10));
  }
  SUBCASE("projection") {
    const auto mask = empty_levels_mask(sp, {2, 3});
    std::size_t kept = 0;
    for (const auto& st : sp) kept += st.occupations[1] == 0 && st.occupations[2] == 0;
    CHECK(std::size_t(std::count(mask.begin(), mask.end(), true)) == kept);
    CHECK(max_abs(project(h, mask).matrix - h.matrix) == 0.0);
  }
  CHECK_THROWS_AS(effective_three_photon(model({0, 10, 0}, {1, 1}), product_space(3, 1, 0, 2)), Error);
  CHECK_THROWS_AS(effective_three_photon(model({0, 10, 10, 0}, {1, 1, 1}), sp), Error);
  CHECK_THROWS_AS(effective_three_photon(model({0, 10, -10, 0}, {1, 1, 1}), sp), Error);  // two-photon 2 <-> 4
}

TEST_CASE("second transformation") {
  const auto m = model({0, 10, 15, 0}, {1, 1, 1}, 2, 4);
  const FullBasis b = build_full_basis(4, 2, m.max_excitation);
  const StateSpace& sp = b.space();
  const auto [t21, t22] = t2_generators(m, sp);
  CHECK(antihermiticity_residual(t21) <= 1e-15);
  CHECK(antihermiticity_residual(t22) <= 1e-15);
  const Operator h0 = reference_h0(m, sp);
  const auto p = psi_ladder(m);
  Operator two = Operator::zero(sp);
  for (int j = 1; j <= 2; ++j) two += 0.5 * p[1][j - 1] * multiphoton_coupling(sp, j, 2);
  CHECK(frobenius_norm(commutator(t21, h0) + two) <= 1e-12);
  CHECK(frobenius_norm(commutator(t22, h0) + h_nondiag_first(m, sp)) <= 1e-12);
  CHECK(frobenius_norm(h_nondiag_first(m, sp)) > 0);

  const auto z = model({0, 10, 15, 0}, {0, 0, 0}, 2, 4);
  const auto [z1, z2] = t2_generators(z, sp);
  CHECK(max_abs(z1.matrix) == 0.0);
  CHECK(max_abs(z2.matrix) == 0.0);

  SUBCASE("conjugation removes the two-photon blocks") {
    for (double s : {1.0, 0.5}) {
      const auto ms = model({0, 10 / s, 15 / s, 0}, {1, 1, 1}, 1, 5);
      const FullBasis bs = build_full_basis(4, 1, ms.max_excitation);
      Operator tw = Operator::zero(bs.space());
      const auto ps = psi_ladder(ms);
      for (int j = 1; j <= 2; ++j) tw += 0.5 * ps[1][j - 1] * multiphoton_coupling(bs.space(), j, 2);
      const Operator hh = reference_h0(ms, bs.space()) + tw;
      const Operator k = conjugate(expm_antihermitian(t2_generators(ms, bs.space()).first), hh);
      double left = 0;
      for (Eigen::Index r = 0; r < tw.dim(); ++r)
        for (Eigen::Index c = 0; c < tw.dim(); ++c)
          if (tw.matrix(r, c) != cplx(0)) left += std::norm(k.matrix(r, c));
      double amax = 0;
      for (double x : alpha2(ms)) amax = std::max(amax, std::abs(x));
      CHECK(std::sqrt(left) <= 2 * amax * frobenius_norm(tw));
    }
  }
}

TEST_CASE("resonant pair coupling") {
  const auto m3 = model({0, 10, 0}, {1, 2});
  CHECK(resonant_pair_coupling(m3, 4) == doctest::Approx(0.5 * -0.4 * std::sqrt(12.0)).epsilon(1e-14));
  const auto m4 = model({0, 10, 15, 0}, {1, 1, 1});
  CHECK(resonant_pair_coupling(m4, 5) == doctest::Approx(0.02 / 3 * std::sqrt(60.0)).epsilon(1e-14));
  CHECK(resonant_pair_coupling(m4, 2) == 0.0);
}
