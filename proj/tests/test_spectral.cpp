#include "midpoint/spectral.hpp"

#include <numbers>

#include "test_util.hpp"

using namespace midpoint;
using test::check_errc;

namespace {

constexpr double zero_radius = 3e-3;

Ringnet unit_net(const NetLayout& layout, std::size_t k) {
  std::vector<Complex> pts(layout.size(), 0.0);
  pts[k] = 1.0;
  return Ringnet(layout, std::move(pts));
}

std::vector<Complex> block_union(const FrequencyBlocks& fb) {
  std::vector<Complex> all;
  for (const auto& B : fb.blocks) {
    auto e = eigenvalues(B);
    all.insert(all.end(), e.begin(), e.end());
  }
  sort_spectrum(all);
  return all;
}

Complex subdominant_of(std::vector<Complex> values) {
  auto one = std::min_element(values.begin(), values.end(), [](Complex a, Complex b) {
    return std::abs(a - 1.0) < std::abs(b - 1.0);
  });
  values.erase(one);
  sort_spectrum(values);
  return values.front();
}

}  // namespace

TEST_CASE("assemble_matrix: stochastic rows and unit-net columns") {
  for (int n = 2; n <= 5; ++n)
    for (int m : {3, 4, 5, 7}) {
      const auto kind = kind_for_degree(n);
      const int rho = spline_ring(n);
      const auto S = assemble_matrix(n, m, kind, rho, true);
      CAPTURE(n);
      CAPTURE(m);
      CHECK(S.size() == NetLayout(m, kind, rho + 1).size());
      CHECK(row_sum_error(S) <= 1e-12);
      CHECK(exact_stochastic(S));
      Eigen::VectorXd ones = Eigen::VectorXd::Ones(S.S.rows());
      CHECK(((S.S * ones) - ones).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(positive_column(S, 2).has_value());
      for (std::size_t k = 0; k < S.size(); ++k) {
        const auto out = subdivide_ringnet(unit_net(S.layout, k), n);
        double d = 0.0;
        for (std::size_t r = 0; r < S.size(); ++r)
          d = std::max(d, std::abs(out[r] - S.S(Eigen::Index(r), Eigen::Index(k))));
        REQUIRE(d <= 1e-14);
      }
    }
}

TEST_CASE("assemble_matrix: preconditions") {
  check_errc(Errc::too_few_rings, [] { assemble_matrix(5, 5, NetKind::primal, 1); });
  check_errc(Errc::parity_mismatch, [] { assemble_matrix(3, 5, NetKind::dual, 3); });
  check_errc(Errc::bad_valence, [] { assemble_matrix(3, 2, NetKind::primal, 3); });
  check_errc(Errc::usage_error, [] { exact_stochastic(assemble_matrix(2, 5, NetKind::dual, 2)); });
}

TEST_CASE("matrix/operator agreement on random nets") {
  std::mt19937_64 rng(17);
  int count = 0;
  for (int n = 2; n <= 6; ++n)
    for (int m : {3, 5, 6, 7}) {
      const auto kind = kind_for_degree(n);
      const auto S = assemble_matrix(n, m, kind, spline_ring(n));
      for (int t = 0; t < 5; ++t, ++count) {
        const auto net = test::random_net(m, kind, S.layout.ring_count(), rng);
        CHECK(test::max_diff(apply_matrix(S, net).points(),
                             subdivide_ringnet(net, n).points()) < 1e-12);
      }
    }
  CHECK(count == 100);
  const auto S = assemble_matrix(2, 5, NetKind::dual, 2);
  check_errc(Errc::topology_mismatch,
             [&] { apply_matrix(S, Ringnet::zeros(5, NetKind::dual, 4)); });
}

TEST_CASE("block_partition: n=2, m=5 ranges cover the matrix disjointly") {
  const auto S = assemble_matrix(2, 5, NetKind::dual, 2);
  REQUIRE(S.partition.has_value());
  const auto& p = *S.partition;
  CHECK(p.core.first == 0);
  CHECK(p.core.second == p.b.first);
  CHECK(p.b.second == p.c.first);
  CHECK(p.c.second == p.outer.first);
  CHECK(p.outer.second == S.size());
  CHECK(p.c.second - p.c.first == 5);
  for (std::size_t k = p.c.first; k < p.c.second; ++k) {
    auto lab = S.label(k);
    CHECK(lab.i == 2);  // dual ring 1 corner
    CHECK(lab.j == 2);
  }
  for (std::size_t k = p.b.first; k < p.b.second; ++k) CHECK(S.layout.ring_of(k) == 1);
  for (std::size_t k = p.outer.first; k < p.outer.second; ++k) CHECK(S.layout.ring_of(k) == 2);
}

TEST_CASE("block_partition: triangular form and block spectra") {
  for (int n = 2; n <= 6; ++n)
    for (int m : {3, 4, 5, 7}) {
      CAPTURE(n);
      CAPTURE(m);
      const auto S = assemble_matrix(n, m, kind_for_degree(n), spline_ring(n));
      const auto blocks = block_partition(S);
      CHECK(blocks.max_upper <= 1e-14);
      CHECK(blocks.max_outer_diag == 0.0);

      std::vector<Complex> parts;
      for (const Eigen::MatrixXd* M : {&blocks.A, &blocks.B, &blocks.C}) {
        auto e = eigenvalues(*M);
        parts.insert(parts.end(), e.begin(), e.end());
      }
      const auto& p = blocks.partition;
      parts.insert(parts.end(), p.outer.second - p.outer.first, Complex(0.0));
      const auto match = match_spectra(eigenvalues(S.S), parts, 1e-9, zero_radius);
      CHECK_MESSAGE(match.ok, "deviation " << match.max_deviation);
    }
  check_errc(Errc::too_few_rings,
             [] { block_partition(assemble_matrix(3, 5, NetKind::primal, 1)); });
  auto S = assemble_matrix(3, 5, NetKind::primal, 3);
  S.S(0, Eigen::Index(S.size() - 1)) = 1e-3;
  check_errc(Errc::ordering_violation, [&] { block_partition(S); });
}

TEST_CASE("block_norm_bounds") {
  for (int n = 2; n <= 6; ++n) {
    CAPTURE(n);
    const auto S = assemble_matrix(n, 5, kind_for_degree(n), spline_ring(n), true);
    const auto bb = block_norm_bounds(S);
    CHECK(bb.pass);
    REQUIRE(bb.normB_exact.has_value());
    CHECK(*bb.normB_exact <= Rational(1, 1 << n));
    CHECK(*bb.normC_exact <= Rational(1, 1 << (2 * n)));
    CHECK(bb.normB <= std::ldexp(1.0, -n) + 1e-12);
    CHECK(bb.normC <= std::ldexp(1.0, -2 * n) + 1e-12);
  }
  CHECK(block_norm_bounds(assemble_matrix(2, 6, NetKind::dual, 2)).normC <= 1.0 / 16 + 1e-12);
  CHECK(block_norm_bounds(assemble_matrix(3, 6, NetKind::primal, 3)).normB <= 1.0 / 8 + 1e-12);
}

TEST_CASE("block_norm_bounds: C applied to ones gives the corners of the unit-corner net") {
  for (int n = 2; n <= 5; ++n)
    for (int m : {3, 5}) {
      const auto S = assemble_matrix(n, m, kind_for_degree(n), spline_ring(n));
      const auto blocks = block_partition(S);
      const auto& p = blocks.partition;
      std::vector<Complex> pts(S.size(), 0.0);
      for (std::size_t k = p.c.first; k < p.c.second; ++k) pts[k] = 1.0;
      const auto out = subdivide_ringnet(Ringnet(S.layout, pts), n);
      const Eigen::VectorXd c1 = blocks.C.rowwise().sum();
      for (std::size_t k = p.c.first; k < p.c.second; ++k)
        CHECK(std::abs(out[k] - c1[Eigen::Index(k - p.c.first)]) <= 1e-14);
    }
}

TEST_CASE("frequency_blocks: spectrum union, conjugate pairs, f=0 dominance") {
  for (int n = 2; n <= 6; ++n)
    for (int m = 3; m <= 7; ++m) {
      CAPTURE(n);
      CAPTURE(m);
      const auto S = assemble_matrix(n, m, kind_for_degree(n), spline_ring(n));
      const auto fb = frequency_blocks(S);
      REQUIRE(fb.blocks.size() == std::size_t(m));
      CHECK(fb.has_center == (n % 2 == 1));
      const auto match = match_spectra(eigenvalues(S.S), block_union(fb), 1e-9, zero_radius);
      CHECK_MESSAGE(match.ok, "deviation " << match.max_deviation);
      for (int f = 1; f < m; ++f)
        CHECK((fb.blocks[std::size_t(m - f)] - fb.blocks[std::size_t(f)].conjugate())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-13);
      CHECK(std::abs(eigenvalues(fb.blocks[0]).front() - 1.0) <= 1e-12);
    }
  auto S = assemble_matrix(3, 5, NetKind::primal, 3);
  const auto k = S.layout.index(2, 2, 1);
  S.S(Eigen::Index(k), Eigen::Index(k)) += 1e-6;
  check_errc(Errc::orbit_mismatch, [&] { frequency_blocks(S); });
}

TEST_CASE("net_from_block_vector: block eigenvectors are eigennets of S") {
  const auto S = assemble_matrix(4, 5, NetKind::dual, spline_ring(4));
  const auto fb = frequency_blocks(S);
  for (int f = 0; f < 5; ++f) {
    const auto dp = dominant_pair_per_frequency(fb, S.layout, f);
    const auto image = apply_matrix(S, dp.eigennet);
    CHECK(test::max_diff(image.points(), dp.eigennet.scaled(dp.lambda).points()) <= 1e-12);
  }
  check_errc(Errc::bad_frequency, [&] { dominant_pair_per_frequency(fb, S.layout, 5); });
}

TEST_CASE("dominant_pair_per_frequency: regular valence and f=0") {
  for (int n = 2; n <= 6; ++n) {
    CAPTURE(n);
    const auto S4 = assemble_matrix(n, 4, kind_for_degree(n), spline_ring(n));
    const auto fb4 = frequency_blocks(S4);
    CHECK(std::abs(dominant_pair_per_frequency(fb4, S4.layout, 1).lambda - 0.5) <= 1e-9);
    CHECK(std::abs(dominant_pair_per_frequency(fb4, S4.layout, 2).lambda - 0.25) <= 1e-9);
    CHECK(std::abs(dominant_pair_per_frequency(fb4, S4.layout, 3).lambda - 0.5) <= 1e-9);
    for (int m : {3, 5, 7}) {
      const auto S = assemble_matrix(n, m, kind_for_degree(n), spline_ring(n));
      const auto dp = dominant_pair_per_frequency(frequency_blocks(S), S.layout, 0);
      CHECK(std::abs(dp.lambda - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("reflection-symmetric eigennets have real eigenvalues") {
  int symmetric = 0;
  for (int n = 2; n <= 6; ++n)
    for (int m = 3; m <= 7; ++m) {
      const auto S = assemble_matrix(n, m, kind_for_degree(n), spline_ring(n));
      const auto fb = frequency_blocks(S);
      for (int f = 0; f < m; ++f) {
        CAPTURE(n);
        CAPTURE(m);
        CAPTURE(f);
        const auto dp = dominant_pair_per_frequency(fb, S.layout, f);
        const auto sym = symmetry_check(dp.eigennet, f, 1e-9);
        CHECK(sym.rotation);
        // at f = m/2 the dominant eigenvalue is not simple
        if (f >= 1 && 2 * f < m) CHECK(sym.reflection);
        if (sym.reflection) {
          ++symmetric;
          CHECK(std::abs(dp.lambda.imag()) < 1e-9);
        }
        if (f >= 1 && 2 * f <= m) CHECK(dp.lambda.real() > 0.0);
      }
    }
  CHECK(symmetric > 0);
}

TEST_CASE("multiplicity on the full matrix") {
  for (int n = 2; n <= 4; ++n)
    for (int m : {3, 5, 6}) {
      CAPTURE(n);
      CAPTURE(m);
      const auto S = assemble_matrix(n, m, kind_for_degree(n), spline_ring(n));
      const auto one = multiplicity(S, 1.0);
      CHECK(one.algebraic == 1);
      CHECK(one.geometric == 1);
      const auto sub = subdominant_of(eigenvalues(S.S));
      const auto ms = multiplicity(S, sub);
      CHECK(ms.algebraic == 2);
      CHECK(ms.geometric == 2);
      CHECK(ms.cluster_radius == doctest::Approx(1e-6));
      const auto mb = multiplicity(frequency_blocks(S), sub);
      CHECK(mb.algebraic == 2);
      CHECK(mb.geometric == 2);
    }
}

TEST_CASE("multiplicity: zero eigenvalue on larger nets") {
  for (int n = 2; n <= 5; ++n)
    for (int extra : {2, 3})
      for (int m : {3, 5}) {
        const int j = core_ring(n) + extra;
        CAPTURE(n);
        CAPTURE(j);
        CAPTURE(m);
        const auto S = assemble_matrix(n, m, kind_for_degree(n), j);
        const auto [b, e] = S.layout.ring_range(j);
        CHECK(geometric_multiplicity(S.S, 0.0) >= int(e - b));
      }
}

TEST_CASE("multiplicity: ambiguous cluster is reported") {
  SubdivisionMatrix S;
  S.S = Eigen::MatrixXd::Zero(3, 3);
  S.S.diagonal() << 1.0, 0.5, 0.5 + 5e-6;
  check_errc(Errc::ill_conditioned, [&] { multiplicity(S, 0.5); });
  S.S(2, 2) = 0.5;
  const auto mult = multiplicity(S, 0.5);
  CHECK(mult.algebraic == 2);
  CHECK(mult.geometric == 2);
  S.S(1, 2) = 1.0;
  const auto jordan = multiplicity(S, 0.5);
  CHECK(jordan.algebraic == 2);
  CHECK(jordan.geometric == 1);
}

TEST_CASE("match_spectra") {
  std::vector<Complex> a{1.0, 0.5, 1e-4, 0.0};
  std::vector<Complex> b{0.0, 0.5 + 1e-12, 2e-4, 1.0};
  CHECK(match_spectra(a, b, 1e-9, 1e-3).ok);
  CHECK_FALSE(match_spectra(a, b, 1e-9, 1e-5).ok);
  b[1] = 0.6;
  CHECK_FALSE(match_spectra(a, b, 1e-9, 1e-3).ok);
  b.pop_back();
  CHECK_FALSE(match_spectra(a, b, 1e-9, 1e-3).ok);
}

TEST_CASE("subdominance on j-nets matches the core matrix") {
  for (int n = 2; n <= 5; ++n)
    for (int m : {3, 5, 6, 7}) {
      CAPTURE(n);
      CAPTURE(m);
      const auto kind = kind_for_degree(n);
      const auto core = assemble_matrix(n, m, kind, core_ring(n));
      const auto fb = frequency_blocks(core);
      const Complex lam = dominant_pair_per_frequency(fb, core.layout, 1).lambda;
      CHECK(std::abs(lam.imag()) < 1e-9);
      for (int j = core_ring(n) + 1; j <= spline_ring(n); ++j) {
        CAPTURE(j);
        const auto S = assemble_matrix(n, m, kind, j);
        CHECK(std::abs(subdominant_of(eigenvalues(S.S)) - lam) <= 1e-9);
      }
    }
}

TEST_CASE("characteristic_mesh") {
  for (int n = 2; n <= 6; ++n)
    for (int m = 3; m <= 7; ++m) {
      CAPTURE(n);
      CAPTURE(m);
      std::vector<double> history;
      const auto cm = characteristic_mesh(n, m, 1e-11, 20000, &history);
      CHECK(cm.last_step < 1e-11);
      CHECK(cm.iterations <= 20000);
      CHECK(cm.residual < 1e-9);
      CHECK(cm.net.ring_count() == spline_ring(n) + 1);
      CHECK(cm.net.kind() == kind_for_degree(n));
      const auto frame = frame_K(2.0 * std::numbers::pi / m);
      for (std::size_t k : half_segment(cm.net.layout())) {
        const auto xy = frame.coords(cm.net[k]);
        CHECK(xy[0] > 0.0);
        CHECK(xy[1] > 0.0);
      }
      const auto sym = symmetry_check(cm.net, 1, 1e-9);
      CHECK(sym.rotation);
      CHECK(sym.reflection);
      CHECK(min_max_norm(cm.net, frame).max == doctest::Approx(1.0).epsilon(1e-12));
      if (m == 4)
        CHECK(std::abs(cm.lambda - 0.5) <= 1e-9);
      else
        CHECK((cm.lambda > 0.25 && cm.lambda < 1.0));

      const auto S = assemble_matrix(n, m, kind_for_degree(n), spline_ring(n));
      CHECK(std::abs(cm.lambda - subdominant_of(block_union(frequency_blocks(S)))) <= 1e-9);

      // successive differences stay below every threshold once reached
      REQUIRE(history.size() == std::size_t(cm.iterations));
      for (double eps : {1e-4, 1e-6, 1e-8, 1e-10}) {
        auto first = std::find_if(history.begin(), history.end(),
                                  [&](double d) { return d < eps; });
        REQUIRE(first != history.end());
        CHECK(std::all_of(first, history.end(), [&](double d) { return d < eps; }));
      }
    }
}

TEST_CASE("characteristic_mesh: errors") {
  check_errc(Errc::no_convergence, [] { characteristic_mesh(3, 5, 1e-11, 3); });
  check_errc(Errc::degree_out_of_range, [] { characteristic_mesh(1, 5); });
  check_errc(Errc::bad_valence, [] { characteristic_mesh(3, 2); });
}

TEST_CASE("spectral_report") {
  const auto rep = spectral_report(3, 5);
  CHECK(rep.flags.all());
  CHECK(rep.j == spline_ring(3));
  CHECK(rep.frequencies.size() == 5);
  CHECK(rep.sub_frequencies == std::vector<int>{1, 4});
  CHECK(rep.bounds.pass);
  REQUIRE(rep.monotonicity.size() == 2);
  CHECK(rep.monotonicity[0] > rep.monotonicity[1]);
  CHECK(std::abs(rep.lambda_sub - rep.frequencies[1].dominant) <= 1e-12);

  const auto rep7 = spectral_report(2, 7);
  CHECK(rep7.flags.monotone);
  REQUIRE(rep7.monotonicity.size() == 3);
  CHECK(rep7.monotonicity[0] - rep7.monotonicity[1] > 1e-9);
  CHECK(rep7.monotonicity[1] - rep7.monotonicity[2] > 1e-9);
  CHECK(rep7.monotonicity[2] - 0.25 > 1e-9);

  const auto rep4 = spectral_report(2, 4, false);
  CHECK(rep4.flags.all());
  CHECK(std::abs(rep4.lambda_sub - 0.5) <= 1e-9);

  check_errc(Errc::degree_out_of_range, [] { spectral_report(1, 5); });
}
