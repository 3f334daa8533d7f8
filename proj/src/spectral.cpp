#include "midpoint/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace midpoint {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_valence(int m) {
  if (m < 3) throw Error(Errc::bad_valence, "valence must be >= 3, got " + std::to_string(m));
}

void check_analysis_degree(int n) {
  if (n < 2)
    throw Error(Errc::degree_out_of_range,
                "spectral analysis needs degree >= 2, got " + std::to_string(n));
}

Eigen::VectorXcd to_vector(const std::vector<Complex>& pts) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) v[static_cast<Eigen::Index>(k)] = pts[k];
  return v;
}

std::vector<Complex> to_points(const Eigen::VectorXcd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

}  // namespace

SubdivisionMatrix assemble_matrix(int n, int m, NetKind kind, int j, bool exact) {
  check_valence(m);
  SubdivisionMatrix s;
  s.n = n;
  s.m = m;
  s.kind = kind;
  s.j = j;
  auto rows = subdivision_rows<double>(n, m, kind, j);
  s.layout = NetLayout(m, kind, j + 1);
  const auto size = idx(s.layout.size());
  s.S = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (const auto& [in, w] : rows[k]) s.S(idx(k), idx(in)) = w;
  if (exact) s.exact = subdivision_rows<Rational>(n, m, kind, j);
  if (j >= core_ring(n) + 1) s.partition = partition_of(s.layout, n);
  return s;
}

Ringnet apply_matrix(const SubdivisionMatrix& S, const Ringnet& net) {
  if (!(net.layout() == S.layout))
    throw Error(Errc::topology_mismatch, "net does not match the subdivision matrix");
  Eigen::VectorXcd v = to_vector(net.points());
  Eigen::VectorXcd out = S.S.cast<Complex>() * v;
  return net.with_points(to_points(out));
}

double row_sum_error(const SubdivisionMatrix& S) {
  return (S.S.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

bool exact_stochastic(const SubdivisionMatrix& S) {
  if (!S.exact) throw Error(Errc::usage_error, "matrix was assembled without rational rows");
  for (const auto& row : *S.exact) {
    Rational sum(0);
    for (const auto& [in, w] : row) {
      if (w < 0) return false;
      sum += w;
    }
    if (sum != 1) return false;
  }
  return true;
}

std::optional<std::size_t> positive_column(const SubdivisionMatrix& S, int power) {
  Eigen::MatrixXd P = S.S;
  for (int k = 1; k < power; ++k) P = P * S.S;
  for (Eigen::Index c = 0; c < P.cols(); ++c)
    if ((P.col(c).array() > 0.0).all()) return static_cast<std::size_t>(c);
  return std::nullopt;
}

BlockPartition partition_of(const NetLayout& layout, int n) {
  const int omega = core_ring(n);
  if (layout.outer_ring() < omega + 1)
    throw Error(Errc::too_few_rings, "block partition needs j >= ω+1 = " +
                                         std::to_string(omega + 1));
  BlockPartition p;
  const auto core_end = layout.ring_range(omega).second;
  const auto [b0, e0] = layout.ring_range(omega + 1);
  const auto corner = e0 - static_cast<std::size_t>(layout.valence());
  p.core = {0, core_end};
  p.b = {b0, corner};
  p.c = {corner, e0};
  p.outer = {e0, layout.size()};
  return p;
}

Blocks block_partition(const SubdivisionMatrix& S, double tol) {
  Blocks out;
  out.partition = partition_of(S.layout, S.n);
  const auto& p = out.partition;
  auto block = [&](Range r) {
    return S.S.block(idx(r.first), idx(r.first), idx(r.second - r.first),
                     idx(r.second - r.first));
  };
  out.A = block(p.core);
  out.B = block(p.b);
  out.C = block(p.c);

  const auto size = S.layout.size();
  auto upper_from = [&](std::size_t row) -> std::size_t {
    if (row < p.core.second) return p.core.second;
    if (row < p.b.second) return p.b.second;
    if (row < p.c.second) return p.c.second;
    return S.layout.ring_range(S.layout.ring_of(row)).first;
  };
  for (std::size_t r = 0; r < size; ++r) {
    const std::size_t from = upper_from(r);
    const bool outer = r >= p.outer.first;
    const std::size_t diag_end = outer ? S.layout.ring_range(S.layout.ring_of(r)).second : from;
    for (std::size_t c = from; c < size; ++c) {
      const double v = std::abs(S.S(idx(r), idx(c)));
      if (outer && c < diag_end)
        out.max_outer_diag = std::max(out.max_outer_diag, v);
      else
        out.max_upper = std::max(out.max_upper, v);
    }
  }
  if (out.max_upper > tol || out.max_outer_diag > tol)
    throw Error(Errc::ordering_violation,
                "subdivision matrix is not block lower triangular (upper entry " +
                    std::to_string(std::max(out.max_upper, out.max_outer_diag)) + ")");
  return out;
}

BlockBounds block_norm_bounds(const SubdivisionMatrix& S) {
  const auto p = S.partition ? *S.partition : partition_of(S.layout, S.n);
  BlockBounds bb;
  auto norm = [&](Range r) {
    double best = 0.0;
    for (auto row = r.first; row < r.second; ++row) {
      double sum = 0.0;
      for (auto col = r.first; col < r.second; ++col) sum += std::abs(S.S(idx(row), idx(col)));
      best = std::max(best, sum);
    }
    return best;
  };
  bb.normB = norm(p.b);
  bb.normC = norm(p.c);
  const Rational boundB = Rational(1, 1) / Rational(boost::multiprecision::mpz_int(1) << S.n);
  const Rational boundC = boundB * boundB;
  if (S.exact) {
    auto exact_norm = [&](Range r) {
      Rational best(0);
      for (auto row = r.first; row < r.second; ++row) {
        Rational sum(0);
        for (const auto& [in, w] : (*S.exact)[row])
          if (in >= r.first && in < r.second) sum += abs(w);
        if (sum > best) best = sum;
      }
      return best;
    };
    bb.normB_exact = exact_norm(p.b);
    bb.normC_exact = exact_norm(p.c);
    bb.pass = *bb.normB_exact <= boundB && *bb.normC_exact <= boundC;
  } else {
    bb.pass = bb.normB <= std::ldexp(1.0, -S.n) + 1e-12 &&
              bb.normC <= std::ldexp(1.0, -2 * S.n) + 1e-12;
  }
  return bb;
}

FrequencyBlocks frequency_blocks(const SubdivisionMatrix& S, double tol) {
  const auto& layout = S.layout;
  const int m = layout.valence();
  const auto slots = layout.slot_count();
  FrequencyBlocks fb;
  fb.m = m;
  fb.has_center = layout.has_center();

  // circulant coefficients c_st(d) and the orbit check
  std::vector<Eigen::MatrixXd> coeff(static_cast<std::size_t>(m),
                                     Eigen::MatrixXd::Zero(idx(slots), idx(slots)));
  double mismatch = 0.0;
  for (std::size_t s = 0; s < slots; ++s)
    for (std::size_t t = 0; t < slots; ++t)
      for (int d = 0; d < m; ++d) {
        const double ref = S.S(idx(layout.index_of_slot(s, 0)), idx(layout.index_of_slot(t, d)));
        coeff[static_cast<std::size_t>(d)](idx(s), idx(t)) = ref;
        for (int l = 1; l < m; ++l)
          mismatch = std::max(
              mismatch, std::abs(S.S(idx(layout.index_of_slot(s, l)),
                                     idx(layout.index_of_slot(t, l + d))) - ref));
      }
  if (fb.has_center)
    for (std::size_t s = 0; s < slots; ++s)
      for (int l = 1; l < m; ++l) {
        mismatch = std::max(mismatch, std::abs(S.S(idx(layout.index_of_slot(s, l)), 0) -
                                               S.S(idx(layout.index_of_slot(s, 0)), 0)));
        mismatch = std::max(mismatch, std::abs(S.S(0, idx(layout.index_of_slot(s, l))) -
                                               S.S(0, idx(layout.index_of_slot(s, 0)))));
      }
  if (mismatch > tol)
    throw Error(Errc::orbit_mismatch, "matrix is not rotation equivariant (deviation " +
                                          std::to_string(mismatch) + ")");

  const double root_m = std::sqrt(static_cast<double>(m));
  for (int f = 0; f < m; ++f) {
    const bool center = fb.has_center && f == 0;
    const auto dim = idx(slots + (center ? 1 : 0));
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(dim, dim);
    for (int d = 0; d < m; ++d) {
      const Complex w = std::polar(1.0, two_pi * d * f / m);
      B.topLeftCorner(idx(slots), idx(slots)) += w * coeff[static_cast<std::size_t>(d)];
    }
    if (center) {
      const auto c = idx(slots);
      for (std::size_t s = 0; s < slots; ++s) {
        B(idx(s), c) = root_m * S.S(idx(layout.index_of_slot(s, 0)), 0);
        B(c, idx(s)) = root_m * S.S(0, idx(layout.index_of_slot(s, 0)));
      }
      B(c, c) = S.S(0, 0);
    }
    fb.blocks.push_back(std::move(B));
  }
  return fb;
}

Ringnet net_from_block_vector(const NetLayout& layout, int f, const Eigen::VectorXcd& v) {
  const int m = layout.valence();
  const auto slots = layout.slot_count();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<Complex> pts(layout.size());
  for (std::size_t s = 0; s < slots; ++s)
    for (int l = 0; l < m; ++l)
      pts[layout.index_of_slot(s, l)] =
          scale * v[idx(s)] * std::polar(1.0, two_pi * l * f / m);
  if (layout.has_center() && f % m == 0) pts[0] = v[idx(slots)];
  return Ringnet(layout, std::move(pts), f);
}

namespace {

// Scales a frequency-f net by a unit complex number so that it becomes
// reflection symmetric when its reflection is a multiple of itself, and
// positive on average in frame K.
Ringnet fix_phase(const Ringnet& net, int f) {
  const auto& layout = net.layout();
  Complex inner = 0.0;
  double norm2 = 0.0;
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Complex refl = std::conj(net[reflection_partner(layout, k)]);
    inner += std::conj(net[k]) * refl;
    norm2 += std::norm(net[k]);
  }
  if (norm2 == 0.0) return net;
  const Complex c = inner / norm2;
  Ringnet out = std::abs(c) > 0.5 ? net.scaled(std::polar(1.0, std::arg(c) / 2.0)) : net;
  const int m = layout.valence();
  if (f % m != 0) {
    const auto frame = frame_K(two_pi * f / m);
    double sum = 0.0;
    for (std::size_t k : half_segment(layout)) {
      auto xy = frame.coords(out[k]);
      sum += xy[0] + xy[1];
    }
    if (sum < 0.0) out = out.scaled(-1.0);
  } else {
    Complex sum = 0.0;
    for (const auto& p : out.points()) sum += p;
    if (sum.real() < 0.0) out = out.scaled(-1.0);
  }
  return out;
}

}  // namespace

DominantPair dominant_pair_per_frequency(const FrequencyBlocks& blocks, const NetLayout& layout,
                                         int f) {
  if (f < 0 || f >= blocks.m)
    throw Error(Errc::bad_frequency, "frequency out of range: " + std::to_string(f));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(blocks.blocks[static_cast<std::size_t>(f)]);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::convergence_failure, "eigensolver failed on frequency block " +
                                               std::to_string(f));
  Eigen::Index best = 0;
  const auto& values = solver.eigenvalues();
  for (Eigen::Index k = 1; k < values.size(); ++k)
    if (std::abs(values[k]) > std::abs(values[best]) + 1e-14) best = k;
  DominantPair dp;
  dp.f = f;
  dp.lambda = values[best];
  dp.eigennet = fix_phase(net_from_block_vector(layout, f, solver.eigenvectors().col(best)), f);
  return dp;
}

std::vector<Complex> eigenvalues(const Eigen::MatrixXd& S) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(S, false);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::convergence_failure, "eigensolver failed");
  auto out = to_points(solver.eigenvalues());
  sort_spectrum(out);
  return out;
}

std::vector<Complex> eigenvalues(const Eigen::MatrixXcd& B) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(B, false);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::convergence_failure, "eigensolver failed");
  auto out = to_points(solver.eigenvalues());
  sort_spectrum(out);
  return out;
}

void sort_spectrum(std::vector<Complex>& values) {
  std::stable_sort(values.begin(), values.end(), [](Complex a, Complex b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-12) return ma > mb;
    return std::arg(a) < std::arg(b);
  });
}

SpectrumMatch match_spectra(std::vector<Complex> a, std::vector<Complex> b, double tol,
                            double zero_radius) {
  SpectrumMatch res;
  auto split = [&](std::vector<Complex>& v, std::size_t& zeros) {
    std::vector<Complex> rest;
    for (auto z : v) {
      if (std::abs(z) <= zero_radius)
        ++zeros;
      else
        rest.push_back(z);
    }
    v = std::move(rest);
  };
  split(a, res.zero_cluster_a);
  split(b, res.zero_cluster_b);
  res.ok = a.size() == b.size() && res.zero_cluster_a == res.zero_cluster_b;
  std::vector<bool> used(b.size(), false);
  for (auto z : a) {
    std::size_t best = b.size();
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < b.size(); ++k)
      if (!used[k] && std::abs(b[k] - z) < dist) {
        dist = std::abs(b[k] - z);
        best = k;
      }
    if (best == b.size()) {
      res.ok = false;
      continue;
    }
    used[best] = true;
    res.max_deviation = std::max(res.max_deviation, dist);
  }
  if (res.max_deviation > tol) res.ok = false;
  return res;
}

namespace {

template <class Matrix>
int nullity(const Matrix& M, Complex lambda, double tol) {
  using Scalar = typename Matrix::Scalar;
  const double scale = std::max(M.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  Eigen::MatrixXcd shifted = M.template cast<Complex>();
  shifted.diagonal().array() -= lambda;
  Eigen::VectorXd sv;
  if constexpr (std::is_same_v<Scalar, double>) {
    if (lambda.imag() == 0.0) {
      Eigen::MatrixXd real = shifted.real();
      sv = Eigen::BDCSVD<Eigen::MatrixXd>(real).singularValues();
    } else {
      sv = Eigen::BDCSVD<Eigen::MatrixXcd>(shifted).singularValues();
    }
  } else {
    sv = Eigen::BDCSVD<Eigen::MatrixXcd>(shifted).singularValues();
  }
  return static_cast<int>((sv.array() < tol * scale).count());
}

void count_cluster(const std::vector<Complex>& values, Complex lambda, double radius,
                   int& inside) {
  for (auto z : values) {
    const double d = std::abs(z - lambda);
    if (d <= radius)
      ++inside;
    else if (d <= 10.0 * radius)
      throw Error(Errc::ill_conditioned,
                  "eigenvalue at distance " + std::to_string(d) + " from the cluster of " +
                      std::to_string(lambda.real()) + (lambda.imag() >= 0 ? "+" : "") +
                      std::to_string(lambda.imag()) + "i");
  }
}

}  // namespace

int geometric_multiplicity(const Eigen::MatrixXcd& M, Complex lambda, double tol) {
  return nullity(M, lambda, tol);
}

int geometric_multiplicity(const Eigen::MatrixXd& M, Complex lambda, double tol) {
  return nullity(M, lambda, tol);
}

Multiplicity multiplicity(const SubdivisionMatrix& S, Complex lambda, double tol) {
  Multiplicity mult;
  mult.cluster_radius = cluster_radius(lambda);
  count_cluster(eigenvalues(S.S), lambda, mult.cluster_radius, mult.algebraic);
  mult.geometric = geometric_multiplicity(S.S, lambda, tol);
  return mult;
}

Multiplicity multiplicity(const FrequencyBlocks& blocks, Complex lambda, double tol) {
  Multiplicity mult;
  mult.cluster_radius = cluster_radius(lambda);
  for (const auto& B : blocks.blocks) {
    count_cluster(eigenvalues(B), lambda, mult.cluster_radius, mult.algebraic);
    mult.geometric += geometric_multiplicity(B, lambda, tol);
  }
  return mult;
}

CharacteristicMesh characteristic_mesh(int n, int m, double tol, int max_iter,
                                       std::vector<double>* step_history) {
  check_analysis_degree(n);
  check_valence(m);
  const auto kind = kind_for_degree(n);
  const int rho = spline_ring(n);
  const auto S = assemble_matrix(n, m, kind, rho);
  const auto fb = frequency_blocks(S);
  const Eigen::MatrixXcd& B1 = fb.blocks[1];
  const auto frame = frame_K(two_pi / m);
  const auto& layout = S.layout;
  const auto slots = layout.slot_count();

  auto segment0 = [&](const Ringnet& net) {
    Eigen::VectorXcd q(idx(slots));
    for (std::size_t s = 0; s < slots; ++s) q[idx(s)] = net[layout.index_of_slot(s, 0)];
    return q;
  };
  auto from_segment0 = [&](const Eigen::VectorXcd& q) {
    return net_from_block_vector(layout, 1, q * std::sqrt(static_cast<double>(m)));
  };

  Ringnet net = make_grid_mesh(m, 1, kind, rho + 1);
  net = net.scaled(1.0 / min_max_norm(net, frame).max);
  CharacteristicMesh out;
  for (int k = 0; k < max_iter; ++k) {
    Ringnet next = symmetrize(from_segment0(B1 * segment0(net)), 1);
    const double g = min_max_norm(next, frame).max;
    if (!(g > 0.0)) throw Error(Errc::positivity_violation, "iterate collapsed to zero");
    next = next.scaled(1.0 / g);
    double diff = 0.0;
    for (std::size_t i = 0; i < net.size(); ++i) diff = std::max(diff, std::abs(next[i] - net[i]));
    net = std::move(next);
    out.lambda = g;
    out.iterations = k + 1;
    out.last_step = diff;
    if (step_history) step_history->push_back(diff);
    if (diff < tol) break;
  }
  if (!(out.last_step < tol))
    throw Error(Errc::no_convergence, "power iteration did not converge within " +
                                          std::to_string(max_iter) + " iterations (last step " +
                                          std::to_string(out.last_step) + ")");
  for (std::size_t k : half_segment(layout)) {
    auto xy = frame.coords(net[k]);
    if (!(xy[0] > 0.0 && xy[1] > 0.0))
      throw Error(Errc::positivity_violation, "characteristic mesh is not positive in K");
  }
  // residual with the full operator, independent of the frequency block
  const auto rows = subdivision_rows<double>(n, m, kind, rho);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Complex v = 0.0;
    for (const auto& [in, w] : rows[k]) v += w * net[in];
    out.residual = std::max(out.residual, std::abs(v - out.lambda * net[k]));
  }
  if (!(out.residual < 10.0 * tol))
    throw Error(Errc::no_convergence,
                "eigen-residual " + std::to_string(out.residual) + " exceeds 10 tol");
  out.net = Ringnet(layout, net.points(), 1);
  return out;
}

SpectralReport spectral_report(int n, int m, bool exact) {
  check_analysis_degree(n);
  check_valence(m);
  SpectralReport rep;
  rep.n = n;
  rep.m = m;
  rep.kind = kind_for_degree(n);
  rep.j = spline_ring(n);
  const auto S = assemble_matrix(n, m, rep.kind, rep.j, exact);

  rep.row_sum_error = row_sum_error(S);
  bool nonneg = (S.S.array() >= 0.0).all();
  rep.flags.stochastic =
      exact ? exact_stochastic(S) : (rep.row_sum_error <= 1e-12 && nonneg);

  try {
    auto blocks = block_partition(S);
    rep.max_upper = std::max(blocks.max_upper, blocks.max_outer_diag);
    rep.flags.block_structure = true;
  } catch (const Error& e) {
    if (e.code() != Errc::ordering_violation) throw;
    rep.flags.block_structure = false;
  }
  rep.bounds = block_norm_bounds(S);
  rep.flags.block_bounds = rep.bounds.pass;

  const auto fb = frequency_blocks(S);
  std::vector<Complex> all;
  for (int f = 0; f < m; ++f) {
    FrequencyEntry e;
    e.f = f;
    e.eigenvalues = eigenvalues(fb.blocks[static_cast<std::size_t>(f)]);
    e.dominant = e.eigenvalues.empty() ? Complex(0) : e.eigenvalues.front();
    all.insert(all.end(), e.eigenvalues.begin(), e.eigenvalues.end());
    rep.frequencies.push_back(std::move(e));
  }
  sort_spectrum(all);

  rep.dominant = all.front();
  try {
    rep.dominant_mult = multiplicity(fb, Complex(1.0));
  } catch (const Error& e) {
    if (e.code() != Errc::ill_conditioned) throw;
    rep.ill_conditioned = true;
  }
  const double second = all.size() > 1 ? std::abs(all[1]) : 0.0;
  rep.flags.dominant_simple = std::abs(rep.dominant - 1.0) < 1e-12 &&
                              rep.dominant_mult.algebraic == 1 &&
                              rep.dominant_mult.geometric == 1 && second < 1.0 - 1e-9;

  // subdominant: largest modulus after removing the eigenvalue closest to 1
  std::vector<Complex> rest = all;
  auto one = std::min_element(rest.begin(), rest.end(), [](Complex a, Complex b) {
    return std::abs(a - 1.0) < std::abs(b - 1.0);
  });
  rest.erase(one);
  rep.lambda_sub = rest.empty() ? Complex(0) : rest.front();
  const double radius = cluster_radius(rep.lambda_sub);
  for (const auto& e : rep.frequencies)
    for (auto z : e.eigenvalues)
      if (std::abs(z - rep.lambda_sub) <= radius) {
        rep.sub_frequencies.push_back(e.f);
        break;
      }
  // include the conjugate cluster of a complex subdominant eigenvalue
  std::size_t next = 0;
  while (next < rest.size() && (std::abs(rest[next] - rep.lambda_sub) <= radius ||
                                std::abs(rest[next] - std::conj(rep.lambda_sub)) <= radius))
    ++next;
  rep.margin_sub_gap =
      std::abs(rep.lambda_sub) - (next < rest.size() ? std::abs(rest[next]) : 0.0);
  rep.margin_imag = std::abs(rep.lambda_sub.imag());
  rep.flags.subdominant_real_positive = rep.margin_imag < 1e-9 && rep.lambda_sub.real() > 0.0;
  try {
    rep.sub_mult = multiplicity(fb, rep.lambda_sub);
  } catch (const Error& e) {
    if (e.code() != Errc::ill_conditioned) throw;
    rep.ill_conditioned = true;
  }
  rep.flags.subdominant_mult2 = rep.sub_mult.algebraic == 2 && rep.sub_mult.geometric == 2;
  rep.flags.subdominant_frequencies = rep.sub_frequencies == std::vector<int>{1, m - 1};
  const double lam = rep.lambda_sub.real();
  rep.flags.lambda_range =
      m == 4 ? std::abs(lam - 0.5) <= 1e-9 : (lam > 0.25 && lam < 1.0);

  // frequency monotonicity of the dominant block eigenvalues
  bool monotone = true;
  double margin = std::numeric_limits<double>::infinity();
  for (int f = 1; 2 * f <= m; ++f) {
    const Complex d = rep.frequencies[static_cast<std::size_t>(f)].dominant;
    rep.monotonicity.push_back(d.real());
    if (std::abs(d.imag()) > 1e-9) monotone = false;
  }
  for (std::size_t k = 0; k + 1 < rep.monotonicity.size(); ++k)
    margin = std::min(margin, rep.monotonicity[k] - rep.monotonicity[k + 1]);
  if (!rep.monotonicity.empty()) {
    if (m % 2 == 1) {
      margin = std::min(margin, rep.monotonicity.back() - 0.25);
    } else if (std::abs(rep.monotonicity.back() - 0.25) > 1e-9) {
      monotone = false;
    }
  }
  rep.margin_monotone = margin;
  rep.flags.monotone = monotone && margin > 1e-9;
  return rep;
}

}  // namespace midpoint
