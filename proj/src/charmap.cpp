#include "midpoint/charmap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace midpoint {

namespace {

constexpr double pi = std::numbers::pi;

// Storage index of the point with doubled chart coordinates (X, Y) seen from
// segment l. Points left of the S_1 spoke belong to segment l+1, points below
// S_0 to segment l-1.
std::size_t chart_point(const NetLayout& layout, int l, int X, int Y) {
  if (X < 0 && Y < 0)
    throw Error(Errc::subnet_irregular, "subnet surrounds the extraordinary element");
  if (X < 0) {
    const int t = X;
    X = Y;
    Y = -t;
    l += 1;
  } else if (Y < 0) {
    const int t = Y;
    Y = X;
    X = -t;
    l -= 1;
  }
  const int m = layout.valence();
  l = ((l % m) + m) % m;
  const bool primal = layout.kind() == NetKind::primal;
  const int i = primal ? X / 2 : (X + 1) / 2;
  const int j = primal ? Y / 2 : (Y + 1) / 2;
  auto k = layout.find(l, i, j);
  if (!k)
    throw Error(Errc::too_few_rings, "spline ring needs vertex (" + std::to_string(l) + "," +
                                         std::to_string(i) + "," + std::to_string(j) + ")");
  return *k;
}

void check_domain(double u, double v) {
  if (!(u >= 0.0 && u <= 2.0 && v >= 0.0 && v <= 2.0) || (u < 1.0 && v < 1.0))
    throw Error(Errc::domain_error, "parameter (" + std::to_string(u) + ", " +
                                        std::to_string(v) + ") outside Ω");
}

// Owning cell and local coordinates of a parameter in Ω.
struct Locus {
  int a;
  int b;
  double s;  // local x
  double t;  // local y
};

Locus locate(const CharacteristicMap& map, double u, double v) {
  check_domain(u, v);
  const double x = u * map.q;
  const double y = v * map.q;
  Locus loc{};
  loc.a = std::min(static_cast<int>(std::floor(x)), 2 * map.q - 1);
  loc.b = std::min(static_cast<int>(std::floor(y)), 2 * map.q - 1);
  if (loc.a < map.q && loc.b < map.q) {
    // u or v equals 1 up to rounding of the scaling by q
    if (u >= 1.0) loc.a = map.q;
    if (v >= 1.0) loc.b = map.q;
  }
  loc.s = x - loc.a;
  loc.t = y - loc.b;
  return loc;
}

std::vector<Complex> row(const SplinePatch& p, int n, int s) {
  return {p.ctrl.begin() + s * (n + 1), p.ctrl.begin() + (s + 1) * (n + 1)};
}

std::vector<Complex> differences(const std::vector<Complex>& c) {
  std::vector<Complex> d(c.size() - 1);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) d[k] = c[k + 1] - c[k];
  return d;
}

// Tensor-product evaluation with optional first differences in x or y.
Complex eval_patch(const SplinePatch& p, int n, double s, double t, int dx, int dy) {
  std::vector<Complex> column;
  for (int k = 0; k <= n; ++k) {
    auto r = row(p, n, k);
    if (dx) r = differences(r);
    column.push_back(eval_uniform_bspline(r, s));
  }
  if (dy) column = differences(column);
  return eval_uniform_bspline(column, t);
}

std::size_t patch_slot(const CharacteristicMap& map, int a, int b) {
  // cells of one segment in (b, a) order, skipping [0,q)^2
  std::size_t k = 0;
  for (int bb = 0; bb < 2 * map.q; ++bb)
    for (int aa = 0; aa < 2 * map.q; ++aa) {
      if (aa < map.q && bb < map.q) continue;
      if (aa == a && bb == b) return k;
      ++k;
    }
  throw Error(Errc::domain_error, "no patch at cell (" + std::to_string(a) + ", " +
                                      std::to_string(b) + ")");
}

Verdict classify(bool ok, double margin, double band) {
  if (!ok) return std::abs(margin) <= band ? Verdict::inconclusive : Verdict::fail;
  return margin <= band ? Verdict::inconclusive : Verdict::pass;
}

}  // namespace

const SplinePatch& CharacteristicMap::patch(int segment, int a, int b) const {
  if (segment < 0 || segment >= m)
    throw Error(Errc::index_out_of_range, "segment " + std::to_string(segment));
  return patches[std::size_t(segment) * patches_per_segment() + patch_slot(*this, a, b)];
}

Complex eval_uniform_bspline(const std::vector<Complex>& ctrl, double t) {
  const int n = static_cast<int>(ctrl.size()) - 1;
  std::vector<Complex> d = ctrl;
  // de Boor on knots u_k = k - n; the span is [u_n, u_(n+1)] = [0, 1]
  for (int r = 1; r <= n; ++r)
    for (int i = n; i >= r; --i) {
      const double alpha = (t - i + n) / (n + 1 - r);
      d[std::size_t(i)] = (1.0 - alpha) * d[std::size_t(i - 1)] + alpha * d[std::size_t(i)];
    }
  return d[std::size_t(n)];
}

std::vector<std::size_t> regular_subnet(const NetLayout& layout, int n, int l, int a, int b) {
  std::vector<std::size_t> out;
  for (int s = 0; s <= n; ++s)
    for (int r = 0; r <= n; ++r)
      out.push_back(chart_point(layout, l, 2 * a + 1 - n + 2 * r, 2 * b + 1 - n + 2 * s));
  return out;
}

Complex evaluate_patch(const CharacteristicMap& map, std::size_t patch, double s, double t) {
  return eval_patch(map.patches.at(patch), map.n, s, t, 0, 0);
}

CharacteristicMap extract_spline_ring(const Ringnet& net, int n, bool normalize) {
  if (n < 2)
    throw Error(Errc::degree_out_of_range,
                "spline ring needs degree >= 2, got " + std::to_string(n));
  if (net.kind() != kind_for_degree(n))
    throw Error(Errc::parity_mismatch, std::string("degree ") + std::to_string(n) +
                                           " needs a " + to_string(kind_for_degree(n)) + " net");
  const int rho = spline_ring(n);
  if (net.outer_ring() < rho)
    throw Error(Errc::too_few_rings, "spline ring needs a " + std::to_string(rho) + "-net");

  CharacteristicMap map;
  map.n = n;
  map.m = net.valence();
  map.q = n / 2;
  map.kind = net.kind();
  const auto& layout = net.layout();
  for (int l = 0; l < map.m; ++l)
    for (int b = 0; b < 2 * map.q; ++b)
      for (int a = 0; a < 2 * map.q; ++a) {
        if (a < map.q && b < map.q) continue;
        SplinePatch p;
        p.segment = l;
        p.a = a;
        p.b = b;
        for (std::size_t k : regular_subnet(layout, n, l, a, b)) p.ctrl.push_back(net[k]);
        map.patches.push_back(std::move(p));
      }

  if (normalize) {
    const Complex c = evaluate(map, 0, 1.0, 1.0);
    if (std::abs(c) > 0.0) {
      map.rotation = std::conj(c) / std::abs(c);
      for (auto& p : map.patches)
        for (auto& z : p.ctrl) z *= map.rotation;
    }
  }
  return map;
}

Complex evaluate(const CharacteristicMap& map, int segment, double u, double v) {
  const auto loc = locate(map, u, v);
  return eval_patch(map.patch(segment, loc.a, loc.b), map.n, loc.s, loc.t, 0, 0);
}

Derivatives evaluate_derivatives(const CharacteristicMap& map, int segment, double u,
                                 double v) {
  const auto loc = locate(map, u, v);
  const auto& p = map.patch(segment, loc.a, loc.b);
  // d/du = q d/dx
  const double q = map.q;
  return {q * eval_patch(p, map.n, loc.s, loc.t, 1, 0),
          q * eval_patch(p, map.n, loc.s, loc.t, 0, 1)};
}

std::vector<Complex> EdgeDirectionSet::all() const {
  std::vector<Complex> out = directions;
  out.push_back(u1);
  out.push_back(Complex(0.0, 1.0) * u0);
  return out;
}

EdgeDirectionSet edge_directions(const Ringnet& net, Complex rotation) {
  const auto& layout = net.layout();
  const int m = net.valence();
  const int f = net.frequency_hint().value_or(1);
  EdgeDirectionSet set;
  const int lo = layout.has_center() ? 0 : 1;
  const int hi = layout.has_center() ? net.outer_ring() : net.outer_ring() + 1;
  for (int i = lo; i <= hi; ++i)
    for (int j = lo; j < hi; ++j)
      set.directions.push_back(rotation * (net.at(0, i, j + 1) - net.at(0, i, j)));
  set.u0 = rotation;
  set.u1 = rotation * std::polar(1.0, 2.0 * pi * f / m);
  return set;
}

EdgeDirectionSet edge_directions(const Ringnet& net) {
  const int f = net.frequency_hint().value_or(1);
  return edge_directions(net, std::polar(1.0, -pi * f / net.valence()));
}

double quadrant_margin(const std::vector<Complex>& values) {
  double scale = 0.0;
  for (auto z : values) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) return 0.0;
  double margin = std::numeric_limits<double>::infinity();
  for (auto z : values) margin = std::min(margin, std::min(z.real(), z.imag()) / scale);
  return margin;
}

ConeResult control_net_cone_test(const CharacteristicMap& map) {
  ConeResult res;
  const int n = map.n;
  std::vector<Complex> all;
  for (std::size_t k = 0; k < map.patches_per_segment(); ++k) {
    const auto& p = map.patches[k];
    for (int s = 0; s < n; ++s)
      for (int r = 0; r <= n; ++r) {
        const Complex d = p.ctrl[std::size_t((s + 1) * (n + 1) + r)] -
                          p.ctrl[std::size_t(s * (n + 1) + r)];
        all.push_back(d);
        if (!(d.real() > 0.0 && d.imag() > 0.0)) res.witnesses.push_back({k, r, s, 0, d});
      }
  }
  res.margin = quadrant_margin(all);
  res.pass = res.witnesses.empty();
  res.control_net_pass = res.pass;
  res.control_net_margin = res.margin;
  res.control_net_witnesses = res.witnesses.size();
  return res;
}

namespace {

// de Casteljau split at 1/2 of every column (rows = true) or row.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> split_half(const Eigen::MatrixXcd& B, bool rows) {
  Eigen::MatrixXcd work = rows ? B : B.transpose();
  const Eigen::Index d = work.rows() - 1;
  Eigen::MatrixXcd lo(work.rows(), work.cols()), hi(work.rows(), work.cols());
  for (Eigen::Index k = 0; k <= d; ++k) {
    lo.row(k) = work.row(0);
    hi.row(d - k) = work.row(d - k);
    for (Eigen::Index j = 0; j < d - k; ++j) work.row(j) = 0.5 * (work.row(j) + work.row(j + 1));
  }
  if (!rows) return {lo.transpose(), hi.transpose()};
  return {lo, hi};
}

struct Refiner {
  int max_depth;
  double band;
  double scale;
  std::size_t patch;
  ConeResult& res;
  double accepted = std::numeric_limits<double>::infinity();
  double rejected = std::numeric_limits<double>::infinity();

  double margin_of(const Eigen::MatrixXcd& B) const {
    double mg = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < B.size(); ++k)
      mg = std::min(mg, std::min(B.data()[k].real(), B.data()[k].imag()) / scale);
    return mg;
  }

  // B: rows along y (degree n-1), columns along x (degree n)
  void run(const Eigen::MatrixXcd& B, int depth, int ix, int iy) {
    ++res.leaves;
    res.depth = std::max(res.depth, depth);
    const double mg = margin_of(B);
    if (mg > band) {
      accepted = std::min(accepted, mg);
      return;
    }
    if (depth == max_depth) {
      rejected = std::min(rejected, mg);
      for (Eigen::Index k = 0; k < B.size(); ++k) {
        const Complex z = B.data()[k];
        if (std::min(z.real(), z.imag()) / scale <= band)
          res.witnesses.push_back({patch, ix, iy, depth, z});
      }
      return;
    }
    auto [lo_y, hi_y] = split_half(B, true);
    for (int hy = 0; hy < 2; ++hy) {
      auto [lo_x, hi_x] = split_half(hy ? hi_y : lo_y, false);
      run(lo_x, depth + 1, 2 * ix, 2 * iy + hy);
      run(hi_x, depth + 1, 2 * ix + 1, 2 * iy + hy);
    }
  }
};

}  // namespace

// row k holds the blossom values at (0^(d-k), 1^k)
Eigen::MatrixXd bspline_to_bezier(int d) {
  Eigen::MatrixXd M(d + 1, d + 1);
  for (int i = 0; i <= d; ++i)
    for (int k = 0; k <= d; ++k) {
      std::vector<double> c(std::size_t(d) + 1, 0.0);
      c[std::size_t(i)] = 1.0;
      for (int r = 1; r <= d; ++r) {
        const double t = r <= d - k ? 0.0 : 1.0;
        for (int j = d; j >= r; --j) {
          const double alpha = (t - j + d) / (d + 1 - r);
          c[std::size_t(j)] = (1.0 - alpha) * c[std::size_t(j - 1)] + alpha * c[std::size_t(j)];
        }
      }
      M(k, i) = c[std::size_t(d)];
    }
  return M;
}

Eigen::MatrixXcd cv_bezier_net(const CharacteristicMap& map, std::size_t patch) {
  const int n = map.n;
  const auto& p = map.patches.at(patch);
  Eigen::MatrixXcd D(n, n + 1);
  for (int s = 0; s < n; ++s)
    for (int r = 0; r <= n; ++r)
      D(s, r) = p.ctrl[std::size_t((s + 1) * (n + 1) + r)] - p.ctrl[std::size_t(s * (n + 1) + r)];
  return bspline_to_bezier(n - 1).cast<Complex>() * D *
         bspline_to_bezier(n).transpose().cast<Complex>();
}

ConeResult cone_test(const CharacteristicMap& map, int max_depth, double band) {
  ConeResult res = control_net_cone_test(map);
  res.witnesses.clear();
  if (res.control_net_margin > band) {
    res.pass = true;
    res.margin = res.control_net_margin;
    return res;
  }
  std::vector<Eigen::MatrixXcd> nets;
  for (std::size_t k = 0; k < map.patches_per_segment(); ++k) nets.push_back(cv_bezier_net(map, k));
  // same scale as the control-net margin
  double scale = 0.0;
  for (std::size_t k = 0; k < map.patches_per_segment(); ++k) {
    const auto& p = map.patches[k];
    for (std::size_t i = std::size_t(map.n) + 1; i < p.ctrl.size(); ++i)
      scale = std::max(scale, std::abs(p.ctrl[i] - p.ctrl[i - std::size_t(map.n) - 1]));
  }
  if (scale == 0.0) scale = 1.0;
  double accepted = std::numeric_limits<double>::infinity();
  double rejected = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nets.size(); ++k) {
    Refiner ref{max_depth, band, scale, k, res};
    ref.run(nets[k], 0, 0, 0);
    accepted = std::min(accepted, ref.accepted);
    rejected = std::min(rejected, ref.rejected);
  }
  res.pass = res.witnesses.empty();
  res.margin = res.pass ? accepted : rejected;
  return res;
}

double min_jacobian(const CharacteristicMap& map, int samples) {
  double best = std::numeric_limits<double>::infinity();
  const double q = map.q;
  for (const auto& p : map.patches) {
    for (int a = 0; a < samples; ++a)
      for (int b = 0; b < samples; ++b) {
        const double s = double(a) / (samples - 1);
        const double t = double(b) / (samples - 1);
        const Complex cu = q * eval_patch(p, map.n, s, t, 1, 0);
        const Complex cv = q * eval_patch(p, map.n, s, t, 0, 1);
        const double norm = std::abs(cu) * std::abs(cv);
        const double det = (std::conj(cu) * cv).imag();
        best = std::min(best, norm > 0.0 ? det / norm : 0.0);
      }
  }
  return best;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict combine(std::initializer_list<Verdict> verdicts) {
  Verdict out = Verdict::pass;
  for (auto v : verdicts) {
    if (v == Verdict::fail) return Verdict::fail;
    if (v == Verdict::inconclusive) out = Verdict::inconclusive;
  }
  return out;
}

C1Certificate certify_C1(int n, int m, const CertifyOptions& options) {
  if (n < 2)
    throw Error(Errc::degree_out_of_range,
                "certification needs degree >= 2, got " + std::to_string(n));
  if (m < 3) throw Error(Errc::bad_valence, "valence must be >= 3, got " + std::to_string(m));
  C1Certificate cert;
  cert.n = n;
  cert.m = m;
  cert.options = options;
  if (options.timestamps) cert.started = std::chrono::system_clock::now();

  const auto rep = spectral_report(n, m, options.exact);
  cert.lambda = rep.lambda_sub.real();
  cert.sub_mult = rep.sub_mult;

  cert.stochastic.margin = 1e-12 - rep.row_sum_error;
  cert.stochastic.verdict = rep.flags.stochastic ? Verdict::pass : Verdict::fail;
  cert.stochastic.detail = options.exact ? "exact rational rows" : "row sums within 1e-12";

  const double second =
      rep.frequencies.empty() ? 0.0 : [&] {
        double best = 0.0;
        bool skipped = false;
        for (const auto& e : rep.frequencies)
          for (auto z : e.eigenvalues) {
            if (!skipped && std::abs(z - rep.dominant) < 1e-12) {
              skipped = true;
              continue;
            }
            best = std::max(best, std::abs(z));
          }
        return best;
      }();
  cert.dominant_simple.margin = 1.0 - second;
  cert.dominant_simple.verdict =
      rep.ill_conditioned ? Verdict::inconclusive
                          : classify(rep.flags.dominant_simple, cert.dominant_simple.margin,
                                     10.0 * 1e-9);
  cert.dominant_simple.detail = "multiplicity (" + std::to_string(rep.dominant_mult.algebraic) +
                                "," + std::to_string(rep.dominant_mult.geometric) + ")";

  const bool sub_ok = rep.flags.subdominant_real_positive && rep.flags.subdominant_mult2 &&
                      rep.flags.subdominant_frequencies && rep.flags.lambda_range;
  // imaginary part against imag_tol, eigenvalue gap against the cluster radius
  const double imag_margin = options.imag_tol - rep.margin_imag;
  const double gap_margin = rep.margin_sub_gap - 10.0 * cluster_radius(rep.lambda_sub);
  cert.subdominant_real_mult2.margin = std::min(imag_margin, gap_margin);
  Verdict sub = sub_ok ? Verdict::pass : Verdict::fail;
  if (rep.ill_conditioned || (rep.margin_imag >= options.imag_tol / 10.0 &&
                              rep.margin_imag <= 10.0 * options.imag_tol))
    sub = Verdict::inconclusive;
  cert.subdominant_real_mult2.verdict = sub;
  cert.subdominant_real_mult2.detail =
      "multiplicity (" + std::to_string(rep.sub_mult.algebraic) + "," +
      std::to_string(rep.sub_mult.geometric) + "), frequencies " +
      std::to_string(rep.sub_frequencies.size());

  const auto cm = characteristic_mesh(n, m, options.tol, options.max_iter);
  cert.iterations = cm.iterations;
  cert.residual = cm.residual;
  const auto map = extract_spline_ring(cm.net, n);
  cert.patch_count = map.patches.size();
  cert.c11 = evaluate(map, 0, 1.0, 1.0).real();
  const auto cone = cone_test(map, 8, 10.0 * options.cone_tol);
  cert.cone_witnesses = cone.witnesses.size();
  cert.cone_depth = cone.depth;
  cert.control_net_pass = cone.control_net_pass;
  cert.control_net_margin = cone.control_net_margin;
  cert.jacobian_min = min_jacobian(map, options.jacobian_samples);
  cert.charmap_regular_injective.margin = cone.margin;
  Verdict reg = cone.pass ? Verdict::pass
                          : (cone.margin < -10.0 * options.cone_tol ? Verdict::fail
                                                                    : Verdict::inconclusive);
  if (reg == Verdict::pass && !(cert.jacobian_min > 0.0 && cert.c11 > 0.0)) reg = Verdict::fail;
  cert.charmap_regular_injective.verdict = reg;
  cert.charmap_regular_injective.detail =
      std::to_string(cert.patch_count) + " patches, " + std::to_string(cert.cone_witnesses) +
      " cone witnesses, Bézier depth " + std::to_string(cone.depth);

  cert.verdict = combine({cert.stochastic.verdict, cert.dominant_simple.verdict,
                          cert.subdominant_real_mult2.verdict,
                          cert.charmap_regular_injective.verdict});
  if (options.timestamps) cert.finished = std::chrono::system_clock::now();
  return cert;
}

std::vector<MapSample> sample_map(const CharacteristicMap& map, int samples) {
  std::vector<MapSample> out;
  for (int seg = 0; seg < map.m; ++seg)
    for (std::size_t k = 0; k < map.patches_per_segment(); ++k) {
      const auto& p = map.patches[std::size_t(seg) * map.patches_per_segment() + k];
      for (int b = 0; b < samples; ++b)
        for (int a = 0; a < samples; ++a) {
          const double s = double(a) / (samples - 1);
          const double t = double(b) / (samples - 1);
          out.push_back({(p.a + s) / map.q, (p.b + t) / map.q, seg,
                         eval_patch(p, map.n, s, t, 0, 0)});
        }
    }
  return out;
}

void write_samples_csv(const CharacteristicMap& map, int samples, std::ostream& out) {
  char buf[160];
  out << "u,v,segment,re,im\n";
  for (const auto& s : sample_map(map, samples)) {
    std::snprintf(buf, sizeof buf, "%.15e,%.15e,%d,%.15e,%.15e\n", s.u, s.v, s.segment,
                  s.value.real(), s.value.imag());
    out << buf;
  }
}

void write_samples_obj(const CharacteristicMap& map, int samples, std::ostream& out) {
  char buf[128];
  const auto pts = sample_map(map, samples);
  for (const auto& s : pts) {
    std::snprintf(buf, sizeof buf, "v %.15e %.15e 0\n", s.value.real(), s.value.imag());
    out << buf;
  }
  const std::size_t per_patch = std::size_t(samples) * std::size_t(samples);
  for (std::size_t base = 0; base < pts.size(); base += per_patch)
    for (int b = 0; b + 1 < samples; ++b)
      for (int a = 0; a + 1 < samples; ++a) {
        const std::size_t v0 = base + std::size_t(b * samples + a) + 1;  // OBJ is 1-based
        out << "f " << v0 << ' ' << v0 + 1 << ' ' << v0 + 1 + samples << ' ' << v0 + samples
            << '\n';
      }
}

}  // namespace midpoint
