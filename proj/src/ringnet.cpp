#include "midpoint/ringnet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace midpoint {

namespace {

int mod(int a, int m) { return ((a % m) + m) % m; }

Complex unit(double angle) { return std::polar(1.0, angle); }

}  // namespace

const char* to_string(NetKind kind) {
  return kind == NetKind::primal ? "primal" : "dual";
}

NetKind parse_net_kind(const std::string& text) {
  if (text == "primal") return NetKind::primal;
  if (text == "dual") return NetKind::dual;
  throw Error(Errc::parse_error, "unknown net kind '" + text + "'");
}

NetKind kind_for_degree(int n) { return n % 2 == 1 ? NetKind::primal : NetKind::dual; }

int core_ring(int n) { return (n - 1) / 2; }

int spline_ring(int n) {
  // ceil((3n - 3) / 2) for n >= 1
  return (3 * n - 3 + 1) / 2;
}

std::pair<int, int> influence_range(int n, int i, NetKind kind) {
  if (n < 1)
    throw Error(Errc::degree_out_of_range, "degree must be >= 1");
  if (kind_for_degree(n) != kind)
    throw Error(Errc::parity_mismatch, std::string("degree ") + std::to_string(n) +
                                           " does not subdivide " + to_string(kind) +
                                           " nets");
  const int lo = 2 * i - (n + 1) / 2;
  const int hi = 2 * i + (n + 2) / 2;
  return {std::max(lo, 0), hi};
}

// ---------------------------------------------------------------------------
// NetLayout

NetLayout::NetLayout(int valence, NetKind kind, int ring_count)
    : m_(valence), kind_(kind), rings_(ring_count) {
  if (valence < 3)
    throw Error(Errc::bad_valence, "valence must be >= 3, got " + std::to_string(valence));
  if (ring_count < 1)
    throw Error(Errc::too_few_rings, "a ringnet needs at least one ring");
  const int first = has_center() ? 1 : 0;
  ring_slot_begin_.assign(static_cast<std::size_t>(first), 0);
  for (int r = first; r < rings_; ++r) {
    ring_slot_begin_.push_back(slots_.size());
    const int top = has_center() ? r : r + 1;
    for (int i = 1; i < top; ++i) slots_.emplace_back(i, top);
    for (int j = has_center() ? 0 : 1; j <= top; ++j) slots_.emplace_back(top, j);
  }
  ring_slot_begin_.push_back(slots_.size());
}

std::size_t NetLayout::size() const {
  return (has_center() ? 1 : 0) + slots_.size() * static_cast<std::size_t>(m_);
}

std::size_t NetLayout::slot_begin(int ring) const {
  return ring_slot_begin_[static_cast<std::size_t>(ring)];
}

std::size_t NetLayout::slot_of(int i, int j) const {
  const int top = std::max(i, j);
  const int ring = has_center() ? top : top - 1;
  std::size_t s = slot_begin(ring);
  // (1, top) .. (top-1, top), then (top, j0) .. (top, top)
  if (i < top) return s + static_cast<std::size_t>(i - 1);
  const int j0 = has_center() ? 0 : 1;
  return s + static_cast<std::size_t>(top - 1) + static_cast<std::size_t>(j - j0);
}

int NetLayout::slot_ring(std::size_t s) const {
  auto it = std::upper_bound(ring_slot_begin_.begin(), ring_slot_begin_.end(), s);
  return static_cast<int>(it - ring_slot_begin_.begin()) - 1;
}

std::size_t NetLayout::index_of_slot(std::size_t s, int l) const {
  return (has_center() ? 1 : 0) + s * static_cast<std::size_t>(m_) +
         static_cast<std::size_t>(mod(l, m_));
}

std::optional<std::size_t> NetLayout::find(int l, int i, int j) const {
  if (i < 0 || j < 0) return std::nullopt;
  if (has_center()) {
    if (i == 0 && j == 0) return 0;
    if (i == 0) {
      i = j;
      j = 0;
      l += 1;
    }
    if (std::max(i, j) > outer_ring()) return std::nullopt;
  } else {
    if (i < 1 || j < 1 || std::max(i, j) - 1 > outer_ring()) return std::nullopt;
  }
  return index_of_slot(slot_of(i, j), l);
}

std::size_t NetLayout::index(int l, int i, int j) const {
  auto k = find(l, i, j);
  if (!k)
    throw Error(Errc::index_out_of_range,
                "no vertex (" + std::to_string(l) + "," + std::to_string(i) + "," +
                    std::to_string(j) + ") in " + std::to_string(outer_ring()) + "-net");
  return *k;
}

NetIndex NetLayout::label(std::size_t k) const {
  if (has_center()) {
    if (k == 0) return {};
    --k;
  }
  const auto s = k / static_cast<std::size_t>(m_);
  const auto l = static_cast<int>(k % static_cast<std::size_t>(m_));
  return {l, slots_[s].first, slots_[s].second};
}

int NetLayout::ring_of(std::size_t k) const {
  if (has_center()) {
    if (k == 0) return 0;
    --k;
  }
  return slot_ring(k / static_cast<std::size_t>(m_));
}

std::pair<std::size_t, std::size_t> NetLayout::ring_range(int r) const {
  const std::size_t c = has_center() ? 1 : 0;
  if (has_center() && r == 0) return {0, 1};
  const auto mm = static_cast<std::size_t>(m_);
  return {c + slot_begin(r) * mm, c + slot_begin(r + 1) * mm};
}

std::vector<Face> NetLayout::faces() const {
  std::vector<Face> faces;
  const int J = outer_ring();
  if (has_center()) {
    for (int l = 0; l < m_; ++l)
      for (int i = 0; i < J; ++i)
        for (int j = 0; j < J; ++j)
          faces.push_back({index(l, i, j), index(l, i + 1, j), index(l, i + 1, j + 1),
                           index(l, i, j + 1)});
  } else {
    Face center;
    for (int l = 0; l < m_; ++l) center.push_back(index(l, 1, 1));
    faces.push_back(std::move(center));
    for (int l = 0; l < m_; ++l) {
      // Cells around the spoke vertex g_i0^l, shared with segment l-1.
      for (int i = 1; i <= J; ++i)
        faces.push_back({index(l - 1, 1, i), index(l - 1, 1, i + 1), index(l, i + 1, 1),
                         index(l, i, 1)});
      // Cells around the inner vertices g_ij^l.
      for (int i = 1; i <= J; ++i)
        for (int j = 1; j <= J; ++j)
          faces.push_back({index(l, i, j), index(l, i + 1, j), index(l, i + 1, j + 1),
                           index(l, i, j + 1)});
    }
  }
  return faces;
}

// ---------------------------------------------------------------------------
// Ringnet

Ringnet::Ringnet(NetLayout layout, std::vector<Complex> points, std::optional<int> frequency)
    : layout_(std::move(layout)), points_(std::move(points)), frequency_(frequency) {
  if (points_.size() != layout_.size())
    throw Error(Errc::topology_mismatch,
                "ringnet expects " + std::to_string(layout_.size()) + " points, got " +
                    std::to_string(points_.size()));
}

Ringnet Ringnet::zeros(int valence, NetKind kind, int ring_count) {
  NetLayout layout(valence, kind, ring_count);
  std::vector<Complex> pts(layout.size());
  return Ringnet(std::move(layout), std::move(pts));
}

Ringnet Ringnet::with_points(std::vector<Complex> points) const {
  return Ringnet(layout_, std::move(points), frequency_);
}

Ringnet Ringnet::scaled(Complex s) const {
  auto pts = points_;
  for (auto& p : pts) p *= s;
  return Ringnet(layout_, std::move(pts), frequency_);
}

Ringnet make_grid_mesh(int m, int f, NetKind kind, int ring_count) {
  if (m < 3) throw Error(Errc::bad_valence, "valence must be >= 3, got " + std::to_string(m));
  if (f < 1 || f > m - 1)
    throw Error(Errc::bad_frequency,
                "frequency must lie in [1, m-1], got " + std::to_string(f));
  NetLayout layout(m, kind, ring_count);
  const double step = 2.0 * std::numbers::pi * f / m;
  std::vector<Complex> pts(layout.size());
  const double shift = kind == NetKind::dual ? 0.5 : 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    auto [l, i, j] = layout.label(k);
    pts[k] = (i - shift) * unit(step * l) + (j - shift) * unit(step * (l + 1));
  }
  return Ringnet(std::move(layout), std::move(pts), f);
}

std::vector<std::size_t> half_segment(const NetLayout& layout) {
  std::vector<std::pair<int, int>> ij;
  for (std::size_t s = 0; s < layout.slot_count(); ++s) {
    auto [i, j] = layout.slot(s);
    if (i >= j) ij.emplace_back(i, j);
  }
  std::sort(ij.begin(), ij.end());
  std::vector<std::size_t> out;
  out.reserve(ij.size());
  for (auto [i, j] : ij) out.push_back(layout.index(0, i, j));
  return out;
}

Ringnet make_symmetric_net(int m, int f, NetKind kind, int ring_count,
                           std::span<const Complex> half_segment_points) {
  NetLayout layout(m, kind, ring_count);
  const auto h = half_segment(layout);
  if (h.size() != half_segment_points.size())
    throw Error(Errc::topology_mismatch,
                "half segment has " + std::to_string(h.size()) + " vertices, got " +
                    std::to_string(half_segment_points.size()));
  std::map<std::pair<int, int>, Complex> base;
  for (std::size_t k = 0; k < h.size(); ++k) {
    auto lab = layout.label(h[k]);
    base[{lab.i, lab.j}] = half_segment_points[k];
  }
  const Complex w = unit(2.0 * std::numbers::pi * f / m);
  std::vector<Complex> pts(layout.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    auto [l, i, j] = layout.label(k);
    if (i == 0 && j == 0) continue;  // center is fixed only by f = 0
    Complex p0 = i >= j ? base.at({i, j}) : std::conj(base.at({j, i})) * w;
    pts[k] = p0 * std::pow(w, l);
  }
  return Ringnet(std::move(layout), std::move(pts), f);
}

Ringnet symmetrize(const Ringnet& net, int f) {
  std::vector<Complex> h;
  for (std::size_t k : half_segment(net.layout())) h.push_back(net[k]);
  return make_symmetric_net(net.valence(), f, net.kind(), net.ring_count(), h);
}

Ringnet truncate(const Ringnet& net, int ring_count) {
  if (ring_count > net.ring_count())
    throw Error(Errc::too_few_rings, "cannot truncate to more rings than present");
  NetLayout layout(net.valence(), net.kind(), ring_count);
  std::vector<Complex> pts(net.points().begin(),
                           net.points().begin() + static_cast<long>(layout.size()));
  return Ringnet(std::move(layout), std::move(pts), net.frequency_hint());
}

Ringnet pad(const Ringnet& net, int ring_count, const std::function<Complex(std::size_t)>& fill) {
  NetLayout layout(net.valence(), net.kind(), ring_count);
  std::vector<Complex> pts(layout.size());
  std::copy(net.points().begin(), net.points().end(), pts.begin());
  if (fill)
    for (std::size_t k = net.size(); k < pts.size(); ++k) pts[k] = fill(k);
  return Ringnet(std::move(layout), std::move(pts), net.frequency_hint());
}

Ringnet core_mesh(const Ringnet& net, int n) {
  const int omega = core_ring(n);
  if (net.outer_ring() < omega)
    throw Error(Errc::too_few_rings, "core mesh of degree " + std::to_string(n) +
                                         " needs " + std::to_string(omega + 1) + " rings");
  return truncate(net, omega + 1);
}

// ---------------------------------------------------------------------------
// Subdivision through the mesh operators

namespace {

// Position of a vertex in the chart of its segment, in units of half the
// lattice spacing: primal vertices have even, dual vertices odd coordinates.
struct Label {
  int seg = 0;
  int a = 0;
  int b = 0;
  bool is_center() const { return a == 0 && b == 0; }
};

Label label_of(const NetIndex& idx, NetKind kind) {
  if (kind == NetKind::primal) return {idx.l, 2 * idx.i, 2 * idx.j};
  return {idx.l, 2 * idx.i - 1, 2 * idx.j - 1};
}

// Chart transitions: segment l+1 continues chart l across its positive y
// axis, segment l-1 across its positive x axis.
std::array<int, 2> in_chart(const Label& p, int l, int m) {
  if (p.is_center()) return {0, 0};
  const int d = mod(p.seg - l, m);
  if (d == 0) return {p.a, p.b};
  if (d == 1) return {-p.b, p.a};
  if (d == m - 1) return {p.b, -p.a};
  throw Error(Errc::topology_mismatch, "vertex outside the neighbouring charts");
}

Label canonical(int l, int x, int y, int m) {
  for (int guard = 0; guard < 4; ++guard) {
    if (x == 0 && y == 0) return {0, 0, 0};
    if (x > 0 && y >= 0) return {mod(l, m), x, y};
    if (x <= 0 && y >= 0) {  // into segment l+1
      const int a = y, b = -x;
      l += 1;
      x = a;
      y = b;
      continue;
    }
    if (x >= 0 && y < 0) {  // into segment l-1
      const int a = -y, b = x;
      l -= 1;
      x = a;
      y = b;
      continue;
    }
    break;
  }
  throw Error(Errc::topology_mismatch, "label wraps around the center");
}

std::vector<Label> trace(const std::vector<Label>& in, const SubdivisionStep& step, int m) {
  std::vector<Label> out;
  out.reserve(step.sources.size());
  for (const auto& src : step.sources) {
    std::vector<int> segs;
    for (VertexId v : src)
      if (!in[v].is_center() &&
          std::find(segs.begin(), segs.end(), in[v].seg) == segs.end())
        segs.push_back(in[v].seg);
    if (segs.size() >= 3) {  // the face around the extraordinary element
      out.push_back({0, 0, 0});
      continue;
    }
    int ref = segs.empty() ? 0 : segs[0];
    if (segs.size() == 2 && mod(segs[0] - segs[1], m) == 1) ref = segs[1];
    int x = 0, y = 0;
    for (VertexId v : src) {
      auto c = in_chart(in[v], ref, m);
      x += c[0];
      y += c[1];
    }
    const int scale = step.refines ? 2 : 1;
    const int k = static_cast<int>(src.size());
    x *= scale;
    y *= scale;
    if (x % k != 0 || y % k != 0)
      throw Error(Errc::topology_mismatch, "centroid off the label lattice");
    out.push_back(canonical(ref, x / k, y / k, m));
  }
  return out;
}

struct Trace {
  std::vector<SubdivisionStep> steps;
  std::vector<VertexId> outputs;  // final mesh vertex per output storage index
};

using TraceKey = std::tuple<int, int, int, int, int>;

std::shared_ptr<const Trace> build_trace(int n, int m, NetKind kind, int padded_rings,
                                         int outer_ring) {
  NetLayout in_layout(m, kind, padded_rings);
  auto topology = MeshTopology::build(in_layout.size(), in_layout.faces(), true);
  auto result = std::make_shared<Trace>();
  result->steps = midpoint_steps(topology, n);

  std::vector<Label> labels(in_layout.size());
  for (std::size_t k = 0; k < labels.size(); ++k)
    labels[k] = label_of(in_layout.label(k), kind);
  for (const auto& step : result->steps) labels = trace(labels, step, m);

  NetLayout out_layout(m, kind, outer_ring + 1);
  result->outputs.assign(out_layout.size(), SIZE_MAX);
  for (VertexId v = 0; v < labels.size(); ++v) {
    const auto& p = labels[v];
    std::optional<std::size_t> k;
    if (kind == NetKind::primal) {
      if (p.a % 2 != 0 || p.b % 2 != 0)
        throw Error(Errc::parity_mismatch, "subdivided vertex off the primal lattice");
      k = out_layout.find(p.seg, p.a / 2, p.b / 2);
    } else {
      if (p.is_center() || p.a % 2 == 0 || p.b % 2 == 0)
        throw Error(Errc::parity_mismatch, "subdivided vertex off the dual lattice");
      k = out_layout.find(p.seg, (p.a + 1) / 2, (p.b + 1) / 2);
    }
    if (!k) continue;
    if (result->outputs[*k] != SIZE_MAX)
      throw Error(Errc::topology_mismatch, "two subdivided vertices share a label");
    result->outputs[*k] = v;
  }
  if (std::count(result->outputs.begin(), result->outputs.end(), SIZE_MAX) > 0)
    throw Error(Errc::too_few_rings, "padding too small to determine rings 0.." +
                                         std::to_string(outer_ring));
  return result;
}

std::shared_ptr<const Trace> cached_trace(int n, int m, NetKind kind, int padded_rings,
                                          int outer_ring) {
  static std::mutex mutex;
  static std::map<TraceKey, std::shared_ptr<const Trace>> cache;
  const TraceKey key{n, m, static_cast<int>(kind), padded_rings, outer_ring};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto t = build_trace(n, m, kind, padded_rings, outer_ring);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(t)).first->second;
}

void check_degree(int n, NetKind kind) {
  if (n < 1)
    throw Error(Errc::degree_out_of_range, "degree must be >= 1, got " + std::to_string(n));
  if (kind_for_degree(n) != kind)
    throw Error(Errc::parity_mismatch, "degree " + std::to_string(n) + " does not subdivide " +
                                           to_string(kind) + " nets");
}

int padding_rings(int n, int outer_ring) { return outer_ring + (n + 1) / 2 + 3; }

}  // namespace

Ringnet subdivide_embedded(const Ringnet& padded, int n, int outer_ring) {
  check_degree(n, padded.kind());
  if (outer_ring < core_ring(n))
    throw Error(Errc::too_few_rings, "a " + std::to_string(outer_ring) +
                                         "-net is smaller than the core mesh of degree " +
                                         std::to_string(n));
  auto t = cached_trace(n, padded.valence(), padded.kind(), padded.ring_count(), outer_ring);
  std::vector<Complex> pts = padded.points();
  for (const auto& step : t->steps) pts = apply_step<Complex>(step, pts);
  std::vector<Complex> out;
  out.reserve(t->outputs.size());
  for (VertexId v : t->outputs) out.push_back(pts[v]);
  return Ringnet(NetLayout(padded.valence(), padded.kind(), outer_ring + 1), std::move(out),
                 padded.frequency_hint());
}

Ringnet subdivide_ringnet(const Ringnet& net, int n) {
  check_degree(n, net.kind());
  const int j = net.outer_ring();
  if (j < core_ring(n))
    throw Error(Errc::too_few_rings, "a " + std::to_string(j) +
                                         "-net is smaller than the core mesh of degree " +
                                         std::to_string(n));
  return subdivide_embedded(pad(net, padding_rings(n, j) + 1), n, j);
}

template <class T>
std::vector<SparseRow<T>> subdivision_rows(int n, int m, NetKind kind, int outer_ring) {
  check_degree(n, kind);
  if (outer_ring < core_ring(n))
    throw Error(Errc::too_few_rings, "subdivision matrix needs j >= " +
                                         std::to_string(core_ring(n)));
  auto t = cached_trace(n, m, kind, padding_rings(n, outer_ring) + 1, outer_ring);
  auto rows = compose_steps<T>(t->steps, t->outputs);
  const std::size_t limit = NetLayout(m, kind, outer_ring + 1).size();
  for (const auto& row : rows)
    for (const auto& [idx, w] : row)
      if (idx >= limit && w != T(0))
        throw Error(Errc::ordering_violation,
                    "subdivided ring depends on a vertex beyond ring " +
                        std::to_string(outer_ring));
  return rows;
}

template std::vector<SparseRow<double>> subdivision_rows<double>(int, int, NetKind, int);
template std::vector<SparseRow<Rational>> subdivision_rows<Rational>(int, int, NetKind, int);

// ---------------------------------------------------------------------------
// Frames, symmetry, ordering

std::array<double, 2> FrameK::coords(Complex z) const {
  const double x = z.real() / basis1[0];
  return {x, z.imag() - x * basis1[1]};
}

FrameK frame_K(double phi) {
  if (!(phi > 0.0 && phi < 2.0 * std::numbers::pi))
    throw Error(Errc::angle_out_of_range, "segment angle must lie in (0, 2π)");
  FrameK k;
  k.phi = phi;
  k.theta = phi / 2.0 - std::numbers::pi / 2.0;
  k.basis1 = {std::cos(k.theta), std::sin(k.theta)};
  k.basis2 = {0.0, 1.0};
  return k;
}

std::size_t reflection_partner(const NetLayout& layout, std::size_t k) {
  auto [l, i, j] = layout.label(k);
  return layout.index(layout.valence() - 1 - l, j, i);
}

SymmetryFlags symmetry_check(const Ringnet& net, int f, double tol) {
  const auto& layout = net.layout();
  const int m = layout.valence();
  double scale = 1.0;
  for (const auto& p : net.points()) scale = std::max(scale, std::abs(p));
  const double eps = tol * scale;
  const Complex w = unit(2.0 * std::numbers::pi * f / m);

  SymmetryFlags flags{true, true};
  for (std::size_t k = 0; k < net.size(); ++k) {
    auto [l, i, j] = layout.label(k);
    const std::size_t next = layout.index(l + 1, i, j);
    if (std::abs(net[k] * w - net[next]) > eps) flags.rotation = false;
    if (std::abs(net[reflection_partner(layout, k)] - std::conj(net[k])) > eps)
      flags.reflection = false;
  }
  return flags;
}

const char* to_string(NetOrder order) {
  switch (order) {
    case NetOrder::less: return "less";
    case NetOrder::less_eq: return "less-eq";
    case NetOrder::equal: return "equal";
    case NetOrder::greater_eq: return "greater-eq";
    case NetOrder::greater: return "greater";
    case NetOrder::incomparable: return "incomparable";
  }
  return "?";
}

NetOrder compare_nets(const Ringnet& a, const Ringnet& b, const FrameK& frame, double tol) {
  if (!(a.layout() == b.layout()))
    throw Error(Errc::topology_mismatch, "compared nets differ in topology");
  bool gt = true, ge = true, eq = true, lt = true, le = true;
  for (std::size_t k : half_segment(a.layout())) {
    auto ca = frame.coords(a[k]);
    auto cb = frame.coords(b[k]);
    for (int c = 0; c < 2; ++c) {
      const double d = ca[static_cast<std::size_t>(c)] - cb[static_cast<std::size_t>(c)];
      gt = gt && d > tol;
      ge = ge && d >= -tol;
      eq = eq && std::abs(d) <= tol;
      lt = lt && d < -tol;
      le = le && d <= tol;
    }
  }
  if (eq) return NetOrder::equal;
  if (gt) return NetOrder::greater;
  if (ge) return NetOrder::greater_eq;
  if (lt) return NetOrder::less;
  if (le) return NetOrder::less_eq;
  return NetOrder::incomparable;
}

MinMax min_max_norm(const Ringnet& net, const FrameK& frame) {
  MinMax r{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t k : half_segment(net.layout())) {
    auto c = frame.coords(net[k]);
    const double norm = std::max(std::abs(c[0]), std::abs(c[1]));
    r.min = std::min(r.min, norm);
    r.max = std::max(r.max, norm);
  }
  return r;
}

std::array<double, 2> cone_coordinates(Complex z, double phi) {
  const double r1 = z.imag() / std::sin(phi / 2.0);
  return {z.real() - r1 * std::cos(phi / 2.0), r1};
}

bool half_segment_in_cone(const Ringnet& net, double phi, double tol) {
  for (std::size_t k : half_segment(net.layout())) {
    auto c = cone_coordinates(net[k], phi);
    if (c[0] < -tol || c[1] < -tol) return false;
  }
  return true;
}

}  // namespace midpoint
