#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "midpoint/mesh.hpp"

namespace midpoint {

using Complex = std::complex<double>;

enum class NetKind { primal, dual };

const char* to_string(NetKind kind);
NetKind parse_net_kind(const std::string& text);

/// Odd degrees subdivide primal nets, even degrees dual nets.
NetKind kind_for_degree(int n);

/// ω = floor((n-1)/2), outermost ring of the core mesh.
int core_ring(int n);

/// ρ = ceil(3n/2 - 3/2), outermost ring of the net that determines one
/// spline difference ring.
int spline_ring(int n);

/// Rings of the subdivided net that ring i influences:
/// [2i - floor((n+1)/2), 2i + ceil((n+1)/2)], clamped below at 0.
std::pair<int, int> influence_range(int n, int i, NetKind kind);

/// Vertex label p_ij^l. The center of a primal net is (0, 0, 0).
struct NetIndex {
  int l = 0;
  int i = 0;
  int j = 0;
  friend bool operator==(const NetIndex&, const NetIndex&) = default;
};

/// Index topology of a ringnet. Storage order: the primal center, then
/// ring by ring; inside a ring, slots (i, j) in lexicographic order, each
/// slot holding its m segment copies l = 0..m-1 contiguously. The corner
/// slot is the last slot of every ring. The shared spoke vertex
/// g_0j^l = g_j0^(l+1) is stored once, as (l+1, j, 0).
class NetLayout {
 public:
  NetLayout() = default;
  NetLayout(int valence, NetKind kind, int ring_count);

  int valence() const { return m_; }
  NetKind kind() const { return kind_; }
  int ring_count() const { return rings_; }
  int outer_ring() const { return rings_ - 1; }
  bool has_center() const { return kind_ == NetKind::primal; }

  std::size_t size() const;
  std::size_t slot_count() const { return slots_.size(); }
  std::pair<int, int> slot(std::size_t s) const { return slots_[s]; }
  std::size_t slot_begin(int ring) const;  // first slot of a ring
  std::size_t slot_of(int i, int j) const;
  int slot_ring(std::size_t s) const;

  std::size_t index_of_slot(std::size_t s, int l) const;
  /// Storage index for p_ij^l; resolves spoke identification and l mod m.
  std::optional<std::size_t> find(int l, int i, int j) const;
  std::size_t index(int l, int i, int j) const;  // throws index_out_of_range
  NetIndex label(std::size_t k) const;
  int ring_of(std::size_t k) const;

  /// [begin, end) storage range of ring r.
  std::pair<std::size_t, std::size_t> ring_range(int r) const;

  /// Faces of the net as a polygon mesh over storage indices.
  std::vector<Face> faces() const;

  friend bool operator==(const NetLayout& a, const NetLayout& b) {
    return a.m_ == b.m_ && a.kind_ == b.kind_ && a.rings_ == b.rings_;
  }

 private:
  int m_ = 0;
  NetKind kind_ = NetKind::primal;
  int rings_ = 0;
  std::vector<std::pair<int, int>> slots_;
  std::vector<std::size_t> ring_slot_begin_;
};

/// Planar ringnet around one extraordinary vertex (primal) or face (dual)
/// with complex vertices.
class Ringnet {
 public:
  Ringnet() = default;
  Ringnet(NetLayout layout, std::vector<Complex> points,
          std::optional<int> frequency = std::nullopt);

  static Ringnet zeros(int valence, NetKind kind, int ring_count);

  const NetLayout& layout() const { return layout_; }
  int valence() const { return layout_.valence(); }
  NetKind kind() const { return layout_.kind(); }
  int ring_count() const { return layout_.ring_count(); }
  int outer_ring() const { return layout_.outer_ring(); }
  std::optional<int> frequency_hint() const { return frequency_; }

  std::size_t size() const { return points_.size(); }
  const std::vector<Complex>& points() const { return points_; }
  const Complex& operator[](std::size_t k) const { return points_[k]; }
  const Complex& at(int l, int i, int j) const { return points_[layout_.index(l, i, j)]; }

  Ringnet with_points(std::vector<Complex> points) const;
  Ringnet scaled(Complex s) const;

 private:
  NetLayout layout_;
  std::vector<Complex> points_;
  std::optional<int> frequency_;
};

/// Grid mesh of valence m and frequency f with the given number of rings
/// (ring_count = j + 1). Throws bad_valence, bad_frequency, too_few_rings.
Ringnet make_grid_mesh(int m, int f, NetKind kind, int ring_count);

/// Symmetric net of frequency f whose first half segment holds the given
/// points (half_segment order). Spoke points must lie on their spokes.
Ringnet make_symmetric_net(int m, int f, NetKind kind, int ring_count,
                           std::span<const Complex> half_segment_points);

/// Symmetric net of frequency f generated from H(net); removes components
/// of other frequencies and of the antisymmetric part.
Ringnet symmetrize(const Ringnet& net, int f);

/// Rings 0..ring_count-1 of net.
Ringnet truncate(const Ringnet& net, int ring_count);

/// Extends net outward to ring_count rings; fill(k) supplies the new vertices.
Ringnet pad(const Ringnet& net, int ring_count,
            const std::function<Complex(std::size_t)>& fill = {});

/// Rings 0..ω of net. Throws too_few_rings.
Ringnet core_mesh(const Ringnet& net, int n);

/// Rings 0..j of M_n applied to net: the net is embedded in a zero-padded
/// polygon mesh, subdivided by the mesh operators and re-extracted.
Ringnet subdivide_ringnet(const Ringnet& net, int n);

/// Rings 0..outer_ring of M_n applied to an already padded net.
Ringnet subdivide_embedded(const Ringnet& padded, int n, int outer_ring);

/// Linear map of M_n on j-nets as sparse rows over storage indices,
/// composed from the mesh operator steps. Throws ordering_violation if a
/// row reaches beyond ring j.
template <class T>
std::vector<SparseRow<T>> subdivision_rows(int n, int m, NetKind kind, int outer_ring);

extern template std::vector<SparseRow<double>> subdivision_rows<double>(int, int, NetKind, int);
extern template std::vector<SparseRow<Rational>> subdivision_rows<Rational>(int, int, NetKind, int);

// ---------------------------------------------------------------------------
// Frames, ordering and norms

/// Coordinate frame with axes orthogonal to the spokes S_0.5 and S_0.
struct FrameK {
  double phi = 0.0;
  double theta = 0.0;
  std::array<double, 2> basis1{};
  std::array<double, 2> basis2{};

  /// Coordinates (x, y) with z = x * basis1 + y * basis2.
  std::array<double, 2> coords(Complex z) const;
};

/// Throws angle_out_of_range unless phi in (0, 2π).
FrameK frame_K(double phi);

/// Storage indices of H(net): l = 0, i >= j, (i, j) != (0, 0), in (i, j)
/// lexicographic order.
std::vector<std::size_t> half_segment(const NetLayout& layout);

struct SymmetryFlags {
  bool rotation = false;
  bool reflection = false;
};

SymmetryFlags symmetry_check(const Ringnet& net, int f, double tol = 1e-12);

/// Reflection partner index: (i, j, l) -> (j, i, m-1-l).
std::size_t reflection_partner(const NetLayout& layout, std::size_t k);

enum class NetOrder { less, less_eq, equal, greater_eq, greater, incomparable };

const char* to_string(NetOrder order);

NetOrder compare_nets(const Ringnet& a, const Ringnet& b, const FrameK& frame,
                      double tol = 1e-12);

struct MinMax {
  double min = 0.0;
  double max = 0.0;
};

MinMax min_max_norm(const Ringnet& net, const FrameK& frame);

/// Coefficients (r0, r1) with z = r0 + r1 e^{iφ/2}; z lies in the cone
/// spanned by S_0 and S_0.5 iff both are >= 0.
std::array<double, 2> cone_coordinates(Complex z, double phi);

bool half_segment_in_cone(const Ringnet& net, double phi, double tol = 1e-12);

}  // namespace midpoint
