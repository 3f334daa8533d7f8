#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "midpoint/error.hpp"
#include "midpoint/point.hpp"
#include "midpoint/rational.hpp"

namespace midpoint {

using VertexId = std::size_t;
using FaceId = std::size_t;
using Face = std::vector<VertexId>;

struct Edge {
  VertexId a = 0;  // a < b
  VertexId b = 0;
  FaceId face0 = 0;
  std::optional<FaceId> face1;

  bool is_boundary() const { return !face1.has_value(); }
};

/// Connectivity of an oriented two-manifold polygon mesh, possibly with
/// boundary. Faces are simple cycles of length >= 3; every edge borders one
/// or two faces and the orientation is consistent across shared edges.
/// Construction validates the face list and re-orients faces when a
/// consistent orientation exists.
class MeshTopology {
 public:
  MeshTopology() = default;

  /// Throws Error with index_out_of_range, invalid_face, non_manifold_edge,
  /// non_manifold_vertex, orientation_conflict, dangling_vertex or
  /// boundary_not_allowed.
  static MeshTopology build(std::size_t vertex_count, std::vector<Face> faces,
                            bool allow_boundary);

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t face_count() const { return faces_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(FaceId f) const { return faces_[f]; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Incident faces of v in counter-clockwise fan order. For a boundary
  /// vertex the fan starts at the face following the boundary.
  const std::vector<FaceId>& vertex_faces(VertexId v) const {
    return vertex_faces_[v];
  }

  /// Number of incident edges.
  std::size_t valence(VertexId v) const { return valence_[v]; }
  bool is_boundary_vertex(VertexId v) const { return boundary_vertex_[v]; }
  bool has_boundary() const;

  /// Index into edges() of the undirected edge {u, v}.
  std::optional<std::size_t> edge_index(VertexId u, VertexId v) const;

  /// Face that traverses the directed edge u -> v.
  std::optional<FaceId> face_of_halfedge(VertexId u, VertexId v) const;

 private:
  static std::uint64_t key(VertexId u, VertexId v) {
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
  }

  std::size_t vertex_count_ = 0;
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> edge_lookup_;
  std::unordered_map<std::uint64_t, FaceId> halfedges_;
  std::vector<std::vector<FaceId>> vertex_faces_;
  std::vector<std::size_t> valence_;
  std::vector<bool> boundary_vertex_;
};

template <std::size_t D>
class PolyMesh {
 public:
  PolyMesh() = default;
  PolyMesh(MeshTopology topology, std::vector<Point<D>> points)
      : topology_(std::move(topology)), points_(std::move(points)) {}

  const MeshTopology& topology() const { return topology_; }
  const std::vector<Point<D>>& points() const { return points_; }
  const Point<D>& point(VertexId v) const { return points_[v]; }
  std::size_t vertex_count() const { return points_.size(); }
  std::size_t face_count() const { return topology_.face_count(); }

 private:
  MeshTopology topology_;
  std::vector<Point<D>> points_;
};

using Mesh2 = PolyMesh<2>;
using Mesh3 = PolyMesh<3>;

template <std::size_t D>
PolyMesh<D> build_mesh(std::vector<Point<D>> points, std::vector<Face> faces,
                       bool allow_boundary) {
  auto topology =
      MeshTopology::build(points.size(), std::move(faces), allow_boundary);
  return PolyMesh<D>(std::move(topology), std::move(points));
}

/// One application of R or A. Output vertex k is the uniform average of
/// the input vertices sources[k].
struct SubdivisionStep {
  MeshTopology topology;
  std::vector<std::vector<VertexId>> sources;
  bool refines = false;  // R halves the lattice spacing, A does not
};

/// R: old vertices, then one vertex per edge, then one per face; each
/// p-gon becomes p quads.
SubdivisionStep refine_step(const MeshTopology& mesh);

/// A: one vertex per face centroid, one face per inner vertex. Faces around
/// boundary vertices are dropped together with centroids no face uses.
SubdivisionStep average_step(const MeshTopology& mesh);

/// The n steps of M_n = A^(n-1) R. Throws degree_out_of_range for n < 1.
std::vector<SubdivisionStep> midpoint_steps(const MeshTopology& mesh, int n);

template <class V>
std::vector<V> apply_step(const SubdivisionStep& step, std::span<const V> values) {
  std::vector<V> out;
  out.reserve(step.sources.size());
  for (const auto& src : step.sources) {
    V acc = values[src.front()];
    for (std::size_t k = 1; k < src.size(); ++k) acc += values[src[k]];
    acc *= 1.0 / static_cast<double>(src.size());
    out.push_back(acc);
  }
  return out;
}

template <std::size_t D>
PolyMesh<D> apply_steps(const std::vector<SubdivisionStep>& steps,
                        const PolyMesh<D>& mesh) {
  std::vector<Point<D>> pts = mesh.points();
  for (const auto& step : steps)
    pts = apply_step<Point<D>>(step, std::span<const Point<D>>(pts));
  return PolyMesh<D>(steps.back().topology, std::move(pts));
}

template <std::size_t D>
PolyMesh<D> refine_R(const PolyMesh<D>& mesh) {
  std::vector<SubdivisionStep> steps;
  steps.push_back(refine_step(mesh.topology()));
  return apply_steps(steps, mesh);
}

template <std::size_t D>
PolyMesh<D> average_A(const PolyMesh<D>& mesh) {
  std::vector<SubdivisionStep> steps;
  steps.push_back(average_step(mesh.topology()));
  return apply_steps(steps, mesh);
}

template <std::size_t D>
PolyMesh<D> midpoint_Mn(const PolyMesh<D>& mesh, int n) {
  return apply_steps(midpoint_steps(mesh.topology(), n), mesh);
}

template <class T>
using SparseRow = std::vector<std::pair<VertexId, T>>;

/// Weights of the requested final-level vertices over the vertices that
/// entered steps.front(), composed through all steps. Rows are sorted by
/// input index. T is double or Rational.
template <class T>
std::vector<SparseRow<T>> compose_steps(std::span<const SubdivisionStep> steps,
                                        std::span<const VertexId> outputs);

extern template std::vector<SparseRow<double>> compose_steps<double>(
    std::span<const SubdivisionStep>, std::span<const VertexId>);
extern template std::vector<SparseRow<Rational>> compose_steps<Rational>(
    std::span<const SubdivisionStep>, std::span<const VertexId>);

struct ExtraordinaryCount {
  std::size_t vertices = 0;  // inner vertices with valence != 4
  std::size_t faces = 0;     // faces with != 4 sides
};

ExtraordinaryCount count_extraordinary(const MeshTopology& mesh);

// ---------------------------------------------------------------------------
// Regular-grid masks

struct StencilEntry {
  std::array<int, 2> offset{};  // input vertex relative to floor(output position)
  Rational weight;
};

struct Stencil {
  std::string role;  // "vertex", "edge" or "face"
  std::vector<StencilEntry> entries;
};

using StencilTable = std::vector<Stencil>;

/// Univariate weights of M_n on the integer lattice. Entry t holds the
/// weight of input 0 for the output at position (t + first + (n-1)/2) / 2.
struct UnivariateMask {
  int first = 0;
  std::vector<Rational> taps;
};

UnivariateMask univariate_mask(int n);

/// Exact stencils of M_n on a regular quad grid, one per output role:
/// vertex/edge/face for odd n, a single face-corner stencil for even n.
/// Entries are sorted by (dy, dx).
StencilTable regular_mask(int n);

}  // namespace midpoint
