#include "midpoint/mesh.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace midpoint {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::invalid_face: return "InvalidFace";
    case Errc::non_manifold_edge: return "NonManifoldEdge";
    case Errc::non_manifold_vertex: return "NonManifoldVertex";
    case Errc::orientation_conflict: return "OrientationConflict";
    case Errc::dangling_vertex: return "DanglingVertex";
    case Errc::boundary_not_allowed: return "BoundaryNotAllowed";
    case Errc::degree_out_of_range: return "DegreeOutOfRange";
    case Errc::bad_valence: return "BadValence";
    case Errc::bad_frequency: return "BadFrequency";
    case Errc::parity_mismatch: return "ParityMismatch";
    case Errc::too_few_rings: return "TooFewRings";
    case Errc::angle_out_of_range: return "AngleOutOfRange";
    case Errc::topology_mismatch: return "TopologyMismatch";
    case Errc::ordering_violation: return "OrderingViolation";
    case Errc::orbit_mismatch: return "OrbitMismatch";
    case Errc::convergence_failure: return "ConvergenceFailure";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::positivity_violation: return "PositivityViolation";
    case Errc::ill_conditioned: return "IllConditioned";
    case Errc::subnet_irregular: return "SubnetIrregular";
    case Errc::domain_error: return "DomainError";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IOError";
    case Errc::usage_error: return "UsageError";
  }
  return "Unknown";
}

namespace {

struct EdgeUse {
  FaceId face;
  bool forward;  // face traverses a -> b (a < b)
};

}  // namespace

MeshTopology MeshTopology::build(std::size_t vertex_count,
                                 std::vector<Face> faces,
                                 bool allow_boundary) {
  MeshTopology m;
  m.vertex_count_ = vertex_count;

  for (FaceId f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    if (face.size() < 3)
      throw Error(Errc::invalid_face,
                  "face " + std::to_string(f) + " has fewer than 3 vertices");
    for (VertexId v : face)
      if (v >= vertex_count)
        throw Error(Errc::index_out_of_range,
                    "face " + std::to_string(f) + " references vertex " +
                        std::to_string(v));
    auto sorted = face;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(Errc::invalid_face,
                  "face " + std::to_string(f) + " repeats a vertex");
  }

  // Undirected edges in order of first appearance.
  std::vector<std::vector<EdgeUse>> uses;
  for (FaceId f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    for (std::size_t k = 0; k < face.size(); ++k) {
      VertexId u = face[k], v = face[(k + 1) % face.size()];
      VertexId a = std::min(u, v), b = std::max(u, v);
      auto [it, inserted] = m.edge_lookup_.try_emplace(key(a, b), m.edges_.size());
      if (inserted) {
        m.edges_.push_back(Edge{a, b, f, std::nullopt});
        uses.emplace_back();
      }
      auto& use = uses[it->second];
      use.push_back(EdgeUse{f, u == a});
      if (use.size() > 2)
        throw Error(Errc::non_manifold_edge,
                    "edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ") borders more than two faces");
    }
  }

  // Orient each connected component by breadth-first propagation.
  std::vector<std::vector<std::size_t>> face_edges(faces.size());
  for (std::size_t e = 0; e < uses.size(); ++e)
    for (const auto& u : uses[e]) face_edges[u.face].push_back(e);

  std::vector<int> state(faces.size(), 0);  // 0 unvisited, 1 kept, -1 flipped
  for (FaceId seed = 0; seed < faces.size(); ++seed) {
    if (state[seed] != 0) continue;
    state[seed] = 1;
    std::deque<FaceId> queue{seed};
    while (!queue.empty()) {
      FaceId f = queue.front();
      queue.pop_front();
      for (std::size_t e : face_edges[f]) {
        if (uses[e].size() != 2) continue;
        const auto& mine = uses[e][0].face == f ? uses[e][0] : uses[e][1];
        const auto& other = uses[e][0].face == f ? uses[e][1] : uses[e][0];
        bool mine_fwd = mine.forward == (state[f] == 1);
        if (state[other.face] == 0) {
          // Neighbour must traverse the edge opposite to us.
          state[other.face] = (other.forward != mine_fwd) ? 1 : -1;
          queue.push_back(other.face);
        } else {
          bool other_fwd = other.forward == (state[other.face] == 1);
          if (other_fwd == mine_fwd)
            throw Error(Errc::orientation_conflict,
                        "faces " + std::to_string(f) + " and " +
                            std::to_string(other.face) +
                            " cannot be oriented consistently");
        }
      }
    }
  }
  for (FaceId f = 0; f < faces.size(); ++f)
    if (state[f] == -1) std::reverse(faces[f].begin(), faces[f].end());

  for (std::size_t e = 0; e < uses.size(); ++e) {
    if (uses[e].size() == 2) {
      m.edges_[e].face1 = uses[e][1].face;
    } else if (!allow_boundary) {
      throw Error(Errc::boundary_not_allowed,
                  "edge (" + std::to_string(m.edges_[e].a) + "," +
                      std::to_string(m.edges_[e].b) + ") is a boundary edge");
    }
  }

  for (FaceId f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    for (std::size_t k = 0; k < face.size(); ++k)
      m.halfedges_.emplace(key(face[k], face[(k + 1) % face.size()]), f);
  }

  m.valence_.assign(vertex_count, 0);
  m.boundary_vertex_.assign(vertex_count, false);
  for (const auto& e : m.edges_) {
    ++m.valence_[e.a];
    ++m.valence_[e.b];
    if (e.is_boundary()) {
      m.boundary_vertex_[e.a] = true;
      m.boundary_vertex_[e.b] = true;
    }
  }

  std::vector<std::vector<FaceId>> incident(vertex_count);
  for (FaceId f = 0; f < faces.size(); ++f)
    for (VertexId v : faces[f]) incident[v].push_back(f);

  auto position = [&](FaceId f, VertexId v) {
    const auto& face = faces[f];
    return static_cast<std::size_t>(
        std::find(face.begin(), face.end(), v) - face.begin());
  };
  auto prev_of = [&](FaceId f, VertexId v) {
    const auto& face = faces[f];
    return face[(position(f, v) + face.size() - 1) % face.size()];
  };
  auto next_of = [&](FaceId f, VertexId v) {
    const auto& face = faces[f];
    return face[(position(f, v) + 1) % face.size()];
  };

  m.vertex_faces_.resize(vertex_count);
  for (VertexId v = 0; v < vertex_count; ++v) {
    if (incident[v].empty())
      throw Error(Errc::dangling_vertex,
                  "vertex " + std::to_string(v) + " belongs to no face");
    FaceId start = incident[v].front();
    if (m.boundary_vertex_[v]) {
      // Rewind clockwise to the first face of the fan.
      std::size_t guard = 0;
      while (auto before = m.face_of_halfedge(next_of(start, v), v)) {
        start = *before;
        if (++guard > incident[v].size()) break;
      }
    }
    auto& fan = m.vertex_faces_[v];
    FaceId f = start;
    while (true) {
      fan.push_back(f);
      auto after = m.face_of_halfedge(v, prev_of(f, v));
      if (!after || *after == start) break;
      f = *after;
      if (fan.size() > incident[v].size()) break;
    }
    if (fan.size() != incident[v].size())
      throw Error(Errc::non_manifold_vertex,
                  "faces around vertex " + std::to_string(v) +
                      " do not form a single fan");
  }

  m.faces_ = std::move(faces);
  return m;
}

bool MeshTopology::has_boundary() const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return e.is_boundary(); });
}

std::optional<std::size_t> MeshTopology::edge_index(VertexId u, VertexId v) const {
  auto it = edge_lookup_.find(key(std::min(u, v), std::max(u, v)));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<FaceId> MeshTopology::face_of_halfedge(VertexId u, VertexId v) const {
  auto it = halfedges_.find(key(u, v));
  if (it == halfedges_.end()) return std::nullopt;
  return it->second;
}

SubdivisionStep refine_step(const MeshTopology& mesh) {
  const std::size_t nv = mesh.vertex_count();
  const std::size_t ne = mesh.edge_count();
  SubdivisionStep step;
  step.refines = true;
  step.sources.reserve(nv + ne + mesh.face_count());
  for (VertexId v = 0; v < nv; ++v) step.sources.push_back({v});
  for (const auto& e : mesh.edges()) step.sources.push_back({e.a, e.b});
  for (const auto& face : mesh.faces()) step.sources.push_back(face);

  std::vector<Face> faces;
  for (FaceId f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.face(f);
    const VertexId center = nv + ne + f;
    const std::size_t p = face.size();
    for (std::size_t k = 0; k < p; ++k) {
      VertexId v = face[k];
      VertexId next = face[(k + 1) % p];
      VertexId prev = face[(k + p - 1) % p];
      faces.push_back({v, nv + *mesh.edge_index(v, next), center,
                       nv + *mesh.edge_index(prev, v)});
    }
  }
  step.topology = MeshTopology::build(step.sources.size(), std::move(faces),
                                      mesh.has_boundary());
  return step;
}

SubdivisionStep average_step(const MeshTopology& mesh) {
  std::vector<Face> faces;
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    if (mesh.is_boundary_vertex(v)) continue;
    const auto& fan = mesh.vertex_faces(v);
    faces.emplace_back(fan.begin(), fan.end());
  }

  // Keep only centroids that some output face uses.
  std::vector<std::size_t> remap(mesh.face_count(), SIZE_MAX);
  SubdivisionStep step;
  for (auto& face : faces) {
    for (auto& f : face) {
      if (remap[f] == SIZE_MAX) {
        remap[f] = step.sources.size();
        step.sources.push_back(mesh.face(f));
      }
      f = remap[f];
    }
  }
  step.topology = MeshTopology::build(step.sources.size(), std::move(faces),
                                      /*allow_boundary=*/true);
  return step;
}

std::vector<SubdivisionStep> midpoint_steps(const MeshTopology& mesh, int n) {
  if (n < 1)
    throw Error(Errc::degree_out_of_range,
                "degree must be >= 1, got " + std::to_string(n));
  std::vector<SubdivisionStep> steps;
  steps.reserve(static_cast<std::size_t>(n));
  steps.push_back(refine_step(mesh));
  for (int k = 1; k < n; ++k) steps.push_back(average_step(steps.back().topology));
  return steps;
}

template <class T>
std::vector<SparseRow<T>> compose_steps(std::span<const SubdivisionStep> steps,
                                        std::span<const VertexId> outputs) {
  std::vector<SparseRow<T>> rows;
  rows.reserve(outputs.size());
  for (VertexId o : outputs) rows.push_back({{o, T(1)}});

  std::vector<T> scratch;
  std::vector<char> touched_flag;
  std::vector<VertexId> touched;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const auto& step = *it;
    std::size_t input_count = 0;
    for (const auto& src : step.sources)
      for (VertexId v : src) input_count = std::max(input_count, v + 1);
    scratch.assign(input_count, T(0));
    touched_flag.assign(input_count, 0);
    for (auto& row : rows) {
      touched.clear();
      for (const auto& [idx, w] : row) {
        const auto& src = step.sources[idx];
        T share = w / T(static_cast<long>(src.size()));
        for (VertexId v : src) {
          if (!touched_flag[v]) {
            touched_flag[v] = 1;
            touched.push_back(v);
          }
          scratch[v] += share;
        }
      }
      std::sort(touched.begin(), touched.end());
      row.clear();
      for (VertexId v : touched) {
        row.emplace_back(v, scratch[v]);
        scratch[v] = T(0);
        touched_flag[v] = 0;
      }
    }
  }
  return rows;
}

template std::vector<SparseRow<double>> compose_steps<double>(
    std::span<const SubdivisionStep>, std::span<const VertexId>);
template std::vector<SparseRow<Rational>> compose_steps<Rational>(
    std::span<const SubdivisionStep>, std::span<const VertexId>);

ExtraordinaryCount count_extraordinary(const MeshTopology& mesh) {
  ExtraordinaryCount count;
  for (VertexId v = 0; v < mesh.vertex_count(); ++v)
    if (!mesh.is_boundary_vertex(v) && mesh.valence(v) != 4) ++count.vertices;
  for (const auto& face : mesh.faces())
    if (face.size() != 4) ++count.faces;
  return count;
}

}  // namespace midpoint
