#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "doctest.h"
#include "midpoint/mesh.hpp"
#include "midpoint/ringnet.hpp"

namespace test {

using namespace midpoint;

inline void check_errc(Errc code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL("expected error " << errc_name(code));
  } catch (const Error& e) {
    CHECK_MESSAGE(e.code() == code, e.what());
  }
}

inline Mesh3 cube() {
  std::vector<Point3> pts;
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) pts.push_back({{double(x), double(y), double(z)}});
  std::vector<Face> faces{{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                          {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  return build_mesh(std::move(pts), std::move(faces), false);
}

/// Regular grid of cells x cells unit quads with integer vertex coordinates.
inline Mesh2 grid2(int cells) {
  std::vector<Point2> pts;
  std::vector<Face> faces;
  const int w = cells + 1;
  for (int y = 0; y <= cells; ++y)
    for (int x = 0; x <= cells; ++x) pts.push_back({{double(x), double(y)}});
  for (int y = 0; y < cells; ++y)
    for (int x = 0; x < cells; ++x) {
      auto id = [&](int a, int b) { return static_cast<VertexId>(b * w + a); };
      faces.push_back({id(x, y), id(x + 1, y), id(x + 1, y + 1), id(x, y + 1)});
    }
  return build_mesh(std::move(pts), std::move(faces), true);
}

/// Stencils of M_n obtained by composing R and A on a regular grid in exact
/// arithmetic and reading off the rows of the vertices at the role positions.
inline StencilTable grid_oracle(int n) {
  const int cells = 2 * n + 6;
  const int c = cells / 2;
  auto grid = grid2(cells);
  auto steps = midpoint_steps(grid.topology(), n);
  std::vector<Point2> pts = grid.points();
  for (const auto& s : steps) pts = apply_step<Point2>(s, pts);

  std::vector<std::pair<std::string, std::array<int, 2>>> roles;
  if (n % 2 == 1)
    roles = {{"vertex", {0, 0}}, {"edge", {2, 0}}, {"face", {2, 2}}};
  else
    roles = {{"face", {1, 1}}};

  StencilTable table;
  for (const auto& [role, q] : roles) {
    Point2 target{{c + q[0] / 4.0, c + q[1] / 4.0}};
    std::optional<VertexId> found;
    for (VertexId v = 0; v < pts.size(); ++v)
      if (max_abs_diff(pts[v], target) < 1e-9) found = v;
    REQUIRE(found.has_value());
    std::vector<VertexId> out{*found};
    auto rows = compose_steps<Rational>(steps, out);
    Stencil s{role, {}};
    for (const auto& [in, w] : rows[0]) {
      const auto& p = grid.point(in);
      s.entries.push_back({{int(std::lround(p[0])) - c, int(std::lround(p[1])) - c}, w});
    }
    std::sort(s.entries.begin(), s.entries.end(), [](const auto& a, const auto& b) {
      return std::make_pair(a.offset[1], a.offset[0]) <
             std::make_pair(b.offset[1], b.offset[0]);
    });
    table.push_back(std::move(s));
  }
  return table;
}

/// Random net with uniform coordinates in [-1, 1]^2.
inline Ringnet random_net(int m, NetKind kind, int ring_count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NetLayout layout(m, kind, ring_count);
  std::vector<Complex> pts(layout.size());
  for (auto& p : pts) p = {u(rng), u(rng)};
  return Ringnet(layout, std::move(pts));
}

inline double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace test

namespace test {

/// Random net with rotation and reflection symmetry of frequency f. With
/// in_cone the first half segment lies in the cone of the spokes S_0, S_0.5.
inline Ringnet random_symmetric_net(int m, int f, NetKind kind, int ring_count,
                                    std::mt19937_64& rng, bool in_cone) {
  std::uniform_real_distribution<double> u(in_cone ? 0.05 : -1.0, 1.0);
  const double phi = 2.0 * M_PI * f / m;
  const Complex half = std::polar(1.0, phi / 2.0);
  NetLayout layout(m, kind, ring_count);
  std::vector<Complex> h;
  for (std::size_t k : half_segment(layout)) {
    auto lab = layout.label(k);
    if (lab.j == 0)
      h.emplace_back(u(rng), 0.0);
    else if (lab.i == lab.j)
      h.push_back(u(rng) * half);
    else if (in_cone)
      h.push_back(u(rng) + u(rng) * half);
    else
      h.emplace_back(u(rng), u(rng));
  }
  return make_symmetric_net(m, f, kind, ring_count, h);
}

}  // namespace test

namespace test {

/// Smallest r such that every core vertex influences every core vertex
/// after r subdivision steps.
inline int influence_steps(int n, int m) {
  const auto kind = kind_for_degree(n);
  const auto rows = subdivision_rows<double>(n, m, kind, core_ring(n));
  const std::size_t size = rows.size();
  std::vector<std::vector<bool>> reach(size, std::vector<bool>(size, false));
  for (std::size_t k = 0; k < size; ++k) reach[k][k] = true;
  for (int r = 1; r < 64; ++r) {
    std::vector<std::vector<bool>> next(size, std::vector<bool>(size, false));
    bool full = true;
    for (std::size_t k = 0; k < size; ++k) {
      for (const auto& [in, w] : rows[k])
        if (w > 0)
          for (std::size_t c = 0; c < size; ++c)
            if (reach[in][c]) next[k][c] = true;
      for (std::size_t c = 0; c < size; ++c) full = full && next[k][c];
    }
    reach = std::move(next);
    if (full) return r;
  }
  return -1;
}

}  // namespace test
