#include "midpoint/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace midpoint {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(Errc::parse_error, "line " + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return in;
}

std::string lower_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

Mesh3 read_obj(std::istream& in, bool allow_boundary) {
  std::vector<Point3> points;
  std::vector<Face> faces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Point3 p;
      if (!(ls >> p[0] >> p[1] >> p[2])) parse_fail(line_no, "bad vertex record");
      points.push_back(p);
    } else if (tag == "f") {
      Face face;
      std::string token;
      while (ls >> token) {
        std::string head = token.substr(0, token.find('/'));
        long idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stol(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          parse_fail(line_no, "bad face index '" + token + "'");
        }
        long resolved = idx > 0 ? idx - 1 : static_cast<long>(points.size()) + idx;
        if (idx == 0 || resolved < 0 || resolved >= static_cast<long>(points.size()))
          parse_fail(line_no, "face index " + std::to_string(idx) + " out of range");
        face.push_back(static_cast<VertexId>(resolved));
      }
      if (face.size() < 3) parse_fail(line_no, "face with fewer than 3 vertices");
      faces.push_back(std::move(face));
    }
  }
  return build_mesh(std::move(points), std::move(faces), allow_boundary);
}

Mesh3 read_obj(const std::filesystem::path& path, bool allow_boundary) {
  auto in = open_in(path);
  return read_obj(in, allow_boundary);
}

void write_obj(std::ostream& out, const Mesh3& mesh) {
  char buf[96];
  for (const auto& p : mesh.points()) {
    std::snprintf(buf, sizeof buf, "v %.15e %.15e %.15e\n", p[0], p[1], p[2]);
    out << buf;
  }
  for (const auto& face : mesh.topology().faces()) {
    out << 'f';
    for (VertexId v : face) out << ' ' << (v + 1);
    out << '\n';
  }
}

void write_obj(const std::filesystem::path& path, const Mesh3& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  write_obj(out, mesh);
}

Mesh3 read_off(std::istream& in, bool allow_boundary) {
  std::size_t line_no = 0;
  std::string line;
  // Tokens with their source line, comments stripped.
  std::vector<std::pair<std::string, std::size_t>> tokens;
  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.emplace_back(tok, line_no);
  }
  std::size_t pos = 0;
  auto next = [&](const char* what) -> const std::pair<std::string, std::size_t>& {
    if (pos >= tokens.size()) parse_fail(line_no, std::string("unexpected end, expected ") + what);
    return tokens[pos++];
  };
  auto next_number = [&](const char* what) {
    const auto& [tok, ln] = next(what);
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      parse_fail(ln, std::string("expected ") + what + ", got '" + tok + "'");
    }
  };
  auto next_count = [&](const char* what) {
    double v = next_number(what);
    if (v < 0 || v != static_cast<double>(static_cast<long>(v)))
      parse_fail(tokens[pos - 1].second, std::string("bad ") + what);
    return static_cast<std::size_t>(v);
  };

  const auto& [header, header_line] = next("OFF header");
  if (header != "OFF") parse_fail(header_line, "missing OFF header");
  std::size_t nv = next_count("vertex count");
  std::size_t nf = next_count("face count");
  next_count("edge count");
  std::vector<Point3> points(nv);
  for (auto& p : points)
    for (int k = 0; k < 3; ++k) p[static_cast<std::size_t>(k)] = next_number("coordinate");
  std::vector<Face> faces(nf);
  for (auto& face : faces) {
    std::size_t k = next_count("face size");
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t v = next_count("vertex index");
      if (v >= nv) parse_fail(tokens[pos - 1].second, "vertex index out of range");
      face.push_back(v);
    }
  }
  return build_mesh(std::move(points), std::move(faces), allow_boundary);
}

Mesh3 read_off(const std::filesystem::path& path, bool allow_boundary) {
  auto in = open_in(path);
  return read_off(in, allow_boundary);
}

Mesh3 read_mesh(const std::filesystem::path& path, bool allow_boundary) {
  auto ext = lower_extension(path);
  if (ext == ".off") return read_off(path, allow_boundary);
  if (ext == ".obj") return read_obj(path, allow_boundary);
  throw Error(Errc::parse_error, "unknown mesh extension '" + ext + "'");
}

}  // namespace midpoint
