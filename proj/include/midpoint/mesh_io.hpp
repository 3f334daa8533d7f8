#pragma once

#include <filesystem>
#include <iosfwd>

#include "midpoint/mesh.hpp"

namespace midpoint {

// OBJ: only `v` and `f` records are interpreted (1-based, negative indices
// are relative); `f a/b/c` keeps the position index. Other records are
// skipped. Malformed records throw parse_error naming the line.
Mesh3 read_obj(std::istream& in, bool allow_boundary);
Mesh3 read_obj(const std::filesystem::path& path, bool allow_boundary);
void write_obj(std::ostream& out, const Mesh3& mesh);
void write_obj(const std::filesystem::path& path, const Mesh3& mesh);

Mesh3 read_off(std::istream& in, bool allow_boundary);
Mesh3 read_off(const std::filesystem::path& path, bool allow_boundary);

/// Dispatches on the file extension (.obj / .off).
Mesh3 read_mesh(const std::filesystem::path& path, bool allow_boundary);

}  // namespace midpoint
