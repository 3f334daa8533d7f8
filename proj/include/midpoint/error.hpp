#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace midpoint {

enum class Errc {
  index_out_of_range,
  invalid_face,
  non_manifold_edge,
  non_manifold_vertex,
  orientation_conflict,
  dangling_vertex,
  boundary_not_allowed,
  degree_out_of_range,
  bad_valence,
  bad_frequency,
  parity_mismatch,
  too_few_rings,
  angle_out_of_range,
  topology_mismatch,
  ordering_violation,
  orbit_mismatch,
  convergence_failure,
  no_convergence,
  positivity_violation,
  ill_conditioned,
  subnet_irregular,
  domain_error,
  parse_error,
  io_error,
  usage_error,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace midpoint
