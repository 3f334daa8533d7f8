#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "midpoint/ringnet.hpp"
#include "midpoint/spectral.hpp"

namespace midpoint {

/// Bi-degree n uniform B-spline patch over the chart cell [a, a+1] x [b, b+1]
/// of one segment. ctrl[s * (n+1) + r] is the control point at chart
/// position (a + 1/2 - n/2 + r, b + 1/2 - n/2 + s).
struct SplinePatch {
  int segment = 0;
  int a = 0;
  int b = 0;
  std::vector<Complex> ctrl;
};

/// Ring of spline patches defined by a ρ-net, covering
/// Ω = [0,2]^2 \ [0,1)^2 per segment with parameters (u, v) = (x, y) / q,
/// q = floor(n/2), in chart units (x, y).
struct CharacteristicMap {
  int n = 0;
  int m = 0;
  int q = 0;
  NetKind kind = NetKind::primal;
  Complex rotation{1.0, 0.0};     // applied to all control points
  std::vector<SplinePatch> patches;  // segment-major, then (b, a) lexicographic

  std::size_t patches_per_segment() const { return 3 * std::size_t(q) * std::size_t(q); }
  const SplinePatch& patch(int segment, int a, int b) const;
};

/// Storage indices of the (n+1) x (n+1) subnet of segment l that controls
/// the chart cell [a, a+1] x [b, b+1], row-major along y. Throws
/// subnet_irregular if the subnet surrounds the extraordinary element and
/// too_few_rings if it leaves the net.
std::vector<std::size_t> regular_subnet(const NetLayout& layout, int n, int l, int a, int b);

/// Throws degree_out_of_range (n < 2), parity_mismatch, too_few_rings and
/// subnet_irregular. With normalize, the map is rotated so that c(1,1) > 0.
CharacteristicMap extract_spline_ring(const Ringnet& net, int n, bool normalize = true);

/// Uniform B-spline of degree ctrl.size()-1 on its middle knot span, t in [0, 1].
Complex eval_uniform_bspline(const std::vector<Complex>& ctrl, double t);

/// Patch value at local coordinates (s, t) in [0, 1]^2.
Complex evaluate_patch(const CharacteristicMap& map, std::size_t patch, double s, double t);

/// c(u, v) of a segment. Throws domain_error outside Ω.
Complex evaluate(const CharacteristicMap& map, int segment, double u, double v);

struct Derivatives {
  Complex cu;
  Complex cv;
};

/// Exact partial derivatives with respect to u and v. Throws domain_error.
Derivatives evaluate_derivatives(const CharacteristicMap& map, int segment, double u, double v);

/// Edge directions p_(i,j+1)^0 - p_(i,j)^0 of the first segment plus u_1 and
/// î u_0 (unit spoke directions of S_0 and S_1), all multiplied by rotation.
struct EdgeDirectionSet {
  std::vector<Complex> directions;
  Complex u0;
  Complex u1;

  /// All elements (directions, u_1, î u_0).
  std::vector<Complex> all() const;
};

EdgeDirectionSet edge_directions(const Ringnet& net, Complex rotation);
/// Rotation e^{-iφ/2} with φ = 2πf/m, f from the frequency hint (default 1),
/// which maps the half spoke S_0.5 onto the positive real axis.
EdgeDirectionSet edge_directions(const Ringnet& net);

/// Smallest min(Re z, Im z) / max|z| over a set; positive iff all lie in open Q.
double quadrant_margin(const std::vector<Complex>& values);

struct ConeWitness {
  std::size_t patch = 0;
  int r = 0;  // column of the difference net (sub-cell x index when refined)
  int s = 0;  // row of the difference net (sub-cell y index when refined)
  int depth = 0;  // 0: B-spline control net; k > 0: Bézier net on a 2^-k sub-cell
  Complex value;
};

struct ConeResult {
  bool pass = false;
  double margin = 0.0;  // quadrant_margin of the deciding control points
  std::vector<ConeWitness> witnesses;
  // v-differences of the B-spline control nets
  bool control_net_pass = false;
  double control_net_margin = 0.0;
  std::size_t control_net_witnesses = 0;
  int depth = 0;            // deepest Bézier subdivision used (0 if not needed)
  std::size_t leaves = 0;   // Bézier sub-patches checked
};

/// v-difference control points of the B-spline nets of every first-segment
/// patch in open Q.
ConeResult control_net_cone_test(const CharacteristicMap& map);

/// Bernstein coefficients of the degree-d uniform B-spline basis on its
/// middle knot span; Bézier points = M * B-spline points.
Eigen::MatrixXd bspline_to_bezier(int degree);

/// Bézier net of c_v / q on a patch: n rows along v (degree n-1), n+1
/// columns along u (degree n).
Eigen::MatrixXcd cv_bezier_net(const CharacteristicMap& map, std::size_t patch);

/// Sufficient test for c_v(Ω) ⊂ Q. A set of control points is accepted when
/// its quadrant_margin exceeds band. Accepts the B-spline v-difference nets
/// directly; otherwise converts c_v of each patch to Bézier form and
/// subdivides at midpoints up to max_depth. Witnesses are the Bézier control
/// points not accepted at max_depth; margin is the smallest accepted margin,
/// or the smallest witness margin on failure.
ConeResult cone_test(const CharacteristicMap& map, int max_depth = 8, double band = 1e-8);

/// Minimum of Im(conj(c_u) c_v) / (|c_u| |c_v|) over a samples x samples grid
/// per patch.
double min_jacobian(const CharacteristicMap& map, int samples = 17);

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

struct CheckResult {
  Verdict verdict = Verdict::fail;
  double margin = 0.0;  // signed distance from the decision threshold
  std::string detail;
};

struct CertifyOptions {
  double tol = 1e-11;   // power iteration
  int max_iter = 20000;
  double imag_tol = 1e-9;
  double cone_tol = 1e-9;  // relative, for the quadrant margin
  int jacobian_samples = 17;
  bool exact = true;        // rational stochasticity and bounds
  bool timestamps = false;  // record wall-clock start and end
};

struct C1Certificate {
  int n = 0;
  int m = 0;
  CheckResult stochastic;
  CheckResult dominant_simple;
  CheckResult subdominant_real_mult2;
  CheckResult charmap_regular_injective;
  Verdict verdict = Verdict::fail;
  double lambda = 0.0;
  Multiplicity sub_mult;
  std::size_t patch_count = 0;
  double c11 = 0.0;
  double jacobian_min = 0.0;
  std::size_t cone_witnesses = 0;
  int cone_depth = 0;
  bool control_net_pass = false;  // B-spline v-differences alone in open Q
  double control_net_margin = 0.0;
  int iterations = 0;
  double residual = 0.0;
  CertifyOptions options;
  std::optional<std::chrono::system_clock::time_point> started;
  std::optional<std::chrono::system_clock::time_point> finished;
};

/// Spectral report, characteristic mesh, spline ring and cone test.
/// Throws degree_out_of_range for n < 2 and bad_valence for m < 3.
C1Certificate certify_C1(int n, int m, const CertifyOptions& options = {});

/// Combines per-check verdicts: fail dominates, then inconclusive.
Verdict combine(std::initializer_list<Verdict> verdicts);

/// Samples per patch and segment on a samples x samples grid.
struct MapSample {
  double u = 0.0;
  double v = 0.0;
  int segment = 0;
  Complex value;
};
std::vector<MapSample> sample_map(const CharacteristicMap& map, int samples);

void write_samples_csv(const CharacteristicMap& map, int samples, std::ostream& out);
void write_samples_obj(const CharacteristicMap& map, int samples, std::ostream& out);

}  // namespace midpoint
