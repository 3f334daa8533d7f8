#include <algorithm>

#include "midpoint/mesh.hpp"
#include "midpoint/rational.hpp"

namespace midpoint {

std::string to_fraction_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

Rational parse_fraction(const std::string& text) {
  try {
    return Rational(text);
  } catch (const std::exception&) {
    throw Error(Errc::parse_error, "not a fraction: '" + text + "'");
  }
}

UnivariateMask univariate_mask(int n) {
  if (n < 1)
    throw Error(Errc::degree_out_of_range,
                "degree must be >= 1, got " + std::to_string(n));
  // R on a unit impulse at input 0: fine indices -1, 0, 1.
  UnivariateMask mask{-1, {Rational(1, 2), Rational(1), Rational(1, 2)}};
  for (int s = 1; s < n; ++s) {
    // A: new[t] = (old[t] + old[t + 1]) / 2, covering first-1 .. last.
    std::vector<Rational> next(mask.taps.size() + 1);
    for (std::size_t k = 0; k < next.size(); ++k) {
      Rational left = k >= 1 ? mask.taps[k - 1] : Rational(0);
      Rational right = k < mask.taps.size() ? mask.taps[k] : Rational(0);
      next[k] = (left + right) / 2;
    }
    mask.first -= 1;
    mask.taps = std::move(next);
  }
  return mask;
}

namespace {

// Weights over input k for the output at 1D position quarter/4.
std::vector<std::pair<int, Rational>> weights_at(const UnivariateMask& mask,
                                                 int n, int quarter) {
  // position p = (t + (n-1)/2) / 2  <=>  t = (4p - (n-1)) / 2
  const int twice_t = quarter - (n - 1);
  const int t = twice_t / 2;
  const int last = mask.first + static_cast<int>(mask.taps.size()) - 1;
  std::vector<std::pair<int, Rational>> out;
  for (int k = (t - last) / 2 - 1; k <= (t - mask.first) / 2 + 1; ++k) {
    int d = t - 2 * k;
    if (d < mask.first || d > last) continue;
    const Rational& w = mask.taps[static_cast<std::size_t>(d - mask.first)];
    if (w != 0) out.emplace_back(k, w);
  }
  return out;
}

Stencil tensor_stencil(const UnivariateMask& mask, int n, std::string role,
                       int qx, int qy) {
  auto wx = weights_at(mask, n, qx);
  auto wy = weights_at(mask, n, qy);
  Stencil s{std::move(role), {}};
  for (const auto& [ky, vy] : wy)
    for (const auto& [kx, vx] : wx) s.entries.push_back({{kx, ky}, vx * vy});
  return s;
}

}  // namespace

StencilTable regular_mask(int n) {
  const auto mask = univariate_mask(n);
  StencilTable table;
  if (n % 2 == 1) {
    table.push_back(tensor_stencil(mask, n, "vertex", 0, 0));
    table.push_back(tensor_stencil(mask, n, "edge", 2, 0));
    table.push_back(tensor_stencil(mask, n, "face", 2, 2));
  } else {
    table.push_back(tensor_stencil(mask, n, "face", 1, 1));
  }
  return table;
}

}  // namespace midpoint
