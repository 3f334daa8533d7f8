#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "midpoint/charmap.hpp"
#include "midpoint/mesh.hpp"
#include "midpoint/ringnet.hpp"
#include "midpoint/spectral.hpp"

namespace midpoint {

/// Fixed float formatting of all text outputs: printf "%.15e".
std::string format_double(double x);

/// Ringnet JSON: {m, kind, rings, f?, vertices: [{l, i, j, re, im}, ...]} in
/// storage order. Reading accepts any vertex order and throws parse_error on
/// malformed documents, unknown or repeated labels and missing vertices.
void write_ringnet_json(std::ostream& out, const Ringnet& net);
Ringnet read_ringnet_json(std::istream& in);

/// {n, m, j, kind, frequencies: [{f, eigenvalues: [[re, im], ...]}], dominant,
/// lambda_sub, mult_alg, mult_geo, sub_frequencies, monotonicity, normB,
/// normC, normB_exact?, normC_exact?, row_sum_error, max_upper, margins,
/// pass_flags}.
void write_report_json(std::ostream& out, const SpectralReport& report);

/// Columns f,index,re,im,modulus; eigenvalues of each frequency block sorted
/// by decreasing modulus.
void write_eigenvalue_csv(std::ostream& out, const SpectralReport& report);

/// First half segment of a frequency-f net in frame K: columns l,i,j,x,y.
void write_half_segment_csv(std::ostream& out, const Ringnet& net, int f);

void write_certificate_json(std::ostream& out, const C1Certificate& cert);

/// One row per case: n,m,lambda,mult_alg,mult_geo,verdict. Rejected cases
/// carry the error text in place of the verdict fields.
struct SummaryRow {
  int n = 0;
  int m = 0;
  std::optional<C1Certificate> cert;
  std::string error;
};
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// {n, stencils: [{role, offsets: [[dx, dy], ...], weights: ["p/q", ...]}]}.
void write_stencil_json(std::ostream& out, int n, const StencilTable& table);

}  // namespace midpoint
