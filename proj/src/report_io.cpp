#include "midpoint/report_io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>

#include "json.hpp"

namespace midpoint {

namespace {

using Json = nlohmann::ordered_json;

void dump(std::ostream& out, const Json& j, int indent) {
  const std::string pad(std::size_t(indent) * 2, ' ');
  const std::string inner(std::size_t(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out << ",\n";
        first = false;
        out << inner << Json(key).dump() << ": ";
        dump(out, value, indent + 1);
      }
      out << '\n' << pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // arrays of scalars stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) {
        return e.is_primitive();
      });
      out << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << (flat ? ", " : ",");
        first = false;
        if (!flat) out << '\n' << inner;
        dump(out, e, indent + 1);
      }
      if (!flat) out << '\n' << pad;
      out << ']';
      return;
    }
    case Json::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

void write_json(std::ostream& out, const Json& j) {
  dump(out, j, 0);
  out << '\n';
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json multiplicity_json(const Multiplicity& m) {
  return Json{{"algebraic", m.algebraic},
              {"geometric", m.geometric},
              {"cluster_radius", m.cluster_radius}};
}

Json check_json(const CheckResult& c) {
  return Json{{"verdict", to_string(c.verdict)}, {"margin", c.margin}, {"detail", c.detail}};
}

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

[[noreturn]] void bad(const std::string& what) {
  throw Error(Errc::parse_error, "ringnet JSON: " + what);
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

void write_ringnet_json(std::ostream& out, const Ringnet& net) {
  Json j;
  j["m"] = net.valence();
  j["kind"] = to_string(net.kind());
  j["rings"] = net.ring_count();
  if (net.frequency_hint()) j["f"] = *net.frequency_hint();
  Json verts = Json::array();
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto lab = net.layout().label(k);
    verts.push_back(Json{{"l", lab.l}, {"i", lab.i}, {"j", lab.j},
                         {"re", net[k].real()}, {"im", net[k].imag()}});
  }
  j["vertices"] = std::move(verts);
  write_json(out, j);
}

Ringnet read_ringnet_json(std::istream& in) {
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    bad(e.what());
  }
  if (!j.is_object()) bad("document must be an object");
  for (const char* key : {"m", "kind", "rings", "vertices"})
    if (!j.contains(key)) bad(std::string("missing field '") + key + "'");
  try {
    const int m = j.at("m").get<int>();
    const NetKind kind = parse_net_kind(j.at("kind").get<std::string>());
    const int rings = j.at("rings").get<int>();
    if (m < 3) bad("m must be >= 3");
    if (rings < 1) bad("rings must be >= 1");
    NetLayout layout(m, kind, rings);
    std::vector<Complex> pts(layout.size());
    std::set<std::size_t> seen;
    if (!j.at("vertices").is_array()) bad("'vertices' must be an array");
    for (const auto& v : j.at("vertices")) {
      const int l = v.at("l").get<int>(), i = v.at("i").get<int>(), jj = v.at("j").get<int>();
      auto k = layout.find(l, i, jj);
      if (!k || !(layout.label(*k) == NetIndex{l, i, jj}))
        bad("unknown vertex label (" + std::to_string(l) + "," + std::to_string(i) + "," +
            std::to_string(jj) + ")");
      if (!seen.insert(*k).second)
        bad("repeated vertex (" + std::to_string(l) + "," + std::to_string(i) + "," +
            std::to_string(jj) + ")");
      pts[*k] = {v.at("re").get<double>(), v.at("im").get<double>()};
    }
    if (seen.size() != layout.size())
      bad("expected " + std::to_string(layout.size()) + " vertices, got " +
          std::to_string(seen.size()));
    std::optional<int> f;
    if (j.contains("f")) f = j.at("f").get<int>();
    return Ringnet(layout, std::move(pts), f);
  } catch (const Json::exception& e) {
    bad(e.what());
  }
}

void write_report_json(std::ostream& out, const SpectralReport& r) {
  Json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["j"] = r.j;
  j["kind"] = to_string(r.kind);
  Json freqs = Json::array();
  for (const auto& e : r.frequencies) {
    Json values = Json::array();
    for (auto z : e.eigenvalues) values.push_back(complex_json(z));
    freqs.push_back(Json{{"f", e.f}, {"dominant", complex_json(e.dominant)},
                         {"eigenvalues", std::move(values)}});
  }
  j["frequencies"] = std::move(freqs);
  j["dominant"] = complex_json(r.dominant);
  j["dominant_multiplicity"] = multiplicity_json(r.dominant_mult);
  j["lambda_sub"] = r.lambda_sub.real();
  j["lambda_sub_imag"] = r.lambda_sub.imag();
  j["mult_alg"] = r.sub_mult.algebraic;
  j["mult_geo"] = r.sub_mult.geometric;
  j["cluster_radius"] = r.sub_mult.cluster_radius;
  j["sub_frequencies"] = r.sub_frequencies;
  j["monotonicity"] = r.monotonicity;
  j["normB"] = r.bounds.normB;
  j["normC"] = r.bounds.normC;
  if (r.bounds.normB_exact) j["normB_exact"] = to_fraction_string(*r.bounds.normB_exact);
  if (r.bounds.normC_exact) j["normC_exact"] = to_fraction_string(*r.bounds.normC_exact);
  j["row_sum_error"] = r.row_sum_error;
  j["max_upper"] = r.max_upper;
  j["ill_conditioned"] = r.ill_conditioned;
  j["margins"] = Json{{"sub_gap", r.margin_sub_gap},
                      {"imag", r.margin_imag},
                      {"monotone", r.margin_monotone}};
  const auto& f = r.flags;
  j["pass_flags"] = Json{{"stochastic", f.stochastic},
                         {"dominant_simple", f.dominant_simple},
                         {"subdominant_real_positive", f.subdominant_real_positive},
                         {"subdominant_mult2", f.subdominant_mult2},
                         {"subdominant_frequencies", f.subdominant_frequencies},
                         {"lambda_range", f.lambda_range},
                         {"monotone", f.monotone},
                         {"block_structure", f.block_structure},
                         {"block_bounds", f.block_bounds},
                         {"all", f.all()}};
  write_json(out, j);
}

void write_eigenvalue_csv(std::ostream& out, const SpectralReport& r) {
  out << "f,index,re,im,modulus\n";
  for (const auto& e : r.frequencies)
    for (std::size_t k = 0; k < e.eigenvalues.size(); ++k) {
      const auto z = e.eigenvalues[k];
      out << e.f << ',' << k << ',' << format_double(z.real()) << ','
          << format_double(z.imag()) << ',' << format_double(std::abs(z)) << '\n';
    }
}

void write_half_segment_csv(std::ostream& out, const Ringnet& net, int f) {
  const auto frame = frame_K(2.0 * std::numbers::pi * f / net.valence());
  out << "l,i,j,x,y\n";
  for (std::size_t k : half_segment(net.layout())) {
    const auto lab = net.layout().label(k);
    const auto xy = frame.coords(net[k]);
    out << lab.l << ',' << lab.i << ',' << lab.j << ',' << format_double(xy[0]) << ','
        << format_double(xy[1]) << '\n';
  }
}

void write_certificate_json(std::ostream& out, const C1Certificate& c) {
  Json j;
  j["n"] = c.n;
  j["m"] = c.m;
  j["verdict"] = to_string(c.verdict);
  j["checks"] = Json{{"stochastic", check_json(c.stochastic)},
                     {"dominant_simple", check_json(c.dominant_simple)},
                     {"subdominant_real_mult2", check_json(c.subdominant_real_mult2)},
                     {"charmap_regular_injective", check_json(c.charmap_regular_injective)}};
  j["lambda"] = c.lambda;
  j["mult_alg"] = c.sub_mult.algebraic;
  j["mult_geo"] = c.sub_mult.geometric;
  j["charmap"] = Json{{"patches", c.patch_count},
                      {"c11", c.c11},
                      {"cone_witnesses", c.cone_witnesses},
                      {"cone_depth", c.cone_depth},
                      {"control_net_pass", c.control_net_pass},
                      {"control_net_margin", c.control_net_margin},
                      {"jacobian_min", c.jacobian_min}};
  j["characteristic_mesh"] = Json{{"iterations", c.iterations}, {"residual", c.residual}};
  const auto& o = c.options;
  j["tolerances"] = Json{{"tol", o.tol},
                         {"max_iter", o.max_iter},
                         {"imag_tol", o.imag_tol},
                         {"cone_tol", o.cone_tol},
                         {"jacobian_samples", o.jacobian_samples},
                         {"exact", o.exact}};
  if (c.started || c.finished) {
    Json t;
    if (c.started) t["started"] = iso_time(*c.started);
    if (c.finished) t["finished"] = iso_time(*c.finished);
    j["timestamps"] = std::move(t);
  }
  write_json(out, j);
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "n,m,lambda,mult_alg,mult_geo,verdict\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.m << ',';
    if (r.cert)
      out << format_double(r.cert->lambda) << ',' << r.cert->sub_mult.algebraic << ','
          << r.cert->sub_mult.geometric << ',' << to_string(r.cert->verdict) << '\n';
    else
      out << ",,,rejected: " << r.error << '\n';
  }
}

void write_stencil_json(std::ostream& out, int n, const StencilTable& table) {
  Json j;
  j["n"] = n;
  Json stencils = Json::array();
  for (const auto& s : table) {
    Json offsets = Json::array(), weights = Json::array();
    for (const auto& e : s.entries) {
      offsets.push_back(Json::array({e.offset[0], e.offset[1]}));
      weights.push_back(to_fraction_string(e.weight));
    }
    stencils.push_back(
        Json{{"role", s.role}, {"offsets", std::move(offsets)}, {"weights", std::move(weights)}});
  }
  j["stencils"] = std::move(stencils);
  write_json(out, j);
}

}  // namespace midpoint
