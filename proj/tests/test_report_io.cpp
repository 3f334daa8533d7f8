#include "midpoint/report_io.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "json.hpp"
#include "test_util.hpp"

using namespace midpoint;
using test::check_errc;
using Json = nlohmann::ordered_json;

namespace {

Ringnet random_net(int m, NetKind kind, int rings, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto net = Ringnet::zeros(m, kind, rings);
  std::vector<Complex> pts(net.size());
  for (auto& p : pts) p = {d(rng), d(rng)};
  return net.with_points(std::move(pts));
}

template <class F>
std::string capture(F&& f) {
  std::ostringstream out;
  f(out);
  return out.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.5) == "5.000000000000000e-01");
  CHECK(format_double(-3.0) == "-3.000000000000000e+00");
  CHECK(format_double(0.0) == "0.000000000000000e+00");
  CHECK(to_fraction_string(Rational(9, 16)) == "9/16");
  CHECK(to_fraction_string(Rational(2, 4)) == "1/2");
  CHECK(to_fraction_string(Rational(1)) == "1/1");
}

TEST_CASE("ringnet JSON round trip") {
  for (auto kind : {NetKind::primal, NetKind::dual}) {
    const auto net = random_net(5, kind, 3, 7u + unsigned(kind));
    const std::string text = capture([&](std::ostream& o) { write_ringnet_json(o, net); });
    CHECK(text == capture([&](std::ostream& o) { write_ringnet_json(o, net); }));

    std::istringstream in(text);
    const auto back = read_ringnet_json(in);
    CHECK(back.valence() == 5);
    CHECK(back.kind() == kind);
    CHECK(back.ring_count() == 3);
    REQUIRE(back.size() == net.size());
    for (std::size_t k = 0; k < net.size(); ++k) CHECK(std::abs(back[k] - net[k]) < 1e-15);

    const auto doc = Json::parse(text);
    CHECK(doc.begin().key() == "m");
    CHECK(doc.at("kind") == to_string(kind));
    CHECK(!doc.contains("f"));
    CHECK(doc.at("vertices").size() == net.size());
  }
}

TEST_CASE("ringnet JSON: frequency hint and vertex order") {
  const auto net = make_grid_mesh(6, 1, NetKind::dual, 2);
  auto doc = Json::parse(capture([&](std::ostream& o) { write_ringnet_json(o, net); }));
  CHECK(doc.at("f") == 1);
  auto& verts = doc.at("vertices");
  std::reverse(verts.begin(), verts.end());
  std::istringstream in(doc.dump());
  const auto back = read_ringnet_json(in);
  REQUIRE(back.frequency_hint());
  CHECK(*back.frequency_hint() == 1);
  for (std::size_t k = 0; k < net.size(); ++k) CHECK(std::abs(back[k] - net[k]) < 1e-15);
}

TEST_CASE("ringnet JSON: parse errors") {
  const auto net = make_grid_mesh(4, 1, NetKind::primal, 1);
  const auto good = Json::parse(capture([&](std::ostream& o) { write_ringnet_json(o, net); }));
  auto expect_error = [](const std::string& text) {
    check_errc(Errc::parse_error, [&] {
      std::istringstream in(text);
      read_ringnet_json(in);
    });
  };
  expect_error("{ not json");
  expect_error("[1, 2]");
  {
    auto d = good;
    d.erase("rings");
    expect_error(d.dump());
  }
  {
    auto d = good;
    d["kind"] = "hexagonal";
    expect_error(d.dump());
  }
  {
    auto d = good;
    d["m"] = 2;
    expect_error(d.dump());
  }
  {
    auto d = good;
    d["vertices"][1]["i"] = 9;
    expect_error(d.dump());
  }
  {
    auto d = good;
    d["vertices"][1] = d["vertices"][2];
    expect_error(d.dump());
  }
  {
    auto d = good;
    d["vertices"].erase(d["vertices"].size() - 1);
    expect_error(d.dump());
  }
  {
    auto d = good;
    d["vertices"][0]["re"] = "zero";
    expect_error(d.dump());
  }
}

TEST_CASE("spectral report JSON and eigenvalue CSV") {
  const auto report = spectral_report(2, 4);
  const std::string text = capture([&](std::ostream& o) { write_report_json(o, report); });
  CHECK(text == capture([&](std::ostream& o) { write_report_json(o, report); }));
  const auto doc = Json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [key, value] : doc.items()) keys.push_back(key);
  REQUIRE(keys.size() >= 4);
  CHECK(keys[0] == "n");
  CHECK(keys[1] == "m");
  CHECK(keys[2] == "j");
  CHECK(doc.at("lambda_sub").get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(doc.at("mult_alg") == 2);
  CHECK(doc.at("mult_geo") == 2);
  CHECK(doc.at("pass_flags").at("all") == true);
  CHECK(doc.at("frequencies").size() == 4);
  CHECK(doc.at("normC").get<double>() <= 1.0 / 16.0);
  CHECK(doc.at("normC_exact").is_string());
  const auto at = text.find("\"lambda_sub\": ");
  REQUIRE(at != std::string::npos);
  const std::string value = text.substr(at + 14, text.find(',', at) - at - 14);
  CHECK(value.size() == 21);
  CHECK(value.substr(1, 1) == ".");
  CHECK(value.substr(17, 1) == "e");

  const auto csv = lines(capture([&](std::ostream& o) { write_eigenvalue_csv(o, report); }));
  CHECK(csv.front() == "f,index,re,im,modulus");
  std::size_t total = 0;
  for (const auto& e : report.frequencies) total += e.eigenvalues.size();
  CHECK(csv.size() == total + 1);
}

TEST_CASE("half segment CSV in frame K") {
  const auto cm = characteristic_mesh(3, 5);
  const auto csv = lines(capture([&](std::ostream& o) { write_half_segment_csv(o, cm.net, 1); }));
  CHECK(csv.front() == "l,i,j,x,y");
  CHECK(csv.size() == half_segment(cm.net.layout()).size() + 1);
  for (std::size_t r = 1; r < csv.size(); ++r) {
    std::istringstream row(csv[r]);
    std::vector<std::string> cells;
    for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 5);
    CHECK(std::stod(cells[3]) > 0.0);
    CHECK(std::stod(cells[4]) > 0.0);
  }
}

TEST_CASE("certificate JSON and summary CSV") {
  auto cert = certify_C1(2, 5);
  const std::string plain = capture([&](std::ostream& o) { write_certificate_json(o, cert); });
  CHECK(plain == capture([&](std::ostream& o) { write_certificate_json(o, cert); }));
  const auto doc = Json::parse(plain);
  CHECK(doc.at("verdict") == "pass");
  CHECK(!doc.contains("timestamps"));
  CHECK(doc.at("charmap").at("patches") == 15);
  CHECK(doc.at("checks").at("charmap_regular_injective").at("verdict") == "pass");

  CertifyOptions opts;
  opts.timestamps = true;
  const auto stamped = certify_C1(2, 3, opts);
  const auto sdoc =
      Json::parse(capture([&](std::ostream& o) { write_certificate_json(o, stamped); }));
  REQUIRE(sdoc.contains("timestamps"));
  CHECK(sdoc.at("timestamps").at("started").get<std::string>().size() == 20);

  std::vector<SummaryRow> rows{{2, 5, cert, ""}, {1, 5, std::nullopt, "degree out of range"}};
  const auto csv = lines(capture([&](std::ostream& o) { write_summary_csv(o, rows); }));
  REQUIRE(csv.size() == 3);
  CHECK(csv[0] == "n,m,lambda,mult_alg,mult_geo,verdict");
  CHECK(csv[1] == "2,5," + format_double(cert.lambda) + ",2,2,pass");
  CHECK(csv[2] == "1,5,,,,rejected: degree out of range");
}

TEST_CASE("stencil JSON") {
  const auto doc =
      Json::parse(capture([](std::ostream& o) { write_stencil_json(o, 2, regular_mask(2)); }));
  CHECK(doc.at("n") == 2);
  REQUIRE(doc.at("stencils").size() == 1);
  const auto& s = doc.at("stencils")[0];
  CHECK(s.at("offsets").size() == 4);
  std::vector<std::string> w = s.at("weights").get<std::vector<std::string>>();
  std::sort(w.begin(), w.end());
  CHECK(w == std::vector<std::string>{"1/16", "3/16", "3/16", "9/16"});

  const auto cc =
      Json::parse(capture([](std::ostream& o) { write_stencil_json(o, 3, regular_mask(3)); }));
  CHECK(cc.at("stencils").size() == 3);
  for (const auto& st : cc.at("stencils")) {
    Rational sum = 0;
    for (const auto& t : st.at("weights")) sum += Rational(t.get<std::string>());
    CHECK(sum == 1);
  }
}
