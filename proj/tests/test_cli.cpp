#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "midpoint/mesh_io.hpp"
#include "midpoint/report_io.hpp"
#include "test_util.hpp"

using namespace midpoint;
using test::check_errc;
using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"midpoint"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(int(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "midpoint_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path cube_obj(const fs::path& dir) {
  const auto path = dir / "cube.obj";
  write_obj(path, test::cube());
  return path;
}

std::vector<int> extraordinary_vertices(const std::string& log) {
  std::vector<int> counts;
  const std::regex re(R"((\d+) extraordinary vertices)");
  for (std::sregex_iterator it(log.begin(), log.end(), re), end; it != end; ++it)
    counts.push_back(std::stoi((*it)[1]));
  return counts;
}

}  // namespace

TEST_CASE("parse_range") {
  CHECK(cli::parse_range("2..5,7") == std::vector<int>{2, 3, 4, 5, 7});
  CHECK(cli::parse_range("3") == std::vector<int>{3});
  CHECK(cli::parse_range("5,2,2") == std::vector<int>{2, 5});
  CHECK(cli::parse_range("1..1") == std::vector<int>{1});
  for (const char* bad : {"", "5..2", "a", "2..", "1,,2", "3x", "..4"})
    check_errc(Errc::usage_error, [&] { cli::parse_range(bad); });
}

TEST_CASE("parse_formats and resolve_kind") {
  CHECK(cli::parse_formats("json,csv,json") == std::vector<std::string>{"json", "csv"});
  check_errc(Errc::usage_error, [] { cli::parse_formats("xml"); });
  CHECK(cli::resolve_kind(2, std::nullopt) == NetKind::dual);
  CHECK(cli::resolve_kind(3, NetKind::primal) == NetKind::primal);
  check_errc(Errc::parity_mismatch, [] { cli::resolve_kind(3, NetKind::dual); });
  check_errc(Errc::parity_mismatch, [] { cli::resolve_kind(4, NetKind::primal); });
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"bogus"}).code == 2);
  CHECK(run_cli({"certify", "-n", "2..x", "-m", "3"}).code == 2);
  CHECK(run_cli({"certify", "-m", "3"}).code == 2);
  CHECK(run_cli({"certify", "-n", "2", "-m", "3", "--format", "obj"}).code == 2);
  CHECK(run_cli({"analyze", "-n", "2", "-m", "3", "--tol", "-1"}).code == 2);
  CHECK(run_cli({"subdivide", "-n", "2"}).code == 2);
  CHECK(run_cli({"certify", "--help"}).code == 0);
}

TEST_CASE("subdivide: cube with even and odd degrees") {
  const auto dir = scratch("subdivide");
  const auto cube = cube_obj(dir);

  auto r = run_cli({"subdivide", "-i", cube.string(), "-n", "2", "-k", "1", "-o",
                    (dir / "c2.obj").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("step 1: 24 vertices, 26 faces, 0 extraordinary vertices, "
                   "8 extraordinary faces") != std::string::npos);
  const auto m2 = read_obj(dir / "c2.obj", false);
  CHECK(m2.vertex_count() == 24);
  CHECK(m2.face_count() == 26);

  r = run_cli({"subdivide", "-i", cube.string(), "-n", "3", "-k", "2", "-o",
               (dir / "c3.obj").string()});
  CHECK(r.code == 0);
  CHECK(extraordinary_vertices(r.err) == std::vector<int>{8, 8, 8});
  CHECK(read_obj(dir / "c3.obj", false).vertex_count() == 98);

  // stdout when no output path is given
  r = run_cli({"subdivide", "-i", cube.string(), "-n", "1"});
  CHECK(r.code == 0);
  std::istringstream obj(r.out);
  CHECK(read_obj(obj, false).face_count() == 24);
}

TEST_CASE("subdivide: input errors") {
  const auto dir = scratch("subdivide_errors");
  spit(dir / "bad.obj", "v 0 0 0\nv 1 0\nf 1 2 3\n");
  auto r = run_cli({"subdivide", "-i", (dir / "bad.obj").string(), "-n", "2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 2") != std::string::npos);

  spit(dir / "fan.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\n"
                        "f 1 2 3\nf 2 1 4\nf 1 2 5\n");
  r = run_cli({"subdivide", "-i", (dir / "fan.obj").string(), "-n", "2", "--allow-boundary"});
  CHECK(r.code == 1);
  CHECK(r.err.find("NonManifoldEdge") != std::string::npos);

  r = run_cli({"subdivide", "-i", (dir / "missing.obj").string(), "-n", "2"});
  CHECK(r.code == 2);
  r = run_cli({"subdivide", "-i", cube_obj(dir).string(), "-n", "2", "--format", "csv"});
  CHECK(r.code == 2);
}

TEST_CASE("subdivide: ringnet JSON input") {
  const auto dir = scratch("ringnet");
  const auto net = make_grid_mesh(5, 1, NetKind::primal, 3);
  {
    std::ofstream out(dir / "net.json");
    write_ringnet_json(out, net);
  }
  auto r = run_cli({"subdivide", "-i", (dir / "net.json").string(), "-n", "3", "-k", "2", "-o",
                    (dir / "out.json").string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "out.json");
  const auto got = read_ringnet_json(in);
  const auto want = subdivide_ringnet(subdivide_ringnet(net, 3), 3);
  REQUIRE(got.size() == want.size());
  for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::abs(got[k] - want[k]) < 1e-14);

  r = run_cli({"subdivide", "-i", (dir / "net.json").string(), "-n", "3", "--rings", "2"});
  REQUIRE(r.code == 0);
  std::istringstream two(r.out);
  CHECK(read_ringnet_json(two).ring_count() == 2);

  // an odd degree needs a primal net
  r = run_cli({"subdivide", "-i", (dir / "net.json").string(), "-n", "2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("ParityMismatch") != std::string::npos);
}

TEST_CASE("certify: certificates, summary and determinism") {
  const auto a = scratch("certify_a");
  const auto b = scratch("certify_b");
  auto r = run_cli({"certify", "-n", "2..3", "-m", "3,5", "--jobs", "3", "-o", a.string()});
  CHECK(r.code == 0);
  r = run_cli({"certify", "-n", "2..3", "-m", "3,5", "--jobs", "1", "-o", b.string()});
  CHECK(r.code == 0);
  for (int n : {2, 3})
    for (int m : {3, 5}) {
      const std::string name =
          "certificate_n" + std::to_string(n) + "_m" + std::to_string(m) + ".json";
      REQUIRE(fs::exists(a / name));
      CHECK(slurp(a / name) == slurp(b / name));
      const auto doc = Json::parse(slurp(a / name));
      CHECK(doc.at("verdict") == "pass");
      CHECK(!doc.contains("timestamps"));
    }
  const auto summary = slurp(a / "summary.csv");
  CHECK(summary == slurp(b / "summary.csv"));
  CHECK(summary.rfind("n,m,lambda,mult_alg,mult_geo,verdict\n", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
  CHECK(r.out == summary);
}

TEST_CASE("certify: rejected degree and timestamps") {
  const auto dir = scratch("certify_reject");
  auto r = run_cli({"certify", "-n", "1..2", "-m", "3", "--timestamps", "-o", dir.string()});
  CHECK(r.code == 1);
  const auto summary = slurp(dir / "summary.csv");
  CHECK(summary.find("1,3,,,,rejected: DegreeOutOfRange") != std::string::npos);
  CHECK(summary.find("2,3,") != std::string::npos);
  CHECK(!fs::exists(dir / "certificate_n1_m3.json"));
  const auto doc = Json::parse(slurp(dir / "certificate_n2_m3.json"));
  CHECK(doc.contains("timestamps"));

  r = run_cli({"certify", "-n", "2", "-m", "2", "-o", dir.string()});
  CHECK(r.code == 1);
  r = run_cli({"certify", "-n", "2", "-m", "3", "--kind", "primal", "-o", dir.string()});
  CHECK(r.code == 2);
  r = run_cli({"certify", "-n", "2", "-m", "3", "--kind", "dual", "-o", dir.string()});
  CHECK(r.code == 0);
}

TEST_CASE("analyze: report, eigenvalues and characteristic mesh") {
  const auto dir = scratch("analyze");
  auto r = run_cli({"analyze", "-n", "3", "-m", "5", "-o", dir.string()});
  CHECK(r.code == 0);
  const auto report = Json::parse(slurp(dir / "report_n3_m5.json"));
  const auto mono = report.at("monotonicity").get<std::vector<double>>();
  REQUIRE(mono.size() == 2);
  CHECK(mono[0] > mono[1]);
  CHECK(report.at("normC").get<double>() <= std::pow(4.0, -3));
  CHECK(fs::exists(dir / "eigenvalues_n3_m5.csv"));
  CHECK(fs::exists(dir / "halfsegment_n3_m5.csv"));
  std::ifstream in(dir / "charmesh_n3_m5.json");
  const auto net = read_ringnet_json(in);
  CHECK(net.ring_count() == spline_ring(3) + 1);
  const auto first = slurp(dir / "report_n3_m5.json");

  r = run_cli({"analyze", "-n", "3", "-m", "5", "-o", dir.string()});
  CHECK(slurp(dir / "report_n3_m5.json") == first);

  r = run_cli({"analyze", "-n", "2", "-m", "4", "-o", dir.string(), "--format", "json"});
  CHECK(r.code == 0);
  const auto regular = Json::parse(slurp(dir / "report_n2_m4.json"));
  CHECK(std::abs(regular.at("lambda_sub").get<double>() - 0.5) < 1e-9);
  CHECK(!fs::exists(dir / "eigenvalues_n2_m4.csv"));

  r = run_cli({"analyze", "-n", "2", "-m", "5", "-o", dir.string(), "--format", "obj",
               "--rings", "2"});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "charmap_n2_m5.obj"));
  r = run_cli({"analyze", "-n", "2", "-m", "5", "-o", dir.string(), "--rings", "9"});
  CHECK(r.code == 2);
  r = run_cli({"analyze", "-n", "1", "-m", "5", "-o", dir.string()});
  CHECK(r.code == 1);
}

TEST_CASE("config file precedence") {
  const auto dir = scratch("config");
  const auto out = dir / "out";
  spit(dir / "cfg.json", R"({"degree": [2], "valence": "3", "format": "csv", "output": ")" +
                             out.string() + R"("})");
  auto r = run_cli({"certify", "--config", (dir / "cfg.json").string(), "-m", "5"});
  CHECK(r.code == 0);
  const auto summary = slurp(out / "summary.csv");
  CHECK(summary.find("2,5,") != std::string::npos);
  CHECK(summary.find("2,3,") == std::string::npos);
  CHECK(!fs::exists(out / "certificate_n2_m5.json"));

  spit(dir / "unknown.json", R"({"degree": 2, "colour": "red"})");
  CHECK(run_cli({"certify", "--config", (dir / "unknown.json").string(), "-m", "3"}).code == 2);
  spit(dir / "broken.json", "{ degree: ");
  CHECK(run_cli({"certify", "--config", (dir / "broken.json").string(), "-m", "3"}).code == 2);
  spit(dir / "typed.json", R"({"tol": "small"})");
  CHECK(run_cli({"analyze", "--config", (dir / "typed.json").string(), "-n", "2", "-m", "3"})
            .code == 2);
  CHECK(run_cli({"certify", "--config", (dir / "none.json").string()}).code == 2);
}

TEST_CASE("mask export and log level") {
  const auto dir = scratch("mask");
  auto r = run_cli({"mask", "-n", "2..3", "-o", dir.string()});
  CHECK(r.code == 0);
  CHECK(Json::parse(slurp(dir / "mask_n3.json")).at("stencils").size() == 3);

  const auto cube = cube_obj(dir);
  ::setenv("MIDPOINT_LOG", "off", 1);
  r = run_cli({"subdivide", "-i", cube.string(), "-n", "2", "-o", (dir / "c.obj").string()});
  ::unsetenv("MIDPOINT_LOG");
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  r = run_cli({"subdivide", "-i", cube.string(), "-n", "2", "-o", (dir / "c.obj").string()});
  CHECK(r.err.find("[info]") != std::string::npos);
}
