#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "midpoint/charmap.hpp"
#include "midpoint/mesh_io.hpp"
#include "midpoint/report_io.hpp"
#include "midpoint/spectral.hpp"

namespace midpoint::cli {

namespace {

namespace fs = std::filesystem;
using Logger = std::shared_ptr<spdlog::logger>;

[[noreturn]] void usage(const std::string& what) { throw Error(Errc::usage_error, what); }

int parse_int(std::string_view text) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    usage("not an integer: '" + std::string(text) + "'");
  return value;
}

// Raw option values as given on the command line or in the config file.
struct RawOptions {
  std::string degree;
  std::string valence;
  std::string kind;
  int iterations = 1;
  int rings = 0;  // 0: not given
  double tol = 1e-11;
  int max_iter = 20000;
  int jobs = 1;
  std::string input;
  std::string output;
  std::string format;
  bool timestamps = false;
  bool allow_boundary = false;
  std::string config;
};

struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, CLI::Option*> options;  // config key -> option
};

Command make_command(CLI::App& parent, const std::string& name, const std::string& description,
                     RawOptions& raw, const std::vector<std::string>& keys) {
  Command cmd;
  cmd.app = parent.add_subcommand(name, description);
  auto* app = cmd.app;
  auto add = [&](const std::string& key, CLI::Option* opt) { cmd.options[key] = opt; };
  for (const auto& key : keys) {
    if (key == "degree")
      add(key, app->add_option("-n,--degree", raw.degree, "Degree n, or a range such as 2..5,7"));
    else if (key == "valence")
      add(key, app->add_option("-m,--valence", raw.valence, "Valence m, or a range"));
    else if (key == "kind")
      add(key, app->add_option("--kind", raw.kind, "Net kind override: primal or dual"));
    else if (key == "iterations")
      add(key, app->add_option("-k,--iterations", raw.iterations, "Number of M_n applications"));
    else if (key == "rings")
      add(key, app->add_option("--rings", raw.rings, "Ring count of ringnet inputs and outputs"));
    else if (key == "tol")
      add(key, app->add_option("--tol", raw.tol, "Power iteration tolerance"));
    else if (key == "max_iter")
      add(key, app->add_option("--max-iter", raw.max_iter, "Power iteration limit"));
    else if (key == "jobs")
      add(key, app->add_option("--jobs", raw.jobs, "Concurrent cases (0: hardware threads)"));
    else if (key == "input")
      add(key, app->add_option("-i,--input", raw.input, "Input OBJ, OFF or ringnet JSON"));
    else if (key == "output")
      add(key, app->add_option("-o,--output", raw.output, "Output file or directory"));
    else if (key == "format")
      add(key, app->add_option("--format", raw.format, "Comma-separated subset of obj,json,csv"));
    else if (key == "timestamps")
      add(key, app->add_flag("--timestamps", raw.timestamps, "Record start and end times"));
    else if (key == "allow_boundary")
      add(key, app->add_flag("--allow-boundary", raw.allow_boundary, "Accept open meshes"));
  }
  app->add_option("--config", raw.config, "JSON file with option defaults");
  return cmd;
}

std::string range_text(const nlohmann::json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<int>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (!e.is_number_integer()) usage("config: range arrays must hold integers");
      if (!s.empty()) s += ',';
      s += std::to_string(e.get<int>());
    }
    return s;
  }
  usage("config: a range must be an integer, string or array");
}

std::string format_text(const nlohmann::json& v) {
  if (!v.is_array()) return v.get<std::string>();
  std::string s;
  for (const auto& e : v) s += (s.empty() ? "" : ",") + e.get<std::string>();
  return s;
}

void apply_config(const Command& cmd, RawOptions& raw) {
  if (raw.config.empty()) return;
  std::ifstream in(raw.config);
  if (!in) throw Error(Errc::io_error, "cannot open config " + raw.config);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, "config " + raw.config + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::parse_error, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    auto it = cmd.options.find(key);
    if (it == cmd.options.end())
      usage("config key '" + key + "' is not an option of " + cmd.app->get_name());
    if (it->second->count() > 0) continue;  // flags win
    try {
      if (key == "degree") raw.degree = range_text(value);
      else if (key == "valence") raw.valence = range_text(value);
      else if (key == "kind") raw.kind = value.get<std::string>();
      else if (key == "iterations") raw.iterations = value.get<int>();
      else if (key == "rings") raw.rings = value.get<int>();
      else if (key == "tol") raw.tol = value.get<double>();
      else if (key == "max_iter") raw.max_iter = value.get<int>();
      else if (key == "jobs") raw.jobs = value.get<int>();
      else if (key == "input") raw.input = value.get<std::string>();
      else if (key == "output") raw.output = value.get<std::string>();
      else if (key == "format") raw.format = format_text(value);
      else if (key == "timestamps") raw.timestamps = value.get<bool>();
      else if (key == "allow_boundary") raw.allow_boundary = value.get<bool>();
    } catch (const nlohmann::json::exception&) {
      usage("config key '" + key + "' has the wrong type");
    }
  }
}

RunConfig resolve(const std::string& command, const RawOptions& raw) {
  RunConfig cfg;
  cfg.command = command;
  if (!raw.degree.empty()) cfg.degrees = parse_range(raw.degree);
  if (!raw.valence.empty()) cfg.valences = parse_range(raw.valence);
  if (!raw.kind.empty()) {
    if (raw.kind != "primal" && raw.kind != "dual") usage("--kind must be primal or dual");
    cfg.kind = parse_net_kind(raw.kind);
  }
  cfg.iterations = raw.iterations;
  if (raw.rings != 0) cfg.rings = raw.rings;
  cfg.tol = raw.tol;
  cfg.max_iter = raw.max_iter;
  cfg.jobs = raw.jobs > 0 ? raw.jobs : int(std::max(1u, std::thread::hardware_concurrency()));
  cfg.input = raw.input;
  cfg.output = raw.output;
  if (!raw.format.empty()) cfg.formats = parse_formats(raw.format);
  cfg.timestamps = raw.timestamps;
  cfg.allow_boundary = raw.allow_boundary;
  if (cfg.iterations < 1) usage("--iterations must be >= 1");
  if (cfg.rings && *cfg.rings < 1) usage("--rings must be >= 1");
  if (cfg.tol <= 0.0) usage("--tol must be positive");
  if (cfg.max_iter < 1) usage("--max-iter must be >= 1");
  if (raw.jobs < 0) usage("--jobs must be >= 0");
  return cfg;
}

bool wants(const RunConfig& cfg, const std::string& format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

void allow_formats(RunConfig& cfg, const std::vector<std::string>& allowed,
                   const std::vector<std::string>& defaults) {
  for (const auto& f : cfg.formats)
    if (std::find(allowed.begin(), allowed.end(), f) == allowed.end())
      usage("format '" + f + "' is not produced by " + cfg.command);
  if (cfg.formats.empty()) cfg.formats = defaults;
}

std::mutex& write_mutex() {
  static std::mutex m;
  return m;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::lock_guard lock(write_mutex());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  body(out);
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir = cfg.output.empty() ? fs::path(".") : cfg.output;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::string case_name(const std::string& stem, int n, int m) {
  return stem + "_n" + std::to_string(n) + "_m" + std::to_string(m);
}

/// Runs fn(0..count-1) on up to jobs threads.
void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::size_t(std::max(jobs, 1)), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) fn(k);
    });
  for (auto& t : pool) t.join();
}

void require_cases(const RunConfig& cfg) {
  if (cfg.degrees.empty()) usage(cfg.command + " needs --degree");
  if (cfg.valences.empty()) usage(cfg.command + " needs --valence");
}

void check_kinds(const RunConfig& cfg) {
  if (!cfg.kind) return;
  for (int n : cfg.degrees)
    if (n >= 1) resolve_kind(n, cfg.kind);
}

std::vector<std::pair<int, int>> cases_of(const RunConfig& cfg) {
  std::vector<std::pair<int, int>> cases;
  for (int n : cfg.degrees)
    for (int m : cfg.valences) cases.emplace_back(n, m);
  return cases;
}

void log_mesh(const Logger& log, const std::string& tag, const Mesh3& mesh) {
  const auto eo = count_extraordinary(mesh.topology());
  log->info("{}: {} vertices, {} faces, {} extraordinary vertices, {} extraordinary faces", tag,
            mesh.vertex_count(), mesh.face_count(), eo.vertices, eo.faces);
}

// ---------------------------------------------------------------------------
// Commands

ExitCode cmd_subdivide(RunConfig& cfg, const Logger& log, std::ostream& out) {
  if (cfg.degrees.size() != 1) usage("subdivide needs a single --degree");
  const int n = cfg.degrees.front();
  if (n < 1) usage("--degree must be >= 1");
  if (cfg.input.empty()) usage("subdivide needs --input");
  const bool ringnet_mode = cfg.input.extension() == ".json";
  allow_formats(cfg, {ringnet_mode ? "json" : "obj"}, {ringnet_mode ? "json" : "obj"});
  if (cfg.kind) resolve_kind(n, cfg.kind);

  if (ringnet_mode) {
    std::ifstream in(cfg.input);
    if (!in) throw Error(Errc::io_error, "cannot open " + cfg.input.string());
    Ringnet net = read_ringnet_json(in);
    if (cfg.rings)
      net = *cfg.rings > net.ring_count() ? pad(net, *cfg.rings) : truncate(net, *cfg.rings);
    log->info("input: ringnet m={} kind={} rings={} vertices={}", net.valence(),
              to_string(net.kind()), net.ring_count(), net.size());
    for (int step = 1; step <= cfg.iterations; ++step) {
      net = subdivide_ringnet(net, n);
      log->info("step {}: rings={} vertices={}", step, net.ring_count(), net.size());
    }
    if (cfg.output.empty())
      write_ringnet_json(out, net);
    else
      write_file(cfg.output, [&](std::ostream& o) { write_ringnet_json(o, net); });
    return ExitCode::pass;
  }

  Mesh3 mesh = read_mesh(cfg.input, cfg.allow_boundary);
  log_mesh(log, "input", mesh);
  for (int step = 1; step <= cfg.iterations; ++step) {
    mesh = midpoint_Mn(mesh, n);
    log_mesh(log, "step " + std::to_string(step), mesh);
  }
  if (cfg.output.empty())
    write_obj(out, mesh);
  else
    write_file(cfg.output, [&](std::ostream& o) { write_obj(o, mesh); });
  return ExitCode::pass;
}

ExitCode cmd_certify(RunConfig& cfg, const Logger& log, std::ostream& out) {
  require_cases(cfg);
  allow_formats(cfg, {"json", "csv"}, {"json", "csv"});
  check_kinds(cfg);
  const auto dir = output_dir(cfg);
  CertifyOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = cfg.max_iter;
  opts.timestamps = cfg.timestamps;

  const auto cases = cases_of(cfg);
  std::vector<SummaryRow> rows(cases.size());
  parallel_for(cfg.jobs, cases.size(), [&](std::size_t k) {
    const auto [n, m] = cases[k];
    rows[k].n = n;
    rows[k].m = m;
    try {
      rows[k].cert = certify_C1(n, m, opts);
      log->info("certify n={} m={}: {}", n, m, to_string(rows[k].cert->verdict));
      if (wants(cfg, "json"))
        write_file(dir / (case_name("certificate", n, m) + ".json"),
                   [&](std::ostream& o) { write_certificate_json(o, *rows[k].cert); });
    } catch (const Error& e) {
      rows[k].cert.reset();
      rows[k].error = e.what();
      log->warn("certify n={} m={} rejected: {}", n, m, e.what());
    }
  });

  if (wants(cfg, "csv"))
    write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, rows); });
  write_summary_csv(out, rows);
  const bool all_pass = std::all_of(rows.begin(), rows.end(), [](const SummaryRow& r) {
    return r.cert && r.cert->verdict == Verdict::pass;
  });
  return all_pass ? ExitCode::pass : ExitCode::fail;
}

ExitCode cmd_analyze(RunConfig& cfg, const Logger& log, std::ostream& out) {
  require_cases(cfg);
  allow_formats(cfg, {"json", "csv", "obj"}, {"json", "csv"});
  check_kinds(cfg);
  if (cfg.rings)
    for (int n : cfg.degrees)
      if (n >= 2 && *cfg.rings > spline_ring(n) + 1)
        usage("--rings exceeds the characteristic mesh ring count " +
              std::to_string(spline_ring(n) + 1) + " for n=" + std::to_string(n));
  const auto dir = output_dir(cfg);

  const auto cases = cases_of(cfg);
  std::vector<std::string> lines(cases.size());
  std::vector<char> ok(cases.size(), 0);
  parallel_for(cfg.jobs, cases.size(), [&](std::size_t k) {
    const auto [n, m] = cases[k];
    std::ostringstream line;
    line << "n=" << n << " m=" << m << ' ';
    try {
      const auto report = spectral_report(n, m, true);
      const auto cm = characteristic_mesh(n, m, cfg.tol, cfg.max_iter);
      const Ringnet net = cfg.rings ? truncate(cm.net, *cfg.rings) : cm.net;
      if (wants(cfg, "json")) {
        write_file(dir / (case_name("report", n, m) + ".json"),
                   [&](std::ostream& o) { write_report_json(o, report); });
        write_file(dir / (case_name("charmesh", n, m) + ".json"),
                   [&](std::ostream& o) { write_ringnet_json(o, net); });
      }
      if (wants(cfg, "csv")) {
        write_file(dir / (case_name("eigenvalues", n, m) + ".csv"),
                   [&](std::ostream& o) { write_eigenvalue_csv(o, report); });
        write_file(dir / (case_name("halfsegment", n, m) + ".csv"),
                   [&](std::ostream& o) { write_half_segment_csv(o, net, 1); });
      }
      if (wants(cfg, "obj")) {
        const auto map = extract_spline_ring(cm.net, n);
        write_file(dir / (case_name("charmap", n, m) + ".obj"),
                   [&](std::ostream& o) { write_samples_obj(map, 9, o); });
      }
      ok[k] = report.flags.all();
      line << "lambda=" << format_double(report.lambda_sub.real()) << " mult=("
           << report.sub_mult.algebraic << ',' << report.sub_mult.geometric
           << ") normB=" << format_double(report.bounds.normB)
           << " normC=" << format_double(report.bounds.normC)
           << " charmesh_iterations=" << cm.iterations << " flags="
           << (ok[k] ? "pass" : "fail");
      log->info("analyze n={} m={}: {}", n, m, ok[k] ? "pass" : "fail");
    } catch (const Error& e) {
      line << "error: " << e.what();
      log->warn("analyze n={} m={} failed: {}", n, m, e.what());
    }
    lines[k] = line.str();
  });
  for (const auto& l : lines) out << l << '\n';
  return std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; }) ? ExitCode::pass
                                                                           : ExitCode::fail;
}

ExitCode cmd_mask(RunConfig& cfg, const Logger& log, std::ostream& out) {
  if (cfg.degrees.empty()) usage("mask needs --degree");
  allow_formats(cfg, {"json"}, {"json"});
  for (int n : cfg.degrees)
    if (n < 1) usage("--degree must be >= 1");
  if (cfg.output.empty() && cfg.degrees.size() == 1) {
    write_stencil_json(out, cfg.degrees.front(), regular_mask(cfg.degrees.front()));
    return ExitCode::pass;
  }
  const auto dir = output_dir(cfg);
  for (int n : cfg.degrees) {
    const auto table = regular_mask(n);
    write_file(dir / ("mask_n" + std::to_string(n) + ".json"),
               [&](std::ostream& o) { write_stencil_json(o, n, table); });
    log->info("mask n={}: {} stencils", n, table.size());
  }
  return ExitCode::pass;
}

ExitCode exit_code_of(const Error& e) {
  switch (e.code()) {
    case Errc::usage_error:
    case Errc::parse_error:
    case Errc::io_error:
    case Errc::parity_mismatch:
      return ExitCode::usage;
    default:
      return ExitCode::fail;
  }
}

Logger make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("midpoint", sink);
  log->set_pattern("[%l] %v");
  const char* env = std::getenv("MIDPOINT_LOG");
  log->set_level(env && *env ? spdlog::level::from_str(env) : spdlog::level::info);
  return log;
}

}  // namespace

std::vector<int> parse_range(const std::string& text) {
  std::vector<int> values;
  std::string_view rest(text);
  if (rest.empty()) usage("empty range");
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      values.push_back(parse_int(item));
    } else {
      const int lo = parse_int(item.substr(0, dots));
      const int hi = parse_int(item.substr(dots + 2));
      if (hi < lo) usage("empty range '" + std::string(item) + "'");
      if (hi - lo > 10000) usage("range too long '" + std::string(item) + "'");
      for (int v = lo; v <= hi; ++v) values.push_back(v);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::vector<std::string> parse_formats(const std::string& text) {
  std::vector<std::string> formats;
  std::istringstream in(text);
  for (std::string f; std::getline(in, f, ',');) {
    if (f != "obj" && f != "json" && f != "csv")
      usage("unknown format '" + f + "' (expected obj, json or csv)");
    if (std::find(formats.begin(), formats.end(), f) == formats.end()) formats.push_back(f);
  }
  if (formats.empty()) usage("empty --format");
  return formats;
}

NetKind resolve_kind(int n, const std::optional<NetKind>& override_kind) {
  const NetKind natural = kind_for_degree(n);
  if (override_kind && *override_kind != natural)
    throw Error(Errc::parity_mismatch, "degree " + std::to_string(n) + " needs a " +
                                           to_string(natural) + " net, got --kind " +
                                           to_string(*override_kind));
  return natural;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Midpoint subdivision: mesh refinement, spectral analysis and C1 certificates",
               "midpoint"};
  app.require_subcommand(1);
  RawOptions raw;
  std::map<std::string, Command> commands;
  commands["subdivide"] =
      make_command(app, "subdivide", "Apply M_n k times to an OBJ/OFF mesh or a ringnet JSON", raw,
                   {"degree", "kind", "iterations", "rings", "input", "output", "format",
                    "allow_boundary"});
  commands["certify"] = make_command(
      app, "certify", "C1 certificates and summary table over (n, m) ranges", raw,
      {"degree", "valence", "kind", "tol", "max_iter", "jobs", "output", "format", "timestamps"});
  commands["analyze"] = make_command(
      app, "analyze", "Spectral report, eigenvalues and characteristic mesh per (n, m)", raw,
      {"degree", "valence", "kind", "rings", "tol", "max_iter", "jobs", "output", "format"});
  commands["mask"] = make_command(app, "mask", "Exact regular stencils of M_n as JSON", raw,
                                  {"degree", "output", "format"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : int(ExitCode::usage);
  }

  const Logger log = make_logger(err);
  try {
    for (auto& [name, cmd] : commands) {
      if (!cmd.app->parsed()) continue;
      apply_config(cmd, raw);
      RunConfig cfg = resolve(name, raw);
      ExitCode code = ExitCode::pass;
      if (name == "subdivide") code = cmd_subdivide(cfg, log, out);
      else if (name == "certify") code = cmd_certify(cfg, log, out);
      else if (name == "analyze") code = cmd_analyze(cfg, log, out);
      else code = cmd_mask(cfg, log, out);
      log->flush();
      return int(code);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return int(exit_code_of(e));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return int(ExitCode::fail);
  }
  return int(ExitCode::usage);
}

}  // namespace midpoint::cli
