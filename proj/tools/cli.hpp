#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "midpoint/ringnet.hpp"

namespace midpoint::cli {

enum class ExitCode : int { pass = 0, fail = 1, usage = 2 };

/// Resolved settings of one invocation. Precedence: flags > config > defaults.
struct RunConfig {
  std::string command;
  std::vector<int> degrees;
  std::vector<int> valences;
  std::optional<NetKind> kind;
  int iterations = 1;
  std::optional<int> rings;  // ring count (j + 1)
  double tol = 1e-11;
  int max_iter = 20000;
  int jobs = 1;
  std::filesystem::path input;
  std::filesystem::path output;
  std::vector<std::string> formats;  // subset of obj, json, csv
  bool timestamps = false;
  bool allow_boundary = false;
};

/// "2..5,7" -> {2, 3, 4, 5, 7}, sorted and unique. Throws usage_error.
std::vector<int> parse_range(const std::string& text);

/// "json,csv" -> {"json", "csv"}. Throws usage_error on unknown entries.
std::vector<std::string> parse_formats(const std::string& text);

/// Kind for degree n; throws parity_mismatch when an override disagrees.
NetKind resolve_kind(int n, const std::optional<NetKind>& override_kind);

/// Parses argv, runs the command and returns the exit code. Normal output
/// goes to out, log lines and error messages to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace midpoint::cli
