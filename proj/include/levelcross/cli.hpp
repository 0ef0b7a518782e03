#pragma once

// Command-line front end: compute, simulate, compare and sweep.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "levelcross/quadrature.hpp"

namespace levelcross {

enum class Command { kCompute, kSimulate, kCompare, kSweep };
enum class Format { kCsv, kJson };

struct RunConfig {
  Command command = Command::kCompute;
  std::vector<std::size_t> ns{1};
  // Shorthand string ("geometric:0.5") or a model object.
  nlohmann::json model = "independent";
  KRule k;
  std::vector<IntervalSpec> intervals;  // empty means the command default
  double tol = 1e-6;
  std::size_t count = 10000;
  std::uint64_t seed = 0;
  Format format = Format::kCsv;
  std::string output;       // empty: stdout
  std::string samples_out;  // per-sample counts as CSV
  unsigned threads = 0;     // 0: LEVELCROSS_THREADS or 1

  // Throws kConfig naming the offending field.
  void validate() const;
  CovarianceModel resolved_model() const;
  // Intervals after defaults: (-inf,-1), (-1,1), (1,inf).
  std::vector<IntervalSpec> effective_intervals() const;
};

// "128:8192:x2" (geometric progression), "10,50,200", or "50".
std::vector<std::size_t> parse_n_list(std::string_view text);

// Overlays the fields present in j onto base. Unknown keys are rejected.
RunConfig apply_config_json(const nlohmann::json& j, RunConfig base);

// argv[1] is the command. Throws kConfig on bad input.
RunConfig parse_command_line(int argc, const char* const* argv);

// Writes the report to out (or to config.output). Returns 0 on success,
// 2 after a numeric failure (the failing row is emitted with flagged = 1).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Entry point behind the levelcross binary. Config errors return 1.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace levelcross
