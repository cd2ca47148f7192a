#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wasmdesk/bench_suite.hpp"
#include "wasmdesk/tree_ir.hpp"

namespace wasmdesk::bench {

struct Stats {
  size_t samples = 0;
  double mean = 0;
  double median = 0;
  double stddev = 0;  // population
  double min = 0;
  double max = 0;
};

/// Drops the first `warmup` samples and summarizes the rest. Throws
/// ConfigError when warmup >= samples.size().
Stats summarize(std::span<const double> samples, size_t warmup);

/// (unoptimized - optimized) / unoptimized * 100. Zero when both are zero.
double reduction_percent(double unoptimized_mean, double optimized_mean);

enum class Format { Json, Csv, Table };
Format parse_format(std::string_view text);
std::string_view to_string(Format f);

struct RunConfig {
  uint32_t iterations = 350;
  uint32_t warmup = 50;
  bool optimize = true;
  bool compare = true;  // also run the unoptimized mode
  uint32_t opt_threshold = kDefaultOptThreshold;
  Format format = Format::Json;
  uint32_t seed = kDefaultSeed;
  std::vector<std::string> cases;  // empty: all
  std::map<std::string, Scale, std::less<>> scales;
  std::optional<uint64_t> fuel;
  bool fold_microbench = true;
  int32_t fold_microbench_steps = 20000;

  /// Throws ConfigError.
  void validate() const;
  std::vector<std::string> selected_cases() const;
};

struct ModeResult {
  std::string mode;  // "optimized" or "unoptimized"
  int64_t result = 0;
  std::vector<double> raw_ms;  // every iteration, warmup included
  Stats stats;
};

struct CaseResult {
  std::string name;
  Scale scale;
  OracleResult expected;
  std::vector<ModeResult> modes;
  std::optional<double> reduction_percent;

  const ModeResult* mode(std::string_view m) const;
};

struct Sanity {
  double corpus_ratio = 0;          // sum of optimized means / sum of unoptimized means
  double corpus_ratio_limit = 1.05;
  std::optional<double> fold_reduction_percent;
  double fold_reduction_target = 10.0;
  bool corpus_ok = true;
  bool fold_ok = true;
};

struct BenchReport {
  RunConfig config;
  std::map<std::string, std::string> environment;
  std::vector<CaseResult> cases;
  std::optional<CaseResult> fold_microbench;
  std::optional<Sanity> sanity;  // present when both modes ran
};

// A benchmark invocation disagreed with the oracle or trapped.
class CorrectnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Progress = std::function<void(const std::string&)>;

/// Runs the configured cases sequentially: for each case and mode, a fresh
/// instance, then `iterations` timed invocations (monotonic clock around
/// invoke only). Throws CorrectnessError or ConfigError.
BenchReport run_bench(const RunConfig& config, const Progress& progress = {});

/// Times `iterations` invocations of one entry on one instance.
ModeResult time_mode(const std::string& mode, const Module& module, const std::string& entry,
                     const std::vector<Value>& args, int64_t expected, const RunConfig& config, uint32_t threshold);

std::map<std::string, std::string> environment_block();

std::string to_json(const BenchReport& report);
std::string to_csv(const BenchReport& report);
std::string to_table(const BenchReport& report);
/// Raw samples: case,mode,iteration,ms,discarded.
std::string samples_csv(const BenchReport& report);
std::string render(const BenchReport& report, Format format);

}  // namespace wasmdesk::bench
