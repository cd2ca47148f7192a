#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wasmdesk/model.hpp"
#include "wasmdesk/value.hpp"

namespace wasmdesk::bench {

// Bad case name, unknown scale key, value outside bounds, malformed override.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// state <- (1103515245 * state + 12345) mod 2^31; the output is the new state.
class Lcg {
 public:
  explicit Lcg(uint32_t seed) : state_(seed & 0x7FFFFFFFu) {}
  uint32_t next() {
    state_ = (1103515245u * state_ + 12345u) & 0x7FFFFFFFu;
    return state_;
  }
  /// A byte taken from bits 16..23, which mix better than the low bits.
  uint8_t next_byte() { return static_cast<uint8_t>(next() >> 16); }
  uint32_t state() const { return state_; }

 private:
  uint32_t state_;
};

inline constexpr uint32_t kDefaultSeed = 42;

using Scale = std::map<std::string, int64_t, std::less<>>;

struct ScaleParam {
  std::string name;
  int64_t default_value;
  int64_t min;
  int64_t max;
};

struct CaseInputs {
  uint32_t seed = kDefaultSeed;
  // Replaces the generated input. Layout per case:
  //   collision: x0,y0,r0, x1,y1,r1, ...     multiply-int-vec: a..., b...
  //   quicksort-int: values                  image-threshold: W*H bytes
  //   video-convolute: F*W*H bytes (frame-major, row-major)
  std::optional<std::vector<int64_t>> override_values;
};

struct OracleResult {
  int64_t value = 0;
  std::string produced_by;
  bool operator==(const OracleResult&) const = default;
};

struct BenchCase {
  std::string name;
  Scale scale;  // every parameter, defaults filled in
  CaseInputs inputs;
  Module module;
  std::string entry;
  std::vector<Value> args;
  OracleResult expected;
};

/// The seven case names in report order.
const std::vector<std::string>& case_names();
const std::vector<ScaleParam>& scale_params(std::string_view case_name);
/// Fills defaults and checks names and bounds. Throws ConfigError.
Scale resolve_scale(std::string_view case_name, const Scale& scale);

BenchCase build_case(std::string_view name, const Scale& scale = {}, const CaseInputs& inputs = {});
OracleResult oracle(std::string_view name, const Scale& scale = {}, const CaseInputs& inputs = {});

/// Entry results as a signed 64-bit integer (i32 results are sign-extended).
int64_t result_value(const std::vector<Value>& results);

// Microbenchmark whose hot function is dominated by constant subtrees.
// Entry "run" takes an iteration count and returns an i64 accumulator.
Module build_fold_microbench();
int64_t fold_microbench_expected(int32_t iterations);

struct GenOptions {
  bool allow_memory = true;
  bool allow_wasi = true;
  bool allow_traps = true;
};

/// Deterministic, always-valid, always-terminating random module. The
/// entry is the export "main" of type () -> i64. With WASI enabled the
/// module may import fd_write and print to stdout.
Module gen_random_program(uint64_t seed, uint32_t size_budget, const GenOptions& options = {});

/// Upper bound on tree nodes evaluated by one call of a generated main,
/// far below which every run finishes.
inline constexpr uint64_t kGeneratedFuelLimit = 50'000'000;

}  // namespace wasmdesk::bench
