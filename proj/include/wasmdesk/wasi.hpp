#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wasmdesk/interpreter.hpp"
#include "wasmdesk/memory.hpp"

namespace wasmdesk::wasi {

inline constexpr std::string_view kModuleName = "wasi_snapshot_preview1";

// Error codes from the preview1 errno table (the subset this shim returns).
enum class Errno : uint16_t {
  Success = 0,
  Badf = 8,
  Fault = 21,
  Inval = 28,
  Nosys = 52,
};

inline constexpr uint32_t kClockRealtime = 0;
inline constexpr uint32_t kClockMonotonic = 1;

using Sink = std::function<void(std::span<const uint8_t>)>;
using ClockSource = std::function<uint64_t()>;  // nanoseconds

// Host state behind the shim: arguments, environment, the three standard
// streams, randomness and clocks. Owned by one instance at a time.
//
// Every call either performs all of its guest memory writes or returns
// Fault having written nothing.
class WasiContext {
 public:
  WasiContext();

  std::vector<std::string> args;
  std::vector<std::string> environ;  // "KEY=value"
  // Empty sinks append to captured_stdout / captured_stderr.
  Sink stdout_sink;
  Sink stderr_sink;
  std::string captured_stdout;
  std::string captured_stderr;
  ClockSource realtime;
  ClockSource monotonic;
  std::optional<uint32_t> exit_status;

  /// Deterministic byte stream for random_get.
  void seed(uint64_t seed);
  /// Seeds from OS entropy.
  void seed_from_os();

  Errno fd_write(MemoryView& mem, uint32_t fd, uint32_t iovs, uint32_t iovs_len, uint32_t nwritten_ptr);
  Errno clock_time_get(MemoryView& mem, uint32_t clock_id, uint64_t precision, uint32_t result_ptr);
  Errno random_get(MemoryView& mem, uint32_t buf, uint32_t len);
  Errno args_sizes_get(MemoryView& mem, uint32_t argc_ptr, uint32_t buf_size_ptr);
  Errno args_get(MemoryView& mem, uint32_t argv_ptr, uint32_t buf_ptr);
  Errno environ_sizes_get(MemoryView& mem, uint32_t count_ptr, uint32_t buf_size_ptr);
  Errno environ_get(MemoryView& mem, uint32_t environ_ptr, uint32_t buf_ptr);
  /// Records the status and throws ProcExit.
  [[noreturn]] void proc_exit(uint32_t code);

 private:
  void emit(uint32_t fd, std::span<const uint8_t> bytes);

  std::mt19937_64 rng_;
};

/// Signature the shim expects for a supported call, or nullopt.
std::optional<FuncType> signature_of(std::string_view field);

/// Names of the supported calls.
const std::vector<std::string_view>& supported_calls();

/// Import resolver for the wasi_snapshot_preview1 module: supported calls
/// bind to `ctx`; any other field becomes a stub returning Nosys.
ImportResolver resolver(std::shared_ptr<WasiContext> ctx);

}  // namespace wasmdesk::wasi
