#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wasmdesk/memory.hpp"
#include "wasmdesk/model.hpp"
#include "wasmdesk/value.hpp"
#include "wasmdesk/wasi.hpp"

// A direct stack-machine interpreter over the flat instruction encoding.
// Used as an oracle for the tree interpreter: it shares no code with the
// tree builder, the tree evaluator or wasmdesk::numeric, and does its own
// little-endian memory accesses.
namespace wasmdesk::testing {

struct FlatOutcome {
  std::vector<Value> results;
  std::optional<TrapKind> trap;
  std::optional<uint32_t> exit_code;
  bool out_of_steps = false;
  std::string stdout_bytes;
  std::string stderr_bytes;
};

class FlatInterpreter {
 public:
  /// Instantiates `module` (assumed valid). Imports from the wasi module
  /// bind to a fresh WasiContext seeded with 0; other imports are not
  /// supported. A trap in the start function is reported by invoke().
  explicit FlatInterpreter(const Module& module, uint32_t max_call_depth = 10000,
                           uint64_t max_steps = 200'000'000);
  ~FlatInterpreter();

  FlatOutcome invoke(std::string_view export_name, std::span<const Value> args = {});

  wasi::WasiContext& wasi();
  LinearMemory* memory();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wasmdesk::testing
