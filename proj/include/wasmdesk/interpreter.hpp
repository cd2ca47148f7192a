#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "wasmdesk/memory.hpp"
#include "wasmdesk/tree_ir.hpp"
#include "wasmdesk/validator.hpp"
#include "wasmdesk/value.hpp"

namespace wasmdesk {

// Instantiation failed: unresolved or mismatched import, segment out of
// bounds, or a memory the host cap cannot hold. Never a Trap.
class LinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The caller asked for something invalid: unknown export, wrong arguments.
class InvocationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown through the interpreter by proc_exit; ends the invocation without
// a trap and carries the guest exit status.
class ProcExit : public std::exception {
 public:
  explicit ProcExit(uint32_t code) : code_(code), what_("proc_exit(" + std::to_string(code) + ")") {}
  uint32_t code() const { return code_; }
  const char* what() const noexcept override { return what_.c_str(); }

 private:
  uint32_t code_;
  std::string what_;
};

class ModuleInstance;

struct HostContext {
  ModuleInstance& instance;
  MemoryView memory;
};

using HostCallback = std::function<std::vector<Value>(HostContext&, std::span<const Value>)>;

struct HostFunction {
  FuncType type;
  HostCallback callback;
};

// Global import: the value's type must match and mutability must agree.
struct HostGlobal {
  Value value;
  bool is_mutable = false;
};

using ImportValue = std::variant<HostFunction, HostGlobal, std::shared_ptr<LinearMemory>>;

// Imports keyed by (module, field).
using ImportMap = std::map<std::pair<std::string, std::string>, ImportValue, std::less<>>;

struct InstanceConfig {
  uint32_t max_call_depth = 10000;
  std::optional<uint64_t> fuel;  // evaluated tree nodes per invocation
  uint32_t opt_threshold = kDefaultOptThreshold;
  bool eager_build = false;
  uint32_t memory_cap_pages = kDefaultMemoryCapPages;
};

// Fallback consulted for imports missing from the map; returns nullopt to
// leave the import unresolved.
using ImportResolver = std::function<std::optional<ImportValue>(const Import&, const Module&)>;

// An instantiated module. Single-threaded: calls on one instance must be
// serialized by the caller. Movable, not copyable.
class ModuleInstance {
 public:
  ModuleInstance(ModuleInstance&&) noexcept;
  ModuleInstance& operator=(ModuleInstance&&) noexcept;
  ~ModuleInstance();

  /// Resolves imports, allocates memory/table/globals, applies segments
  /// and runs the start function. Throws LinkError, or Trap from start.
  static ModuleInstance instantiate(const ValidatedModule& module, const ImportMap& imports = {},
                                    const InstanceConfig& config = {}, const ImportResolver& fallback = {});

  /// Calls an exported function. Throws Trap, ProcExit or InvocationError.
  std::vector<Value> invoke(std::string_view export_name, std::span<const Value> args = {});
  std::vector<Value> invoke(std::string_view export_name, std::initializer_list<Value> args) {
    return invoke(export_name, std::span<const Value>(args.begin(), args.size()));
  }
  /// Calls a function by index in the function index space.
  std::vector<Value> invoke_function(uint32_t func_index, std::span<const Value> args);
  /// Calls through table slot `slot` expecting signature `type_index`.
  std::vector<Value> call_indirect(uint32_t slot, uint32_t type_index, std::span<const Value> args);

  const ValidatedModule& module() const;
  const InstanceConfig& config() const;

  /// Memory 0, or null.
  LinearMemory* memory();
  const LinearMemory* memory() const;
  Value global(uint32_t index) const;
  std::optional<Value> exported_global(std::string_view name) const;
  /// Table 0 entries as function indices; empty slots are nullopt.
  const std::vector<std::optional<uint32_t>>& table() const;

  /// Tree of a defined function, or null when not built yet.
  const FuncBody* body(uint32_t defined_index) const;
  /// Number of tree rewrites installed so far.
  uint64_t reoptimizations() const;
  /// Fuel consumed by the last invocation (tree nodes evaluated).
  uint64_t last_fuel_used() const;

  void set_fuel(std::optional<uint64_t> fuel);
  void set_opt_threshold(uint32_t threshold);

 private:
  struct Impl;
  explicit ModuleInstance(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Runs `fn` on a large dedicated stack so deep guest recursion cannot
/// overflow the native one. Exceptions propagate to the caller. Nested
/// calls run directly on the current (already large) stack.
void run_on_large_stack(const std::function<void()>& fn);

}  // namespace wasmdesk
