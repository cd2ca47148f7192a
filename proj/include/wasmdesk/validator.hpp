#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wasmdesk/model.hpp"

namespace wasmdesk {

enum class ValidationRule : uint8_t {
  TypeMismatch,
  StackUnderflow,
  BadLabelDepth,
  BadIndex,
  ArityMismatch,
  BadConstantExpr,
  MissingMemory,
  MissingTable,
  DuplicateExport,
  BadLimits,
  BadAlignment,
  ImmutableGlobal,
  MvpRestriction,
};

std::string_view to_string(ValidationRule rule);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ValidationRule rule, std::optional<uint32_t> func_index, std::optional<size_t> instr_offset,
                  const std::string& detail);

  ValidationRule rule() const { return rule_; }
  /// Function index space position of the offending function, if any.
  std::optional<uint32_t> func_index() const { return func_index_; }
  /// Position of the offending instruction within the body.
  std::optional<size_t> instr_offset() const { return instr_offset_; }
  const std::string& detail() const { return detail_; }

 private:
  ValidationRule rule_;
  std::optional<uint32_t> func_index_;
  std::optional<size_t> instr_offset_;
  std::string detail_;
};

// Facts gathered while type-checking one body.
struct FunctionFacts {
  uint32_t max_operand_depth = 0;
  uint32_t max_label_depth = 0;
  uint64_t instructions_visited = 0;
};

// Module-wide view used while checking one function body.
struct ValidationContext {
  const Module* module = nullptr;
  std::vector<ValType> locals;        // params followed by declared locals
  std::optional<ValType> return_type;
  std::optional<uint32_t> func_index; // for error reports

  static ValidationContext for_function(const Module& module, uint32_t defined_index);
};

/// Type-checks one body (which ends with its final `end`) by abstract
/// stack simulation. Throws ValidationError.
FunctionFacts check_body(const ValidationContext& ctx, std::span<const Instr> body, const FuncType& declared);

// A module that passed validation. Cheap to copy; the module is immutable.
class ValidatedModule {
 public:
  const Module& module() const { return data_->module; }
  const FunctionFacts& facts(uint32_t defined_index) const { return data_->facts.at(defined_index); }

 private:
  struct Data {
    Module module;
    std::vector<FunctionFacts> facts;
  };

  explicit ValidatedModule(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  friend ValidatedModule validate_module(Module module);

  std::shared_ptr<const Data> data_;
};

/// Validates the whole module, reporting the first error found (module-level
/// declarations first, then bodies by function index).
ValidatedModule validate_module(Module module);

}  // namespace wasmdesk
