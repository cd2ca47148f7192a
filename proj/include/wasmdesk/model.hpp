#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wasmdesk/opcode.hpp"

namespace wasmdesk {

inline constexpr uint32_t kPageSize = 65536;
inline constexpr uint32_t kMaxPages = 65536;

/// Raised when a module or request violates a structural precondition:
/// an index outside its space, or a module the MVP cannot express.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FuncType {
  std::vector<ValType> params;
  std::vector<ValType> results;  // at most one entry

  bool operator==(const FuncType&) const = default;
};

std::string to_string(const FuncType& type);

struct Limits {
  uint32_t min = 0;
  std::optional<uint32_t> max;

  bool operator==(const Limits&) const = default;
};

// ---------------------------------------------------------------------------
// Instruction immediates. The alternative held by Instr::imm is fixed by the
// opcode's ImmKind (see opcode.hpp).

struct BlockSig {
  std::optional<ValType> result;
  bool operator==(const BlockSig&) const = default;
};

struct MemArg {
  uint32_t align = 0;  // log2
  uint32_t offset = 0;
  bool operator==(const MemArg&) const = default;
};

struct BrTableImm {
  std::vector<uint32_t> labels;
  uint32_t default_label = 0;
  bool operator==(const BrTableImm&) const = default;
};

// Float literals are carried as raw bit patterns so NaN payloads survive.
struct F32Bits {
  uint32_t bits = 0;
  bool operator==(const F32Bits&) const = default;
};

struct F64Bits {
  uint64_t bits = 0;
  bool operator==(const F64Bits&) const = default;
};

// uint32_t covers label depths and every index immediate.
using Immediate = std::variant<std::monostate, BlockSig, uint32_t, MemArg,
                               BrTableImm, int32_t, int64_t, F32Bits, F64Bits>;

struct Instr {
  Opcode op = Opcode::Nop;
  Immediate imm;

  bool operator==(const Instr&) const = default;

  uint32_t index() const { return std::get<uint32_t>(imm); }
  const BlockSig& block() const { return std::get<BlockSig>(imm); }
  const MemArg& memarg() const { return std::get<MemArg>(imm); }
  const BrTableImm& br_table() const { return std::get<BrTableImm>(imm); }
};

// Convenience constructors, mostly for hand-assembled bodies.
inline Instr make_instr(Opcode op) { return Instr{op, std::monostate{}}; }
inline Instr make_instr(Opcode op, uint32_t index) { return Instr{op, index}; }
inline Instr make_block(Opcode op, std::optional<ValType> result) {
  return Instr{op, BlockSig{result}};
}
inline Instr make_mem(Opcode op, uint32_t offset, uint32_t align) {
  return Instr{op, MemArg{align, offset}};
}
inline Instr i32_const(int32_t v) { return Instr{Opcode::I32Const, v}; }
inline Instr i64_const(int64_t v) { return Instr{Opcode::I64Const, v}; }
inline Instr f32_const_bits(uint32_t bits) { return Instr{Opcode::F32Const, F32Bits{bits}}; }
inline Instr f64_const_bits(uint64_t bits) { return Instr{Opcode::F64Const, F64Bits{bits}}; }

// ---------------------------------------------------------------------------

enum class ExternKind : uint8_t { Func = 0, Table = 1, Memory = 2, Global = 3 };

std::string_view to_string(ExternKind kind);

struct GlobalType {
  ValType type = ValType::I32;
  bool is_mutable = false;
  bool operator==(const GlobalType&) const = default;
};

struct TableType {
  Limits limits;  // element type is always funcref
  bool operator==(const TableType&) const = default;
};

struct MemoryType {
  Limits limits;
  bool operator==(const MemoryType&) const = default;
};

struct FuncImport {
  uint32_t type_index = 0;
  bool operator==(const FuncImport&) const = default;
};

using ImportDesc = std::variant<FuncImport, TableType, MemoryType, GlobalType>;

struct Import {
  std::string module;
  std::string field;
  ImportDesc desc;

  ExternKind kind() const { return static_cast<ExternKind>(desc.index()); }
  bool operator==(const Import&) const = default;
};

// Constant expressions are kept as the raw instruction list (without the
// terminating end); the validator decides whether the shape is allowed.
struct ConstExpr {
  std::vector<Instr> instrs;
  bool operator==(const ConstExpr&) const = default;
};

struct Function {
  uint32_t type_index = 0;
  std::vector<ValType> locals;  // declared locals, not including params
  std::vector<Instr> body;      // includes the final end
  bool operator==(const Function&) const = default;
};

struct Global {
  GlobalType type;
  ConstExpr init;
  bool operator==(const Global&) const = default;
};

struct Export {
  std::string name;
  ExternKind kind = ExternKind::Func;
  uint32_t index = 0;
  bool operator==(const Export&) const = default;
};

struct ElementSegment {
  uint32_t table_index = 0;
  ConstExpr offset;
  std::vector<uint32_t> func_indices;
  bool operator==(const ElementSegment&) const = default;
};

struct DataSegment {
  uint32_t memory_index = 0;
  ConstExpr offset;
  std::vector<uint8_t> bytes;
  bool operator==(const DataSegment&) const = default;
};

// Opaque custom section. `after_section` is the id of the last non-custom
// section that preceded it in the binary (0 when it came first).
struct CustomSection {
  std::string name;
  std::vector<uint8_t> bytes;
  uint8_t after_section = 0;
  bool operator==(const CustomSection&) const = default;
};

struct Module {
  std::vector<FuncType> types;
  std::vector<Import> imports;
  std::vector<Function> funcs;
  std::vector<TableType> tables;
  std::vector<MemoryType> memories;
  std::vector<Global> globals;
  std::vector<Export> exports;
  std::optional<uint32_t> start;
  std::vector<ElementSegment> elements;
  std::vector<DataSegment> data;
  std::vector<CustomSection> customs;

  bool operator==(const Module&) const = default;

  uint32_t imported_count(ExternKind kind) const;
  uint32_t function_count() const { return imported_count(ExternKind::Func) + static_cast<uint32_t>(funcs.size()); }
  uint32_t table_count() const { return imported_count(ExternKind::Table) + static_cast<uint32_t>(tables.size()); }
  uint32_t memory_count() const { return imported_count(ExternKind::Memory) + static_cast<uint32_t>(memories.size()); }
  uint32_t global_count() const { return imported_count(ExternKind::Global) + static_cast<uint32_t>(globals.size()); }
};

struct ExportRef {
  ExternKind kind = ExternKind::Func;
  uint32_t index = 0;
  bool operator==(const ExportRef&) const = default;
};

/// Finds the export named `name` (bytewise comparison).
std::optional<ExportRef> export_lookup(const Module& module, std::string_view name);

/// Signature of a function in the function index space (imports first).
/// Throws StructuralError when the index or its type index is out of range.
const FuncType& func_signature(const Module& module, uint32_t func_index);

/// Type index of a function in the function index space.
uint32_t func_type_index(const Module& module, uint32_t func_index);

/// Type of a global in the global index space (imports first).
GlobalType global_type(const Module& module, uint32_t global_index);

/// Limits of memory 0 (imported or defined), if the module has one.
std::optional<Limits> memory_limits(const Module& module);

/// Limits of table 0 (imported or defined), if the module has one.
std::optional<Limits> table_limits(const Module& module);

}  // namespace wasmdesk
