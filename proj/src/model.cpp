#include "wasmdesk/model.hpp"

#include <array>
#include <sstream>

namespace wasmdesk {

namespace {

constexpr std::optional<ValType> NONE = std::nullopt;
constexpr std::optional<ValType> I32 = ValType::I32;
constexpr std::optional<ValType> I64 = ValType::I64;
constexpr std::optional<ValType> F32 = ValType::F32;
constexpr std::optional<ValType> F64 = ValType::F64;

struct OpcodeTable {
  std::array<OpcodeInfo, 256> info{};
  std::array<bool, 256> valid{};

  OpcodeTable() {
#define WASMDESK_OPCODE_ROW(name, byte, text, imm, cls, p0, p1, r) \
  info[byte] = OpcodeInfo{text, ImmKind::imm, OpClass::cls, p0, p1, r}; \
  valid[byte] = true;
    WASMDESK_OPCODES(WASMDESK_OPCODE_ROW)
#undef WASMDESK_OPCODE_ROW
  }
};

const OpcodeTable& table() {
  static const OpcodeTable t;
  return t;
}

}  // namespace

std::string_view to_string(ValType type) {
  switch (type) {
    case ValType::I32: return "i32";
    case ValType::I64: return "i64";
    case ValType::F32: return "f32";
    case ValType::F64: return "f64";
  }
  return "?";
}

bool is_valid_opcode(uint8_t byte) { return table().valid[byte]; }

const OpcodeInfo& opcode_info(Opcode op) { return table().info[static_cast<uint8_t>(op)]; }

MemAccess memory_access(Opcode op) {
  switch (op) {
    case Opcode::I32Load: case Opcode::I32Store: return {4, false, ValType::I32};
    case Opcode::I64Load: case Opcode::I64Store: return {8, false, ValType::I64};
    case Opcode::F32Load: case Opcode::F32Store: return {4, false, ValType::F32};
    case Opcode::F64Load: case Opcode::F64Store: return {8, false, ValType::F64};
    case Opcode::I32Load8S: return {1, true, ValType::I32};
    case Opcode::I32Load8U: case Opcode::I32Store8: return {1, false, ValType::I32};
    case Opcode::I32Load16S: return {2, true, ValType::I32};
    case Opcode::I32Load16U: case Opcode::I32Store16: return {2, false, ValType::I32};
    case Opcode::I64Load8S: return {1, true, ValType::I64};
    case Opcode::I64Load8U: case Opcode::I64Store8: return {1, false, ValType::I64};
    case Opcode::I64Load16S: return {2, true, ValType::I64};
    case Opcode::I64Load16U: case Opcode::I64Store16: return {2, false, ValType::I64};
    case Opcode::I64Load32S: return {4, true, ValType::I64};
    case Opcode::I64Load32U: case Opcode::I64Store32: return {4, false, ValType::I64};
    default: break;
  }
  throw StructuralError("not a memory access opcode: " + std::string(to_string(op)));
}

std::string to_string(const FuncType& type) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < type.params.size(); ++i) {
    if (i) os << ", ";
    os << to_string(type.params[i]);
  }
  os << ") -> (";
  for (size_t i = 0; i < type.results.size(); ++i) {
    if (i) os << ", ";
    os << to_string(type.results[i]);
  }
  os << ')';
  return os.str();
}

std::string_view to_string(ExternKind kind) {
  switch (kind) {
    case ExternKind::Func: return "func";
    case ExternKind::Table: return "table";
    case ExternKind::Memory: return "memory";
    case ExternKind::Global: return "global";
  }
  return "?";
}

uint32_t Module::imported_count(ExternKind kind) const {
  uint32_t n = 0;
  for (const auto& imp : imports) {
    if (imp.kind() == kind) ++n;
  }
  return n;
}

std::optional<ExportRef> export_lookup(const Module& module, std::string_view name) {
  for (const auto& exp : module.exports) {
    if (exp.name == name) return ExportRef{exp.kind, exp.index};
  }
  return std::nullopt;
}

uint32_t func_type_index(const Module& module, uint32_t func_index) {
  uint32_t seen = 0;
  for (const auto& imp : module.imports) {
    if (const auto* f = std::get_if<FuncImport>(&imp.desc)) {
      if (seen == func_index) return f->type_index;
      ++seen;
    }
  }
  const uint64_t local = uint64_t{func_index} - seen;
  if (func_index < seen || local >= module.funcs.size()) {
    throw StructuralError("function index " + std::to_string(func_index) + " out of range (" +
                          std::to_string(module.function_count()) + " functions)");
  }
  return module.funcs[local].type_index;
}

const FuncType& func_signature(const Module& module, uint32_t func_index) {
  const uint32_t type_index = func_type_index(module, func_index);
  if (type_index >= module.types.size()) {
    throw StructuralError("type index " + std::to_string(type_index) + " out of range");
  }
  return module.types[type_index];
}

GlobalType global_type(const Module& module, uint32_t global_index) {
  uint32_t seen = 0;
  for (const auto& imp : module.imports) {
    if (const auto* g = std::get_if<GlobalType>(&imp.desc)) {
      if (seen == global_index) return *g;
      ++seen;
    }
  }
  const uint64_t local = uint64_t{global_index} - seen;
  if (global_index < seen || local >= module.globals.size()) {
    throw StructuralError("global index " + std::to_string(global_index) + " out of range");
  }
  return module.globals[local].type;
}

std::optional<Limits> memory_limits(const Module& module) {
  for (const auto& imp : module.imports) {
    if (const auto* m = std::get_if<MemoryType>(&imp.desc)) return m->limits;
  }
  if (!module.memories.empty()) return module.memories.front().limits;
  return std::nullopt;
}

std::optional<Limits> table_limits(const Module& module) {
  for (const auto& imp : module.imports) {
    if (const auto* t = std::get_if<TableType>(&imp.desc)) return t->limits;
  }
  if (!module.tables.empty()) return module.tables.front().limits;
  return std::nullopt;
}

}  // namespace wasmdesk
