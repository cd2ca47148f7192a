#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace wasmdesk {

enum class ValType : uint8_t {
  I32 = 0x7F,
  I64 = 0x7E,
  F32 = 0x7D,
  F64 = 0x7C,
};

std::string_view to_string(ValType type);

// Shape of the immediate payload that follows an opcode byte.
enum class ImmKind : uint8_t {
  None,
  Block,        // block type: 0x40 or a value type
  Label,        // br / br_if depth
  BrTable,      // vector of depths + default
  Func,         // call
  CallIndirect, // type index + reserved 0x00
  Local,
  Global,
  MemArg,       // align (log2) + offset
  MemReserved,  // memory.size / memory.grow reserved 0x00
  I32,
  I64,
  F32,
  F64,
};

// Coarse instruction class, used by the validator and the tree builder.
enum class OpClass : uint8_t {
  Control,
  Parametric,
  Variable,
  Load,
  Store,
  MemorySize,
  MemoryGrow,
  Const,
  Unary,
  Binary,
  Test,     // eqz
  Compare,
  Convert,
};

// X(name, byte, text, immediate, class, param0, param1, result)
// Missing operand/result types are spelled NONE.
#define WASMDESK_OPCODES(X)                                             \
  X(Unreachable, 0x00, "unreachable", None, Control, NONE, NONE, NONE)  \
  X(Nop, 0x01, "nop", None, Control, NONE, NONE, NONE)                  \
  X(Block, 0x02, "block", Block, Control, NONE, NONE, NONE)             \
  X(Loop, 0x03, "loop", Block, Control, NONE, NONE, NONE)               \
  X(If, 0x04, "if", Block, Control, NONE, NONE, NONE)                   \
  X(Else, 0x05, "else", None, Control, NONE, NONE, NONE)                \
  X(End, 0x0B, "end", None, Control, NONE, NONE, NONE)                  \
  X(Br, 0x0C, "br", Label, Control, NONE, NONE, NONE)                   \
  X(BrIf, 0x0D, "br_if", Label, Control, NONE, NONE, NONE)              \
  X(BrTable, 0x0E, "br_table", BrTable, Control, NONE, NONE, NONE)      \
  X(Return, 0x0F, "return", None, Control, NONE, NONE, NONE)            \
  X(Call, 0x10, "call", Func, Control, NONE, NONE, NONE)                \
  X(CallIndirect, 0x11, "call_indirect", CallIndirect, Control, NONE, NONE, NONE) \
  X(Drop, 0x1A, "drop", None, Parametric, NONE, NONE, NONE)             \
  X(Select, 0x1B, "select", None, Parametric, NONE, NONE, NONE)         \
  X(LocalGet, 0x20, "local.get", Local, Variable, NONE, NONE, NONE)     \
  X(LocalSet, 0x21, "local.set", Local, Variable, NONE, NONE, NONE)     \
  X(LocalTee, 0x22, "local.tee", Local, Variable, NONE, NONE, NONE)     \
  X(GlobalGet, 0x23, "global.get", Global, Variable, NONE, NONE, NONE)  \
  X(GlobalSet, 0x24, "global.set", Global, Variable, NONE, NONE, NONE)  \
  X(I32Load, 0x28, "i32.load", MemArg, Load, I32, NONE, I32)            \
  X(I64Load, 0x29, "i64.load", MemArg, Load, I32, NONE, I64)            \
  X(F32Load, 0x2A, "f32.load", MemArg, Load, I32, NONE, F32)            \
  X(F64Load, 0x2B, "f64.load", MemArg, Load, I32, NONE, F64)            \
  X(I32Load8S, 0x2C, "i32.load8_s", MemArg, Load, I32, NONE, I32)       \
  X(I32Load8U, 0x2D, "i32.load8_u", MemArg, Load, I32, NONE, I32)       \
  X(I32Load16S, 0x2E, "i32.load16_s", MemArg, Load, I32, NONE, I32)     \
  X(I32Load16U, 0x2F, "i32.load16_u", MemArg, Load, I32, NONE, I32)     \
  X(I64Load8S, 0x30, "i64.load8_s", MemArg, Load, I32, NONE, I64)       \
  X(I64Load8U, 0x31, "i64.load8_u", MemArg, Load, I32, NONE, I64)       \
  X(I64Load16S, 0x32, "i64.load16_s", MemArg, Load, I32, NONE, I64)     \
  X(I64Load16U, 0x33, "i64.load16_u", MemArg, Load, I32, NONE, I64)     \
  X(I64Load32S, 0x34, "i64.load32_s", MemArg, Load, I32, NONE, I64)     \
  X(I64Load32U, 0x35, "i64.load32_u", MemArg, Load, I32, NONE, I64)     \
  X(I32Store, 0x36, "i32.store", MemArg, Store, I32, I32, NONE)         \
  X(I64Store, 0x37, "i64.store", MemArg, Store, I32, I64, NONE)         \
  X(F32Store, 0x38, "f32.store", MemArg, Store, I32, F32, NONE)         \
  X(F64Store, 0x39, "f64.store", MemArg, Store, I32, F64, NONE)         \
  X(I32Store8, 0x3A, "i32.store8", MemArg, Store, I32, I32, NONE)       \
  X(I32Store16, 0x3B, "i32.store16", MemArg, Store, I32, I32, NONE)     \
  X(I64Store8, 0x3C, "i64.store8", MemArg, Store, I32, I64, NONE)       \
  X(I64Store16, 0x3D, "i64.store16", MemArg, Store, I32, I64, NONE)     \
  X(I64Store32, 0x3E, "i64.store32", MemArg, Store, I32, I64, NONE)     \
  X(MemorySize, 0x3F, "memory.size", MemReserved, MemorySize, NONE, NONE, I32) \
  X(MemoryGrow, 0x40, "memory.grow", MemReserved, MemoryGrow, I32, NONE, I32)  \
  X(I32Const, 0x41, "i32.const", I32, Const, NONE, NONE, I32)           \
  X(I64Const, 0x42, "i64.const", I64, Const, NONE, NONE, I64)           \
  X(F32Const, 0x43, "f32.const", F32, Const, NONE, NONE, F32)           \
  X(F64Const, 0x44, "f64.const", F64, Const, NONE, NONE, F64)           \
  X(I32Eqz, 0x45, "i32.eqz", None, Test, I32, NONE, I32)                \
  X(I32Eq, 0x46, "i32.eq", None, Compare, I32, I32, I32)                \
  X(I32Ne, 0x47, "i32.ne", None, Compare, I32, I32, I32)                \
  X(I32LtS, 0x48, "i32.lt_s", None, Compare, I32, I32, I32)             \
  X(I32LtU, 0x49, "i32.lt_u", None, Compare, I32, I32, I32)             \
  X(I32GtS, 0x4A, "i32.gt_s", None, Compare, I32, I32, I32)             \
  X(I32GtU, 0x4B, "i32.gt_u", None, Compare, I32, I32, I32)             \
  X(I32LeS, 0x4C, "i32.le_s", None, Compare, I32, I32, I32)             \
  X(I32LeU, 0x4D, "i32.le_u", None, Compare, I32, I32, I32)             \
  X(I32GeS, 0x4E, "i32.ge_s", None, Compare, I32, I32, I32)             \
  X(I32GeU, 0x4F, "i32.ge_u", None, Compare, I32, I32, I32)             \
  X(I64Eqz, 0x50, "i64.eqz", None, Test, I64, NONE, I32)                \
  X(I64Eq, 0x51, "i64.eq", None, Compare, I64, I64, I32)                \
  X(I64Ne, 0x52, "i64.ne", None, Compare, I64, I64, I32)                \
  X(I64LtS, 0x53, "i64.lt_s", None, Compare, I64, I64, I32)             \
  X(I64LtU, 0x54, "i64.lt_u", None, Compare, I64, I64, I32)             \
  X(I64GtS, 0x55, "i64.gt_s", None, Compare, I64, I64, I32)             \
  X(I64GtU, 0x56, "i64.gt_u", None, Compare, I64, I64, I32)             \
  X(I64LeS, 0x57, "i64.le_s", None, Compare, I64, I64, I32)             \
  X(I64LeU, 0x58, "i64.le_u", None, Compare, I64, I64, I32)             \
  X(I64GeS, 0x59, "i64.ge_s", None, Compare, I64, I64, I32)             \
  X(I64GeU, 0x5A, "i64.ge_u", None, Compare, I64, I64, I32)             \
  X(F32Eq, 0x5B, "f32.eq", None, Compare, F32, F32, I32)                \
  X(F32Ne, 0x5C, "f32.ne", None, Compare, F32, F32, I32)                \
  X(F32Lt, 0x5D, "f32.lt", None, Compare, F32, F32, I32)                \
  X(F32Gt, 0x5E, "f32.gt", None, Compare, F32, F32, I32)                \
  X(F32Le, 0x5F, "f32.le", None, Compare, F32, F32, I32)                \
  X(F32Ge, 0x60, "f32.ge", None, Compare, F32, F32, I32)                \
  X(F64Eq, 0x61, "f64.eq", None, Compare, F64, F64, I32)                \
  X(F64Ne, 0x62, "f64.ne", None, Compare, F64, F64, I32)                \
  X(F64Lt, 0x63, "f64.lt", None, Compare, F64, F64, I32)                \
  X(F64Gt, 0x64, "f64.gt", None, Compare, F64, F64, I32)                \
  X(F64Le, 0x65, "f64.le", None, Compare, F64, F64, I32)                \
  X(F64Ge, 0x66, "f64.ge", None, Compare, F64, F64, I32)                \
  X(I32Clz, 0x67, "i32.clz", None, Unary, I32, NONE, I32)               \
  X(I32Ctz, 0x68, "i32.ctz", None, Unary, I32, NONE, I32)               \
  X(I32Popcnt, 0x69, "i32.popcnt", None, Unary, I32, NONE, I32)         \
  X(I32Add, 0x6A, "i32.add", None, Binary, I32, I32, I32)               \
  X(I32Sub, 0x6B, "i32.sub", None, Binary, I32, I32, I32)               \
  X(I32Mul, 0x6C, "i32.mul", None, Binary, I32, I32, I32)               \
  X(I32DivS, 0x6D, "i32.div_s", None, Binary, I32, I32, I32)            \
  X(I32DivU, 0x6E, "i32.div_u", None, Binary, I32, I32, I32)            \
  X(I32RemS, 0x6F, "i32.rem_s", None, Binary, I32, I32, I32)            \
  X(I32RemU, 0x70, "i32.rem_u", None, Binary, I32, I32, I32)            \
  X(I32And, 0x71, "i32.and", None, Binary, I32, I32, I32)               \
  X(I32Or, 0x72, "i32.or", None, Binary, I32, I32, I32)                 \
  X(I32Xor, 0x73, "i32.xor", None, Binary, I32, I32, I32)               \
  X(I32Shl, 0x74, "i32.shl", None, Binary, I32, I32, I32)               \
  X(I32ShrS, 0x75, "i32.shr_s", None, Binary, I32, I32, I32)            \
  X(I32ShrU, 0x76, "i32.shr_u", None, Binary, I32, I32, I32)            \
  X(I32Rotl, 0x77, "i32.rotl", None, Binary, I32, I32, I32)             \
  X(I32Rotr, 0x78, "i32.rotr", None, Binary, I32, I32, I32)             \
  X(I64Clz, 0x79, "i64.clz", None, Unary, I64, NONE, I64)               \
  X(I64Ctz, 0x7A, "i64.ctz", None, Unary, I64, NONE, I64)               \
  X(I64Popcnt, 0x7B, "i64.popcnt", None, Unary, I64, NONE, I64)         \
  X(I64Add, 0x7C, "i64.add", None, Binary, I64, I64, I64)               \
  X(I64Sub, 0x7D, "i64.sub", None, Binary, I64, I64, I64)               \
  X(I64Mul, 0x7E, "i64.mul", None, Binary, I64, I64, I64)               \
  X(I64DivS, 0x7F, "i64.div_s", None, Binary, I64, I64, I64)            \
  X(I64DivU, 0x80, "i64.div_u", None, Binary, I64, I64, I64)            \
  X(I64RemS, 0x81, "i64.rem_s", None, Binary, I64, I64, I64)            \
  X(I64RemU, 0x82, "i64.rem_u", None, Binary, I64, I64, I64)            \
  X(I64And, 0x83, "i64.and", None, Binary, I64, I64, I64)               \
  X(I64Or, 0x84, "i64.or", None, Binary, I64, I64, I64)                 \
  X(I64Xor, 0x85, "i64.xor", None, Binary, I64, I64, I64)               \
  X(I64Shl, 0x86, "i64.shl", None, Binary, I64, I64, I64)               \
  X(I64ShrS, 0x87, "i64.shr_s", None, Binary, I64, I64, I64)            \
  X(I64ShrU, 0x88, "i64.shr_u", None, Binary, I64, I64, I64)            \
  X(I64Rotl, 0x89, "i64.rotl", None, Binary, I64, I64, I64)             \
  X(I64Rotr, 0x8A, "i64.rotr", None, Binary, I64, I64, I64)             \
  X(F32Abs, 0x8B, "f32.abs", None, Unary, F32, NONE, F32)               \
  X(F32Neg, 0x8C, "f32.neg", None, Unary, F32, NONE, F32)               \
  X(F32Ceil, 0x8D, "f32.ceil", None, Unary, F32, NONE, F32)             \
  X(F32Floor, 0x8E, "f32.floor", None, Unary, F32, NONE, F32)           \
  X(F32Trunc, 0x8F, "f32.trunc", None, Unary, F32, NONE, F32)           \
  X(F32Nearest, 0x90, "f32.nearest", None, Unary, F32, NONE, F32)       \
  X(F32Sqrt, 0x91, "f32.sqrt", None, Unary, F32, NONE, F32)             \
  X(F32Add, 0x92, "f32.add", None, Binary, F32, F32, F32)               \
  X(F32Sub, 0x93, "f32.sub", None, Binary, F32, F32, F32)               \
  X(F32Mul, 0x94, "f32.mul", None, Binary, F32, F32, F32)               \
  X(F32Div, 0x95, "f32.div", None, Binary, F32, F32, F32)               \
  X(F32Min, 0x96, "f32.min", None, Binary, F32, F32, F32)               \
  X(F32Max, 0x97, "f32.max", None, Binary, F32, F32, F32)               \
  X(F32Copysign, 0x98, "f32.copysign", None, Binary, F32, F32, F32)     \
  X(F64Abs, 0x99, "f64.abs", None, Unary, F64, NONE, F64)               \
  X(F64Neg, 0x9A, "f64.neg", None, Unary, F64, NONE, F64)               \
  X(F64Ceil, 0x9B, "f64.ceil", None, Unary, F64, NONE, F64)             \
  X(F64Floor, 0x9C, "f64.floor", None, Unary, F64, NONE, F64)           \
  X(F64Trunc, 0x9D, "f64.trunc", None, Unary, F64, NONE, F64)           \
  X(F64Nearest, 0x9E, "f64.nearest", None, Unary, F64, NONE, F64)       \
  X(F64Sqrt, 0x9F, "f64.sqrt", None, Unary, F64, NONE, F64)             \
  X(F64Add, 0xA0, "f64.add", None, Binary, F64, F64, F64)               \
  X(F64Sub, 0xA1, "f64.sub", None, Binary, F64, F64, F64)               \
  X(F64Mul, 0xA2, "f64.mul", None, Binary, F64, F64, F64)               \
  X(F64Div, 0xA3, "f64.div", None, Binary, F64, F64, F64)               \
  X(F64Min, 0xA4, "f64.min", None, Binary, F64, F64, F64)               \
  X(F64Max, 0xA5, "f64.max", None, Binary, F64, F64, F64)               \
  X(F64Copysign, 0xA6, "f64.copysign", None, Binary, F64, F64, F64)     \
  X(I32WrapI64, 0xA7, "i32.wrap_i64", None, Convert, I64, NONE, I32)    \
  X(I32TruncF32S, 0xA8, "i32.trunc_f32_s", None, Convert, F32, NONE, I32) \
  X(I32TruncF32U, 0xA9, "i32.trunc_f32_u", None, Convert, F32, NONE, I32) \
  X(I32TruncF64S, 0xAA, "i32.trunc_f64_s", None, Convert, F64, NONE, I32) \
  X(I32TruncF64U, 0xAB, "i32.trunc_f64_u", None, Convert, F64, NONE, I32) \
  X(I64ExtendI32S, 0xAC, "i64.extend_i32_s", None, Convert, I32, NONE, I64) \
  X(I64ExtendI32U, 0xAD, "i64.extend_i32_u", None, Convert, I32, NONE, I64) \
  X(I64TruncF32S, 0xAE, "i64.trunc_f32_s", None, Convert, F32, NONE, I64) \
  X(I64TruncF32U, 0xAF, "i64.trunc_f32_u", None, Convert, F32, NONE, I64) \
  X(I64TruncF64S, 0xB0, "i64.trunc_f64_s", None, Convert, F64, NONE, I64) \
  X(I64TruncF64U, 0xB1, "i64.trunc_f64_u", None, Convert, F64, NONE, I64) \
  X(F32ConvertI32S, 0xB2, "f32.convert_i32_s", None, Convert, I32, NONE, F32) \
  X(F32ConvertI32U, 0xB3, "f32.convert_i32_u", None, Convert, I32, NONE, F32) \
  X(F32ConvertI64S, 0xB4, "f32.convert_i64_s", None, Convert, I64, NONE, F32) \
  X(F32ConvertI64U, 0xB5, "f32.convert_i64_u", None, Convert, I64, NONE, F32) \
  X(F32DemoteF64, 0xB6, "f32.demote_f64", None, Convert, F64, NONE, F32) \
  X(F64ConvertI32S, 0xB7, "f64.convert_i32_s", None, Convert, I32, NONE, F64) \
  X(F64ConvertI32U, 0xB8, "f64.convert_i32_u", None, Convert, I32, NONE, F64) \
  X(F64ConvertI64S, 0xB9, "f64.convert_i64_s", None, Convert, I64, NONE, F64) \
  X(F64ConvertI64U, 0xBA, "f64.convert_i64_u", None, Convert, I64, NONE, F64) \
  X(F64PromoteF32, 0xBB, "f64.promote_f32", None, Convert, F32, NONE, F64) \
  X(I32ReinterpretF32, 0xBC, "i32.reinterpret_f32", None, Convert, F32, NONE, I32) \
  X(I64ReinterpretF64, 0xBD, "i64.reinterpret_f64", None, Convert, F64, NONE, I64) \
  X(F32ReinterpretI32, 0xBE, "f32.reinterpret_i32", None, Convert, I32, NONE, F32) \
  X(F64ReinterpretI64, 0xBF, "f64.reinterpret_i64", None, Convert, I64, NONE, F64)

enum class Opcode : uint8_t {
#define WASMDESK_OPCODE_ENUM(name, byte, text, imm, cls, p0, p1, r) name = byte,
  WASMDESK_OPCODES(WASMDESK_OPCODE_ENUM)
#undef WASMDESK_OPCODE_ENUM
};

struct OpcodeInfo {
  std::string_view name;
  ImmKind imm = ImmKind::None;
  OpClass cls = OpClass::Control;
  std::optional<ValType> param0;
  std::optional<ValType> param1;
  std::optional<ValType> result;
};

/// True if `byte` is an MVP opcode.
bool is_valid_opcode(uint8_t byte);

/// Static description of an opcode. Precondition: the opcode is valid.
const OpcodeInfo& opcode_info(Opcode op);

inline std::string_view to_string(Opcode op) { return opcode_info(op).name; }

// Width, extension and value type of a memory access opcode.
struct MemAccess {
  uint32_t bytes = 0;
  bool sign_extend = false;
  ValType type = ValType::I32;
};

/// Precondition: op is a load or store.
MemAccess memory_access(Opcode op);

/// log2 of the natural alignment of a memory access opcode.
inline uint32_t natural_alignment_log2(Opcode op) {
  switch (memory_access(op).bytes) {
    case 1: return 0;
    case 2: return 1;
    case 4: return 2;
    default: return 3;
  }
}

}  // namespace wasmdesk
