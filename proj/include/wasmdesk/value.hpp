#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "wasmdesk/opcode.hpp"

namespace wasmdesk {

// A runtime scalar. The payload is kept as raw bits: i32 and f32 occupy the
// low 32 bits (upper bits zero), i64 and f64 all 64.
class Value {
 public:
  Value() = default;

  static Value i32(int32_t v) { return Value(ValType::I32, static_cast<uint32_t>(v)); }
  static Value i64(int64_t v) { return Value(ValType::I64, static_cast<uint64_t>(v)); }
  static Value f32(float v) { return Value(ValType::F32, std::bit_cast<uint32_t>(v)); }
  static Value f64(double v) { return Value(ValType::F64, std::bit_cast<uint64_t>(v)); }
  static Value from_bits(ValType type, uint64_t bits) {
    if (type == ValType::I32 || type == ValType::F32) bits &= 0xFFFFFFFFu;
    return Value(type, bits);
  }
  static Value zero(ValType type) { return Value(type, 0); }

  ValType type() const { return type_; }
  uint64_t bits() const { return bits_; }

  int32_t as_i32() const { return static_cast<int32_t>(static_cast<uint32_t>(bits_)); }
  uint32_t as_u32() const { return static_cast<uint32_t>(bits_); }
  int64_t as_i64() const { return static_cast<int64_t>(bits_); }
  uint64_t as_u64() const { return bits_; }
  float as_f32() const { return std::bit_cast<float>(static_cast<uint32_t>(bits_)); }
  double as_f64() const { return std::bit_cast<double>(bits_); }

  // Bitwise equality: NaNs with equal payloads compare equal.
  bool operator==(const Value&) const = default;

 private:
  Value(ValType type, uint64_t bits) : type_(type), bits_(bits) {}

  ValType type_ = ValType::I32;
  uint64_t bits_ = 0;
};

std::string to_string(const Value& v);

/// Parses decimal or 0x-prefixed hex text as a value of `type`. Integers
/// accept the signed and unsigned ranges of their width; floats also accept
/// "nan", "inf" and "-inf". Throws std::invalid_argument.
Value parse_value(ValType type, std::string_view text);

enum class TrapKind : uint8_t {
  Unreachable,
  DivByZero,
  IntOverflow,
  InvalidConversion,
  OobMemory,
  OobTable,
  IndirectTypeMismatch,
  CallDepthExceeded,
  FuelExhausted,
};

std::string_view to_string(TrapKind kind);

class Trap : public std::runtime_error {
 public:
  Trap(TrapKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  TrapKind kind() const { return kind_; }

 private:
  TrapKind kind_;
};

}  // namespace wasmdesk
