#include "wasmdesk/value.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace wasmdesk {

std::string to_string(const Value& v) {
  char buf[64];
  switch (v.type()) {
    case ValType::I32: return std::to_string(v.as_i32());
    case ValType::I64: return std::to_string(v.as_i64());
    case ValType::F32: std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v.as_f32())); return buf;
    case ValType::F64: std::snprintf(buf, sizeof buf, "%.17g", v.as_f64()); return buf;
  }
  return "?";
}

namespace {

[[noreturn]] void bad(ValType type, std::string_view text) {
  throw std::invalid_argument("cannot parse '" + std::string(text) + "' as " + std::string(to_string(type)));
}

}  // namespace

Value parse_value(ValType type, std::string_view text) {
  const std::string s(text);
  if (s.empty()) bad(type, text);
  char* end = nullptr;
  errno = 0;
  if (type == ValType::F32 || type == ValType::F64) {
    const double d = std::strtod(s.c_str(), &end);
    if (*end != '\0' || errno == ERANGE) bad(type, text);
    return type == ValType::F32 ? Value::f32(static_cast<float>(d)) : Value::f64(d);
  }
  const bool negative = s[0] == '-';
  const char* digits = s.c_str() + (negative ? 1 : 0);
  const int base = digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X') ? 16 : 10;
  const uint64_t magnitude = std::strtoull(digits, &end, base);
  if (end == digits || *end != '\0' || errno == ERANGE || digits[0] == '-' || digits[0] == '+' || digits[0] == ' ') {
    bad(type, text);
  }
  if (type == ValType::I32) {
    if (negative ? magnitude > 0x80000000ull : magnitude > 0xFFFFFFFFull) bad(type, text);
    const uint32_t bits = negative ? static_cast<uint32_t>(0u - static_cast<uint32_t>(magnitude))
                                   : static_cast<uint32_t>(magnitude);
    return Value::from_bits(ValType::I32, bits);
  }
  if (negative && magnitude > 0x8000000000000000ull) bad(type, text);
  return Value::from_bits(ValType::I64, negative ? 0 - magnitude : magnitude);
}

std::string_view to_string(TrapKind kind) {
  switch (kind) {
    case TrapKind::Unreachable: return "unreachable";
    case TrapKind::DivByZero: return "div-by-zero";
    case TrapKind::IntOverflow: return "int-overflow";
    case TrapKind::InvalidConversion: return "invalid-conversion";
    case TrapKind::OobMemory: return "oob-memory";
    case TrapKind::OobTable: return "oob-table";
    case TrapKind::IndirectTypeMismatch: return "indirect-type-mismatch";
    case TrapKind::CallDepthExceeded: return "call-depth-exceeded";
    case TrapKind::FuelExhausted: return "fuel-exhausted";
  }
  return "?";
}

}  // namespace wasmdesk
