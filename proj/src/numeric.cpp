#include "wasmdesk/numeric.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "wasmdesk/value.hpp"

namespace wasmdesk::numeric {

namespace {

inline uint32_t lo(uint64_t v) { return static_cast<uint32_t>(v); }
inline float f32(uint64_t v) { return std::bit_cast<float>(lo(v)); }
inline double f64(uint64_t v) { return std::bit_cast<double>(v); }

inline uint64_t canon(float r) {
  return std::isnan(r) ? kCanonicalNan32 : std::bit_cast<uint32_t>(r);
}
inline uint64_t canon(double r) {
  return std::isnan(r) ? kCanonicalNan64 : std::bit_cast<uint64_t>(r);
}

inline uint64_t from_bool(bool b) { return b ? 1 : 0; }

template <typename F>
uint64_t fmin(F a, F b) {
  if (std::isnan(a) || std::isnan(b)) return canon(std::numeric_limits<F>::quiet_NaN());
  if (a == b) return canon(std::signbit(a) ? a : b);  // -0 beats +0
  return canon(a < b ? a : b);
}

template <typename F>
uint64_t fmax(F a, F b) {
  if (std::isnan(a) || std::isnan(b)) return canon(std::numeric_limits<F>::quiet_NaN());
  if (a == b) return canon(std::signbit(a) ? b : a);  // +0 beats -0
  return canon(a > b ? a : b);
}

[[noreturn]] void trap_div_zero() { throw Trap(TrapKind::DivByZero, "integer divide by zero"); }
[[noreturn]] void trap_overflow() { throw Trap(TrapKind::IntOverflow, "integer overflow"); }

// Float-to-int truncation with range checks done in double precision. Each
// bound is the first value whose truncation no longer fits.
inline double check_trunc(double x, double lower_exclusive, double upper_exclusive) {
  if (std::isnan(x)) throw Trap(TrapKind::InvalidConversion, "invalid conversion to integer");
  if (!(x > lower_exclusive && x < upper_exclusive)) trap_overflow();
  return x;
}

constexpr double kI32Lower = -2147483649.0;
constexpr double kI32Upper = 2147483648.0;
constexpr double kU32Upper = 4294967296.0;
constexpr double kI64Upper = 9223372036854775808.0;
constexpr double kU64Upper = 18446744073709551616.0;

inline uint64_t trunc_i32_s(double x) {
  return static_cast<uint32_t>(static_cast<int32_t>(check_trunc(x, kI32Lower, kI32Upper)));
}
inline uint64_t trunc_i32_u(double x) { return static_cast<uint32_t>(check_trunc(x, -1.0, kU32Upper)); }
inline uint64_t trunc_i64_s(double x) {
  // -2^63 itself is representable and valid; nothing between it and the
  // next lower double exists, so test it inclusively.
  if (x == -kI64Upper) return static_cast<uint64_t>(std::numeric_limits<int64_t>::min());
  return static_cast<uint64_t>(static_cast<int64_t>(check_trunc(x, -kI64Upper, kI64Upper)));
}
inline uint64_t trunc_i64_u(double x) { return static_cast<uint64_t>(check_trunc(x, -1.0, kU64Upper)); }

}  // namespace

uint64_t unary(Opcode op, uint64_t a) {
  switch (op) {
    case Opcode::I32Eqz: return from_bool(lo(a) == 0);
    case Opcode::I64Eqz: return from_bool(a == 0);

    case Opcode::I32Clz: return static_cast<uint64_t>(std::countl_zero(lo(a)));
    case Opcode::I32Ctz: return static_cast<uint64_t>(std::countr_zero(lo(a)));
    case Opcode::I32Popcnt: return static_cast<uint64_t>(std::popcount(lo(a)));
    case Opcode::I64Clz: return static_cast<uint64_t>(std::countl_zero(a));
    case Opcode::I64Ctz: return static_cast<uint64_t>(std::countr_zero(a));
    case Opcode::I64Popcnt: return static_cast<uint64_t>(std::popcount(a));

    case Opcode::F32Abs: return lo(a) & 0x7FFFFFFFu;
    case Opcode::F32Neg: return lo(a) ^ 0x80000000u;
    case Opcode::F32Ceil: return canon(std::ceil(f32(a)));
    case Opcode::F32Floor: return canon(std::floor(f32(a)));
    case Opcode::F32Trunc: return canon(std::trunc(f32(a)));
    case Opcode::F32Nearest: return canon(std::nearbyint(f32(a)));
    case Opcode::F32Sqrt: return canon(std::sqrt(f32(a)));
    case Opcode::F64Abs: return a & 0x7FFFFFFFFFFFFFFFull;
    case Opcode::F64Neg: return a ^ 0x8000000000000000ull;
    case Opcode::F64Ceil: return canon(std::ceil(f64(a)));
    case Opcode::F64Floor: return canon(std::floor(f64(a)));
    case Opcode::F64Trunc: return canon(std::trunc(f64(a)));
    case Opcode::F64Nearest: return canon(std::nearbyint(f64(a)));
    case Opcode::F64Sqrt: return canon(std::sqrt(f64(a)));

    case Opcode::I32WrapI64: return lo(a);
    case Opcode::I32TruncF32S: return trunc_i32_s(f32(a));
    case Opcode::I32TruncF32U: return trunc_i32_u(f32(a));
    case Opcode::I32TruncF64S: return trunc_i32_s(f64(a));
    case Opcode::I32TruncF64U: return trunc_i32_u(f64(a));
    case Opcode::I64ExtendI32S: return static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(lo(a))));
    case Opcode::I64ExtendI32U: return lo(a);
    case Opcode::I64TruncF32S: return trunc_i64_s(f32(a));
    case Opcode::I64TruncF32U: return trunc_i64_u(f32(a));
    case Opcode::I64TruncF64S: return trunc_i64_s(f64(a));
    case Opcode::I64TruncF64U: return trunc_i64_u(f64(a));
    case Opcode::F32ConvertI32S: return canon(static_cast<float>(static_cast<int32_t>(lo(a))));
    case Opcode::F32ConvertI32U: return canon(static_cast<float>(lo(a)));
    case Opcode::F32ConvertI64S: return canon(static_cast<float>(static_cast<int64_t>(a)));
    case Opcode::F32ConvertI64U: return canon(static_cast<float>(a));
    case Opcode::F32DemoteF64: return canon(static_cast<float>(f64(a)));
    case Opcode::F64ConvertI32S: return canon(static_cast<double>(static_cast<int32_t>(lo(a))));
    case Opcode::F64ConvertI32U: return canon(static_cast<double>(lo(a)));
    case Opcode::F64ConvertI64S: return canon(static_cast<double>(static_cast<int64_t>(a)));
    case Opcode::F64ConvertI64U: return canon(static_cast<double>(a));
    case Opcode::F64PromoteF32: return canon(static_cast<double>(f32(a)));
    case Opcode::I32ReinterpretF32:
    case Opcode::F32ReinterpretI32: return lo(a);
    case Opcode::I64ReinterpretF64:
    case Opcode::F64ReinterpretI64: return a;
    default: break;
  }
  throw std::logic_error("numeric::unary: unsupported opcode " + std::string(to_string(op)));
}

uint64_t binary(Opcode op, uint64_t a, uint64_t b) {
  const uint32_t x = lo(a);
  const uint32_t y = lo(b);
  const auto sx = static_cast<int32_t>(x);
  const auto sy = static_cast<int32_t>(y);
  const auto sa = static_cast<int64_t>(a);
  const auto sb = static_cast<int64_t>(b);
  switch (op) {
    case Opcode::I32Eq: return from_bool(x == y);
    case Opcode::I32Ne: return from_bool(x != y);
    case Opcode::I32LtS: return from_bool(sx < sy);
    case Opcode::I32LtU: return from_bool(x < y);
    case Opcode::I32GtS: return from_bool(sx > sy);
    case Opcode::I32GtU: return from_bool(x > y);
    case Opcode::I32LeS: return from_bool(sx <= sy);
    case Opcode::I32LeU: return from_bool(x <= y);
    case Opcode::I32GeS: return from_bool(sx >= sy);
    case Opcode::I32GeU: return from_bool(x >= y);
    case Opcode::I64Eq: return from_bool(a == b);
    case Opcode::I64Ne: return from_bool(a != b);
    case Opcode::I64LtS: return from_bool(sa < sb);
    case Opcode::I64LtU: return from_bool(a < b);
    case Opcode::I64GtS: return from_bool(sa > sb);
    case Opcode::I64GtU: return from_bool(a > b);
    case Opcode::I64LeS: return from_bool(sa <= sb);
    case Opcode::I64LeU: return from_bool(a <= b);
    case Opcode::I64GeS: return from_bool(sa >= sb);
    case Opcode::I64GeU: return from_bool(a >= b);
    case Opcode::F32Eq: return from_bool(f32(a) == f32(b));
    case Opcode::F32Ne: return from_bool(f32(a) != f32(b));
    case Opcode::F32Lt: return from_bool(f32(a) < f32(b));
    case Opcode::F32Gt: return from_bool(f32(a) > f32(b));
    case Opcode::F32Le: return from_bool(f32(a) <= f32(b));
    case Opcode::F32Ge: return from_bool(f32(a) >= f32(b));
    case Opcode::F64Eq: return from_bool(f64(a) == f64(b));
    case Opcode::F64Ne: return from_bool(f64(a) != f64(b));
    case Opcode::F64Lt: return from_bool(f64(a) < f64(b));
    case Opcode::F64Gt: return from_bool(f64(a) > f64(b));
    case Opcode::F64Le: return from_bool(f64(a) <= f64(b));
    case Opcode::F64Ge: return from_bool(f64(a) >= f64(b));

    case Opcode::I32Add: return lo(x + y);
    case Opcode::I32Sub: return lo(x - y);
    case Opcode::I32Mul: return lo(x * y);
    case Opcode::I32DivS:
      if (y == 0) trap_div_zero();
      if (sx == std::numeric_limits<int32_t>::min() && sy == -1) trap_overflow();
      return static_cast<uint32_t>(sx / sy);
    case Opcode::I32DivU:
      if (y == 0) trap_div_zero();
      return x / y;
    case Opcode::I32RemS:
      if (y == 0) trap_div_zero();
      if (sy == -1) return 0;
      return static_cast<uint32_t>(sx % sy);
    case Opcode::I32RemU:
      if (y == 0) trap_div_zero();
      return x % y;
    case Opcode::I32And: return x & y;
    case Opcode::I32Or: return x | y;
    case Opcode::I32Xor: return x ^ y;
    case Opcode::I32Shl: return lo(x << (y & 31));
    case Opcode::I32ShrS: return static_cast<uint32_t>(sx >> (y & 31));
    case Opcode::I32ShrU: return x >> (y & 31);
    case Opcode::I32Rotl: return std::rotl(x, static_cast<int>(y & 31));
    case Opcode::I32Rotr: return std::rotr(x, static_cast<int>(y & 31));

    case Opcode::I64Add: return a + b;
    case Opcode::I64Sub: return a - b;
    case Opcode::I64Mul: return a * b;
    case Opcode::I64DivS:
      if (b == 0) trap_div_zero();
      if (sa == std::numeric_limits<int64_t>::min() && sb == -1) trap_overflow();
      return static_cast<uint64_t>(sa / sb);
    case Opcode::I64DivU:
      if (b == 0) trap_div_zero();
      return a / b;
    case Opcode::I64RemS:
      if (b == 0) trap_div_zero();
      if (sb == -1) return 0;
      return static_cast<uint64_t>(sa % sb);
    case Opcode::I64RemU:
      if (b == 0) trap_div_zero();
      return a % b;
    case Opcode::I64And: return a & b;
    case Opcode::I64Or: return a | b;
    case Opcode::I64Xor: return a ^ b;
    case Opcode::I64Shl: return a << (b & 63);
    case Opcode::I64ShrS: return static_cast<uint64_t>(sa >> (b & 63));
    case Opcode::I64ShrU: return a >> (b & 63);
    case Opcode::I64Rotl: return std::rotl(a, static_cast<int>(b & 63));
    case Opcode::I64Rotr: return std::rotr(a, static_cast<int>(b & 63));

    case Opcode::F32Add: return canon(f32(a) + f32(b));
    case Opcode::F32Sub: return canon(f32(a) - f32(b));
    case Opcode::F32Mul: return canon(f32(a) * f32(b));
    case Opcode::F32Div: return canon(f32(a) / f32(b));
    case Opcode::F32Min: return fmin(f32(a), f32(b));
    case Opcode::F32Max: return fmax(f32(a), f32(b));
    case Opcode::F32Copysign: return (x & 0x7FFFFFFFu) | (y & 0x80000000u);
    case Opcode::F64Add: return canon(f64(a) + f64(b));
    case Opcode::F64Sub: return canon(f64(a) - f64(b));
    case Opcode::F64Mul: return canon(f64(a) * f64(b));
    case Opcode::F64Div: return canon(f64(a) / f64(b));
    case Opcode::F64Min: return fmin(f64(a), f64(b));
    case Opcode::F64Max: return fmax(f64(a), f64(b));
    case Opcode::F64Copysign: return (a & 0x7FFFFFFFFFFFFFFFull) | (b & 0x8000000000000000ull);
    default: break;
  }
  throw std::logic_error("numeric::binary: unsupported opcode " + std::string(to_string(op)));
}

}  // namespace wasmdesk::numeric
