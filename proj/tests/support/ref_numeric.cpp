#include "ref_numeric.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace wasmdesk::ref {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

Outcome ok(uint64_t bits) { return Outcome{std::nullopt, bits}; }
Outcome trap(TrapKind k) { return Outcome{k, 0}; }

// ---- integers of width N (32 or 64) -------------------------------------

template <int N>
struct Int {
  static constexpr u128 kMod = u128{1} << N;
  static constexpr u128 kMask = kMod - 1;

  static u128 u(uint64_t x) { return u128{x} & kMask; }
  static i128 s(uint64_t x) {
    const u128 v = u(x);
    return v >= (kMod >> 1) ? static_cast<i128>(v) - static_cast<i128>(kMod) : static_cast<i128>(v);
  }
  static uint64_t wrap(i128 v) { return static_cast<uint64_t>(static_cast<u128>(v) & kMask); }

  static uint64_t clz(uint64_t x) {
    uint64_t n = 0;
    for (int i = N - 1; i >= 0 && !((u(x) >> i) & 1); --i) ++n;
    return n;
  }
  static uint64_t ctz(uint64_t x) {
    uint64_t n = 0;
    for (int i = 0; i < N && !((u(x) >> i) & 1); ++i) ++n;
    return n;
  }
  static uint64_t popcnt(uint64_t x) {
    uint64_t n = 0;
    for (int i = 0; i < N; ++i) n += (u(x) >> i) & 1;
    return n;
  }

  static Outcome binary(Opcode op, uint64_t a, uint64_t b, int base) {
    const u128 x = u(a), y = u(b);
    const i128 sx = s(a), sy = s(b);
    const int k = static_cast<int>(y % N);
    switch (static_cast<int>(op) - base) {
      case 0: return ok(wrap(static_cast<i128>(x + y)));  // add
      case 1: return ok(wrap(static_cast<i128>(x - y)));  // sub
      case 2: return ok(wrap(static_cast<i128>(x * y)));  // mul
      case 3: {                                           // div_s
        if (y == 0) return trap(TrapKind::DivByZero);
        const i128 q = sx / sy;
        if (q == static_cast<i128>(kMod >> 1)) return trap(TrapKind::IntOverflow);
        return ok(wrap(q));
      }
      case 4:  // div_u
        if (y == 0) return trap(TrapKind::DivByZero);
        return ok(static_cast<uint64_t>(x / y));
      case 5:  // rem_s
        if (y == 0) return trap(TrapKind::DivByZero);
        return ok(wrap(sx % sy));
      case 6:  // rem_u
        if (y == 0) return trap(TrapKind::DivByZero);
        return ok(static_cast<uint64_t>(x % y));
      case 7: return ok(static_cast<uint64_t>(x & y));
      case 8: return ok(static_cast<uint64_t>(x | y));
      case 9: return ok(static_cast<uint64_t>(x ^ y));
      case 10: return ok(static_cast<uint64_t>((x << k) & kMask));
      case 11: {  // shr_s: floor division by 2^k
        i128 v = sx;
        for (int i = 0; i < k; ++i) v = (v - (v & 1)) / 2;
        return ok(wrap(v));
      }
      case 12: return ok(static_cast<uint64_t>(x >> k));
      case 13: return ok(static_cast<uint64_t>(((x << k) | (x >> (N - k))) & kMask));
      case 14: return ok(static_cast<uint64_t>(((x >> k) | (x << (N - k))) & kMask));
      default: break;
    }
    return trap(TrapKind::Unreachable);
  }

  static Outcome compare(Opcode op, uint64_t a, uint64_t b, int base) {
    const u128 x = u(a), y = u(b);
    const i128 sx = s(a), sy = s(b);
    bool r = false;
    switch (static_cast<int>(op) - base) {
      case 0: r = x == y; break;
      case 1: r = x != y; break;
      case 2: r = sx < sy; break;
      case 3: r = x < y; break;
      case 4: r = sx > sy; break;
      case 5: r = x > y; break;
      case 6: r = sx <= sy; break;
      case 7: r = x <= y; break;
      case 8: r = sx >= sy; break;
      case 9: r = x >= y; break;
      default: break;
    }
    return ok(r ? 1 : 0);
  }
};

// ---- floats --------------------------------------------------------------

template <typename F>
struct Flt;

template <>
struct Flt<float> {
  using Bits = uint32_t;
  static constexpr int kMant = 23;
  static constexpr int kBias = 127;
  static constexpr Bits kSign = 0x80000000u;
  static constexpr Bits kNan = 0x7FC00000u;
};

template <>
struct Flt<double> {
  using Bits = uint64_t;
  static constexpr int kMant = 52;
  static constexpr int kBias = 1023;
  static constexpr Bits kSign = 0x8000000000000000ull;
  static constexpr Bits kNan = 0x7FF8000000000000ull;
};

template <typename F>
F from(uint64_t bits) {
  return std::bit_cast<F>(static_cast<typename Flt<F>::Bits>(bits));
}

template <typename F>
uint64_t bits_of(F v) {
  if (v != v) return Flt<F>::kNan;
  return std::bit_cast<typename Flt<F>::Bits>(v);
}

template <typename F>
bool is_nan(uint64_t bits) {
  const F v = from<F>(bits);
  return v != v;
}

// Round-to-nearest-even of sign * magnitude into F, by hand.
template <typename F>
uint64_t int_to_float(bool negative, u128 mag) {
  using T = Flt<F>;
  if (mag == 0) return 0;
  int msb = 127;
  while (!((mag >> msb) & 1)) --msb;
  u128 kept;
  if (msb <= T::kMant) {
    kept = mag << (T::kMant - msb);
  } else {
    const int shift = msb - T::kMant;
    kept = mag >> shift;
    const u128 rem = mag & ((u128{1} << shift) - 1);
    const u128 half = u128{1} << (shift - 1);
    if (rem > half || (rem == half && (kept & 1))) ++kept;
    if (kept >> (T::kMant + 1)) {
      kept >>= 1;
      ++msb;
    }
  }
  const u128 exponent = static_cast<u128>(msb + T::kBias);
  u128 bits = (exponent << T::kMant) | (kept & ((u128{1} << T::kMant) - 1));
  if (negative) bits |= T::kSign;
  return static_cast<uint64_t>(bits);
}

enum class Rounding { Ceil, Floor, Trunc, Nearest };

template <typename F>
uint64_t round_to_integral(uint64_t bits, Rounding mode) {
  using T = Flt<F>;
  const F x = from<F>(bits);
  if (x != x) return T::kNan;
  // Values this large (and infinities) are already integral.
  if (!(std::fabs(x) < static_cast<F>(u128{1} << T::kMant))) return bits;
  const auto t = static_cast<int64_t>(x);  // truncation, exact in range
  const F frac = x - static_cast<F>(t);     // exact
  int64_t r = t;
  switch (mode) {
    case Rounding::Trunc: break;
    case Rounding::Floor: r = frac < 0 ? t - 1 : t; break;
    case Rounding::Ceil: r = frac > 0 ? t + 1 : t; break;
    case Rounding::Nearest: {
      const F mag = std::fabs(frac);
      const int64_t step = x < 0 ? -1 : 1;
      if (mag > static_cast<F>(0.5) || (mag == static_cast<F>(0.5) && (t % 2 != 0))) r = t + step;
      break;
    }
  }
  if (r == 0) return bits & T::kSign;  // zero keeps the operand's sign
  return bits_of(static_cast<F>(r));
}

template <typename F>
uint64_t fmin_bits(uint64_t a, uint64_t b) {
  if (is_nan<F>(a) || is_nan<F>(b)) return Flt<F>::kNan;
  const F x = from<F>(a), y = from<F>(b);
  if (x < y) return a;
  if (y < x) return b;
  return a | b;  // equal: only the zeros differ, and -0 wins
}

template <typename F>
uint64_t fmax_bits(uint64_t a, uint64_t b) {
  if (is_nan<F>(a) || is_nan<F>(b)) return Flt<F>::kNan;
  const F x = from<F>(a), y = from<F>(b);
  if (x > y) return a;
  if (y > x) return b;
  return a & b;  // equal: +0 wins
}

// Float-to-int truncation: the truncated value must lie in [lo, hi].
template <typename F>
Outcome trunc_to_int(uint64_t bits, long double lo, long double hi, int width) {
  const F x = from<F>(bits);
  if (x != x) return trap(TrapKind::InvalidConversion);
  if (std::isinf(x)) return trap(TrapKind::IntOverflow);
  const long double t = std::trunc(static_cast<long double>(x));
  if (t < lo || t > hi) return trap(TrapKind::IntOverflow);
  const bool negative = t < 0;
  const long double mag = negative ? -t : t;
  // mag < 2^64 here; split to stay exact.
  const auto high = static_cast<uint64_t>(std::floor(mag / 4294967296.0L));
  const auto low = static_cast<uint64_t>(mag - static_cast<long double>(high) * 4294967296.0L);
  u128 m = (u128{high} << 32) | low;
  if (negative) m = (~m + 1);
  const u128 mask = width == 32 ? u128{0xFFFFFFFFu} : u128{~uint64_t{0}};
  return ok(static_cast<uint64_t>(m & mask));
}

// f32 arithmetic done in double and narrowed once: double carries more than
// 2p+2 bits, so the narrowing is correctly rounded.
uint64_t f32_arith(Opcode op, uint64_t a, uint64_t b) {
  const double x = from<float>(a), y = from<float>(b);
  double r = 0;
  switch (op) {
    case Opcode::F32Add: r = x + y; break;
    case Opcode::F32Sub: r = x - y; break;
    case Opcode::F32Mul: r = x * y; break;
    case Opcode::F32Div: r = x / y; break;
    case Opcode::F32Sqrt: r = std::sqrt(x); break;
    default: break;
  }
  return bits_of(static_cast<float>(r));
}

uint64_t f64_arith(Opcode op, uint64_t a, uint64_t b) {
  const double x = from<double>(a), y = from<double>(b);
  switch (op) {
    case Opcode::F64Add: return bits_of(x + y);
    case Opcode::F64Sub: return bits_of(x - y);
    case Opcode::F64Mul: return bits_of(x * y);
    case Opcode::F64Div: return bits_of(x / y);
    case Opcode::F64Sqrt: return bits_of(std::sqrt(x));
    default: return 0;
  }
}

template <typename F>
Outcome fcompare(Opcode op, uint64_t a, uint64_t b, int base) {
  const F x = from<F>(a), y = from<F>(b);
  bool r = false;
  switch (static_cast<int>(op) - base) {
    case 0: r = x == y; break;
    case 1: r = !(x == y); break;
    case 2: r = x < y; break;
    case 3: r = x > y; break;
    case 4: r = x <= y; break;
    case 5: r = x >= y; break;
    default: break;
  }
  return ok(r ? 1 : 0);
}

constexpr long double kTwo31 = 2147483648.0L;
constexpr long double kTwo32 = 4294967296.0L;
constexpr long double kTwo63 = 9223372036854775808.0L;
constexpr long double kTwo64 = 18446744073709551616.0L;

}  // namespace

bool is_numeric(Opcode op) {
  const auto cls = opcode_info(op).cls;
  return cls == OpClass::Unary || cls == OpClass::Binary || cls == OpClass::Test || cls == OpClass::Compare ||
         cls == OpClass::Convert;
}

Outcome eval(Opcode op, uint64_t a, uint64_t b) {
  using enum Opcode;
  const auto byte = static_cast<int>(op);
  if (byte >= 0x46 && byte <= 0x4F) return Int<32>::compare(op, a, b, 0x46);
  if (byte >= 0x51 && byte <= 0x5A) return Int<64>::compare(op, a, b, 0x51);
  if (byte >= 0x5B && byte <= 0x60) return fcompare<float>(op, a, b, 0x5B);
  if (byte >= 0x61 && byte <= 0x66) return fcompare<double>(op, a, b, 0x61);
  if (byte >= 0x6A && byte <= 0x78) return Int<32>::binary(op, a, b, 0x6A);
  if (byte >= 0x7C && byte <= 0x8A) return Int<64>::binary(op, a, b, 0x7C);

  constexpr uint32_t kS32 = 0x80000000u;
  constexpr uint64_t kS64 = 0x8000000000000000ull;
  const uint64_t a32 = a & 0xFFFFFFFFu;
  const uint64_t b32 = b & 0xFFFFFFFFu;

  switch (op) {
    case I32Eqz: return ok(a32 == 0);
    case I64Eqz: return ok(a == 0);
    case I32Clz: return ok(Int<32>::clz(a));
    case I32Ctz: return ok(Int<32>::ctz(a));
    case I32Popcnt: return ok(Int<32>::popcnt(a));
    case I64Clz: return ok(Int<64>::clz(a));
    case I64Ctz: return ok(Int<64>::ctz(a));
    case I64Popcnt: return ok(Int<64>::popcnt(a));

    case F32Abs: return ok(a32 & ~uint64_t{kS32});
    case F32Neg: return ok(a32 ^ kS32);
    case F32Copysign: return ok((a32 & ~uint64_t{kS32}) | (b32 & kS32));
    case F64Abs: return ok(a & ~kS64);
    case F64Neg: return ok(a ^ kS64);
    case F64Copysign: return ok((a & ~kS64) | (b & kS64));

    case F32Ceil: return ok(round_to_integral<float>(a32, Rounding::Ceil));
    case F32Floor: return ok(round_to_integral<float>(a32, Rounding::Floor));
    case F32Trunc: return ok(round_to_integral<float>(a32, Rounding::Trunc));
    case F32Nearest: return ok(round_to_integral<float>(a32, Rounding::Nearest));
    case F64Ceil: return ok(round_to_integral<double>(a, Rounding::Ceil));
    case F64Floor: return ok(round_to_integral<double>(a, Rounding::Floor));
    case F64Trunc: return ok(round_to_integral<double>(a, Rounding::Trunc));
    case F64Nearest: return ok(round_to_integral<double>(a, Rounding::Nearest));

    case F32Add: case F32Sub: case F32Mul: case F32Div: case F32Sqrt: return ok(f32_arith(op, a32, b32));
    case F64Add: case F64Sub: case F64Mul: case F64Div: case F64Sqrt: return ok(f64_arith(op, a, b));
    case F32Min: return ok(fmin_bits<float>(a32, b32));
    case F32Max: return ok(fmax_bits<float>(a32, b32));
    case F64Min: return ok(fmin_bits<double>(a, b));
    case F64Max: return ok(fmax_bits<double>(a, b));

    case I32WrapI64: return ok(a32);
    case I64ExtendI32S: return ok(Int<64>::wrap(Int<32>::s(a)));
    case I64ExtendI32U: return ok(a32);

    case I32TruncF32S: return trunc_to_int<float>(a32, -kTwo31, kTwo31 - 1, 32);
    case I32TruncF32U: return trunc_to_int<float>(a32, 0, kTwo32 - 1, 32);
    case I32TruncF64S: return trunc_to_int<double>(a, -kTwo31, kTwo31 - 1, 32);
    case I32TruncF64U: return trunc_to_int<double>(a, 0, kTwo32 - 1, 32);
    case I64TruncF32S: return trunc_to_int<float>(a32, -kTwo63, kTwo63 - 1, 64);
    case I64TruncF32U: return trunc_to_int<float>(a32, 0, kTwo64 - 1, 64);
    case I64TruncF64S: return trunc_to_int<double>(a, -kTwo63, kTwo63 - 1, 64);
    case I64TruncF64U: return trunc_to_int<double>(a, 0, kTwo64 - 1, 64);

    case F32ConvertI32S: {
      const i128 v = Int<32>::s(a);
      return ok(int_to_float<float>(v < 0, static_cast<u128>(v < 0 ? -v : v)));
    }
    case F32ConvertI32U: return ok(int_to_float<float>(false, a32));
    case F32ConvertI64S: {
      const i128 v = Int<64>::s(a);
      return ok(int_to_float<float>(v < 0, static_cast<u128>(v < 0 ? -v : v)));
    }
    case F32ConvertI64U: return ok(int_to_float<float>(false, a));
    case F64ConvertI32S: {
      const i128 v = Int<32>::s(a);
      return ok(int_to_float<double>(v < 0, static_cast<u128>(v < 0 ? -v : v)));
    }
    case F64ConvertI32U: return ok(int_to_float<double>(false, a32));
    case F64ConvertI64S: {
      const i128 v = Int<64>::s(a);
      return ok(int_to_float<double>(v < 0, static_cast<u128>(v < 0 ? -v : v)));
    }
    case F64ConvertI64U: return ok(int_to_float<double>(false, a));

    case F32DemoteF64: return ok(bits_of(static_cast<float>(from<double>(a))));
    case F64PromoteF32: return ok(bits_of(static_cast<double>(from<float>(a32))));

    case I32ReinterpretF32:
    case F32ReinterpretI32: return ok(a32);
    case I64ReinterpretF64:
    case F64ReinterpretI64: return ok(a);
    default: break;
  }
  return trap(TrapKind::Unreachable);
}

}  // namespace wasmdesk::ref
