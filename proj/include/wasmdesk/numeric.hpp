#pragma once

#include <cstdint>

#include "wasmdesk/opcode.hpp"

// Numeric instruction semantics over raw value bits (see Value for the
// layout). Shared by the interpreter and the constant folder so both agree
// bit-for-bit. Arithmetic NaN results are canonicalized; abs, neg, copysign
// and reinterpretations are bit operations and keep payloads.
namespace wasmdesk::numeric {

inline constexpr uint32_t kCanonicalNan32 = 0x7FC00000u;
inline constexpr uint64_t kCanonicalNan64 = 0x7FF8000000000000ull;

/// Unary, test (eqz) and conversion opcodes. Throws Trap on invalid or
/// overflowing float-to-int truncation.
uint64_t unary(Opcode op, uint64_t a);

/// Binary and comparison opcodes. Throws Trap on integer division by zero
/// and signed division overflow.
uint64_t binary(Opcode op, uint64_t a, uint64_t b);

}  // namespace wasmdesk::numeric
