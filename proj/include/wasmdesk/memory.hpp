#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wasmdesk/model.hpp"
#include "wasmdesk/value.hpp"

namespace wasmdesk {

inline constexpr uint32_t kDefaultMemoryCapPages = 1024;  // 64 MiB

// A linear memory instance: a page-granular, growable, zero-initialized
// byte array. All multi-byte accesses are little-endian.
class LinearMemory {
 public:
  LinearMemory(Limits limits, uint32_t cap_pages = kDefaultMemoryCapPages);

  uint32_t pages() const { return static_cast<uint32_t>(bytes_.size() / kPageSize); }
  uint64_t size() const { return bytes_.size(); }
  const Limits& limits() const { return limits_; }
  uint32_t cap_pages() const { return cap_pages_; }

  /// Appends `delta` zeroed pages. Returns the previous page count, or -1
  /// when the result would exceed the declared maximum or the host cap.
  int32_t grow(uint32_t delta);

  bool in_bounds(uint64_t address, uint64_t length) const {
    return address <= bytes_.size() && length <= bytes_.size() - address;
  }

  /// Load for a load opcode at an effective address (address + offset,
  /// computed in 64 bits). Returns raw value bits; traps with oob-memory.
  uint64_t load(Opcode op, uint64_t effective) const;
  /// Store for a store opcode; the value is truncated to the access width.
  /// Nothing is written when the access is out of bounds.
  void store(Opcode op, uint64_t effective, uint64_t bits);

  Value load(Opcode op, uint32_t address, uint32_t offset) const {
    return Value::from_bits(*opcode_info(op).result, load(op, uint64_t{address} + offset));
  }
  void store(Opcode op, uint32_t address, uint32_t offset, Value v) { store(op, uint64_t{address} + offset, v.bits()); }

  std::span<uint8_t> bytes() { return bytes_; }
  std::span<const uint8_t> bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
  Limits limits_;
  uint32_t cap_pages_;
};

// Raised by MemoryView on an out-of-range host access.
class MemoryFault : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Bounds-checked accessor handed to host functions. A view over a module
// without memory has size 0, so every non-empty access faults.
class MemoryView {
 public:
  MemoryView() = default;
  explicit MemoryView(LinearMemory* memory) : memory_(memory) {}

  bool has_memory() const { return memory_ != nullptr; }
  uint64_t size() const { return memory_ ? memory_->size() : 0; }
  bool in_bounds(uint64_t ptr, uint64_t len) const { return ptr <= size() && len <= size() - ptr; }

  uint8_t read_u8(uint64_t ptr) const { return static_cast<uint8_t>(read_le(ptr, 1)); }
  uint32_t read_u32(uint64_t ptr) const { return static_cast<uint32_t>(read_le(ptr, 4)); }
  uint64_t read_u64(uint64_t ptr) const { return read_le(ptr, 8); }
  void write_u8(uint64_t ptr, uint8_t v) { write_le(ptr, v, 1); }
  void write_u16(uint64_t ptr, uint16_t v) { write_le(ptr, v, 2); }
  void write_u32(uint64_t ptr, uint32_t v) { write_le(ptr, v, 4); }
  void write_u64(uint64_t ptr, uint64_t v) { write_le(ptr, v, 8); }

  std::vector<uint8_t> read_bytes(uint64_t ptr, uint64_t len) const;
  void write_bytes(uint64_t ptr, std::span<const uint8_t> bytes);

 private:
  void check(uint64_t ptr, uint64_t len) const;
  uint64_t read_le(uint64_t ptr, unsigned width) const;
  void write_le(uint64_t ptr, uint64_t v, unsigned width);

  LinearMemory* memory_ = nullptr;
};

}  // namespace wasmdesk
