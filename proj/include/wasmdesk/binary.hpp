#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wasmdesk/model.hpp"

namespace wasmdesk {

inline constexpr size_t kMaxModuleBytes = size_t{256} << 20;

enum class MalformedKind : uint8_t {
  BadMagic,
  BadVersion,
  Truncated,
  OverlongVarint,
  BadSectionOrder,
  SectionSizeMismatch,
  BadOpcode,
  BadUtf8,
  BadEncoding,  // any other out-of-range enumerated byte or flag
};

std::string_view to_string(MalformedKind kind);

class MalformedError : public std::runtime_error {
 public:
  MalformedError(MalformedKind kind, size_t offset, const std::string& detail);

  MalformedKind kind() const { return kind_; }
  size_t offset() const { return offset_; }
  const std::string& detail() const { return detail_; }

 private:
  MalformedKind kind_;
  size_t offset_;
  std::string detail_;
};

// Forward-only reader over a byte buffer. position <= limit <= size.
class ByteCursor {
 public:
  explicit ByteCursor(std::span<const uint8_t> bytes)
      : bytes_(bytes), pos_(0), limit_(bytes.size()) {}

  size_t position() const { return pos_; }
  size_t limit() const { return limit_; }
  size_t remaining() const { return limit_ - pos_; }
  bool at_end() const { return pos_ == limit_; }

  uint8_t read_byte();
  std::span<const uint8_t> read_bytes(size_t n);

  // Narrows the readable window to `n` bytes from here; returns the old limit.
  size_t push_limit(size_t n);
  void pop_limit(size_t old_limit) { limit_ = old_limit; }

  [[noreturn]] void fail(MalformedKind kind, const std::string& detail) const;

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_;
  size_t limit_;
};

/// Unsigned LEB128 of at most ceil(bits / 7) bytes. bits is 32 or 64.
uint64_t read_uleb128(ByteCursor& cursor, unsigned bits);

/// Signed LEB128 of at most ceil(bits / 7) bytes. bits is 32 or 64.
int64_t read_sleb128(ByteCursor& cursor, unsigned bits);

void write_uleb128(std::vector<uint8_t>& out, uint64_t value);
void write_sleb128(std::vector<uint8_t>& out, int64_t value);

/// Decodes a binary module in one forward pass. Throws MalformedError.
Module decode_module(std::span<const uint8_t> bytes);

/// Encodes in canonical form: canonical section order, empty sections
/// omitted, minimal LEB128. Throws StructuralError for modules the MVP
/// binary format cannot carry (e.g. two memories, multiple results).
std::vector<uint8_t> encode_module(const Module& module);

}  // namespace wasmdesk
