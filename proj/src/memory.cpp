#include "wasmdesk/memory.hpp"

namespace wasmdesk {

namespace {

uint64_t read_le_bytes(const uint8_t* p, unsigned width) {
  uint64_t v = 0;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(&v, p, width);
  } else {
    for (unsigned i = 0; i < width; ++i) v |= uint64_t{p[i]} << (8 * i);
  }
  return v;
}

void write_le_bytes(uint8_t* p, uint64_t v, unsigned width) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(p, &v, width);
  } else {
    for (unsigned i = 0; i < width; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
  }
}

[[noreturn]] void oob(uint64_t ea, unsigned width, uint64_t size) {
  throw Trap(TrapKind::OobMemory, "access of " + std::to_string(width) + " bytes at " + std::to_string(ea) +
                                      " outside memory of " + std::to_string(size) + " bytes");
}

}  // namespace

LinearMemory::LinearMemory(Limits limits, uint32_t cap_pages) : limits_(limits), cap_pages_(cap_pages) {
  if (limits.min > cap_pages) {
    throw std::length_error("memory minimum of " + std::to_string(limits.min) + " pages exceeds host cap of " +
                            std::to_string(cap_pages));
  }
  bytes_.resize(uint64_t{limits.min} * kPageSize);
}

int32_t LinearMemory::grow(uint32_t delta) {
  const uint32_t old = pages();
  const uint64_t wanted = uint64_t{old} + delta;
  const uint64_t max = limits_.max ? *limits_.max : kMaxPages;
  if (wanted > max || wanted > cap_pages_) return -1;
  bytes_.resize(wanted * kPageSize);
  return static_cast<int32_t>(old);
}

uint64_t LinearMemory::load(Opcode op, uint64_t ea) const {
  const MemAccess acc = memory_access(op);
  if (!in_bounds(ea, acc.bytes)) oob(ea, acc.bytes, bytes_.size());
  uint64_t v = read_le_bytes(bytes_.data() + ea, acc.bytes);
  if (acc.sign_extend) {
    const unsigned shift = 64 - 8 * acc.bytes;
    v = static_cast<uint64_t>(static_cast<int64_t>(v << shift) >> shift);
  }
  if (acc.type == ValType::I32 || acc.type == ValType::F32) v &= 0xFFFFFFFFu;
  return v;
}

void LinearMemory::store(Opcode op, uint64_t ea, uint64_t bits) {
  const MemAccess acc = memory_access(op);
  if (!in_bounds(ea, acc.bytes)) oob(ea, acc.bytes, bytes_.size());
  write_le_bytes(bytes_.data() + ea, bits, acc.bytes);
}

void MemoryView::check(uint64_t ptr, uint64_t len) const {
  if (!in_bounds(ptr, len)) {
    throw MemoryFault("guest range [" + std::to_string(ptr) + ", +" + std::to_string(len) + ") out of bounds");
  }
}

uint64_t MemoryView::read_le(uint64_t ptr, unsigned width) const {
  check(ptr, width);
  return read_le_bytes(memory_->bytes().data() + ptr, width);
}

void MemoryView::write_le(uint64_t ptr, uint64_t v, unsigned width) {
  check(ptr, width);
  write_le_bytes(memory_->bytes().data() + ptr, v, width);
}

std::vector<uint8_t> MemoryView::read_bytes(uint64_t ptr, uint64_t len) const {
  check(ptr, len);
  if (len == 0) return {};
  const uint8_t* p = memory_->bytes().data() + ptr;
  return {p, p + len};
}

void MemoryView::write_bytes(uint64_t ptr, std::span<const uint8_t> bytes) {
  check(ptr, bytes.size());
  if (!bytes.empty()) std::memcpy(memory_->bytes().data() + ptr, bytes.data(), bytes.size());
}

}  // namespace wasmdesk
