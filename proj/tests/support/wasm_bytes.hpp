#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

// Hand assembly of binary modules for decoder and CLI tests.
namespace wasmdesk::testing {

using Bytes = std::vector<uint8_t>;

inline Bytes header() { return {0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00}; }

inline void append(Bytes& out, const Bytes& more) { out.insert(out.end(), more.begin(), more.end()); }

inline Bytes uleb(uint64_t v) {
  Bytes out;
  do {
    uint8_t b = v & 0x7F;
    v >>= 7;
    if (v) b |= 0x80;
    out.push_back(b);
  } while (v);
  return out;
}

inline Bytes name(std::string_view s) {
  Bytes out = uleb(s.size());
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

inline Bytes section(uint8_t id, const Bytes& payload) {
  Bytes out{id};
  append(out, uleb(payload.size()));
  append(out, payload);
  return out;
}

// One function body: no locals, then `code` (which must end with 0x0B).
inline Bytes body(const Bytes& code) {
  Bytes b{0x00};
  append(b, code);
  Bytes out = uleb(b.size());
  append(out, b);
  return out;
}

// Module with a single function `() -> i32` exported as "f".
inline Bytes single_func_module(const Bytes& code) {
  Bytes m = header();
  append(m, section(1, {0x01, 0x60, 0x00, 0x01, 0x7F}));
  append(m, section(3, {0x01, 0x00}));
  Bytes exp{0x01};
  append(exp, name("f"));
  append(exp, {0x00, 0x00});
  append(m, section(7, exp));
  Bytes code_sec{0x01};
  append(code_sec, body(code));
  append(m, section(10, code_sec));
  return m;
}

}  // namespace wasmdesk::testing
