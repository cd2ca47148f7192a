#include "wasmdesk/bench_suite.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "wasmdesk/builder.hpp"
#include "wasmdesk/memory.hpp"

namespace wasmdesk::bench {

namespace {

using enum ValType;

const std::map<std::string, std::vector<ScaleParam>, std::less<>>& param_table() {
  static const std::map<std::string, std::vector<ScaleParam>, std::less<>> table = {
      {"fibonacci", {{"n", 30, 0, 40}}},
      {"collision", {{"N", 1000, 1, 20000}}},
      {"multiply-int-vec", {{"L", 100000, 1, 4000000}}},
      {"quicksort-int", {{"L", 100000, 1, 1000000}}},
      {"image-threshold", {{"W", 1024, 1, 4096}, {"H", 1024, 1, 4096}, {"T", 128, 0, 256}}},
      {"video-convolute", {{"F", 5, 1, 64}, {"W", 256, 1, 1024}, {"H", 256, 1, 1024}}},
      {"trial-division", {{"K", 10000, 1, 1000000}}},
  };
  return table;
}

uint32_t pages_for(uint64_t bytes) {
  const uint64_t pages = std::max<uint64_t>(1, (bytes + kPageSize - 1) / kPageSize);
  if (pages > kDefaultMemoryCapPages) {
    throw ConfigError("input needs " + std::to_string(pages) + " pages, above the " +
                      std::to_string(kDefaultMemoryCapPages) + "-page memory cap");
  }
  return static_cast<uint32_t>(pages);
}

// ---------------------------------------------------------------------------
// Inputs shared by the modules and the oracles.

std::vector<int64_t> checked_override(const CaseInputs& in, size_t count, int64_t lo, int64_t hi,
                                      std::string_view what) {
  const auto& v = *in.override_values;
  if (v.size() != count) {
    throw ConfigError("override for " + std::string(what) + " needs " + std::to_string(count) + " values, got " +
                      std::to_string(v.size()));
  }
  for (int64_t x : v) {
    if (x < lo || x > hi) throw ConfigError("override value " + std::to_string(x) + " out of range");
  }
  return v;
}

constexpr int64_t kI32Lo = INT32_MIN;
constexpr int64_t kI32Hi = UINT32_MAX;

std::vector<uint8_t> byte_input(const CaseInputs& in, size_t count, std::string_view what) {
  if (in.override_values) {
    auto v = checked_override(in, count, 0, 255, what);
    return {v.begin(), v.end()};
  }
  Lcg lcg(in.seed);
  std::vector<uint8_t> out(count);
  for (auto& b : out) b = lcg.next_byte();
  return out;
}

std::vector<int32_t> word_input(const CaseInputs& in, size_t count, std::string_view what) {
  std::vector<int32_t> out(count);
  if (in.override_values) {
    auto v = checked_override(in, count, kI32Lo, kI32Hi, what);
    for (size_t i = 0; i < count; ++i) out[i] = static_cast<int32_t>(static_cast<uint32_t>(v[i]));
    return out;
  }
  Lcg lcg(in.seed);
  for (auto& w : out) w = static_cast<int32_t>(lcg.next());
  return out;
}

struct Circle {
  int32_t x, y, r;
};

std::vector<Circle> circle_input(const CaseInputs& in, size_t n) {
  std::vector<Circle> out(n);
  if (in.override_values) {
    auto v = checked_override(in, 3 * n, kI32Lo, kI32Hi, "collision");
    for (size_t i = 0; i < n; ++i) {
      out[i] = {static_cast<int32_t>(v[3 * i]), static_cast<int32_t>(v[3 * i + 1]), static_cast<int32_t>(v[3 * i + 2])};
    }
    return out;
  }
  Lcg lcg(in.seed);
  for (auto& c : out) {
    c.x = static_cast<int32_t>(lcg.next() % 10000);
    c.y = static_cast<int32_t>(lcg.next() % 10000);
    c.r = static_cast<int32_t>(lcg.next() % 100 + 1);
  }
  return out;
}

std::vector<uint8_t> words_to_bytes(const std::vector<int32_t>& words) {
  std::vector<uint8_t> out(words.size() * 4);
  for (size_t i = 0; i < words.size(); ++i) {
    const auto u = static_cast<uint32_t>(words[i]);
    for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<uint8_t>(u >> (8 * b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Code generation helpers.

// Pushes the next Lcg output and stores the new state in `state`.
void emit_lcg(FunctionBuilder& f, uint32_t state) {
  f.get(state).i32(1103515245).op(Opcode::I32Mul).i32(12345).op(Opcode::I32Add).i32(0x7FFFFFFF).op(Opcode::I32And);
  f.tee(state);
}

// for (i = 0; i < limit; ++i) body();  with limit a constant.
void emit_for(FunctionBuilder& f, uint32_t i, int32_t limit, const std::function<void()>& body) {
  f.i32(0).set(i);
  f.block().loop();
  f.get(i).i32(limit).op(Opcode::I32GeS).br_if(1);
  body();
  f.get(i).i32(1).op(Opcode::I32Add).set(i);
  f.br(0).end().end();
}

// Pushes base + i * scale.
void emit_index(FunctionBuilder& f, uint32_t i, int32_t scale, int32_t base = 0) {
  f.get(i);
  if (scale != 1) f.i32(scale).op(Opcode::I32Mul);
  if (base != 0) f.i32(base).op(Opcode::I32Add);
}

// Fills `count` bytes at 0 with Lcg bytes (or leaves a data segment).
void emit_byte_fill(FunctionBuilder& f, int32_t count, uint32_t seed) {
  const uint32_t i = f.local(I32), s = f.local(I32);
  f.i32(static_cast<int32_t>(seed & 0x7FFFFFFF)).set(s);
  emit_for(f, i, count, [&] {
    f.get(i);
    emit_lcg(f, s);
    f.i32(16).op(Opcode::I32ShrU).mem(Opcode::I32Store8);
  });
}

void emit_word_fill(FunctionBuilder& f, int32_t count, int32_t base, uint32_t state_local) {
  const uint32_t i = f.local(I32);
  emit_for(f, i, count, [&] {
    emit_index(f, i, 4, base);
    emit_lcg(f, state_local);
    f.mem(Opcode::I32Store);
  });
}

int32_t param(const Scale& s, std::string_view key) { return static_cast<int32_t>(s.find(key)->second); }

// ---------------------------------------------------------------------------
// Case modules.

Module fibonacci_module() {
  ModuleBuilder mb;
  FunctionBuilder f(FuncType{{I32}, {I32}});
  const uint32_t self = mb.declare_func(f.type());
  f.get(0).i32(2).op(Opcode::I32LtS).if_(I32);
  f.get(0);
  f.else_();
  f.get(0).i32(1).op(Opcode::I32Sub).call(self);
  f.get(0).i32(2).op(Opcode::I32Sub).call(self);
  f.op(Opcode::I32Add);
  f.end();
  mb.define_func(self, f);
  mb.export_func("fib", self);
  return mb.build();
}

Module trial_division_module(int32_t k) {
  ModuleBuilder mb;
  FunctionBuilder f(FuncType{{}, {I32}});
  const uint32_t count = f.local(I32), n = f.local(I32), d = f.local(I32), prime = f.local(I32);
  f.i32(1).set(n).i32(0).set(count);
  f.block().loop();
  f.get(count).i32(k).op(Opcode::I32GeS).br_if(1);
  f.get(n).i32(1).op(Opcode::I32Add).set(n);
  f.i32(1).set(prime).i32(2).set(d);
  f.block().loop();
  f.get(d).get(d).op(Opcode::I32Mul).get(n).op(Opcode::I32GtU).br_if(1);
  f.get(n).get(d).op(Opcode::I32RemU).op(Opcode::I32Eqz).if_();
  f.i32(0).set(prime).br(2);
  f.end();
  f.get(d).i32(1).op(Opcode::I32Add).set(d);
  f.br(0).end().end();
  f.get(count).get(prime).op(Opcode::I32Add).set(count);
  f.br(0).end().end();
  f.get(n);
  mb.export_func("main", mb.add_func(f));
  return mb.build();
}

Module image_threshold_module(const Scale& s, const CaseInputs& in) {
  const int32_t w = param(s, "W"), h = param(s, "H"), t = param(s, "T");
  const int32_t n = w * h;
  ModuleBuilder mb;
  mb.memory(Limits{pages_for(static_cast<uint64_t>(n)), std::nullopt});
  FunctionBuilder f(FuncType{{}, {I32}});
  if (in.override_values) {
    mb.data(0, byte_input(in, static_cast<size_t>(n), "image-threshold"));
  } else {
    emit_byte_fill(f, n, in.seed);
  }
  const uint32_t i = f.local(I32), count = f.local(I32);
  f.i32(0).set(count);
  emit_for(f, i, n, [&] {
    f.get(count);
    f.get(i).mem(Opcode::I32Load8U).i32(t).op(Opcode::I32GeU);
    f.op(Opcode::I32Add).set(count);
  });
  f.get(count);
  mb.export_func("main", mb.add_func(f));
  return mb.build();
}

Module multiply_module(const Scale& s, const CaseInputs& in) {
  const int32_t len = param(s, "L");
  ModuleBuilder mb;
  mb.memory(Limits{pages_for(uint64_t{8} * static_cast<uint64_t>(len)), std::nullopt});
  FunctionBuilder f(FuncType{{}, {I64}});
  if (in.override_values) {
    mb.data(0, words_to_bytes(word_input(in, 2 * static_cast<size_t>(len), "multiply-int-vec")));
  } else {
    const uint32_t st = f.local(I32);
    f.i32(static_cast<int32_t>(in.seed & 0x7FFFFFFF)).set(st);
    emit_word_fill(f, 2 * len, 0, st);
  }
  const uint32_t i = f.local(I32), sum = f.local(I64);
  f.i64(0).set(sum);
  emit_for(f, i, len, [&] {
    f.get(sum);
    emit_index(f, i, 4);
    f.mem(Opcode::I32Load);
    emit_index(f, i, 4, 4 * len);
    f.mem(Opcode::I32Load);
    f.op(Opcode::I32Mul).op(Opcode::I64ExtendI32S).op(Opcode::I64Add).set(sum);
  });
  f.get(sum);
  mb.export_func("main", mb.add_func(f));
  return mb.build();
}

// Pushes the address of element `local` of the i32 array at 0.
void emit_elem(FunctionBuilder& f, uint32_t local) { f.get(local).i32(4).op(Opcode::I32Mul); }

Module quicksort_module(const Scale& s, const CaseInputs& in) {
  const int32_t len = param(s, "L");
  ModuleBuilder mb;
  const uint64_t bytes = uint64_t{4} * static_cast<uint64_t>(len) * (in.override_values ? 2 : 1);
  mb.memory(Limits{pages_for(bytes), std::nullopt});

  // qs(lo, hi): sorts a[lo..hi] in place. Lomuto partition around a[hi];
  // recurses into the smaller side and loops on the larger one.
  FunctionBuilder q(FuncType{{I32, I32}, {}});
  const uint32_t qs = mb.declare_func(q.type());
  {
    const uint32_t lo = 0, hi = 1;
    const uint32_t pivot = q.local(I32), i = q.local(I32), j = q.local(I32), tmp = q.local(I32);
    q.block().loop();
    q.get(lo).get(hi).op(Opcode::I32GeS).br_if(1);
    emit_elem(q, hi);
    q.mem(Opcode::I32Load).set(pivot);
    q.get(lo).set(i).get(lo).set(j);
    q.block().loop();
    q.get(j).get(hi).op(Opcode::I32GeS).br_if(1);
    emit_elem(q, j);
    q.mem(Opcode::I32Load).get(pivot).op(Opcode::I32LtS).if_();
    emit_elem(q, i);
    q.mem(Opcode::I32Load).set(tmp);
    emit_elem(q, i);
    emit_elem(q, j);
    q.mem(Opcode::I32Load).mem(Opcode::I32Store);
    emit_elem(q, j);
    q.get(tmp).mem(Opcode::I32Store);
    q.get(i).i32(1).op(Opcode::I32Add).set(i);
    q.end();
    q.get(j).i32(1).op(Opcode::I32Add).set(j);
    q.br(0).end().end();
    emit_elem(q, i);
    q.mem(Opcode::I32Load).set(tmp);
    emit_elem(q, i);
    emit_elem(q, hi);
    q.mem(Opcode::I32Load).mem(Opcode::I32Store);
    emit_elem(q, hi);
    q.get(tmp).mem(Opcode::I32Store);
    // i is the pivot position now.
    q.get(i).get(lo).op(Opcode::I32Sub).get(hi).get(i).op(Opcode::I32Sub).op(Opcode::I32LtS).if_();
    q.get(lo).get(i).i32(1).op(Opcode::I32Sub).call(qs);
    q.get(i).i32(1).op(Opcode::I32Add).set(lo);
    q.else_();
    q.get(i).i32(1).op(Opcode::I32Add).get(hi).call(qs);
    q.get(i).i32(1).op(Opcode::I32Sub).set(hi);
    q.end();
    q.br(0).end().end();
  }
  mb.define_func(qs, q);

  FunctionBuilder f(FuncType{{}, {I64}});
  const uint32_t i = f.local(I32), sum = f.local(I64);
  if (in.override_values) {
    // Pristine copy after the working array; restored on every call.
    mb.data(static_cast<uint32_t>(4 * len), words_to_bytes(word_input(in, static_cast<size_t>(len), "quicksort-int")));
    emit_for(f, i, len, [&] {
      emit_index(f, i, 4);
      emit_index(f, i, 4, 4 * len);
      f.mem(Opcode::I32Load).mem(Opcode::I32Store);
    });
  } else {
    const uint32_t st = f.local(I32);
    f.i32(static_cast<int32_t>(in.seed & 0x7FFFFFFF)).set(st);
    emit_word_fill(f, len, 0, st);
  }
  f.i32(0).i32(len - 1).call(qs);
  f.i64(0).set(sum);
  emit_for(f, i, len, [&] {
    f.get(sum);
    emit_index(f, i, 4);
    f.mem(Opcode::I32Load).op(Opcode::I64ExtendI32S);
    f.get(i).i32(7).op(Opcode::I32RemU).i32(1).op(Opcode::I32Add).op(Opcode::I64ExtendI32U);
    f.op(Opcode::I64Mul).op(Opcode::I64Add).set(sum);
  });
  f.get(sum);
  mb.export_func("main", mb.add_func(f));
  return mb.build();
}

Module collision_module(const Scale& s, const CaseInputs& in) {
  const int32_t n = param(s, "N");
  ModuleBuilder mb;
  mb.memory(Limits{pages_for(uint64_t{12} * static_cast<uint64_t>(n)), std::nullopt});
  FunctionBuilder f(FuncType{{}, {I64}});
  const uint32_t i = f.local(I32), j = f.local(I32);
  if (in.override_values) {
    std::vector<int32_t> words;
    for (const Circle& c : circle_input(in, static_cast<size_t>(n))) {
      words.insert(words.end(), {c.x, c.y, c.r});
    }
    mb.data(0, words_to_bytes(words));
  } else {
    const uint32_t st = f.local(I32);
    f.i32(static_cast<int32_t>(in.seed & 0x7FFFFFFF)).set(st);
    emit_for(f, i, n, [&] {
      emit_index(f, i, 12, 0);
      emit_lcg(f, st);
      f.i32(10000).op(Opcode::I32RemU).mem(Opcode::I32Store);
      emit_index(f, i, 12, 4);
      emit_lcg(f, st);
      f.i32(10000).op(Opcode::I32RemU).mem(Opcode::I32Store);
      emit_index(f, i, 12, 8);
      emit_lcg(f, st);
      f.i32(100).op(Opcode::I32RemU).i32(1).op(Opcode::I32Add).mem(Opcode::I32Store);
    });
  }
  const uint32_t count = f.local(I64), xi = f.local(I64), yi = f.local(I64), ri = f.local(I64);
  const uint32_t dx = f.local(I64), dy = f.local(I64), rr = f.local(I64);
  f.i64(0).set(count);
  emit_for(f, i, n, [&] {
    for (auto [local, off] : {std::pair{xi, 0u}, std::pair{yi, 4u}, std::pair{ri, 8u}}) {
      emit_index(f, i, 12);
      f.mem(Opcode::I32Load, off).op(Opcode::I64ExtendI32S).set(local);
    }
    f.get(i).i32(1).op(Opcode::I32Add).set(j);
    f.block().loop();
    f.get(j).i32(n).op(Opcode::I32GeS).br_if(1);
    f.get(xi);
    emit_index(f, j, 12);
    f.mem(Opcode::I32Load, 0).op(Opcode::I64ExtendI32S).op(Opcode::I64Sub).set(dx);
    f.get(yi);
    emit_index(f, j, 12);
    f.mem(Opcode::I32Load, 4).op(Opcode::I64ExtendI32S).op(Opcode::I64Sub).set(dy);
    f.get(ri);
    emit_index(f, j, 12);
    f.mem(Opcode::I32Load, 8).op(Opcode::I64ExtendI32S).op(Opcode::I64Add).set(rr);
    f.get(count);
    f.get(dx).get(dx).op(Opcode::I64Mul).get(dy).get(dy).op(Opcode::I64Mul).op(Opcode::I64Add);
    f.get(rr).get(rr).op(Opcode::I64Mul).op(Opcode::I64LtS).op(Opcode::I64ExtendI32U);
    f.op(Opcode::I64Add).set(count);
    f.get(j).i32(1).op(Opcode::I32Add).set(j);
    f.br(0).end().end();
  });
  f.get(count);
  mb.export_func("main", mb.add_func(f));
  return mb.build();
}

constexpr int32_t kKernel[3][3] = {{1, 2, 1}, {2, 4, 2}, {1, 2, 1}};

Module video_module(const Scale& s, const CaseInputs& in) {
  const int32_t frames = param(s, "F"), w = param(s, "W"), h = param(s, "H");
  const int32_t total = frames * w * h;
  ModuleBuilder mb;
  mb.memory(Limits{pages_for(static_cast<uint64_t>(total)), std::nullopt});
  FunctionBuilder f(FuncType{{}, {I64}});
  if (in.override_values) {
    mb.data(0, byte_input(in, static_cast<size_t>(total), "video-convolute"));
  } else {
    emit_byte_fill(f, total, in.seed);
  }
  const uint32_t fr = f.local(I32), y = f.local(I32), x = f.local(I32), base = f.local(I32);
  const uint32_t acc = f.local(I32), yy = f.local(I32), xx = f.local(I32), sum = f.local(I64);
  f.i64(0).set(sum);
  emit_for(f, fr, frames, [&] {
    f.get(fr).i32(w * h).op(Opcode::I32Mul).set(base);
    emit_for(f, y, h, [&] {
      emit_for(f, x, w, [&] {
        f.i32(0).set(acc);
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            // Out-of-frame neighbours read as zero: skip them.
            f.get(y).i32(ky - 1).op(Opcode::I32Add).tee(yy).i32(h).op(Opcode::I32LtU);
            f.get(x).i32(kx - 1).op(Opcode::I32Add).tee(xx).i32(w).op(Opcode::I32LtU);
            f.op(Opcode::I32And).if_();
            f.get(acc).i32(kKernel[ky][kx]);
            f.get(base).get(yy).i32(w).op(Opcode::I32Mul).op(Opcode::I32Add).get(xx).op(Opcode::I32Add);
            f.mem(Opcode::I32Load8U).op(Opcode::I32Mul).op(Opcode::I32Add).set(acc);
            f.end();
          }
        }
        f.get(sum).get(acc).i32(4).op(Opcode::I32ShrU).op(Opcode::I64ExtendI32U).op(Opcode::I64Add).set(sum);
      });
    });
  });
  f.get(sum);
  mb.export_func("main", mb.add_func(f));
  return mb.build();
}

// ---------------------------------------------------------------------------
// Oracles. Deliberately different algorithms where that is natural.

int64_t fib_oracle(int32_t n) {
  uint32_t a = 0, b = 1;
  for (int32_t i = 0; i < n; ++i) {
    const uint32_t next = a + b;
    a = b;
    b = next;
  }
  return static_cast<int32_t>(a);
}

int64_t sieve_oracle(int32_t k) {
  // The k-th prime is below k (ln k + ln ln k) for k >= 6.
  size_t limit = 16;
  while (true) {
    std::vector<bool> composite(limit + 1, false);
    int32_t count = 0;
    for (size_t p = 2; p <= limit; ++p) {
      if (composite[p]) continue;
      if (++count == k) return static_cast<int64_t>(p);
      for (size_t m = p * p; m <= limit; m += p) composite[m] = true;
    }
    limit *= 2;
  }
}

int64_t image_oracle(const Scale& s, const CaseInputs& in) {
  const int32_t w = param(s, "W"), h = param(s, "H"), t = param(s, "T");
  const auto px = byte_input(in, static_cast<size_t>(w) * h, "image-threshold");
  return std::count_if(px.begin(), px.end(), [t](uint8_t p) { return p >= t; });
}

int64_t multiply_oracle(const Scale& s, const CaseInputs& in) {
  const auto len = static_cast<size_t>(param(s, "L"));
  const auto v = word_input(in, 2 * len, "multiply-int-vec");
  return static_cast<int64_t>(std::inner_product(
      v.begin(), v.begin() + static_cast<std::ptrdiff_t>(len), v.begin() + static_cast<std::ptrdiff_t>(len),
      uint64_t{0}, std::plus<>(), [](int32_t a, int32_t b) {
        const auto p = static_cast<int32_t>(static_cast<uint32_t>(a) * static_cast<uint32_t>(b));
        return static_cast<uint64_t>(static_cast<int64_t>(p));
      }));
}

int64_t quicksort_oracle(const Scale& s, const CaseInputs& in) {
  auto v = word_input(in, static_cast<size_t>(param(s, "L")), "quicksort-int");
  std::sort(v.begin(), v.end());
  uint64_t sum = 0;
  for (size_t i = 0; i < v.size(); ++i) sum += static_cast<uint64_t>(int64_t{v[i]}) * (i % 7 + 1);
  return static_cast<int64_t>(sum);
}

int64_t collision_oracle(const Scale& s, const CaseInputs& in) {
  const auto c = circle_input(in, static_cast<size_t>(param(s, "N")));
  int64_t count = 0;
  for (size_t i = 0; i < c.size(); ++i) {
    for (size_t j = i + 1; j < c.size(); ++j) {
      const uint64_t dx = static_cast<uint64_t>(int64_t{c[i].x} - c[j].x);
      const uint64_t dy = static_cast<uint64_t>(int64_t{c[i].y} - c[j].y);
      const uint64_t rr = static_cast<uint64_t>(int64_t{c[i].r} + c[j].r);
      if (static_cast<int64_t>(dx * dx + dy * dy) < static_cast<int64_t>(rr * rr)) ++count;
    }
  }
  return count;
}

int64_t video_oracle(const Scale& s, const CaseInputs& in) {
  const int32_t frames = param(s, "F"), w = param(s, "W"), h = param(s, "H");
  const auto px = byte_input(in, static_cast<size_t>(frames) * w * h, "video-convolute");
  // Convolve a copy with a one-pixel zero border instead of bounds tests.
  const size_t pw = static_cast<size_t>(w) + 2, ph = static_cast<size_t>(h) + 2;
  std::vector<uint32_t> padded(pw * ph);
  uint64_t sum = 0;
  for (int32_t fr = 0; fr < frames; ++fr) {
    std::fill(padded.begin(), padded.end(), 0);
    for (int32_t y = 0; y < h; ++y) {
      for (int32_t x = 0; x < w; ++x) {
        padded[(y + 1) * pw + (x + 1)] = px[(static_cast<size_t>(fr) * h + y) * w + x];
      }
    }
    for (size_t y = 1; y + 1 < ph; ++y) {
      for (size_t x = 1; x + 1 < pw; ++x) {
        uint32_t acc = 0;
        for (size_t ky = 0; ky < 3; ++ky) {
          for (size_t kx = 0; kx < 3; ++kx) acc += kKernel[ky][kx] * padded[(y + ky - 1) * pw + (x + kx - 1)];
        }
        sum += acc / 16;
      }
    }
  }
  return static_cast<int64_t>(sum);
}

}  // namespace

const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names = {"fibonacci",      "collision",       "multiply-int-vec",
                                                 "quicksort-int",  "image-threshold", "video-convolute",
                                                 "trial-division"};
  return names;
}

const std::vector<ScaleParam>& scale_params(std::string_view case_name) {
  const auto& table = param_table();
  auto it = table.find(case_name);
  if (it == table.end()) throw ConfigError("unknown benchmark case '" + std::string(case_name) + "'");
  return it->second;
}

Scale resolve_scale(std::string_view case_name, const Scale& scale) {
  const auto& params = scale_params(case_name);
  Scale out;
  for (const auto& p : params) out[p.name] = p.default_value;
  for (const auto& [key, value] : scale) {
    auto it = std::find_if(params.begin(), params.end(), [&](const ScaleParam& p) { return p.name == key; });
    if (it == params.end()) {
      throw ConfigError("case '" + std::string(case_name) + "' has no parameter '" + key + "'");
    }
    if (value < it->min || value > it->max) {
      throw ConfigError(std::string(case_name) + "." + key + "=" + std::to_string(value) + " outside [" +
                        std::to_string(it->min) + ", " + std::to_string(it->max) + "]");
    }
    out[key] = value;
  }
  if (case_name == "video-convolute" && out["F"] * out["W"] * out["H"] > int64_t{kDefaultMemoryCapPages} * kPageSize) {
    throw ConfigError("video-convolute frames exceed the memory cap");
  }
  return out;
}

OracleResult oracle(std::string_view name, const Scale& scale, const CaseInputs& inputs) {
  const Scale s = resolve_scale(name, scale);
  if (name == "fibonacci") return {fib_oracle(param(s, "n")), "iterative-fibonacci"};
  if (name == "trial-division") return {sieve_oracle(param(s, "K")), "sieve-of-eratosthenes"};
  if (name == "image-threshold") return {image_oracle(s, inputs), "count-if"};
  if (name == "multiply-int-vec") return {multiply_oracle(s, inputs), "inner-product"};
  if (name == "quicksort-int") return {quicksort_oracle(s, inputs), "std-sort"};
  if (name == "collision") return {collision_oracle(s, inputs), "pair-loop"};
  return {video_oracle(s, inputs), "padded-convolution"};
}

BenchCase build_case(std::string_view name, const Scale& scale, const CaseInputs& inputs) {
  BenchCase c;
  c.name = std::string(name);
  c.scale = resolve_scale(name, scale);
  c.inputs = inputs;
  c.entry = "main";
  if (inputs.override_values && (name == "fibonacci" || name == "trial-division")) {
    throw ConfigError("case '" + c.name + "' takes no input override");
  }
  if (name == "fibonacci") {
    c.module = fibonacci_module();
    c.entry = "fib";
    c.args = {Value::i32(param(c.scale, "n"))};
  } else if (name == "trial-division") {
    c.module = trial_division_module(param(c.scale, "K"));
  } else if (name == "image-threshold") {
    c.module = image_threshold_module(c.scale, inputs);
  } else if (name == "multiply-int-vec") {
    c.module = multiply_module(c.scale, inputs);
  } else if (name == "quicksort-int") {
    c.module = quicksort_module(c.scale, inputs);
  } else if (name == "collision") {
    c.module = collision_module(c.scale, inputs);
  } else {
    c.module = video_module(c.scale, inputs);
  }
  c.expected = oracle(name, c.scale, inputs);
  return c;
}

int64_t result_value(const std::vector<Value>& results) {
  if (results.size() != 1) throw std::invalid_argument("expected exactly one result");
  const Value& v = results[0];
  switch (v.type()) {
    case ValType::I32: return v.as_i32();
    case ValType::I64: return v.as_i64();
    default: throw std::invalid_argument("expected an integer result");
  }
}

// ---------------------------------------------------------------------------
// Constant-folding microbenchmark.

Module build_fold_microbench() {
  ModuleBuilder mb;
  // step(acc, i) = acc + (3*7 + (100-58)) * ((12^5) & 255) + i * ((1<<3) - 7)
  //              + ((1000/7) % 13) * popcnt(0xFF00FF) + (if 1 then 2*3*5*7 else -1)
  FunctionBuilder st(FuncType{{I64, I32}, {I64}});
  st.get(0);
  st.i64(3).i64(7).op(Opcode::I64Mul).i64(100).i64(58).op(Opcode::I64Sub).op(Opcode::I64Add);
  st.i64(12).i64(5).op(Opcode::I64Xor).i64(255).op(Opcode::I64And).op(Opcode::I64Mul);
  st.op(Opcode::I64Add);
  st.get(1).op(Opcode::I64ExtendI32S);
  st.i64(1).i64(3).op(Opcode::I64Shl).i64(7).op(Opcode::I64Sub).op(Opcode::I64Mul);
  st.op(Opcode::I64Add);
  st.i64(1000).i64(7).op(Opcode::I64DivS).i64(13).op(Opcode::I64RemS);
  st.i64(0xFF00FF).op(Opcode::I64Popcnt).op(Opcode::I64Mul);
  st.op(Opcode::I64Add);
  st.i32(1).if_(I64);
  st.i64(2).i64(3).op(Opcode::I64Mul).i64(5).op(Opcode::I64Mul).i64(7).op(Opcode::I64Mul);
  st.else_();
  st.i64(-1);
  st.end();
  st.op(Opcode::I64Add);
  const uint32_t step = mb.add_func(st);

  FunctionBuilder run(FuncType{{I32}, {I64}});
  const uint32_t i = run.local(I32), acc = run.local(I64);
  run.i64(0).set(acc).i32(0).set(i);
  run.block().loop();
  run.get(i).get(0).op(Opcode::I32GeS).br_if(1);
  run.get(acc).get(i).call(step).set(acc);
  run.get(i).i32(1).op(Opcode::I32Add).set(i);
  run.br(0).end().end();
  run.get(acc);
  mb.export_func("run", mb.add_func(run));
  return mb.build();
}

int64_t fold_microbench_expected(int32_t iterations) {
  uint64_t acc = 0;
  for (int32_t i = 0; i < iterations; ++i) acc += 63 * 9 + static_cast<uint64_t>(int64_t{i}) * 1 + 12 * 16 + 210;
  return static_cast<int64_t>(acc);
}

// ---------------------------------------------------------------------------
// Random program generator.

namespace {

constexpr uint32_t kIovAddr = 0x9000;
constexpr uint32_t kOutAddr = 0x9100;
constexpr int32_t kAddrMask = 0x7FFF;

struct Label {
  bool is_loop;
  std::optional<ValType> result;
};

class ProgramGen {
 public:
  ProgramGen(uint64_t seed, uint32_t budget, const GenOptions& opts) : rng_(seed), budget_(budget), opts_(opts) {}

  Module run() {
    has_memory_ = opts_.allow_memory && chance(3, 4);
    const bool wasi = opts_.allow_wasi && has_memory_ && chance(1, 2);
    if (wasi) {
      fd_write_ = mb_.import_func("wasi_snapshot_preview1", "fd_write", FuncType{{I32, I32, I32, I32}, {I32}});
    }
    if (has_memory_) {
      mb_.memory(Limits{1, 1});
      std::vector<uint8_t> seed_bytes(64);
      for (auto& b : seed_bytes) b = static_cast<uint8_t>(rng_());
      mb_.data(static_cast<uint32_t>(below(0x100)), std::move(seed_bytes));
    }
    globals_ = {mb_.global(I32, true, i32_const(static_cast<int32_t>(rng_()))),
                mb_.global(I64, true, i64_const(static_cast<int64_t>(rng_())))};

    const uint32_t count = 1 + static_cast<uint32_t>(below(std::min<uint32_t>(4, 1 + budget_ / 40)));
    sigs_.push_back(FuncType{{}, {I64}});
    for (uint32_t i = 1; i < count; ++i) {
      FuncType t;
      const uint64_t params = below(4);
      for (uint64_t p = 0; p < params; ++p) t.params.push_back(pick_type());
      t.results.push_back(pick_type());
      sigs_.push_back(t);
    }
    for (const auto& t : sigs_) indices_.push_back(mb_.declare_func(t));
    const uint32_t per_func = std::max<uint32_t>(1, budget_ / count);
    for (uint32_t i = 0; i < count; ++i) define(i, per_func);
    mb_.export_func("main", indices_[0]);
    if (has_memory_) mb_.export_memory("memory");
    return mb_.build();
  }

 private:
  uint64_t below(uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  bool chance(uint64_t num, uint64_t den) { return below(den) < num; }
  ValType pick_type() { return chance(1, 2) ? I32 : I64; }

  void define(uint32_t which, uint32_t budget) {
    FunctionBuilder f(sigs_[which]);
    f_ = &f;
    self_ = which;
    left_ = budget;
    loops_ = 0;
    labels_.clear();
    assignable_.clear();
    for (uint32_t p = 0; p < f.param_count(); ++p) assignable_.push_back(p);
    const uint64_t extra = 1 + below(4);
    for (uint64_t i = 0; i < extra; ++i) assignable_.push_back(f.local(pick_type()));
    result_ = sigs_[which].results[0];
    labels_.push_back(Label{false, result_});  // the function body
    while (left_ > 0) statement(0);
    expr(result_, 0);
    mb_.define_func(indices_[which], f);
  }

  void spend(uint32_t n = 1) { left_ = left_ > n ? left_ - n : 0; }

  std::vector<uint32_t> locals_of(ValType t) const {
    std::vector<uint32_t> out;
    for (uint32_t l : assignable_) {
      if (f_->local_type(l) == t) out.push_back(l);
    }
    return out;
  }

  void constant(ValType t) {
    static constexpr int64_t kInteresting[] = {0, 1, -1, 2, 7, 31, 32, 63, 64, 255, 0x7FFFFFFF, INT32_MIN, INT64_MIN,
                                               INT64_MAX};
    int64_t v = chance(1, 2) ? kInteresting[below(std::size(kInteresting))] : static_cast<int64_t>(rng_());
    if (chance(1, 3)) v = static_cast<int64_t>(below(16));
    if (t == I32) {
      f_->i32(static_cast<int32_t>(v));
    } else {
      f_->i64(v);
    }
  }

  void leaf(ValType t) {
    const auto locals = locals_of(t);
    const uint64_t k = below(3);
    if (k == 0 && !locals.empty()) {
      f_->get(locals[below(locals.size())]);
    } else if (k == 1) {
      f_->global_get(globals_[t == I32 ? 0 : 1]);
    } else {
      constant(t);
    }
  }

  void address() {
    expr(I32, 3);
    f_->i32(kAddrMask).op(Opcode::I32And);
  }

  void expr(ValType t, int depth) {
    spend();
    if (depth >= 5 || left_ == 0 || chance(1, 4)) return leaf(t);
    switch (below(14)) {
      case 0: {  // unary
        static constexpr Opcode k32[] = {Opcode::I32Clz, Opcode::I32Ctz, Opcode::I32Popcnt, Opcode::I32Eqz};
        static constexpr Opcode k64[] = {Opcode::I64Clz, Opcode::I64Ctz, Opcode::I64Popcnt};
        if (t == I32) {
          if (chance(1, 4)) {
            expr(I64, depth + 1);
            f_->op(chance(1, 2) ? Opcode::I32WrapI64 : Opcode::I64Eqz);
          } else {
            expr(I32, depth + 1);
            f_->op(k32[below(std::size(k32))]);
          }
        } else if (chance(1, 3)) {
          expr(I32, depth + 1);
          f_->op(chance(1, 2) ? Opcode::I64ExtendI32S : Opcode::I64ExtendI32U);
        } else {
          expr(I64, depth + 1);
          f_->op(k64[below(std::size(k64))]);
        }
        return;
      }
      case 1:
      case 2:
      case 3: {  // binary
        static constexpr Opcode k32[] = {Opcode::I32Add, Opcode::I32Sub,  Opcode::I32Mul,  Opcode::I32And,
                                         Opcode::I32Or,  Opcode::I32Xor,  Opcode::I32Shl,  Opcode::I32ShrS,
                                         Opcode::I32ShrU, Opcode::I32Rotl, Opcode::I32Rotr};
        static constexpr Opcode k64[] = {Opcode::I64Add, Opcode::I64Sub,  Opcode::I64Mul,  Opcode::I64And,
                                         Opcode::I64Or,  Opcode::I64Xor,  Opcode::I64Shl,  Opcode::I64ShrS,
                                         Opcode::I64ShrU, Opcode::I64Rotl, Opcode::I64Rotr};
        static constexpr Opcode d32[] = {Opcode::I32DivS, Opcode::I32DivU, Opcode::I32RemS, Opcode::I32RemU};
        static constexpr Opcode d64[] = {Opcode::I64DivS, Opcode::I64DivU, Opcode::I64RemS, Opcode::I64RemU};
        expr(t, depth + 1);
        const bool div = chance(1, 8);
        expr(t, depth + 1);
        if (div && !opts_.allow_traps) {
          // Force an odd, positive-ish divisor: no zero and no INT_MIN / -1.
          if (t == I32) {
            f_->i32(0xFFFF).op(Opcode::I32And).i32(1).op(Opcode::I32Or);
          } else {
            f_->i64(0xFFFF).op(Opcode::I64And).i64(1).op(Opcode::I64Or);
          }
        }
        if (t == I32) {
          f_->op(div ? d32[below(4)] : k32[below(std::size(k32))]);
        } else {
          f_->op(div ? d64[below(4)] : k64[below(std::size(k64))]);
        }
        return;
      }
      case 4: {  // compare
        if (t != I32) return leaf(t);
        static constexpr Opcode k32[] = {Opcode::I32Eq,  Opcode::I32Ne,  Opcode::I32LtS, Opcode::I32LtU,
                                         Opcode::I32GtS, Opcode::I32GeU, Opcode::I32LeS};
        static constexpr Opcode k64[] = {Opcode::I64Eq,  Opcode::I64Ne,  Opcode::I64LtS, Opcode::I64LtU,
                                         Opcode::I64GtS, Opcode::I64GeU, Opcode::I64LeS};
        const ValType operand = pick_type();
        expr(operand, depth + 1);
        expr(operand, depth + 1);
        f_->op(operand == I32 ? k32[below(std::size(k32))] : k64[below(std::size(k64))]);
        return;
      }
      case 5: {  // select
        expr(t, depth + 1);
        expr(t, depth + 1);
        expr(I32, depth + 1);
        f_->op(Opcode::Select);
        return;
      }
      case 6: {  // load
        if (!has_memory_) return leaf(t);
        static constexpr Opcode k32[] = {Opcode::I32Load, Opcode::I32Load8S, Opcode::I32Load8U, Opcode::I32Load16S,
                                         Opcode::I32Load16U};
        static constexpr Opcode k64[] = {Opcode::I64Load,    Opcode::I64Load8S,  Opcode::I64Load16U,
                                         Opcode::I64Load32S, Opcode::I64Load32U};
        address();
        f_->mem(t == I32 ? k32[below(std::size(k32))] : k64[below(std::size(k64))],
                static_cast<uint32_t>(below(5)));
        return;
      }
      case 7: {  // tee
        const auto locals = locals_of(t);
        if (locals.empty()) return leaf(t);
        expr(t, depth + 1);
        f_->tee(locals[below(locals.size())]);
        return;
      }
      case 8: {  // call a later function
        std::vector<uint32_t> callees;
        for (uint32_t i = self_ + 1; i < sigs_.size(); ++i) {
          if (sigs_[i].results[0] == t) callees.push_back(i);
        }
        if (callees.empty() || loops_ > 0) return leaf(t);
        const uint32_t callee = callees[below(callees.size())];
        for (ValType p : sigs_[callee].params) expr(p, depth + 1);
        f_->call(indices_[callee]);
        return;
      }
      case 9: {  // block with statements and a value
        f_->block(t);
        labels_.push_back(Label{false, t});
        const uint64_t n = below(3);
        for (uint64_t i = 0; i < n; ++i) statement(depth + 1);
        expr(t, depth + 1);
        labels_.pop_back();
        f_->end();
        return;
      }
      case 10: {  // value-carrying br_if
        f_->block(t);
        labels_.push_back(Label{false, t});
        expr(t, depth + 1);
        cond(depth + 1);
        f_->br_if(0);
        if (chance(1, 2)) {
          f_->op(Opcode::Drop);
          expr(t, depth + 1);
        }
        labels_.pop_back();
        f_->end();
        return;
      }
      case 11: {  // if with a value
        cond(depth + 1);
        f_->if_(t);
        labels_.push_back(Label{false, t});
        expr(t, depth + 1);
        f_->else_();
        expr(t, depth + 1);
        labels_.pop_back();
        f_->end();
        return;
      }
      case 12: {  // br_table out of nested blocks, each yielding a value
        f_->block(t);
        f_->block(t);
        labels_.push_back(Label{false, t});
        labels_.push_back(Label{false, t});
        expr(t, depth + 1);
        expr(I32, depth + 1);
        f_->emit(Instr{Opcode::BrTable, BrTableImm{{0, 1, 0}, 1}});
        labels_.pop_back();
        f_->end();
        constant(t);
        f_->op(t == I32 ? Opcode::I32Add : Opcode::I64Add);
        labels_.pop_back();
        f_->end();
        return;
      }
      default: return leaf(t);
    }
  }

  // An i32 condition; sometimes constant so the pruning pass has work.
  void cond(int depth) {
    if (chance(1, 4)) {
      f_->i32(static_cast<int32_t>(below(2)));
    } else {
      expr(I32, depth);
    }
  }

  void statements(int depth, uint64_t max) {
    const uint64_t n = 1 + below(max);
    for (uint64_t i = 0; i < n && left_ > 0; ++i) statement(depth);
  }

  void statement(int depth) {
    spend();
    if (depth >= 4) {
      const auto locals = assignable_;
      expr(f_->local_type(locals[0]), depth + 1);
      f_->set(locals[0]);
      return;
    }
    switch (below(12)) {
      case 0:
      case 1: {
        const uint32_t l = assignable_[below(assignable_.size())];
        expr(f_->local_type(l), depth + 1);
        f_->set(l);
        return;
      }
      case 2: {
        const ValType t = pick_type();
        expr(t, depth + 1);
        f_->global_set(globals_[t == I32 ? 0 : 1]);
        return;
      }
      case 3: {
        if (!has_memory_) return statement(depth);
        static constexpr Opcode k32[] = {Opcode::I32Store, Opcode::I32Store8, Opcode::I32Store16};
        static constexpr Opcode k64[] = {Opcode::I64Store, Opcode::I64Store8, Opcode::I64Store16, Opcode::I64Store32};
        const ValType t = pick_type();
        address();
        expr(t, depth + 1);
        f_->mem(t == I32 ? k32[below(std::size(k32))] : k64[below(std::size(k64))],
                static_cast<uint32_t>(below(5)));
        return;
      }
      case 4: {  // block with an optional early exit
        f_->block();
        labels_.push_back(Label{false, std::nullopt});
        statements(depth + 1, 3);
        if (chance(1, 2)) {
          cond(depth + 1);
          f_->br_if(void_block_depth());
        }
        statements(depth + 1, 2);
        labels_.pop_back();
        f_->end();
        return;
      }
      case 5: {  // counted loop
        if (loops_ >= 2) return statement(depth);
        const uint32_t counter = f_->local(I32);
        f_->i32(static_cast<int32_t>(1 + below(4))).set(counter);
        f_->loop();
        labels_.push_back(Label{true, std::nullopt});
        ++loops_;
        statements(depth + 1, 3);
        --loops_;
        f_->get(counter).i32(1).op(Opcode::I32Sub).tee(counter).br_if(0);
        labels_.pop_back();
        f_->end();
        return;
      }
      case 6: {
        cond(depth + 1);
        f_->if_();
        labels_.push_back(Label{false, std::nullopt});
        statements(depth + 1, 2);
        if (chance(1, 2)) {
          f_->else_();
          statements(depth + 1, 2);
        }
        labels_.pop_back();
        f_->end();
        return;
      }
      case 7: {  // conditional early return
        cond(depth + 1);
        f_->if_();
        labels_.push_back(Label{false, std::nullopt});
        expr(result_, depth + 1);
        f_->op(Opcode::Return);
        labels_.pop_back();
        f_->end();
        return;
      }
      case 8: {  // unconditional branch followed by dead code
        f_->block();
        labels_.push_back(Label{false, std::nullopt});
        statements(depth + 1, 2);
        f_->br(0);
        statement(depth + 1);
        labels_.pop_back();
        f_->end();
        return;
      }
      case 9: {
        if (!fd_write_) return statement(depth);
        f_->i32(kOutAddr);
        expr(I64, depth + 1);
        f_->mem(Opcode::I64Store);
        f_->i32(kIovAddr).i32(kOutAddr).mem(Opcode::I32Store);
        f_->i32(kIovAddr).i32(8).mem(Opcode::I32Store, 4);
        f_->i32(1).i32(kIovAddr).i32(1).i32(kIovAddr + 8).call(*fd_write_).op(Opcode::Drop);
        return;
      }
      case 10: {
        if (!opts_.allow_traps || !chance(1, 6)) return statement(depth);
        expr(I32, depth + 1);
        f_->i32(0x3F).op(Opcode::I32And).op(Opcode::I32Eqz).if_();
        f_->op(Opcode::Unreachable);
        f_->end();
        return;
      }
      default: {
        const ValType t = pick_type();
        expr(t, depth + 1);
        f_->op(Opcode::Drop);
        return;
      }
    }
  }

  // Depth of a random enclosing void block (never a loop, so branches
  // cannot create unbounded iteration).
  uint32_t void_block_depth() {
    std::vector<uint32_t> candidates;
    for (size_t d = 0; d < labels_.size(); ++d) {
      const Label& l = labels_[labels_.size() - 1 - d];
      if (!l.is_loop && !l.result) candidates.push_back(static_cast<uint32_t>(d));
    }
    return candidates[below(candidates.size())];
  }

  std::mt19937_64 rng_;
  uint32_t budget_;
  GenOptions opts_;
  ModuleBuilder mb_;
  bool has_memory_ = false;
  std::optional<uint32_t> fd_write_;
  std::vector<uint32_t> globals_;
  std::vector<FuncType> sigs_;
  std::vector<uint32_t> indices_;

  FunctionBuilder* f_ = nullptr;
  uint32_t self_ = 0;
  uint32_t left_ = 0;
  int loops_ = 0;
  ValType result_ = I64;
  std::vector<Label> labels_;
  std::vector<uint32_t> assignable_;
};

}  // namespace

Module gen_random_program(uint64_t seed, uint32_t size_budget, const GenOptions& options) {
  return ProgramGen(seed, std::max<uint32_t>(1, size_budget), options).run();
}

}  // namespace wasmdesk::bench
