#include "wasmdesk/wasi.hpp"

#include <algorithm>
#include <chrono>

namespace wasmdesk::wasi {

namespace {

uint64_t steady_now() {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch()).count());
}

uint64_t system_now() {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

struct StringTable {
  uint64_t count = 0;
  uint64_t bytes = 0;  // including NUL terminators
};

StringTable measure(const std::vector<std::string>& strings) {
  StringTable t;
  t.count = strings.size();
  for (const auto& s : strings) t.bytes += s.size() + 1;
  return t;
}

Errno sizes_get(MemoryView& mem, const std::vector<std::string>& strings, uint32_t count_ptr, uint32_t size_ptr) {
  if (!mem.in_bounds(count_ptr, 4) || !mem.in_bounds(size_ptr, 4)) return Errno::Fault;
  const StringTable t = measure(strings);
  mem.write_u32(count_ptr, static_cast<uint32_t>(t.count));
  mem.write_u32(size_ptr, static_cast<uint32_t>(t.bytes));
  return Errno::Success;
}

Errno strings_get(MemoryView& mem, const std::vector<std::string>& strings, uint32_t ptrs, uint32_t buf) {
  const StringTable t = measure(strings);
  if (!mem.in_bounds(ptrs, 4 * t.count) || !mem.in_bounds(buf, t.bytes)) return Errno::Fault;
  uint64_t cursor = buf;
  for (size_t i = 0; i < strings.size(); ++i) {
    mem.write_u32(ptrs + 4 * i, static_cast<uint32_t>(cursor));
    const auto* p = reinterpret_cast<const uint8_t*>(strings[i].data());
    mem.write_bytes(cursor, std::span<const uint8_t>(p, strings[i].size()));
    mem.write_u8(cursor + strings[i].size(), 0);
    cursor += strings[i].size() + 1;
  }
  return Errno::Success;
}

Value ok(Errno e) { return Value::i32(static_cast<int32_t>(e)); }

FuncType sig(std::vector<ValType> params, std::vector<ValType> results) {
  return FuncType{std::move(params), std::move(results)};
}

}  // namespace

WasiContext::WasiContext() : realtime(system_now), monotonic(steady_now) { seed_from_os(); }

void WasiContext::seed(uint64_t s) { rng_.seed(s); }

void WasiContext::seed_from_os() {
  std::random_device rd;
  rng_.seed((uint64_t{rd()} << 32) ^ rd());
}

void WasiContext::emit(uint32_t fd, std::span<const uint8_t> bytes) {
  Sink& sink = fd == 1 ? stdout_sink : stderr_sink;
  if (sink) {
    sink(bytes);
  } else {
    (fd == 1 ? captured_stdout : captured_stderr).append(bytes.begin(), bytes.end());
  }
}

Errno WasiContext::fd_write(MemoryView& mem, uint32_t fd, uint32_t iovs, uint32_t iovs_len, uint32_t nwritten_ptr) {
  if (fd != 1 && fd != 2) return Errno::Badf;
  if (!mem.in_bounds(iovs, uint64_t{iovs_len} * 8) || !mem.in_bounds(nwritten_ptr, 4)) return Errno::Fault;
  std::vector<uint8_t> out;
  for (uint32_t i = 0; i < iovs_len; ++i) {
    const uint32_t ptr = mem.read_u32(uint64_t{iovs} + 8 * i);
    const uint32_t len = mem.read_u32(uint64_t{iovs} + 8 * i + 4);
    if (!mem.in_bounds(ptr, len)) return Errno::Fault;
    const auto chunk = mem.read_bytes(ptr, len);
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  if (out.size() > 0xFFFFFFFFu) return Errno::Inval;
  if (!out.empty()) emit(fd, out);
  mem.write_u32(nwritten_ptr, static_cast<uint32_t>(out.size()));
  return Errno::Success;
}

Errno WasiContext::clock_time_get(MemoryView& mem, uint32_t clock_id, uint64_t /*precision*/, uint32_t result_ptr) {
  ClockSource* clock = nullptr;
  if (clock_id == kClockRealtime) clock = &realtime;
  if (clock_id == kClockMonotonic) clock = &monotonic;
  if (!clock) return Errno::Inval;
  if (!mem.in_bounds(result_ptr, 8)) return Errno::Fault;
  mem.write_u64(result_ptr, (*clock)());
  return Errno::Success;
}

Errno WasiContext::random_get(MemoryView& mem, uint32_t buf, uint32_t len) {
  if (!mem.in_bounds(buf, len)) return Errno::Fault;
  std::vector<uint8_t> bytes(len);
  for (uint32_t i = 0; i < len; i += 8) {
    const uint64_t word = rng_();
    for (uint32_t j = 0; j < 8 && i + j < len; ++j) bytes[i + j] = static_cast<uint8_t>(word >> (8 * j));
  }
  mem.write_bytes(buf, bytes);
  return Errno::Success;
}

Errno WasiContext::args_sizes_get(MemoryView& mem, uint32_t argc_ptr, uint32_t buf_size_ptr) {
  return sizes_get(mem, args, argc_ptr, buf_size_ptr);
}

Errno WasiContext::args_get(MemoryView& mem, uint32_t argv_ptr, uint32_t buf_ptr) {
  return strings_get(mem, args, argv_ptr, buf_ptr);
}

Errno WasiContext::environ_sizes_get(MemoryView& mem, uint32_t count_ptr, uint32_t buf_size_ptr) {
  return sizes_get(mem, environ, count_ptr, buf_size_ptr);
}

Errno WasiContext::environ_get(MemoryView& mem, uint32_t environ_ptr, uint32_t buf_ptr) {
  return strings_get(mem, environ, environ_ptr, buf_ptr);
}

void WasiContext::proc_exit(uint32_t code) {
  exit_status = code;
  throw ProcExit(code);
}

std::optional<FuncType> signature_of(std::string_view field) {
  using enum ValType;
  if (field == "fd_write") return sig({I32, I32, I32, I32}, {I32});
  if (field == "clock_time_get") return sig({I32, I64, I32}, {I32});
  if (field == "random_get" || field == "args_sizes_get" || field == "args_get" || field == "environ_sizes_get" ||
      field == "environ_get") {
    return sig({I32, I32}, {I32});
  }
  if (field == "proc_exit") return sig({I32}, {});
  return std::nullopt;
}

const std::vector<std::string_view>& supported_calls() {
  static const std::vector<std::string_view> names = {"fd_write",         "clock_time_get", "random_get",
                                                      "args_sizes_get",   "args_get",       "environ_sizes_get",
                                                      "environ_get",      "proc_exit"};
  return names;
}

namespace {

HostCallback bind_call(const std::shared_ptr<WasiContext>& ctx, std::string_view field) {
  auto c = ctx;
  if (field == "fd_write") {
    return [c](HostContext& h, std::span<const Value> a) -> std::vector<Value> {
      return {ok(c->fd_write(h.memory, a[0].as_u32(), a[1].as_u32(), a[2].as_u32(), a[3].as_u32()))};
    };
  }
  if (field == "clock_time_get") {
    return [c](HostContext& h, std::span<const Value> a) -> std::vector<Value> {
      return {ok(c->clock_time_get(h.memory, a[0].as_u32(), a[1].as_u64(), a[2].as_u32()))};
    };
  }
  if (field == "random_get") {
    return [c](HostContext& h, std::span<const Value> a) -> std::vector<Value> {
      return {ok(c->random_get(h.memory, a[0].as_u32(), a[1].as_u32()))};
    };
  }
  if (field == "args_sizes_get") {
    return [c](HostContext& h, std::span<const Value> a) -> std::vector<Value> {
      return {ok(c->args_sizes_get(h.memory, a[0].as_u32(), a[1].as_u32()))};
    };
  }
  if (field == "args_get") {
    return [c](HostContext& h, std::span<const Value> a) -> std::vector<Value> {
      return {ok(c->args_get(h.memory, a[0].as_u32(), a[1].as_u32()))};
    };
  }
  if (field == "environ_sizes_get") {
    return [c](HostContext& h, std::span<const Value> a) -> std::vector<Value> {
      return {ok(c->environ_sizes_get(h.memory, a[0].as_u32(), a[1].as_u32()))};
    };
  }
  if (field == "environ_get") {
    return [c](HostContext& h, std::span<const Value> a) -> std::vector<Value> {
      return {ok(c->environ_get(h.memory, a[0].as_u32(), a[1].as_u32()))};
    };
  }
  return [c](HostContext&, std::span<const Value> a) -> std::vector<Value> { c->proc_exit(a[0].as_u32()); };
}

// Stub for calls outside the subset: returns Nosys when the declared result
// is a single i32, zero of the declared type otherwise.
HostCallback nosys(const FuncType& type) {
  std::vector<Value> result;
  if (!type.results.empty()) {
    result.push_back(type.results[0] == ValType::I32 ? ok(Errno::Nosys) : Value::zero(type.results[0]));
  }
  return [result](HostContext&, std::span<const Value>) { return result; };
}

}  // namespace

ImportResolver resolver(std::shared_ptr<WasiContext> ctx) {
  return [ctx](const Import& imp, const Module& m) -> std::optional<ImportValue> {
    if (imp.module != kModuleName || imp.kind() != ExternKind::Func) return std::nullopt;
    const FuncType& declared = m.types.at(std::get<FuncImport>(imp.desc).type_index);
    if (auto expected = signature_of(imp.field)) {
      // A mismatched signature stays unresolved and fails to link.
      if (!(declared == *expected)) return std::nullopt;
      return HostFunction{declared, bind_call(ctx, imp.field)};
    }
    return HostFunction{declared, nosys(declared)};
  };
}

}  // namespace wasmdesk::wasi
