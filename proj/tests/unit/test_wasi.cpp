#include <gtest/gtest.h>

#include <cstring>

#include "harness.hpp"
#include "wasmdesk/builder.hpp"
#include "wasmdesk/wasi.hpp"

using namespace wasmdesk;
using namespace wasmdesk::wasi;
using enum Opcode;

namespace {

struct Guest {
  LinearMemory mem{Limits{1, std::nullopt}};
  MemoryView view{&mem};
  WasiContext ctx;

  Guest() { ctx.seed(1); }
  void poke(uint32_t at, std::string_view s) { std::memcpy(mem.bytes().data() + at, s.data(), s.size()); }
  uint32_t u32(uint32_t at) { return view.read_u32(at); }
  std::string str(uint32_t at, size_t n) { return {reinterpret_cast<const char*>(mem.bytes().data() + at), n}; }
  std::vector<uint8_t> snapshot() { return {mem.bytes().begin(), mem.bytes().end()}; }
};

}  // namespace

TEST(WasiFdWrite, WritesIovecsInOrder) {
  Guest g;
  g.poke(100, "hi");
  g.poke(200, "there");
  g.view.write_u32(0, 100);
  g.view.write_u32(4, 2);
  g.view.write_u32(8, 200);
  g.view.write_u32(12, 5);
  EXPECT_EQ(g.ctx.fd_write(g.view, 1, 0, 1, 16), Errno::Success);
  EXPECT_EQ(g.u32(16), 2u);
  EXPECT_EQ(g.ctx.captured_stdout, "hi");
  EXPECT_EQ(g.ctx.fd_write(g.view, 2, 0, 2, 16), Errno::Success);
  EXPECT_EQ(g.u32(16), 7u);
  EXPECT_EQ(g.ctx.captured_stderr, "hithere");
  EXPECT_EQ(g.mem.bytes()[16], 7);  // little-endian count
}

TEST(WasiFdWrite, ErrorsAndEmptyWrites) {
  Guest g;
  g.view.write_u32(16, 0xDEAD);
  EXPECT_EQ(g.ctx.fd_write(g.view, 1, 0, 0, 16), Errno::Success);
  EXPECT_EQ(g.u32(16), 0u);
  EXPECT_EQ(static_cast<int>(g.ctx.fd_write(g.view, 77, 0, 0, 16)), 8);
  EXPECT_EQ(g.ctx.fd_write(g.view, 0, 0, 0, 16), Errno::Badf);
  EXPECT_TRUE(g.ctx.captured_stdout.empty());
}

TEST(WasiFdWrite, FaultWritesNothing) {
  Guest g;
  g.poke(100, "abc");
  g.view.write_u32(0, 100);
  g.view.write_u32(4, 3);
  g.view.write_u32(8, 65534);  // second iovec runs past the end
  g.view.write_u32(12, 4);
  g.view.write_u32(16, 0x1234);
  const auto before = g.snapshot();
  EXPECT_EQ(g.ctx.fd_write(g.view, 1, 0, 2, 16), Errno::Fault);
  EXPECT_TRUE(g.ctx.captured_stdout.empty());
  EXPECT_EQ(g.snapshot(), before);
  // iovec array itself out of bounds, and nwritten pointer out of bounds.
  EXPECT_EQ(g.ctx.fd_write(g.view, 1, 65532, 1, 16), Errno::Fault);
  EXPECT_EQ(g.ctx.fd_write(g.view, 1, 0, 1, 65533), Errno::Fault);
  EXPECT_TRUE(g.ctx.captured_stdout.empty());
  EXPECT_EQ(g.snapshot(), before);
}

TEST(WasiFdWrite, SinksReceiveBytes) {
  Guest g;
  std::string seen;
  g.ctx.stdout_sink = [&](std::span<const uint8_t> b) { seen.append(b.begin(), b.end()); };
  g.poke(100, "xyz");
  g.view.write_u32(0, 100);
  g.view.write_u32(4, 3);
  EXPECT_EQ(g.ctx.fd_write(g.view, 1, 0, 1, 16), Errno::Success);
  EXPECT_EQ(seen, "xyz");
  EXPECT_TRUE(g.ctx.captured_stdout.empty());
}

TEST(WasiClock, MonotonicRealtimeAndErrors) {
  Guest g;
  EXPECT_EQ(g.ctx.clock_time_get(g.view, kClockMonotonic, 0, 8), Errno::Success);
  const uint64_t t1 = g.view.read_u64(8);
  EXPECT_EQ(g.ctx.clock_time_get(g.view, kClockMonotonic, 1000, 8), Errno::Success);
  const uint64_t t2 = g.view.read_u64(8);
  EXPECT_GE(t2, t1);
  EXPECT_EQ(g.ctx.clock_time_get(g.view, kClockRealtime, 0, 8), Errno::Success);
  EXPECT_GT(g.view.read_u64(8), uint64_t{1'500'000'000} * 1'000'000'000);  // after 2017
  EXPECT_EQ(static_cast<int>(g.ctx.clock_time_get(g.view, 9, 0, 8)), 28);
  EXPECT_EQ(g.ctx.clock_time_get(g.view, kClockMonotonic, 0, 65529), Errno::Fault);
  EXPECT_EQ(g.ctx.clock_time_get(g.view, kClockMonotonic, 0, 65528), Errno::Success);
}

TEST(WasiClock, StubbedSourceIsWrittenLittleEndian) {
  Guest g;
  g.ctx.monotonic = [] { return uint64_t{0x0102030405060708}; };
  EXPECT_EQ(g.ctx.clock_time_get(g.view, kClockMonotonic, 0, 0), Errno::Success);
  EXPECT_EQ(g.mem.bytes()[0], 0x08);
  EXPECT_EQ(g.mem.bytes()[7], 0x01);
}

TEST(WasiRandom, LengthsFaultsAndSeedDeterminism) {
  Guest a, b;
  a.ctx.seed(7);
  b.ctx.seed(7);
  EXPECT_EQ(a.ctx.random_get(a.view, 100, 16), Errno::Success);
  EXPECT_EQ(b.ctx.random_get(b.view, 100, 16), Errno::Success);
  EXPECT_EQ(a.str(100, 16), b.str(100, 16));
  EXPECT_EQ(a.mem.bytes()[116], 0);
  const auto nonzero = std::count_if(a.mem.bytes().begin() + 100, a.mem.bytes().begin() + 116,
                                     [](uint8_t x) { return x != 0; });
  EXPECT_GT(nonzero, 8);
  EXPECT_EQ(a.ctx.random_get(a.view, 300, 40), Errno::Success);
  EXPECT_EQ(b.ctx.random_get(b.view, 300, 40), Errno::Success);
  EXPECT_EQ(a.str(300, 40), b.str(300, 40));

  const auto before = a.snapshot();
  EXPECT_EQ(a.ctx.random_get(a.view, 0, 0), Errno::Success);
  EXPECT_EQ(a.ctx.random_get(a.view, 65530, 7), Errno::Fault);
  EXPECT_EQ(a.snapshot(), before);

  Guest c;
  c.ctx.seed(8);
  c.ctx.random_get(c.view, 100, 16);
  EXPECT_NE(c.str(100, 16), b.str(100, 16));
}

TEST(WasiArgs, SizesAndStrings) {
  Guest g;
  g.ctx.args = {"prog", "x"};
  EXPECT_EQ(g.ctx.args_sizes_get(g.view, 0, 4), Errno::Success);
  EXPECT_EQ(g.u32(0), 2u);
  EXPECT_EQ(g.u32(4), 7u);
  EXPECT_EQ(g.ctx.args_get(g.view, 16, 64), Errno::Success);
  EXPECT_EQ(g.u32(16), 64u);
  EXPECT_EQ(g.u32(20), 69u);
  EXPECT_EQ(g.str(64, 7), std::string("prog\0x\0", 7));

  const auto before = g.snapshot();
  EXPECT_EQ(g.ctx.args_get(g.view, 16, 65531), Errno::Fault);  // strings need 7 bytes
  EXPECT_EQ(g.ctx.args_get(g.view, 65532, 64), Errno::Fault);  // pointer array needs 8
  EXPECT_EQ(g.ctx.args_sizes_get(g.view, 0, 65533), Errno::Fault);
  EXPECT_EQ(g.snapshot(), before);
}

TEST(WasiEnviron, EmptyAndPopulated) {
  Guest g;
  EXPECT_EQ(g.ctx.environ_sizes_get(g.view, 0, 4), Errno::Success);
  EXPECT_EQ(g.u32(0), 0u);
  EXPECT_EQ(g.u32(4), 0u);
  g.ctx.environ = {"A=1", "HOME=/x"};
  EXPECT_EQ(g.ctx.environ_sizes_get(g.view, 0, 4), Errno::Success);
  EXPECT_EQ(g.u32(0), 2u);
  EXPECT_EQ(g.u32(4), 12u);
  EXPECT_EQ(g.ctx.environ_get(g.view, 32, 128), Errno::Success);
  EXPECT_EQ(g.u32(32), 128u);
  EXPECT_EQ(g.u32(36), 132u);
  EXPECT_EQ(g.str(128, 12), std::string("A=1\0HOME=/x\0", 12));
  EXPECT_EQ(g.ctx.environ_get(g.view, 65535, 128), Errno::Fault);
}

TEST(WasiProcExit, RecordsStatus) {
  WasiContext ctx;
  try {
    ctx.proc_exit(3);
    FAIL();
  } catch (const ProcExit& e) {
    EXPECT_EQ(e.code(), 3u);
  }
  EXPECT_EQ(ctx.exit_status, 3u);
}

TEST(WasiCalls, SupportedSetAndSignatures) {
  const auto& calls = supported_calls();
  EXPECT_EQ(calls.size(), 8u);
  const FuncType i32x4{{ValType::I32, ValType::I32, ValType::I32, ValType::I32}, {ValType::I32}};
  EXPECT_EQ(signature_of("fd_write"), i32x4);
  EXPECT_EQ(signature_of("clock_time_get"), (FuncType{{ValType::I32, ValType::I64, ValType::I32}, {ValType::I32}}));
  EXPECT_EQ(signature_of("proc_exit"), (FuncType{{ValType::I32}, {}}));
  EXPECT_EQ(signature_of("random_get"), (FuncType{{ValType::I32, ValType::I32}, {ValType::I32}}));
  EXPECT_FALSE(signature_of("path_open"));
}

namespace {

// A guest that writes "hello\n" via fd_write and returns the errno.
Module hello_module(const std::string& field = "fd_write") {
  ModuleBuilder mb;
  const FuncType sig{{ValType::I32, ValType::I32, ValType::I32, ValType::I32}, {ValType::I32}};
  const uint32_t w = mb.import_func(std::string(kModuleName), field, sig);
  mb.memory({1, std::nullopt});
  mb.data(8, {'h', 'e', 'l', 'l', 'o', '\n'});
  mb.data(0, {8, 0, 0, 0, 6, 0, 0, 0});
  FunctionBuilder f(FuncType{{}, {ValType::I32}});
  f.i32(1).i32(0).i32(1).i32(32).call(w);
  mb.export_func("main", mb.add_func(f));
  return mb.build();
}

}  // namespace

TEST(WasiModule, FdWriteFromGuest) {
  auto ctx = std::make_shared<WasiContext>();
  auto inst = ModuleInstance::instantiate(validate_module(hello_module()), {}, {}, resolver(ctx));
  EXPECT_EQ(inst.invoke("main"), std::vector{Value::i32(0)});
  EXPECT_EQ(ctx->captured_stdout, "hello\n");
  EXPECT_EQ(inst.memory()->bytes()[32], 6);
}

TEST(WasiModule, UnsupportedCallsBindToNosys) {
  auto ctx = std::make_shared<WasiContext>();
  auto inst = ModuleInstance::instantiate(validate_module(hello_module("sock_send")), {}, {}, resolver(ctx));
  EXPECT_EQ(inst.invoke("main"), std::vector{Value::i32(52)});
  EXPECT_TRUE(ctx->captured_stdout.empty());
}

TEST(WasiModule, SignatureMismatchIsLinkError) {
  ModuleBuilder mb;
  mb.import_func(std::string(kModuleName), "random_get", FuncType{{ValType::I32}, {ValType::I32}});
  mb.memory({1, std::nullopt});
  auto ctx = std::make_shared<WasiContext>();
  EXPECT_THROW(ModuleInstance::instantiate(validate_module(mb.build()), {}, {}, resolver(ctx)), LinkError);
}

TEST(WasiModule, ProcExitAbortsWithoutTrap) {
  ModuleBuilder mb;
  const uint32_t ex = mb.import_func(std::string(kModuleName), "proc_exit", FuncType{{ValType::I32}, {}});
  mb.memory({1, std::nullopt});
  FunctionBuilder f(FuncType{{}, {}});
  f.i32(3).call(ex).op(Unreachable);
  mb.export_func("_start", mb.add_func(f));
  const Module m = mb.build();
  const auto out = wasmdesk::testing::run_tree(m, "_start", kNeverOptimize);
  EXPECT_FALSE(out.trap);
  ASSERT_TRUE(out.exit_code);
  EXPECT_EQ(*out.exit_code, 3u);
  wasmdesk::testing::FlatInterpreter flat(m);
  EXPECT_EQ(flat.invoke("_start", {}).exit_code, out.exit_code);
}

TEST(WasiModule, SeededRunsAreBitReproducible) {
  ModuleBuilder mb;
  const uint32_t rnd = mb.import_func(std::string(kModuleName), "random_get",
                                      FuncType{{ValType::I32, ValType::I32}, {ValType::I32}});
  mb.memory({1, std::nullopt});
  mb.export_memory("memory");
  FunctionBuilder f(FuncType{{}, {ValType::I64}});
  f.i32(0).i32(64).call(rnd).op(Drop).i32(0).mem(I64Load).i32(56).mem(I64Load).op(I64Xor);
  mb.export_func("main", mb.add_func(f));
  const Module m = mb.build();
  auto run = [&](uint64_t seed) {
    auto ctx = std::make_shared<WasiContext>();
    ctx->seed(seed);
    auto inst = ModuleInstance::instantiate(validate_module(m), {}, {}, resolver(ctx));
    return inst.invoke("main");
  };
  EXPECT_EQ(run(11), run(11));
  EXPECT_NE(run(11), run(12));
}
