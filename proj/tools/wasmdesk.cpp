// wasmdesk: run, validate and inspect WebAssembly MVP modules, and run the
// benchmark suite.
//
// Exit codes: 0 ok, 1 trap, 2 validation error, 3 malformed binary,
// 4 configuration/usage error, 5 benchmark result disagreed with its oracle,
// otherwise the guest's proc_exit status.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>

#include "wasmdesk/bench_report.hpp"
#include "wasmdesk/bench_suite.hpp"
#include "wasmdesk/binary.hpp"
#include "wasmdesk/interpreter.hpp"
#include "wasmdesk/validator.hpp"
#include "wasmdesk/wasi.hpp"

namespace fs = std::filesystem;
using namespace wasmdesk;

namespace {

enum Exit : int {
  kOk = 0,
  kTrap = 1,
  kInvalid = 2,
  kMalformed = 3,
  kUsage = 4,
  kMismatch = 5,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

std::optional<uint64_t> fuel_from_env() {
  const char* text = std::getenv("WASMDESK_FUEL");
  if (!text || !*text) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text, &end, 10);
  if (*end != '\0') throw UsageError(std::string("WASMDESK_FUEL is not a number: ") + text);
  return v;
}

ValidatedModule load(const std::string& path) { return validate_module(decode_module(read_file(path))); }

void print_validation_error(const ValidationError& e) {
  std::cerr << "validation error: " << to_string(e.rule());
  if (e.func_index()) std::cerr << " in function " << *e.func_index();
  if (e.instr_offset()) std::cerr << " at instruction " << *e.instr_offset();
  std::cerr << ": " << e.detail() << "\n";
}

// ---------------------------------------------------------------------------

struct RunOptions {
  std::string file;
  std::string invoke;
  std::vector<std::string> args;
  std::vector<std::string> env;
  uint32_t opt_threshold = kDefaultOptThreshold;
  bool no_optimize = false;
  std::optional<uint64_t> random_seed;
};

int cmd_run(const RunOptions& o) {
  const ValidatedModule vm = load(o.file);
  const Module& m = vm.module();

  auto wasi_ctx = std::make_shared<wasi::WasiContext>();
  wasi_ctx->args.push_back(fs::path(o.file).filename().string());
  if (o.invoke.empty()) wasi_ctx->args.insert(wasi_ctx->args.end(), o.args.begin(), o.args.end());
  wasi_ctx->environ = o.env;
  if (o.random_seed) wasi_ctx->seed(*o.random_seed);
  wasi_ctx->stdout_sink = [](std::span<const uint8_t> b) {
    std::fwrite(b.data(), 1, b.size(), stdout);
    std::fflush(stdout);
  };
  wasi_ctx->stderr_sink = [](std::span<const uint8_t> b) { std::fwrite(b.data(), 1, b.size(), stderr); };

  InstanceConfig cfg;
  cfg.fuel = fuel_from_env();
  cfg.opt_threshold = o.no_optimize ? kNeverOptimize : o.opt_threshold;

  try {
    auto instance = ModuleInstance::instantiate(vm, {}, cfg, wasi::resolver(wasi_ctx));
    std::string entry = o.invoke;
    if (entry.empty()) {
      if (!export_lookup(m, "_start")) {
        if (m.start) return kOk;  // the start function already ran
        throw UsageError("no --invoke given and the module exports no _start");
      }
      entry = "_start";
    }
    const auto ref = export_lookup(m, entry);
    if (!ref || ref->kind != ExternKind::Func) throw UsageError("no exported function '" + entry + "'");
    const FuncType& type = func_signature(m, ref->index);
    const auto& texts = o.invoke.empty() ? std::vector<std::string>{} : o.args;
    if (texts.size() != type.params.size()) {
      throw UsageError(entry + " expects " + std::to_string(type.params.size()) + " argument(s) " + to_string(type) +
                       ", got " + std::to_string(texts.size()));
    }
    std::vector<Value> args;
    for (size_t i = 0; i < texts.size(); ++i) {
      try {
        args.push_back(parse_value(type.params[i], texts[i]));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    for (const Value& v : instance.invoke(entry, args)) std::cout << to_string(v) << "\n";
    return kOk;
  } catch (const Trap& t) {
    std::cout.flush();
    std::cerr << "trap: " << t.what() << "\n";
    return kTrap;
  } catch (const ProcExit& e) {
    std::cout.flush();
    return static_cast<int>(e.code());
  } catch (const LinkError& e) {
    throw UsageError(std::string("link error: ") + e.what());
  } catch (const InvocationError& e) {
    throw UsageError(e.what());
  }
}

int cmd_validate(const std::string& file) {
  load(file);
  std::cout << "OK\n";
  return kOk;
}

int cmd_inspect(const std::string& file) {
  const auto bytes = read_file(file);
  const Module m = decode_module(bytes);
  std::cout << file << ": " << bytes.size() << " bytes\n";
  std::cout << "types: " << m.types.size() << "\n";
  for (size_t i = 0; i < m.types.size(); ++i) std::cout << "  type[" << i << "] " << to_string(m.types[i]) << "\n";
  std::cout << "imports: " << m.imports.size() << "\n";
  for (const auto& imp : m.imports) {
    std::cout << "  " << to_string(imp.kind()) << " " << imp.module << "." << imp.field;
    if (imp.kind() == ExternKind::Func) {
      std::cout << " " << to_string(m.types.at(std::get<FuncImport>(imp.desc).type_index));
    }
    std::cout << "\n";
  }
  const uint32_t imported = m.imported_count(ExternKind::Func);
  std::cout << "functions: " << m.funcs.size() << "\n";
  for (size_t i = 0; i < m.funcs.size(); ++i) {
    const Function& f = m.funcs[i];
    std::cout << "  func[" << imported + i << "] " << to_string(m.types.at(f.type_index)) << " locals=" << f.locals.size()
              << " instrs=" << f.body.size() << "\n";
  }
  for (const auto& t : m.tables) {
    std::cout << "table: min=" << t.limits.min << (t.limits.max ? " max=" + std::to_string(*t.limits.max) : "") << "\n";
  }
  for (const auto& mem : m.memories) {
    std::cout << "memory: min=" << mem.limits.min
              << (mem.limits.max ? " max=" + std::to_string(*mem.limits.max) : "") << " pages\n";
  }
  std::cout << "globals: " << m.globals.size() << "\n";
  for (size_t i = 0; i < m.globals.size(); ++i) {
    std::cout << "  global[" << m.imported_count(ExternKind::Global) + i << "] "
              << (m.globals[i].type.is_mutable ? "mut " : "") << to_string(m.globals[i].type.type) << "\n";
  }
  std::cout << "exports: " << m.exports.size() << "\n";
  for (const auto& e : m.exports) std::cout << "  " << to_string(e.kind) << "[" << e.index << "] \"" << e.name << "\"\n";
  if (m.start) std::cout << "start: func[" << *m.start << "]\n";
  std::cout << "element segments: " << m.elements.size() << "\n";
  std::cout << "data segments: " << m.data.size() << "\n";
  for (const auto& c : m.customs) std::cout << "custom section \"" << c.name << "\": " << c.bytes.size() << " bytes\n";
  try {
    validate_module(m);
    std::cout << "validation: OK\n";
  } catch (const ValidationError& e) {
    std::cout << "validation: " << e.what() << "\n";
  }
  return kOk;
}

struct BenchOptions {
  bench::RunConfig config;
  std::vector<std::string> params;
  std::string format = "json";
  std::string out;
  std::string emit_corpus;
  bool no_optimize_compare = false;
  bool no_fold_micro = false;
  bool quiet = false;
};

void apply_params(bench::RunConfig& c, const std::vector<std::string>& params) {
  for (const auto& p : params) {
    const auto dot = p.find('.');
    const auto eq = p.find('=');
    if (dot == std::string::npos || eq == std::string::npos || eq < dot) {
      throw UsageError("--param expects CASE.KEY=VALUE, got '" + p + "'");
    }
    const std::string name = p.substr(0, dot), key = p.substr(dot + 1, eq - dot - 1), value = p.substr(eq + 1);
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || *end != '\0') throw UsageError("--param value is not an integer: '" + p + "'");
    c.scales[name][key] = v;
  }
}

int cmd_bench(BenchOptions o) {
  if (!o.emit_corpus.empty()) {
    fs::create_directories(o.emit_corpus);
    apply_params(o.config, o.params);
    for (const auto& name : o.config.selected_cases()) {
      bench::Scale scale;
      if (auto it = o.config.scales.find(name); it != o.config.scales.end()) scale = it->second;
      bench::CaseInputs inputs;
      inputs.seed = o.config.seed;
      const auto bc = bench::build_case(name, scale, inputs);
      const auto bytes = encode_module(bc.module);
      const fs::path path = fs::path(o.emit_corpus) / (name + ".wasm");
      write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      std::cerr << "wrote " << path.string() << " (entry " << bc.entry << ", expected " << bc.expected.value << ")\n";
    }
    return kOk;
  }
  bench::RunConfig& c = o.config;
  c.format = bench::parse_format(o.format);
  c.compare = !o.no_optimize_compare;
  c.fold_microbench = !o.no_fold_micro;
  c.fuel = fuel_from_env();
  apply_params(c, o.params);
  bench::Progress progress;
  if (!o.quiet) progress = [](const std::string& what) { std::cerr << "bench: " << what << "\n"; };
  bench::BenchReport report;
  try {
    report = bench::run_bench(c, progress);
  } catch (const bench::CorrectnessError& e) {
    std::cerr << "correctness failure: " << e.what() << "\n";
    return kMismatch;
  }
  const std::string text = bench::render(report, c.format);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(o.out, text);
  }
  if (c.format != bench::Format::Json) {
    // Raw samples always accompany the summary.
    const std::string sidecar = (o.out.empty() ? std::string("bench") : o.out) + ".samples.csv";
    write_file(sidecar, bench::samples_csv(report));
    if (!o.quiet) std::cerr << "bench: raw samples in " << sidecar << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wasmdesk: a WebAssembly MVP tree interpreter and benchmark harness"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "decode, validate, instantiate and invoke a module");
  run_cmd->add_option("file", run.file, "module (.wasm)")->required();
  run_cmd->add_option("--invoke", run.invoke, "exported function to call (default: _start)");
  run_cmd->add_option("args", run.args, "arguments (decimal or 0x hex); WASI argv without --invoke");
  run_cmd->add_option("--env", run.env, "WASI environment entry KEY=VALUE (repeatable)");
  run_cmd->add_option("--opt-threshold", run.opt_threshold, "function entries before reoptimization")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--no-optimize", run.no_optimize, "never reoptimize");
  run_cmd->add_option("--random-seed", run.random_seed, "seed for WASI random_get (default: OS entropy)");
  run_cmd->allow_extras(false);
  run_cmd->positionals_at_end(false);

  std::string validate_file;
  auto* validate_cmd = app.add_subcommand("validate", "check a module; prints OK or the first error");
  validate_cmd->add_option("file", validate_file, "module (.wasm)")->required();

  std::string inspect_file;
  auto* inspect_cmd = app.add_subcommand("inspect", "summarize sections, functions and exports");
  inspect_cmd->add_option("file", inspect_file, "module (.wasm)")->required();

  BenchOptions bo;
  auto* bench_cmd = app.add_subcommand("bench", "run the benchmark suite");
  bench_cmd->add_option("--case", bo.config.cases, "case to run (repeatable; default all)");
  bench_cmd->add_option("--iterations", bo.config.iterations, "timed invocations per case and mode");
  bench_cmd->add_option("--warmup", bo.config.warmup, "leading samples discarded");
  bench_cmd->add_flag("--no-optimize-compare", bo.no_optimize_compare, "run only the optimized mode");
  bench_cmd->add_option("--opt-threshold", bo.config.opt_threshold, "function entries before reoptimization")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bo.config.seed, "Lcg seed for generated inputs");
  bench_cmd->add_option("--format", bo.format, "json, csv or table")->check(CLI::IsMember({"json", "csv", "table"}));
  bench_cmd->add_option("--out", bo.out, "report file (default stdout)");
  bench_cmd->add_option("--emit-corpus", bo.emit_corpus, "write the case modules as .wasm files and exit");
  bench_cmd->add_option("--param", bo.params, "scale override CASE.KEY=VALUE, e.g. fibonacci.n=25");
  bench_cmd->add_flag("--no-fold-micro", bo.no_fold_micro, "skip the constant-folding microbenchmark");
  bench_cmd->add_flag("--quiet", bo.quiet, "no progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*validate_cmd) return cmd_validate(validate_file);
    if (*inspect_cmd) return cmd_inspect(inspect_file);
    if (*bench_cmd) return cmd_bench(bo);
  } catch (const MalformedError& e) {
    std::cerr << "malformed module: " << e.what() << "\n";
    return kMalformed;
  } catch (const ValidationError& e) {
    print_validation_error(e);
    return kInvalid;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const bench::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const Trap& t) {
    std::cerr << "trap: " << t.what() << "\n";
    return kTrap;
  }
  return kUsage;
}
