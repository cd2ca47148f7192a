// Python bindings: decode/encode/validate modules, instantiate and invoke
// them with a captured WASI context, and drive the benchmark suite.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "wasmdesk/bench_report.hpp"
#include "wasmdesk/bench_suite.hpp"
#include "wasmdesk/binary.hpp"
#include "wasmdesk/interpreter.hpp"
#include "wasmdesk/validator.hpp"
#include "wasmdesk/wasi.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace wasmdesk;

namespace {

// Exception types live for the whole interpreter session.
struct ExceptionTypes {
  py::handle base, malformed, invalid, trap, link, invocation, proc_exit, config, correctness;
};
ExceptionTypes* g_exc = nullptr;

py::handle make_type(py::module_& m, const char* name, py::handle base) {
  auto* e = new py::exception<void>(m, name, base);  // leaked on purpose
  return e->ptr();
}

void raise(py::handle type, const std::string& message, const py::dict& attrs = {}) {
  py::object e = py::reinterpret_borrow<py::object>(type)(message);
  for (auto [k, v] : attrs) e.attr(k) = v;
  PyErr_SetObject(type.ptr(), e.ptr());
}

std::vector<uint8_t> to_bytes(const py::bytes& b) {
  const std::string_view s = b;
  return {s.begin(), s.end()};
}

py::bytes from_bytes(std::span<const uint8_t> b) { return {reinterpret_cast<const char*>(b.data()), b.size()}; }

Value to_value(ValType t, const py::handle& h) {
  switch (t) {
    case ValType::I32: {
      const auto v = h.cast<long long>();
      if (v < INT32_MIN || v > static_cast<long long>(UINT32_MAX)) throw py::value_error("i32 argument out of range");
      return Value::i32(static_cast<int32_t>(static_cast<uint32_t>(v)));
    }
    case ValType::I64: {
      if (h.cast<py::int_>() < py::int_(0)) return Value::i64(h.cast<int64_t>());
      return Value::i64(static_cast<int64_t>(h.cast<uint64_t>()));
    }
    case ValType::F32:
      return Value::f32(static_cast<float>(h.cast<double>()));
    case ValType::F64:
      return Value::f64(h.cast<double>());
  }
  throw py::value_error("bad value type");
}

py::object from_value(const Value& v) {
  switch (v.type()) {
    case ValType::I32: return py::int_(v.as_i32());
    case ValType::I64: return py::int_(v.as_i64());
    case ValType::F32: return py::float_(v.as_f32());
    case ValType::F64: return py::float_(v.as_f64());
  }
  return py::none();
}

bench::Scale to_scale(const std::optional<std::map<std::string, int64_t>>& s) {
  bench::Scale out;
  if (s) out.insert(s->begin(), s->end());
  return out;
}

// Owns the validated module next to the instance that refers to it.
class Instance {
 public:
  Instance(const Module& m, uint32_t opt_threshold, std::optional<uint64_t> fuel, uint32_t max_call_depth,
           std::vector<std::string> args, std::vector<std::string> env, uint64_t seed)
      : vm_(std::make_unique<ValidatedModule>(validate_module(m))), ctx_(std::make_shared<wasi::WasiContext>()) {
    ctx_->args = std::move(args);
    ctx_->environ = std::move(env);
    ctx_->seed(seed);
    InstanceConfig cfg;
    cfg.opt_threshold = opt_threshold;
    cfg.fuel = fuel;
    cfg.max_call_depth = max_call_depth;
    inst_.emplace(ModuleInstance::instantiate(*vm_, {}, cfg, wasi::resolver(ctx_)));
  }

  py::list invoke(const std::string& name, const py::args& args) {
    const Module& m = vm_->module();
    const auto ref = export_lookup(m, name);
    if (!ref || ref->kind != ExternKind::Func) throw InvocationError("no exported function '" + name + "'");
    const FuncType& type = func_signature(m, ref->index);
    if (args.size() != type.params.size()) {
      throw InvocationError(name + " expects " + std::to_string(type.params.size()) + " argument(s), got " +
                            std::to_string(args.size()));
    }
    std::vector<Value> vals;
    for (size_t i = 0; i < args.size(); ++i) vals.push_back(to_value(type.params[i], args[i]));
    std::vector<Value> results;
    {
      py::gil_scoped_release unlocked;
      results = inst_->invoke(name, vals);
    }
    py::list out;
    for (const Value& v : results) out.append(from_value(v));
    return out;
  }

  py::bytes memory() const {
    const LinearMemory* mem = inst_->memory();
    if (!mem) return py::bytes();
    return from_bytes(mem->bytes());
  }

  py::bytes stdout_bytes() const { return py::bytes(ctx_->captured_stdout); }
  py::bytes stderr_bytes() const { return py::bytes(ctx_->captured_stderr); }
  std::optional<uint32_t> exit_status() const { return ctx_->exit_status; }
  uint64_t reoptimizations() const { return inst_->reoptimizations(); }
  uint64_t last_fuel_used() const { return inst_->last_fuel_used(); }
  std::optional<py::object> global(const std::string& name) const {
    if (auto v = inst_->exported_global(name)) return from_value(*v);
    return std::nullopt;
  }

 private:
  std::unique_ptr<ValidatedModule> vm_;
  std::shared_ptr<wasi::WasiContext> ctx_;
  std::optional<ModuleInstance> inst_;
};

py::list export_list(const Module& m) {
  py::list out;
  for (const auto& e : m.exports) out.append(py::make_tuple(e.name, std::string(to_string(e.kind)), e.index));
  return out;
}

py::list import_list(const Module& m) {
  py::list out;
  for (const auto& i : m.imports) out.append(py::make_tuple(i.module, i.field, std::string(to_string(i.kind()))));
  return out;
}

}  // namespace

PYBIND11_MODULE(_wasmdesk, m) {
  m.doc() = "WebAssembly MVP decoder, validator, tree interpreter and benchmark suite";
  m.attr("__version__") = WASMDESK_VERSION;

  static ExceptionTypes types;
  types.base = make_type(m, "WasmError", PyExc_Exception);
  types.malformed = make_type(m, "MalformedError", types.base);
  types.invalid = make_type(m, "ValidationError", types.base);
  types.trap = make_type(m, "Trap", types.base);
  types.link = make_type(m, "LinkError", types.base);
  types.invocation = make_type(m, "InvocationError", types.base);
  types.proc_exit = make_type(m, "ProcExit", types.base);
  types.config = make_type(m, "ConfigError", types.base);
  types.correctness = make_type(m, "CorrectnessError", types.base);
  g_exc = &types;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const MalformedError& e) {
      raise(g_exc->malformed, e.what(), py::dict("kind"_a = std::string(to_string(e.kind())), "offset"_a = e.offset()));
    } catch (const ValidationError& e) {
      raise(g_exc->invalid, e.what(),
            py::dict("rule"_a = std::string(to_string(e.rule())), "func_index"_a = e.func_index(),
                     "instr_offset"_a = e.instr_offset()));
    } catch (const Trap& e) {
      raise(g_exc->trap, e.what(), py::dict("kind"_a = std::string(to_string(e.kind()))));
    } catch (const ProcExit& e) {
      raise(g_exc->proc_exit, e.what(), py::dict("code"_a = e.code()));
    } catch (const LinkError& e) {
      raise(g_exc->link, e.what());
    } catch (const InvocationError& e) {
      raise(g_exc->invocation, e.what());
    } catch (const bench::ConfigError& e) {
      raise(g_exc->config, e.what());
    } catch (const bench::CorrectnessError& e) {
      raise(g_exc->correctness, e.what());
    } catch (const StructuralError& e) {
      raise(g_exc->base, e.what());
    }
  });

  py::class_<Module>(m, "Module")
      .def_property_readonly("num_types", [](const Module& mod) { return mod.types.size(); })
      .def_property_readonly("num_functions", [](const Module& mod) { return mod.funcs.size(); })
      .def_property_readonly("exports", &export_list)
      .def_property_readonly("imports", &import_list)
      .def_property_readonly("has_memory", [](const Module& mod) { return !mod.memories.empty(); })
      .def("encode", [](const Module& mod) { return from_bytes(encode_module(mod)); })
      .def("validate", [](const Module& mod) { validate_module(mod); })
      .def("__eq__", [](const Module& a, const Module& b) { return a == b; });

  m.def("decode", [](const py::bytes& b) { return decode_module(to_bytes(b)); }, py::arg("data"),
        "Decodes a binary module; raises MalformedError.");
  m.def(
      "validate", [](const py::bytes& b) { validate_module(decode_module(to_bytes(b))); }, py::arg("data"),
      "Decodes and validates; raises MalformedError or ValidationError.");

  py::class_<Instance>(m, "Instance")
      .def(py::init([](const py::object& module, uint32_t opt_threshold, std::optional<uint64_t> fuel,
                       uint32_t max_call_depth, std::vector<std::string> args, std::vector<std::string> env,
                       uint64_t seed) {
             const Module mod = py::isinstance<py::bytes>(module) ? decode_module(to_bytes(module.cast<py::bytes>()))
                                                                   : module.cast<Module>();
             return std::make_unique<Instance>(mod, opt_threshold, fuel, max_call_depth, std::move(args),
                                               std::move(env), seed);
           }),
           py::arg("module"), py::kw_only(), py::arg("opt_threshold") = kDefaultOptThreshold,
           py::arg("fuel") = std::nullopt, py::arg("max_call_depth") = 10000,
           py::arg("args") = std::vector<std::string>{}, py::arg("env") = std::vector<std::string>{},
           py::arg("seed") = 0)
      .def("invoke", &Instance::invoke, py::arg("name"))
      .def("global_value", &Instance::global, py::arg("name"))
      .def_property_readonly("memory", &Instance::memory)
      .def_property_readonly("stdout", &Instance::stdout_bytes)
      .def_property_readonly("stderr", &Instance::stderr_bytes)
      .def_property_readonly("exit_status", &Instance::exit_status)
      .def_property_readonly("reoptimizations", &Instance::reoptimizations)
      .def_property_readonly("last_fuel_used", &Instance::last_fuel_used);
  m.attr("NEVER_OPTIMIZE") = kNeverOptimize;

  m.def("case_names", &bench::case_names);
  m.def(
      "build_case",
      [](const std::string& name, const std::optional<std::map<std::string, int64_t>>& scale, uint32_t seed) {
        bench::CaseInputs in;
        in.seed = seed;
        const auto bc = bench::build_case(name, to_scale(scale), in);
        py::list args;
        for (const Value& v : bc.args) args.append(from_value(v));
        py::dict out;
        out["name"] = bc.name;
        out["module"] = bc.module;
        out["entry"] = bc.entry;
        out["args"] = args;
        out["expected"] = bc.expected.value;
        out["oracle"] = bc.expected.produced_by;
        out["scale"] = std::map<std::string, int64_t>(bc.scale.begin(), bc.scale.end());
        return out;
      },
      py::arg("name"), py::arg("scale") = std::nullopt, py::arg("seed") = bench::kDefaultSeed);
  m.def(
      "oracle",
      [](const std::string& name, const std::optional<std::map<std::string, int64_t>>& scale, uint32_t seed) {
        bench::CaseInputs in;
        in.seed = seed;
        return bench::oracle(name, to_scale(scale), in).value;
      },
      py::arg("name"), py::arg("scale") = std::nullopt, py::arg("seed") = bench::kDefaultSeed);
  m.def(
      "gen_random_program", [](uint64_t seed, uint32_t budget) { return bench::gen_random_program(seed, budget); },
      py::arg("seed"), py::arg("size_budget") = 100);
  m.def(
      "summarize",
      [](const std::vector<double>& samples, size_t warmup) {
        const auto s = bench::summarize(samples, warmup);
        py::dict out;
        out["samples"] = s.samples;
        out["mean"] = s.mean;
        out["median"] = s.median;
        out["stddev"] = s.stddev;
        out["min"] = s.min;
        out["max"] = s.max;
        return out;
      },
      py::arg("samples"), py::arg("warmup"));
  m.def("reduction_percent", &bench::reduction_percent, py::arg("unoptimized_mean"), py::arg("optimized_mean"));
  m.def(
      "run_bench_json",
      [](const std::vector<std::string>& cases, uint32_t iterations, uint32_t warmup, bool compare,
         uint32_t opt_threshold, uint32_t seed, const std::map<std::string, std::map<std::string, int64_t>>& scales,
         bool fold_microbench) {
        bench::RunConfig c;
        c.cases = cases;
        c.iterations = iterations;
        c.warmup = warmup;
        c.compare = compare;
        c.opt_threshold = opt_threshold;
        c.seed = seed;
        c.fold_microbench = fold_microbench;
        for (const auto& [name, s] : scales) c.scales[name] = bench::Scale(s.begin(), s.end());
        c.validate();
        py::gil_scoped_release unlocked;
        return bench::to_json(bench::run_bench(c));
      },
      py::arg("cases"), py::arg("iterations"), py::arg("warmup"), py::arg("compare"), py::arg("opt_threshold"),
      py::arg("seed"), py::arg("scales"), py::arg("fold_microbench"));
}
