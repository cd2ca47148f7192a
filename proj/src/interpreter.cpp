#include "wasmdesk/interpreter.hpp"

#include <sys/mman.h>
#include <ucontext.h>

#include <exception>

#include "wasmdesk/numeric.hpp"

namespace wasmdesk {

// ---------------------------------------------------------------------------
// Large-stack execution.

namespace {

constexpr size_t kLargeStackBytes = size_t{256} << 20;

struct StackRun {
  const std::function<void()>* fn = nullptr;
  std::exception_ptr error;
  ucontext_t caller{};
  ucontext_t callee{};
};

thread_local bool t_on_large_stack = false;
thread_local StackRun* t_run = nullptr;

struct StackMapping {
  void* base = nullptr;
  ~StackMapping() {
    if (base) munmap(base, kLargeStackBytes);
  }
};

thread_local StackMapping t_stack;

void trampoline() {
  StackRun* run = t_run;
  try {
    (*run->fn)();
  } catch (...) {
    run->error = std::current_exception();
  }
  // Returning resumes uc_link (the caller context).
}

}  // namespace

void run_on_large_stack(const std::function<void()>& fn) {
  if (t_on_large_stack) {
    fn();
    return;
  }
  if (!t_stack.base) {
    void* p = mmap(nullptr, kLargeStackBytes, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE,
                   -1, 0);
    if (p == MAP_FAILED) {
      // Fall back to the native stack; the call-depth limit may then be
      // unreachable for very deep recursion, but execution is still correct.
      t_on_large_stack = true;
      try {
        fn();
      } catch (...) {
        t_on_large_stack = false;
        throw;
      }
      t_on_large_stack = false;
      return;
    }
    t_stack.base = p;
  }
  StackRun run;
  run.fn = &fn;
  getcontext(&run.callee);
  run.callee.uc_stack.ss_sp = t_stack.base;
  run.callee.uc_stack.ss_size = kLargeStackBytes;
  run.callee.uc_link = &run.caller;
  makecontext(&run.callee, trampoline, 0);
  StackRun* saved = t_run;
  t_run = &run;
  t_on_large_stack = true;
  swapcontext(&run.caller, &run.callee);
  t_on_large_stack = false;
  t_run = saved;
  if (run.error) std::rethrow_exception(run.error);
}

// ---------------------------------------------------------------------------

namespace {

constexpr uint32_t kReturnUnwind = 0xFFFFFFFFu;

struct FuncSlot {
  const FuncType* type = nullptr;
  uint32_t type_id = 0;  // canonical id: equal ids iff structurally equal types
  bool is_host = false;
  HostFunction host;
  uint32_t defined = 0;
};

}  // namespace

struct ModuleInstance::Impl {
  ValidatedModule vm;
  InstanceConfig config;
  ModuleInstance* self = nullptr;

  std::vector<uint32_t> type_ids;
  std::vector<FuncSlot> funcs;
  std::vector<std::unique_ptr<FuncBody>> bodies;
  std::vector<std::unique_ptr<FuncBody>> retired;
  uint64_t reopts = 0;
  std::vector<uint64_t> globals;
  std::shared_ptr<LinearMemory> memory;
  std::vector<std::optional<uint32_t>> table;

  // Execution state of the running invocation.
  std::vector<uint64_t> locals;
  size_t base = 0;
  uint32_t depth = 0;
  uint32_t unwind = 0;
  uint64_t branch_value = 0;
  bool metered = false;
  uint64_t fuel_left = 0;
  uint64_t fuel_used = 0;
  bool running = false;

  explicit Impl(ValidatedModule m) : vm(std::move(m)) {}

  const Module& mod() const { return vm.module(); }

  void tick() {
    if (metered) {
      if (fuel_left == 0) throw Trap(TrapKind::FuelExhausted, "fuel exhausted");
      --fuel_left;
    }
  }

  // Returns true when a pending branch targets the label being left.
  bool catch_branch() {
    if (unwind == kReturnUnwind) return false;
    return --unwind == 0;
  }

  FuncBody& body_for(uint32_t defined) {
    auto& slot = bodies[defined];
    if (!slot) {
      slot = std::make_unique<FuncBody>(build_tree(mod(), defined, vm.facts(defined)));
    }
    return *slot;
  }

  uint64_t call(uint32_t f, size_t frame_base) {
    const FuncSlot& fs = funcs[f];
    if (depth >= config.max_call_depth) {
      throw Trap(TrapKind::CallDepthExceeded, "call depth limit of " + std::to_string(config.max_call_depth));
    }
    ++depth;
    uint64_t result = fs.is_host ? call_host(fs, frame_base) : call_defined(fs.defined, frame_base);
    --depth;
    locals.resize(frame_base);
    return result;
  }

  uint64_t call_defined(uint32_t defined, size_t frame_base) {
    FuncBody* body = &body_for(defined);
    body->record_entry();
    if (wants_reoptimize(*body, config.opt_threshold)) {
      // Active frames may still run the old tree; keep it alive.
      auto next = std::make_unique<FuncBody>(maybe_reoptimize(*body, config.opt_threshold));
      retired.push_back(std::move(bodies[defined]));
      bodies[defined] = std::move(next);
      body = bodies[defined].get();
      ++reopts;
    }
    locals.resize(frame_base + body->locals.size(), 0);
    const size_t saved = base;
    base = frame_base;
    uint64_t r = eval(body->root);
    if (unwind == kReturnUnwind) {
      unwind = 0;
      r = branch_value;
    }
    base = saved;
    return r;
  }

  uint64_t call_host(const FuncSlot& fs, size_t frame_base) {
    const auto& params = fs.type->params;
    std::vector<Value> args;
    args.reserve(params.size());
    for (size_t i = 0; i < params.size(); ++i) args.push_back(Value::from_bits(params[i], locals[frame_base + i]));
    HostContext ctx{*self, MemoryView(memory.get())};
    const std::vector<Value> results = fs.host.callback(ctx, args);
    if (results.size() != fs.type->results.size() ||
        (!results.empty() && results[0].type() != fs.type->results[0])) {
      throw std::logic_error("host function returned values not matching its signature");
    }
    return results.empty() ? 0 : results[0].bits();
  }

  // Evaluates children [0, n) as call arguments pushed at the top of the
  // locals stack. Returns false if a branch escaped an argument.
  bool push_args(const ExprNode& n, size_t count, size_t& frame_base) {
    frame_base = locals.size();
    for (size_t i = 0; i < count; ++i) {
      const uint64_t v = eval(n.children[i]);
      if (unwind) {
        locals.resize(frame_base);
        return false;
      }
      locals.push_back(v);
    }
    return true;
  }

  uint64_t eval(const ExprNode& n) {
    tick();
    const ExprNode* c = n.children.data();
    switch (n.kind) {
      case NodeKind::Const: return n.bits;
      case NodeKind::UnaryOp:
      case NodeKind::Convert: {
        const uint64_t a = eval(c[0]);
        if (unwind) return 0;
        return numeric::unary(n.op, a);
      }
      case NodeKind::BinaryOp:
      case NodeKind::Compare: {
        const uint64_t a = eval(c[0]);
        if (unwind) return 0;
        if (n.children.size() == 1) return numeric::unary(n.op, a);
        const uint64_t b = eval(c[1]);
        if (unwind) return 0;
        return numeric::binary(n.op, a, b);
      }
      case NodeKind::LocalGet: return locals[base + n.index];
      case NodeKind::LocalSet:
      case NodeKind::LocalTee: {
        const uint64_t v = eval(c[0]);
        if (unwind) return 0;
        locals[base + n.index] = v;
        return v;
      }
      case NodeKind::GlobalGet: return globals[n.index];
      case NodeKind::GlobalSet: {
        const uint64_t v = eval(c[0]);
        if (unwind) return 0;
        globals[n.index] = v;
        return 0;
      }
      case NodeKind::Load: {
        const uint64_t a = eval(c[0]);
        if (unwind) return 0;
        return memory->load(n.op, uint64_t{static_cast<uint32_t>(a)} + n.index);
      }
      case NodeKind::Store: {
        const uint64_t a = eval(c[0]);
        if (unwind) return 0;
        const uint64_t v = eval(c[1]);
        if (unwind) return 0;
        memory->store(n.op, uint64_t{static_cast<uint32_t>(a)} + n.index, v);
        return 0;
      }
      case NodeKind::Block: {
        uint64_t r = 0;
        for (const auto& child : n.children) {
          r = eval(child);
          if (unwind) return catch_branch() ? branch_value : 0;
        }
        return r;
      }
      case NodeKind::Loop: {
      restart:
        uint64_t r = 0;
        for (const auto& child : n.children) {
          r = eval(child);
          if (unwind) {
            if (catch_branch()) goto restart;
            return 0;
          }
        }
        return r;
      }
      case NodeKind::Seq: {
        uint64_t r = 0;
        for (const auto& child : n.children) {
          r = eval(child);
          if (unwind) return 0;
        }
        return r;
      }
      case NodeKind::If: {
        const uint64_t cond = eval(c[0]);
        if (unwind) return 0;
        const ExprNode* arm = static_cast<uint32_t>(cond) ? &c[1] : (n.children.size() > 2 ? &c[2] : nullptr);
        if (!arm) return 0;
        const uint64_t r = eval(*arm);
        if (unwind) return catch_branch() ? branch_value : 0;
        return r;
      }
      case NodeKind::Br: {
        uint64_t v = 0;
        if (!n.children.empty()) {
          v = eval(c[0]);
          if (unwind) return 0;
        }
        branch_value = v;
        unwind = n.index + 1;
        return 0;
      }
      case NodeKind::BrIf: {
        uint64_t v = 0;
        if (n.children.size() == 2) {
          v = eval(c[0]);
          if (unwind) return 0;
        }
        const uint64_t cond = eval(n.children.back());
        if (unwind) return 0;
        if (static_cast<uint32_t>(cond)) {
          branch_value = v;
          unwind = n.index + 1;
          return 0;
        }
        return v;
      }
      case NodeKind::BrTable: {
        uint64_t v = 0;
        if (n.children.size() == 2) {
          v = eval(c[0]);
          if (unwind) return 0;
        }
        const uint32_t i = static_cast<uint32_t>(eval(n.children.back()));
        if (unwind) return 0;
        branch_value = v;
        unwind = (i < n.labels.size() ? n.labels[i] : n.index) + 1;
        return 0;
      }
      case NodeKind::Return: {
        uint64_t v = 0;
        if (!n.children.empty()) {
          v = eval(c[0]);
          if (unwind) return 0;
        }
        branch_value = v;
        unwind = kReturnUnwind;
        return 0;
      }
      case NodeKind::Call: {
        size_t fb = 0;
        if (!push_args(n, n.children.size(), fb)) return 0;
        return call(n.index, fb);
      }
      case NodeKind::CallIndirect: {
        size_t fb = 0;
        if (!push_args(n, n.children.size() - 1, fb)) return 0;
        const uint32_t slot = static_cast<uint32_t>(eval(n.children.back()));
        if (unwind) {
          locals.resize(fb);
          return 0;
        }
        return call(resolve_indirect(slot, n.index), fb);
      }
      case NodeKind::Select: {
        const uint64_t a = eval(c[0]);
        if (unwind) return 0;
        const uint64_t b = eval(c[1]);
        if (unwind) return 0;
        const uint64_t s = eval(c[2]);
        if (unwind) return 0;
        return static_cast<uint32_t>(s) ? a : b;
      }
      case NodeKind::Drop:
        eval(c[0]);
        return 0;
      case NodeKind::Unreachable: throw Trap(TrapKind::Unreachable, "unreachable executed");
      case NodeKind::Nop: return 0;
      case NodeKind::MemorySize: return memory->pages();
      case NodeKind::MemoryGrow: {
        const uint64_t d = eval(c[0]);
        if (unwind) return 0;
        return static_cast<uint32_t>(memory->grow(static_cast<uint32_t>(d)));
      }
    }
    throw std::logic_error("eval: unknown node kind");
  }

  uint32_t resolve_indirect(uint32_t slot, uint32_t type_index) const {
    if (slot >= table.size()) {
      throw Trap(TrapKind::OobTable, "table index " + std::to_string(slot) + " out of range " +
                                         std::to_string(table.size()));
    }
    if (!table[slot]) throw Trap(TrapKind::IndirectTypeMismatch, "table slot " + std::to_string(slot) + " is empty");
    const uint32_t f = *table[slot];
    if (funcs[f].type_id != type_ids[type_index]) {
      throw Trap(TrapKind::IndirectTypeMismatch, "expected " + to_string(mod().types[type_index]) + ", slot holds " +
                                                     to_string(*funcs[f].type));
    }
    return f;
  }

  uint64_t eval_const(const ConstExpr& e) const {
    const Instr& ins = e.instrs.at(0);
    switch (ins.op) {
      case Opcode::I32Const: return static_cast<uint32_t>(std::get<int32_t>(ins.imm));
      case Opcode::I64Const: return static_cast<uint64_t>(std::get<int64_t>(ins.imm));
      case Opcode::F32Const: return std::get<F32Bits>(ins.imm).bits;
      case Opcode::F64Const: return std::get<F64Bits>(ins.imm).bits;
      case Opcode::GlobalGet: return globals.at(ins.index());
      default: throw std::logic_error("unexpected constant expression");
    }
  }

  std::vector<Value> run(uint32_t f, std::span<const Value> args) {
    if (running) throw InvocationError("reentrant invocation of a running instance");
    const FuncType& type = *funcs.at(f).type;
    running = true;
    struct Reset {
      Impl& impl;
      ~Reset() {
        impl.running = false;
        impl.locals.clear();
        impl.depth = 0;
        impl.unwind = 0;
        impl.base = 0;
      }
    } reset{*this};
    metered = config.fuel.has_value();
    fuel_left = config.fuel.value_or(0);
    locals.clear();
    for (const Value& v : args) locals.push_back(v.bits());
    uint64_t bits = 0;
    try {
      run_on_large_stack([&] { bits = call(f, 0); });
    } catch (...) {
      fuel_used = metered ? *config.fuel - fuel_left : 0;
      throw;
    }
    fuel_used = metered ? *config.fuel - fuel_left : 0;
    if (type.results.empty()) return {};
    return {Value::from_bits(type.results[0], bits)};
  }
};

ModuleInstance::ModuleInstance(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
ModuleInstance::ModuleInstance(ModuleInstance&&) noexcept = default;
ModuleInstance& ModuleInstance::operator=(ModuleInstance&&) noexcept = default;
ModuleInstance::~ModuleInstance() = default;

namespace {

std::string import_name(const Import& imp) { return imp.module + "." + imp.field; }

bool limits_fit(const Limits& actual, const Limits& wanted, uint32_t actual_pages) {
  if (actual_pages < wanted.min) return false;
  if (wanted.max) {
    if (!actual.max || *actual.max > *wanted.max) return false;
  }
  return true;
}

}  // namespace

ModuleInstance ModuleInstance::instantiate(const ValidatedModule& vm, const ImportMap& imports,
                                           const InstanceConfig& config, const ImportResolver& fallback) {
  auto impl = std::make_unique<Impl>(vm);
  Impl& s = *impl;
  s.config = config;
  const Module& m = vm.module();

  // Canonical type ids so call_indirect compares structurally.
  for (size_t i = 0; i < m.types.size(); ++i) {
    uint32_t id = static_cast<uint32_t>(i);
    for (size_t j = 0; j < i; ++j) {
      if (m.types[j] == m.types[i]) {
        id = s.type_ids[j];
        break;
      }
    }
    s.type_ids.push_back(id);
  }

  for (const Import& imp : m.imports) {
    std::optional<ImportValue> found;
    if (auto it = imports.find(std::pair(imp.module, imp.field)); it != imports.end()) {
      found = it->second;
    } else if (fallback) {
      found = fallback(imp, m);
    }
    if (!found) throw LinkError("unresolved import " + import_name(imp));
    switch (imp.kind()) {
      case ExternKind::Func: {
        const uint32_t ti = std::get<FuncImport>(imp.desc).type_index;
        auto* host = std::get_if<HostFunction>(&*found);
        if (!host) throw LinkError("import " + import_name(imp) + " is not a function");
        if (!(host->type == m.types[ti])) {
          throw LinkError("import " + import_name(imp) + " has signature " + to_string(host->type) + ", expected " +
                          to_string(m.types[ti]));
        }
        FuncSlot fs;
        fs.type = &m.types[ti];
        fs.type_id = s.type_ids[ti];
        fs.is_host = true;
        fs.host = *host;
        s.funcs.push_back(std::move(fs));
        break;
      }
      case ExternKind::Global: {
        const auto& gt = std::get<GlobalType>(imp.desc);
        auto* g = std::get_if<HostGlobal>(&*found);
        if (!g) throw LinkError("import " + import_name(imp) + " is not a global");
        if (g->value.type() != gt.type || g->is_mutable != gt.is_mutable) {
          throw LinkError("import " + import_name(imp) + " has a mismatched global type");
        }
        s.globals.push_back(g->value.bits());
        break;
      }
      case ExternKind::Memory: {
        const auto& mt = std::get<MemoryType>(imp.desc);
        auto* mem = std::get_if<std::shared_ptr<LinearMemory>>(&*found);
        if (!mem || !*mem) throw LinkError("import " + import_name(imp) + " is not a memory");
        if (!limits_fit((*mem)->limits(), mt.limits, (*mem)->pages())) {
          throw LinkError("import " + import_name(imp) + " has incompatible memory limits");
        }
        s.memory = *mem;
        break;
      }
      case ExternKind::Table:
        throw LinkError("import " + import_name(imp) + ": table imports are not supported");
    }
  }

  for (size_t i = 0; i < m.funcs.size(); ++i) {
    FuncSlot fs;
    fs.type = &m.types[m.funcs[i].type_index];
    fs.type_id = s.type_ids[m.funcs[i].type_index];
    fs.defined = static_cast<uint32_t>(i);
    s.funcs.push_back(std::move(fs));
  }
  s.bodies.resize(m.funcs.size());

  if (!m.memories.empty()) {
    const Limits& lim = m.memories[0].limits;
    if (lim.min > config.memory_cap_pages) {
      throw LinkError("memory of " + std::to_string(lim.min) + " pages exceeds the host cap of " +
                      std::to_string(config.memory_cap_pages));
    }
    s.memory = std::make_shared<LinearMemory>(lim, config.memory_cap_pages);
  }
  if (!m.tables.empty()) s.table.assign(m.tables[0].limits.min, std::nullopt);

  for (const Global& g : m.globals) s.globals.push_back(s.eval_const(g.init));

  // Check every segment before writing any of them.
  std::vector<uint64_t> elem_offsets, data_offsets;
  for (const auto& seg : m.elements) {
    const uint64_t off = static_cast<uint32_t>(s.eval_const(seg.offset));
    if (off + seg.func_indices.size() > s.table.size()) {
      throw LinkError("element segment at " + std::to_string(off) + " with " + std::to_string(seg.func_indices.size()) +
                      " entries does not fit a table of " + std::to_string(s.table.size()));
    }
    elem_offsets.push_back(off);
  }
  for (const auto& seg : m.data) {
    const uint64_t off = static_cast<uint32_t>(s.eval_const(seg.offset));
    const uint64_t size = s.memory ? s.memory->size() : 0;
    if (off + seg.bytes.size() > size) {
      throw LinkError("data segment at " + std::to_string(off) + " with " + std::to_string(seg.bytes.size()) +
                      " bytes does not fit a memory of " + std::to_string(size));
    }
    data_offsets.push_back(off);
  }
  for (size_t i = 0; i < m.elements.size(); ++i) {
    for (size_t j = 0; j < m.elements[i].func_indices.size(); ++j) {
      s.table[elem_offsets[i] + j] = m.elements[i].func_indices[j];
    }
  }
  for (size_t i = 0; i < m.data.size(); ++i) {
    if (!m.data[i].bytes.empty()) {
      std::memcpy(s.memory->bytes().data() + data_offsets[i], m.data[i].bytes.data(), m.data[i].bytes.size());
    }
  }

  if (config.eager_build) {
    for (uint32_t i = 0; i < m.funcs.size(); ++i) s.body_for(i);
  }

  ModuleInstance inst(std::move(impl));
  if (m.start) inst.invoke_function(*m.start, {});
  return inst;
}

std::vector<Value> ModuleInstance::invoke(std::string_view name, std::span<const Value> args) {
  const auto ref = export_lookup(impl_->mod(), name);
  if (!ref) throw InvocationError("no export named '" + std::string(name) + "'");
  if (ref->kind != ExternKind::Func) throw InvocationError("export '" + std::string(name) + "' is not a function");
  return invoke_function(ref->index, args);
}

std::vector<Value> ModuleInstance::invoke_function(uint32_t f, std::span<const Value> args) {
  if (f >= impl_->funcs.size()) throw InvocationError("function index " + std::to_string(f) + " out of range");
  const FuncType& type = *impl_->funcs[f].type;
  if (args.size() != type.params.size()) {
    throw InvocationError("expected " + std::to_string(type.params.size()) + " arguments, got " +
                          std::to_string(args.size()));
  }
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i].type() != type.params[i]) {
      throw InvocationError("argument " + std::to_string(i) + " has type " + std::string(to_string(args[i].type())) +
                            ", expected " + std::string(to_string(type.params[i])));
    }
  }
  impl_->self = this;
  return impl_->run(f, args);
}

std::vector<Value> ModuleInstance::call_indirect(uint32_t slot, uint32_t type_index, std::span<const Value> args) {
  if (type_index >= impl_->mod().types.size()) throw InvocationError("type index out of range");
  const uint32_t f = impl_->resolve_indirect(slot, type_index);
  return invoke_function(f, args);
}

const ValidatedModule& ModuleInstance::module() const { return impl_->vm; }
const InstanceConfig& ModuleInstance::config() const { return impl_->config; }
LinearMemory* ModuleInstance::memory() { return impl_->memory.get(); }
const LinearMemory* ModuleInstance::memory() const { return impl_->memory.get(); }

Value ModuleInstance::global(uint32_t index) const {
  return Value::from_bits(global_type(impl_->mod(), index).type, impl_->globals.at(index));
}

std::optional<Value> ModuleInstance::exported_global(std::string_view name) const {
  const auto ref = export_lookup(impl_->mod(), name);
  if (!ref || ref->kind != ExternKind::Global) return std::nullopt;
  return global(ref->index);
}

const std::vector<std::optional<uint32_t>>& ModuleInstance::table() const { return impl_->table; }

const FuncBody* ModuleInstance::body(uint32_t defined_index) const { return impl_->bodies.at(defined_index).get(); }
uint64_t ModuleInstance::reoptimizations() const { return impl_->reopts; }
uint64_t ModuleInstance::last_fuel_used() const { return impl_->fuel_used; }
void ModuleInstance::set_fuel(std::optional<uint64_t> fuel) { impl_->config.fuel = fuel; }
void ModuleInstance::set_opt_threshold(uint32_t threshold) { impl_->config.opt_threshold = threshold; }

}  // namespace wasmdesk
