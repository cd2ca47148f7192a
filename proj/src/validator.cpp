#include "wasmdesk/validator.hpp"

#include <algorithm>
#include <set>

namespace wasmdesk {

namespace {

// nullopt is the Unknown operand of unreachable code.
using Operand = std::optional<ValType>;

struct Ctrl {
  Opcode opcode;
  std::optional<ValType> result;
  size_t height;
  bool unreachable = false;

  // Values a branch to this label carries. Loop labels take none in the MVP.
  std::optional<ValType> label_type() const { return opcode == Opcode::Loop ? std::nullopt : result; }
};

std::string type_name(Operand t) { return t ? std::string(to_string(*t)) : "unknown"; }

class BodyChecker {
 public:
  BodyChecker(const ValidationContext& ctx, std::span<const Instr> body)
      : ctx_(ctx), m_(*ctx.module), body_(body) {}

  FunctionFacts run(const FuncType& declared) {
    std::optional<ValType> result;
    if (!declared.results.empty()) result = declared.results.front();
    ctrls_.push_back(Ctrl{Opcode::Block, result, 0});
    for (pos_ = 0; pos_ < body_.size(); ++pos_) {
      ++facts_.instructions_visited;
      step(body_[pos_]);
      facts_.max_operand_depth = std::max<uint32_t>(facts_.max_operand_depth, static_cast<uint32_t>(vals_.size()));
      facts_.max_label_depth = std::max<uint32_t>(facts_.max_label_depth, static_cast<uint32_t>(ctrls_.size()));
      if (ctrls_.empty()) {
        if (pos_ + 1 != body_.size()) fail(ValidationRule::ArityMismatch, "instructions after the final end");
        return facts_;
      }
    }
    fail(ValidationRule::ArityMismatch, "body does not close every block");
  }

 private:
  [[noreturn]] void fail(ValidationRule rule, const std::string& detail) const {
    throw ValidationError(rule, ctx_.func_index, pos_, detail);
  }

  void push(Operand t) { vals_.push_back(t); }

  Operand pop() {
    const Ctrl& c = ctrls_.back();
    if (vals_.size() == c.height) {
      if (c.unreachable) return std::nullopt;
      fail(ValidationRule::StackUnderflow, std::string(to_string(body_[pos_].op)) + " pops from an empty stack");
    }
    Operand t = vals_.back();
    vals_.pop_back();
    return t;
  }

  Operand pop(ValType expect) {
    Operand actual = pop();
    if (actual && *actual != expect) {
      fail(ValidationRule::TypeMismatch, std::string(to_string(body_[pos_].op)) + " expected " +
                                             std::string(to_string(expect)) + ", found " + type_name(actual));
    }
    return actual ? actual : Operand{expect};
  }

  void set_unreachable() {
    vals_.resize(ctrls_.back().height);
    ctrls_.back().unreachable = true;
  }

  const Ctrl& label(uint32_t depth) const {
    if (depth >= ctrls_.size()) {
      fail(ValidationRule::BadLabelDepth,
           "branch depth " + std::to_string(depth) + " exceeds nesting " + std::to_string(ctrls_.size()));
    }
    return ctrls_[ctrls_.size() - 1 - depth];
  }

  void need_memory() const {
    if (m_.memory_count() == 0) fail(ValidationRule::MissingMemory, "module has no memory");
  }

  void end_block() {
    Ctrl& c = ctrls_.back();
    if (c.result) pop(*c.result);
    if (vals_.size() != c.height) {
      fail(ValidationRule::ArityMismatch, std::to_string(vals_.size() - c.height) + " values left at end of block");
    }
  }

  void step(const Instr& ins) {
    const auto& info = opcode_info(ins.op);
    switch (info.cls) {
      case OpClass::Control: return control(ins);
      case OpClass::Parametric:
        if (ins.op == Opcode::Drop) {
          pop();
        } else {
          pop(ValType::I32);
          Operand a = pop();
          Operand b = pop();
          if (a && b && *a != *b) {
            fail(ValidationRule::TypeMismatch, "select operands differ: " + type_name(b) + " vs " + type_name(a));
          }
          push(a ? a : b);
        }
        return;
      case OpClass::Variable: return variable(ins);
      case OpClass::Load: {
        need_memory();
        check_alignment(ins);
        pop(ValType::I32);
        push(*info.result);
        return;
      }
      case OpClass::Store:
        need_memory();
        check_alignment(ins);
        pop(*info.param1);
        pop(ValType::I32);
        return;
      case OpClass::MemorySize:
        need_memory();
        push(ValType::I32);
        return;
      case OpClass::MemoryGrow:
        need_memory();
        pop(ValType::I32);
        push(ValType::I32);
        return;
      case OpClass::Const: push(*info.result); return;
      case OpClass::Unary:
      case OpClass::Test:
      case OpClass::Convert:
        pop(*info.param0);
        push(*info.result);
        return;
      case OpClass::Binary:
      case OpClass::Compare:
        pop(*info.param1);
        pop(*info.param0);
        push(*info.result);
        return;
    }
  }

  void check_alignment(const Instr& ins) const {
    if (ins.memarg().align > natural_alignment_log2(ins.op)) {
      fail(ValidationRule::BadAlignment, "alignment exceeds natural alignment of " + std::string(to_string(ins.op)));
    }
  }

  uint32_t local_count() const { return static_cast<uint32_t>(ctx_.locals.size()); }

  void variable(const Instr& ins) {
    const uint32_t idx = ins.index();
    switch (ins.op) {
      case Opcode::LocalGet:
      case Opcode::LocalSet:
      case Opcode::LocalTee: {
        if (idx >= local_count()) fail(ValidationRule::BadIndex, "local index " + std::to_string(idx) + " out of range");
        const ValType t = ctx_.locals[idx];
        if (ins.op == Opcode::LocalGet) {
          push(t);
        } else if (ins.op == Opcode::LocalSet) {
          pop(t);
        } else {
          pop(t);
          push(t);
        }
        return;
      }
      case Opcode::GlobalGet:
      case Opcode::GlobalSet: {
        if (idx >= m_.global_count()) fail(ValidationRule::BadIndex, "global index " + std::to_string(idx) + " out of range");
        const GlobalType g = global_type(m_, idx);
        if (ins.op == Opcode::GlobalGet) {
          push(g.type);
        } else {
          if (!g.is_mutable) fail(ValidationRule::ImmutableGlobal, "global.set on immutable global " + std::to_string(idx));
          pop(g.type);
        }
        return;
      }
      default: return;
    }
  }

  void pop_call_params(const FuncType& ft) {
    for (auto it = ft.params.rbegin(); it != ft.params.rend(); ++it) pop(*it);
    for (auto r : ft.results) push(r);
  }

  void control(const Instr& ins) {
    switch (ins.op) {
      case Opcode::Unreachable: set_unreachable(); return;
      case Opcode::Nop: return;
      case Opcode::Block:
      case Opcode::Loop:
        ctrls_.push_back(Ctrl{ins.op, ins.block().result, vals_.size()});
        return;
      case Opcode::If:
        pop(ValType::I32);
        ctrls_.push_back(Ctrl{ins.op, ins.block().result, vals_.size()});
        return;
      case Opcode::Else: {
        end_block();
        Ctrl& c = ctrls_.back();
        c.opcode = Opcode::Else;
        c.unreachable = false;
        vals_.resize(c.height);
        return;
      }
      case Opcode::End: {
        end_block();
        const Ctrl c = ctrls_.back();
        if (c.opcode == Opcode::If && c.result) {
          fail(ValidationRule::TypeMismatch, "if with a result needs an else arm");
        }
        ctrls_.pop_back();
        if (c.result && !ctrls_.empty()) push(*c.result);
        return;
      }
      case Opcode::Br: {
        const auto t = label(ins.index()).label_type();
        if (t) pop(*t);
        set_unreachable();
        return;
      }
      case Opcode::BrIf: {
        pop(ValType::I32);
        const auto t = label(ins.index()).label_type();
        if (t) push(pop(*t));
        return;
      }
      case Opcode::BrTable: {
        pop(ValType::I32);
        const auto& table = ins.br_table();
        const auto t = label(table.default_label).label_type();
        for (uint32_t l : table.labels) {
          const auto lt = label(l).label_type();
          if (lt.has_value() != t.has_value()) {
            fail(ValidationRule::ArityMismatch, "br_table targets disagree on arity");
          }
          if (lt != t) fail(ValidationRule::TypeMismatch, "br_table targets disagree on type");
        }
        if (t) pop(*t);
        set_unreachable();
        return;
      }
      case Opcode::Return: {
        const auto t = ctrls_.front().result;
        if (t) pop(*t);
        set_unreachable();
        return;
      }
      case Opcode::Call: {
        const uint32_t f = ins.index();
        if (f >= m_.function_count()) fail(ValidationRule::BadIndex, "call to function " + std::to_string(f) + " out of range");
        pop_call_params(func_signature(m_, f));
        return;
      }
      case Opcode::CallIndirect: {
        if (m_.table_count() == 0) fail(ValidationRule::MissingTable, "call_indirect without a table");
        const uint32_t t = ins.index();
        if (t >= m_.types.size()) fail(ValidationRule::BadIndex, "type index " + std::to_string(t) + " out of range");
        pop(ValType::I32);
        pop_call_params(m_.types[t]);
        return;
      }
      default: return;
    }
  }

  const ValidationContext& ctx_;
  const Module& m_;
  std::span<const Instr> body_;
  size_t pos_ = 0;
  std::vector<Operand> vals_;
  std::vector<Ctrl> ctrls_;
  FunctionFacts facts_;
};

// ---------------------------------------------------------------------------

class ModuleChecker {
 public:
  explicit ModuleChecker(const Module& m) : m_(m) {}

  std::vector<FunctionFacts> run() {
    for (size_t i = 0; i < m_.types.size(); ++i) {
      if (m_.types[i].results.size() > 1) {
        fail(ValidationRule::ArityMismatch, "type " + std::to_string(i) + " has more than one result");
      }
    }
    for (const auto& imp : m_.imports) {
      if (const auto* f = std::get_if<FuncImport>(&imp.desc)) {
        type_index(f->type_index);
      } else if (const auto* mem = std::get_if<MemoryType>(&imp.desc)) {
        memory_limits(mem->limits);
      }
    }
    for (const auto& fn : m_.funcs) type_index(fn.type_index);
    if (m_.table_count() > 1) fail(ValidationRule::MvpRestriction, "more than one table");
    if (m_.memory_count() > 1) fail(ValidationRule::MvpRestriction, "more than one memory");
    for (const auto& mem : m_.memories) memory_limits(mem.limits);

    for (const auto& g : m_.globals) const_expr(g.init, g.type.type);

    std::set<std::string_view> names;
    for (const auto& e : m_.exports) {
      if (!names.insert(e.name).second) fail(ValidationRule::DuplicateExport, "duplicate export \"" + e.name + "\"");
      uint32_t space = 0;
      switch (e.kind) {
        case ExternKind::Func: space = m_.function_count(); break;
        case ExternKind::Table: space = m_.table_count(); break;
        case ExternKind::Memory: space = m_.memory_count(); break;
        case ExternKind::Global: space = m_.global_count(); break;
      }
      if (e.index >= space) fail(ValidationRule::BadIndex, "export \"" + e.name + "\" index out of range");
    }

    if (m_.start) {
      if (*m_.start >= m_.function_count()) fail(ValidationRule::BadIndex, "start function out of range");
      const FuncType& ft = func_signature(m_, *m_.start);
      if (!ft.params.empty() || !ft.results.empty()) fail(ValidationRule::TypeMismatch, "start function must be () -> ()");
    }

    for (const auto& seg : m_.elements) {
      if (m_.table_count() == 0) fail(ValidationRule::MissingTable, "element segment without a table");
      if (seg.table_index != 0) fail(ValidationRule::BadIndex, "element segment table index must be 0");
      const_expr(seg.offset, ValType::I32);
      for (uint32_t f : seg.func_indices) {
        if (f >= m_.function_count()) fail(ValidationRule::BadIndex, "element references function " + std::to_string(f));
      }
    }
    for (const auto& seg : m_.data) {
      if (m_.memory_count() == 0) fail(ValidationRule::MissingMemory, "data segment without a memory");
      if (seg.memory_index != 0) fail(ValidationRule::BadIndex, "data segment memory index must be 0");
      const_expr(seg.offset, ValType::I32);
    }

    std::vector<FunctionFacts> facts;
    facts.reserve(m_.funcs.size());
    for (uint32_t i = 0; i < m_.funcs.size(); ++i) {
      const auto ctx = ValidationContext::for_function(m_, i);
      facts.push_back(check_body(ctx, m_.funcs[i].body, m_.types[m_.funcs[i].type_index]));
    }
    return facts;
  }

 private:
  [[noreturn]] void fail(ValidationRule rule, const std::string& detail) const {
    throw ValidationError(rule, std::nullopt, std::nullopt, detail);
  }

  void type_index(uint32_t t) const {
    if (t >= m_.types.size()) fail(ValidationRule::BadIndex, "type index " + std::to_string(t) + " out of range");
  }

  void memory_limits(const Limits& l) const {
    if (l.min > kMaxPages || (l.max && *l.max > kMaxPages)) fail(ValidationRule::BadLimits, "memory limits exceed 65536 pages");
    if (l.max && l.min > *l.max) fail(ValidationRule::BadLimits, "memory minimum exceeds maximum");
  }

  void const_expr(const ConstExpr& e, ValType expect) const {
    if (e.instrs.size() != 1) fail(ValidationRule::BadConstantExpr, "constant expression must be a single instruction");
    const Instr& ins = e.instrs.front();
    ValType actual;
    switch (ins.op) {
      case Opcode::I32Const: actual = ValType::I32; break;
      case Opcode::I64Const: actual = ValType::I64; break;
      case Opcode::F32Const: actual = ValType::F32; break;
      case Opcode::F64Const: actual = ValType::F64; break;
      case Opcode::GlobalGet: {
        const uint32_t g = ins.index();
        if (g >= m_.imported_count(ExternKind::Global)) {
          fail(ValidationRule::BadConstantExpr, "constant expression may only read imported globals");
        }
        const GlobalType gt = global_type(m_, g);
        if (gt.is_mutable) fail(ValidationRule::BadConstantExpr, "constant expression reads a mutable global");
        actual = gt.type;
        break;
      }
      default:
        fail(ValidationRule::BadConstantExpr, std::string(to_string(ins.op)) + " is not constant");
    }
    if (actual != expect) {
      fail(ValidationRule::TypeMismatch, "constant expression has type " + std::string(to_string(actual)) + ", expected " +
                                             std::string(to_string(expect)));
    }
  }

  const Module& m_;
};

}  // namespace

std::string_view to_string(ValidationRule rule) {
  switch (rule) {
    case ValidationRule::TypeMismatch: return "type-mismatch";
    case ValidationRule::StackUnderflow: return "stack-underflow";
    case ValidationRule::BadLabelDepth: return "bad-label-depth";
    case ValidationRule::BadIndex: return "bad-index";
    case ValidationRule::ArityMismatch: return "arity-mismatch";
    case ValidationRule::BadConstantExpr: return "bad-constant-expr";
    case ValidationRule::MissingMemory: return "missing-memory";
    case ValidationRule::MissingTable: return "missing-table";
    case ValidationRule::DuplicateExport: return "duplicate-export";
    case ValidationRule::BadLimits: return "bad-limits";
    case ValidationRule::BadAlignment: return "bad-alignment";
    case ValidationRule::ImmutableGlobal: return "immutable-global";
    case ValidationRule::MvpRestriction: return "mvp-restriction";
  }
  return "?";
}

namespace {

std::string describe(ValidationRule rule, std::optional<uint32_t> func, std::optional<size_t> offset,
                     const std::string& detail) {
  std::string s(to_string(rule));
  if (func) s += " in function " + std::to_string(*func);
  if (offset) s += " at instruction " + std::to_string(*offset);
  return s + ": " + detail;
}

}  // namespace

ValidationError::ValidationError(ValidationRule rule, std::optional<uint32_t> func_index,
                                 std::optional<size_t> instr_offset, const std::string& detail)
    : std::runtime_error(describe(rule, func_index, instr_offset, detail)),
      rule_(rule),
      func_index_(func_index),
      instr_offset_(instr_offset),
      detail_(detail) {}

ValidationContext ValidationContext::for_function(const Module& module, uint32_t defined_index) {
  const Function& fn = module.funcs.at(defined_index);
  ValidationContext ctx;
  ctx.module = &module;
  ctx.func_index = module.imported_count(ExternKind::Func) + defined_index;
  if (fn.type_index < module.types.size()) {
    const FuncType& ft = module.types[fn.type_index];
    ctx.locals = ft.params;
    if (!ft.results.empty()) ctx.return_type = ft.results.front();
  }
  ctx.locals.insert(ctx.locals.end(), fn.locals.begin(), fn.locals.end());
  return ctx;
}

FunctionFacts check_body(const ValidationContext& ctx, std::span<const Instr> body, const FuncType& declared) {
  return BodyChecker(ctx, body).run(declared);
}

ValidatedModule validate_module(Module module) {
  auto facts = ModuleChecker(module).run();
  auto data = std::make_shared<ValidatedModule::Data>(ValidatedModule::Data{std::move(module), std::move(facts)});
  return ValidatedModule(std::move(data));
}

}  // namespace wasmdesk
