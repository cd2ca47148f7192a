#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wasmdesk/model.hpp"

namespace wasmdesk {

// Appends instructions to a function body. Call finish() (or end() for the
// outermost level yourself) before handing the body to a ModuleBuilder.
class FunctionBuilder {
 public:
  FunctionBuilder(FuncType type) : type_(std::move(type)) {}

  const FuncType& type() const { return type_; }
  uint32_t param_count() const { return static_cast<uint32_t>(type_.params.size()); }

  /// Declares a local and returns its index (params come first).
  uint32_t local(ValType t) {
    locals_.push_back(t);
    return static_cast<uint32_t>(type_.params.size() + locals_.size() - 1);
  }
  ValType local_type(uint32_t index) const {
    return index < type_.params.size() ? type_.params[index] : locals_.at(index - type_.params.size());
  }

  FunctionBuilder& emit(Instr ins) {
    body_.push_back(std::move(ins));
    return *this;
  }
  FunctionBuilder& op(Opcode o) { return emit(make_instr(o)); }
  FunctionBuilder& i32(int32_t v) { return emit(i32_const(v)); }
  FunctionBuilder& i64(int64_t v) { return emit(i64_const(v)); }
  FunctionBuilder& get(uint32_t local) { return emit(make_instr(Opcode::LocalGet, local)); }
  FunctionBuilder& set(uint32_t local) { return emit(make_instr(Opcode::LocalSet, local)); }
  FunctionBuilder& tee(uint32_t local) { return emit(make_instr(Opcode::LocalTee, local)); }
  FunctionBuilder& global_get(uint32_t g) { return emit(make_instr(Opcode::GlobalGet, g)); }
  FunctionBuilder& global_set(uint32_t g) { return emit(make_instr(Opcode::GlobalSet, g)); }
  FunctionBuilder& call(uint32_t f) { return emit(make_instr(Opcode::Call, f)); }
  FunctionBuilder& br(uint32_t depth) { return emit(make_instr(Opcode::Br, depth)); }
  FunctionBuilder& br_if(uint32_t depth) { return emit(make_instr(Opcode::BrIf, depth)); }
  FunctionBuilder& block(std::optional<ValType> result = std::nullopt) { return emit(make_block(Opcode::Block, result)); }
  FunctionBuilder& loop(std::optional<ValType> result = std::nullopt) { return emit(make_block(Opcode::Loop, result)); }
  FunctionBuilder& if_(std::optional<ValType> result = std::nullopt) { return emit(make_block(Opcode::If, result)); }
  FunctionBuilder& else_() { return op(Opcode::Else); }
  FunctionBuilder& end() { return op(Opcode::End); }
  /// Load or store with the natural alignment.
  FunctionBuilder& mem(Opcode o, uint32_t offset = 0) { return emit(make_mem(o, offset, natural_alignment_log2(o))); }

  /// Appends the final end and returns the finished function.
  Function finish(uint32_t type_index) {
    body_.push_back(make_instr(Opcode::End));
    return Function{type_index, locals_, std::move(body_)};
  }

 private:
  FuncType type_;
  std::vector<ValType> locals_;
  std::vector<Instr> body_;
};

// Assembles a Module. Function imports must be added before any defined
// function so that returned indices stay valid.
class ModuleBuilder {
 public:
  /// Index of an equal type, adding it when missing.
  uint32_t type(const FuncType& t);

  uint32_t import_func(const std::string& module, const std::string& field, const FuncType& t);
  uint32_t add_func(FunctionBuilder& fb);
  /// Reserves a function index to be filled later with define_func().
  uint32_t declare_func(const FuncType& t);
  void define_func(uint32_t func_index, FunctionBuilder& fb);

  void memory(Limits limits) { module_.memories.push_back(MemoryType{limits}); }
  void table(Limits limits) { module_.tables.push_back(TableType{limits}); }
  uint32_t global(ValType t, bool is_mutable, Instr init);
  void data(uint32_t offset, std::vector<uint8_t> bytes);
  void elements(uint32_t offset, std::vector<uint32_t> funcs);
  void export_func(const std::string& name, uint32_t func_index) { add_export(name, ExternKind::Func, func_index); }
  void export_memory(const std::string& name) { add_export(name, ExternKind::Memory, 0); }
  void add_export(const std::string& name, ExternKind kind, uint32_t index);
  void start(uint32_t func_index) { module_.start = func_index; }

  const Module& peek() const { return module_; }
  Module build() { return std::move(module_); }

 private:
  Module module_;
};

}  // namespace wasmdesk
