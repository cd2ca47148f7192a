#include "wasmdesk/builder.hpp"

#include <stdexcept>

namespace wasmdesk {

uint32_t ModuleBuilder::type(const FuncType& t) {
  for (size_t i = 0; i < module_.types.size(); ++i) {
    if (module_.types[i] == t) return static_cast<uint32_t>(i);
  }
  module_.types.push_back(t);
  return static_cast<uint32_t>(module_.types.size() - 1);
}

uint32_t ModuleBuilder::import_func(const std::string& module, const std::string& field, const FuncType& t) {
  if (!module_.funcs.empty()) throw std::logic_error("function imports must precede defined functions");
  const uint32_t ti = type(t);
  module_.imports.push_back(Import{module, field, FuncImport{ti}});
  return module_.imported_count(ExternKind::Func) - 1;
}

uint32_t ModuleBuilder::declare_func(const FuncType& t) {
  module_.funcs.push_back(Function{type(t), {}, {}});
  return module_.function_count() - 1;
}

void ModuleBuilder::define_func(uint32_t func_index, FunctionBuilder& fb) {
  const uint32_t defined = func_index - module_.imported_count(ExternKind::Func);
  Function& slot = module_.funcs.at(defined);
  if (module_.types.at(slot.type_index) != fb.type()) throw std::logic_error("define_func: signature differs");
  slot = fb.finish(slot.type_index);
}

uint32_t ModuleBuilder::add_func(FunctionBuilder& fb) {
  const uint32_t index = declare_func(fb.type());
  define_func(index, fb);
  return index;
}

uint32_t ModuleBuilder::global(ValType t, bool is_mutable, Instr init) {
  module_.globals.push_back(Global{GlobalType{t, is_mutable}, ConstExpr{{std::move(init)}}});
  return module_.global_count() - 1;
}

void ModuleBuilder::data(uint32_t offset, std::vector<uint8_t> bytes) {
  module_.data.push_back(DataSegment{0, ConstExpr{{i32_const(static_cast<int32_t>(offset))}}, std::move(bytes)});
}

void ModuleBuilder::elements(uint32_t offset, std::vector<uint32_t> funcs) {
  module_.elements.push_back(ElementSegment{0, ConstExpr{{i32_const(static_cast<int32_t>(offset))}}, std::move(funcs)});
}

void ModuleBuilder::add_export(const std::string& name, ExternKind kind, uint32_t index) {
  module_.exports.push_back(Export{name, kind, index});
}

}  // namespace wasmdesk
