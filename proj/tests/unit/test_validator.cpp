#include <gtest/gtest.h>

#include "wasmdesk/bench_suite.hpp"
#include "wasmdesk/builder.hpp"
#include "wasmdesk/validator.hpp"

using namespace wasmdesk;
using enum Opcode;

namespace {

Instr op(Opcode o) { return make_instr(o); }
Instr idx(Opcode o, uint32_t i) { return make_instr(o, i); }

Module with_body(FuncType type, std::vector<Instr> body, std::vector<ValType> locals = {}) {
  Module m;
  m.types.push_back(std::move(type));
  body.push_back(op(End));
  m.funcs.push_back(Function{0, std::move(locals), std::move(body)});
  return m;
}

const FuncType kVoid{{}, {}};
const FuncType kToI32{{}, {ValType::I32}};

ValidationError error_of(Module m) {
  try {
    validate_module(std::move(m));
  } catch (const ValidationError& e) {
    return e;
  }
  ADD_FAILURE() << "module validated";
  return ValidationError(ValidationRule::MvpRestriction, std::nullopt, std::nullopt, "none");
}

ValidationRule rule_of(Module m) { return error_of(std::move(m)).rule(); }

}  // namespace

TEST(Validator, AcceptsSimpleBodies) {
  EXPECT_NO_THROW(validate_module(with_body(kToI32, {i32_const(1), i32_const(2), op(I32Add)})));
  EXPECT_NO_THROW(validate_module(with_body(kVoid, {})));
  // Polymorphic stack after unreachable.
  EXPECT_NO_THROW(validate_module(with_body(kToI32, {op(Unreachable), op(I32Add)})));
  EXPECT_NO_THROW(validate_module(with_body(kToI32, {i32_const(1), op(Return), op(I64Add), op(Drop)})));
  // br to the function label carries the result.
  EXPECT_NO_THROW(validate_module(with_body(kToI32, {i32_const(3), idx(Br, 0)})));
  // Typed block, if/else.
  EXPECT_NO_THROW(validate_module(with_body(
      kToI32, {make_block(Block, ValType::I32), i32_const(1), op(End), make_block(If, ValType::I32), i32_const(2),
               op(Else), i32_const(3), op(End)})));
  // Loop labels take no values.
  EXPECT_NO_THROW(validate_module(with_body(kVoid, {make_block(Loop, std::nullopt), i32_const(0), idx(BrIf, 0),
                                                    op(End)})));
}

TEST(Validator, TypeMismatch) {
  EXPECT_EQ(rule_of(with_body(kToI32, {i32_const(1), i64_const(2), op(I32Add)})), ValidationRule::TypeMismatch);
  EXPECT_EQ(rule_of(with_body(kToI32, {i64_const(1)})), ValidationRule::TypeMismatch);
  EXPECT_EQ(rule_of(with_body(kVoid, {i32_const(1), i64_const(1), i64_const(2), op(Select), op(Drop)})),
            ValidationRule::TypeMismatch);
  EXPECT_EQ(rule_of(with_body(kVoid, {i64_const(1), make_block(If, std::nullopt), op(End)})),
            ValidationRule::TypeMismatch);
}

TEST(Validator, StackUnderflow) {
  EXPECT_EQ(rule_of(with_body(kToI32, {i32_const(1), op(I32Add)})), ValidationRule::StackUnderflow);
  EXPECT_EQ(rule_of(with_body(kToI32, {})), ValidationRule::StackUnderflow);
  // Values outside a block are not visible inside it.
  EXPECT_EQ(rule_of(with_body(kVoid, {i32_const(1), make_block(Block, std::nullopt), op(Drop), op(End), op(Drop)})),
            ValidationRule::StackUnderflow);
}

TEST(Validator, ArityMismatch) {
  EXPECT_EQ(rule_of(with_body(kToI32, {i32_const(1), i32_const(2)})), ValidationRule::ArityMismatch);
  EXPECT_EQ(rule_of(with_body(kVoid, {make_block(Block, std::nullopt), i32_const(1), op(End)})),
            ValidationRule::ArityMismatch);
  // if with a result needs an else: the missing arm yields nothing.
  EXPECT_EQ(rule_of(with_body(kToI32, {i32_const(1), make_block(If, ValType::I32), i32_const(2), op(End)})),
            ValidationRule::TypeMismatch);
}

TEST(Validator, BadLabelDepth) {
  EXPECT_EQ(rule_of(with_body(kVoid, {idx(Br, 1)})), ValidationRule::BadLabelDepth);
  Instr bt{BrTable, BrTableImm{{0, 3}, 0}};
  EXPECT_EQ(rule_of(with_body(kVoid, {i32_const(0), bt})), ValidationRule::BadLabelDepth);
}

TEST(Validator, BrTableTargetsMustAgree) {
  Instr bt{BrTable, BrTableImm{{0}, 1}};
  EXPECT_EQ(rule_of(with_body(kToI32, {make_block(Block, std::nullopt), i32_const(5), i32_const(0), bt, op(End),
                                       i32_const(1)})),
            ValidationRule::ArityMismatch);
}

TEST(Validator, BadIndex) {
  EXPECT_EQ(rule_of(with_body(kVoid, {idx(LocalGet, 0), op(Drop)})), ValidationRule::BadIndex);
  EXPECT_EQ(rule_of(with_body(kVoid, {idx(Call, 4)})), ValidationRule::BadIndex);
  EXPECT_EQ(rule_of(with_body(kVoid, {idx(GlobalGet, 0), op(Drop)})), ValidationRule::BadIndex);
  Module bad_type;
  bad_type.types.push_back(kVoid);
  bad_type.funcs.push_back(Function{3, {}, {op(End)}});
  EXPECT_EQ(rule_of(bad_type), ValidationRule::BadIndex);
  Module bad_export = with_body(kVoid, {});
  bad_export.exports.push_back(Export{"x", ExternKind::Func, 1});
  EXPECT_EQ(rule_of(bad_export), ValidationRule::BadIndex);
}

TEST(Validator, MemoryAndTableRequirements) {
  EXPECT_EQ(rule_of(with_body(kToI32, {i32_const(0), make_mem(I32Load, 0, 2)})), ValidationRule::MissingMemory);
  EXPECT_EQ(rule_of(with_body(kToI32, {op(MemorySize)})), ValidationRule::MissingMemory);
  EXPECT_EQ(rule_of(with_body(kVoid, {i32_const(0), idx(CallIndirect, 0)})), ValidationRule::MissingTable);
}

TEST(Validator, BadAlignment) {
  Module m = with_body(kToI32, {i32_const(0), make_mem(I32Load, 0, 3)});
  m.memories.push_back(MemoryType{{1, std::nullopt}});
  EXPECT_EQ(rule_of(m), ValidationRule::BadAlignment);
  Module ok = with_body(kToI32, {i32_const(0), make_mem(I32Load8U, 0, 0)});
  ok.memories.push_back(MemoryType{{1, std::nullopt}});
  EXPECT_NO_THROW(validate_module(ok));
}

TEST(Validator, GlobalsAndConstantExpressions) {
  Module imm = with_body(kVoid, {i32_const(1), idx(GlobalSet, 0)});
  imm.globals.push_back(Global{{ValType::I32, false}, {{i32_const(0)}}});
  EXPECT_EQ(rule_of(imm), ValidationRule::ImmutableGlobal);

  Module expr = with_body(kVoid, {});
  expr.globals.push_back(Global{{ValType::I32, false}, {{i32_const(1), i32_const(2), op(I32Add)}}});
  EXPECT_EQ(rule_of(expr), ValidationRule::BadConstantExpr);

  Module wrong = with_body(kVoid, {});
  wrong.globals.push_back(Global{{ValType::I32, false}, {{i64_const(1)}}});
  EXPECT_EQ(rule_of(wrong), ValidationRule::TypeMismatch);
}

TEST(Validator, ModuleLevelRules) {
  Module dup = with_body(kVoid, {});
  dup.exports.push_back(Export{"a", ExternKind::Func, 0});
  dup.exports.push_back(Export{"a", ExternKind::Func, 0});
  EXPECT_EQ(rule_of(dup), ValidationRule::DuplicateExport);

  Module big;
  big.memories.push_back(MemoryType{{65537, std::nullopt}});
  EXPECT_EQ(rule_of(big), ValidationRule::BadLimits);

  Module two;
  two.memories.push_back(MemoryType{{1, std::nullopt}});
  two.memories.push_back(MemoryType{{1, std::nullopt}});
  EXPECT_EQ(rule_of(two), ValidationRule::MvpRestriction);

  Module multi;
  multi.types.push_back(FuncType{{}, {ValType::I32, ValType::I32}});
  EXPECT_EQ(rule_of(multi), ValidationRule::ArityMismatch);

  Module start = with_body(kToI32, {i32_const(0)});
  start.start = 0;
  EXPECT_EQ(rule_of(start), ValidationRule::TypeMismatch);
}

TEST(Validator, ErrorsCarryPosition) {
  Module m = with_body(kVoid, {});
  m.funcs.push_back(Function{0, {}, {op(Nop), op(Nop), op(I32Add), op(End)}});
  const ValidationError e = error_of(m);
  EXPECT_EQ(e.rule(), ValidationRule::StackUnderflow);
  ASSERT_TRUE(e.func_index());
  EXPECT_EQ(*e.func_index(), 1u);
  ASSERT_TRUE(e.instr_offset());
  EXPECT_EQ(*e.instr_offset(), 2u);
}

TEST(Validator, FactsRecordStackDepth) {
  const auto vm =
      validate_module(with_body(kToI32, {i32_const(1), i32_const(2), i32_const(3), op(I32Add), op(I32Add)}));
  EXPECT_EQ(vm.facts(0).max_operand_depth, 3u);
}

TEST(Validator, CorpusAndGeneratedModulesValidate) {
  for (const auto& name : bench::case_names()) EXPECT_NO_THROW(validate_module(bench::build_case(name).module));
  for (uint64_t seed = 1; seed <= 1000; ++seed) {
    ASSERT_NO_THROW(validate_module(bench::gen_random_program(seed, 100))) << "seed " << seed;
  }
}
