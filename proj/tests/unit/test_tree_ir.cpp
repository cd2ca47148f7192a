#include <gtest/gtest.h>

#include "harness.hpp"
#include "wasmdesk/bench_suite.hpp"
#include "wasmdesk/builder.hpp"
#include "wasmdesk/tree_ir.hpp"

using namespace wasmdesk;
using namespace wasmdesk::testing;
using enum Opcode;

namespace {

const FuncType kToI32{{}, {ValType::I32}};
const FuncType kToI64{{}, {ValType::I64}};

FuncBody tree_of(const FuncType& type, std::vector<Instr> body, std::vector<ValType> locals = {}) {
  Module m;
  m.types.push_back(type);
  body.push_back(make_instr(End));
  m.funcs.push_back(Function{0, std::move(locals), std::move(body)});
  const ValidatedModule vm = validate_module(m);
  return build_tree(vm.module(), 0, vm.facts(0));
}

// A FuncBody whose root block holds `stmt`.
FuncBody wrap(ExprNode stmt, std::optional<ValType> result) {
  FuncBody b;
  b.root = ExprNode::make(NodeKind::Block, result, {std::move(stmt)});
  return b;
}

ExprNode i32c(int32_t v) { return ExprNode::i32(v); }
ExprNode bin(Opcode op, ExprNode a, ExprNode b) { return ExprNode::op_node(op, {std::move(a), std::move(b)}); }

ExprNode if_node(ExprNode cond, ExprNode then_arm, std::optional<ExprNode> else_arm, std::optional<ValType> t) {
  std::vector<ExprNode> kids{std::move(cond), ExprNode::make(NodeKind::Seq, t, {std::move(then_arm)})};
  if (else_arm) kids.push_back(ExprNode::make(NodeKind::Seq, t, {std::move(*else_arm)}));
  return ExprNode::make(NodeKind::If, t, std::move(kids));
}

}  // namespace

TEST(BuildTree, PureExpressions) {
  const FuncBody add = tree_of(kToI32, {i32_const(1), i32_const(2), make_instr(I32Add)});
  ASSERT_EQ(add.root.kind, NodeKind::Block);
  ASSERT_EQ(add.root.children.size(), 1u);
  EXPECT_EQ(add.root.children[0], bin(I32Add, i32c(1), i32c(2)));
  EXPECT_EQ(add.root.type, ValType::I32);

  const FuncBody mul = tree_of(FuncType{{ValType::I32}, {ValType::I32}},
                               {make_instr(LocalGet, 0), make_instr(LocalGet, 0), make_instr(I32Mul)});
  ExprNode get = ExprNode::make(NodeKind::LocalGet, ValType::I32);
  get.index = 0;
  EXPECT_EQ(mul.root.children.at(0), bin(I32Mul, get, get));
  EXPECT_EQ(mul.param_count, 1u);
}

TEST(BuildTree, SideEffectsFlushPendingValuesToLocals) {
  // local.get 0 is read before the set and must not observe it.
  const FuncBody b = tree_of(FuncType{{ValType::I32}, {ValType::I32}},
                             {make_instr(LocalGet, 0), i32_const(9), make_instr(LocalSet, 0), make_instr(LocalGet, 0),
                              make_instr(I32Add)});
  EXPECT_GT(b.locals.size(), 1u);  // a synthetic local holds the early read
  EXPECT_FALSE(check_tree(b, FuncType{{ValType::I32}, {ValType::I32}}));
}

TEST(BuildTree, TreesTypeCheckForCorpusAndGenerated) {
  std::vector<Module> mods;
  for (const auto& n : bench::case_names()) mods.push_back(bench::build_case(n).module);
  for (uint64_t s = 1; s <= 200; ++s) mods.push_back(bench::gen_random_program(s, 150));
  for (const Module& m : mods) {
    const ValidatedModule vm = validate_module(m);
    for (uint32_t i = 0; i < m.funcs.size(); ++i) {
      const FuncType& t = m.types[m.funcs[i].type_index];
      FuncBody body = build_tree(vm.module(), i, vm.facts(i));
      ASSERT_EQ(check_tree(body, t), std::nullopt) << dump(body.root);
      body.profile = 1;
      const FuncBody opt = maybe_reoptimize(body, 1);
      ASSERT_EQ(check_tree(opt, t), std::nullopt) << dump(opt.root);
    }
  }
}

TEST(FoldConstants, Examples) {
  EXPECT_EQ(fold_constants(bin(I32Add, i32c(2), i32c(3))), i32c(5));
  const ExprNode div = bin(I32DivS, i32c(1), i32c(0));
  EXPECT_EQ(fold_constants(div), div);
  const ExprNode ext = ExprNode::op_node(I64ExtendI32S, {i32c(-1)});
  EXPECT_EQ(fold_constants(ext), ExprNode::i64(-1));
  // Nested: (2*3)+(10-4) folds completely.
  EXPECT_EQ(fold_constants(bin(I32Add, bin(I32Mul, i32c(2), i32c(3)), bin(I32Sub, i32c(10), i32c(4)))), i32c(12));
  // A trapping subtree blocks folding of its parents but not its siblings.
  const ExprNode mixed = fold_constants(bin(I32Add, bin(I32DivU, i32c(1), i32c(0)), bin(I32Add, i32c(1), i32c(1))));
  EXPECT_EQ(mixed, bin(I32Add, bin(I32DivU, i32c(1), i32c(0)), i32c(2)));
}

TEST(PruneDeadBranches, Examples) {
  ExprNode a = ExprNode::make(NodeKind::Nop, std::nullopt);
  ExprNode gs = ExprNode::make(NodeKind::GlobalSet, std::nullopt, {i32c(7)});
  // If(Const 1, A, B) -> A, spliced into the enclosing block.
  auto in_block = [](ExprNode n) { return ExprNode::make(NodeKind::Block, std::nullopt, {std::move(n)}); };
  EXPECT_EQ(prune_dead_branches(in_block(if_node(i32c(1), gs, a, std::nullopt))), in_block(gs));
  EXPECT_EQ(prune_dead_branches(in_block(if_node(i32c(0), a, gs, std::nullopt))), in_block(gs));
  // If(Const 0, A) -> Nop
  const ExprNode skipped = prune_dead_branches(if_node(i32c(0), gs, std::nullopt, std::nullopt));
  EXPECT_EQ(skipped.kind, NodeKind::Nop);
  // BrIf(Const 0) -> Nop, BrIf(Const 5) -> Br
  ExprNode never = ExprNode::make(NodeKind::BrIf, std::nullopt, {i32c(0)});
  EXPECT_EQ(prune_dead_branches(never).kind, NodeKind::Nop);
  ExprNode always = ExprNode::make(NodeKind::BrIf, std::nullopt, {i32c(5)});
  always.index = 0;
  const ExprNode br = prune_dead_branches(always);
  EXPECT_EQ(br.kind, NodeKind::Br);
  EXPECT_TRUE(br.children.empty());
  // Block[Block[Nop]] -> Block[Nop]
  ExprNode nested = ExprNode::make(NodeKind::Block, std::nullopt,
                                   {ExprNode::make(NodeKind::Block, std::nullopt, {ExprNode::nop()})});
  const ExprNode flat = prune_dead_branches(nested);
  EXPECT_EQ(flat, ExprNode::make(NodeKind::Block, std::nullopt, {ExprNode::nop()}));
  // An inner block that is a branch target stays.
  ExprNode target = ExprNode::make(NodeKind::Br, std::nullopt);
  target.index = 0;
  ExprNode kept = ExprNode::make(NodeKind::Block, std::nullopt,
                                 {ExprNode::make(NodeKind::Block, std::nullopt, {target})});
  EXPECT_EQ(prune_dead_branches(kept), kept);
}

TEST(MaybeReoptimize, ThresholdAndFlag) {
  FuncBody b = wrap(bin(I32Add, i32c(2), i32c(3)), ValType::I32);
  b.profile = 0;
  EXPECT_EQ(maybe_reoptimize(b, 1000), b);
  b.profile = 1000;
  const FuncBody opt = maybe_reoptimize(b, 1000);
  EXPECT_TRUE(opt.optimized);
  EXPECT_EQ(opt.root.children.at(0), i32c(5));
  EXPECT_EQ(maybe_reoptimize(opt, 1000), opt);
  EXPECT_EQ(maybe_reoptimize(b, kNeverOptimize), b);
}

TEST(FuncBody, ProfileSaturates) {
  FuncBody b;
  b.profile = std::numeric_limits<uint32_t>::max() - 1;
  b.record_entry();
  b.record_entry();
  EXPECT_EQ(b.profile, std::numeric_limits<uint32_t>::max());
}

// Passes are idempotent, never grow the tree and keep it well typed.
TEST(TreePasses, IdempotentAndMonotone) {
  for (uint64_t s = 1; s <= 300; ++s) {
    const Module m = bench::gen_random_program(s, 40 + (s % 5) * 80);
    const ValidatedModule vm = validate_module(m);
    for (uint32_t i = 0; i < m.funcs.size(); ++i) {
      const FuncType& t = m.types[m.funcs[i].type_index];
      const FuncBody b = build_tree(vm.module(), i, vm.facts(i));
      const FuncBody f = fold_constants(b);
      const FuncBody p = prune_dead_branches(b);
      ASSERT_LE(node_count(f.root), node_count(b.root));
      ASSERT_LE(node_count(p.root), node_count(b.root));
      ASSERT_EQ(fold_constants(f), f) << "seed " << s;
      ASSERT_EQ(prune_dead_branches(p), p) << "seed " << s;
      ASSERT_EQ(check_tree(f, t), std::nullopt);
      ASSERT_EQ(check_tree(p, t), std::nullopt);
    }
  }
}

// f(k) appends k as a decimal digit to a global, so the final global spells
// out the call order.
TEST(EffectOrder, CallsRunLeftToRightExactlyOnce) {
  ModuleBuilder mb;
  const uint32_t g = mb.global(ValType::I64, true, i64_const(0));
  FunctionBuilder f(FuncType{{ValType::I32}, {ValType::I32}});
  f.global_get(g).i64(10).op(I64Mul).get(0).op(I64ExtendI32U).op(I64Add).global_set(g).get(0);
  const uint32_t fi = mb.add_func(f);
  FunctionBuilder main(kToI64);
  main.i32(1).call(fi).i32(2).call(fi).op(I32Sub);  // 1 - 2
  main.i32(3).call(fi).op(I32Mul).op(Drop);
  main.i32(4).call(fi).i32(5).call(fi).op(I32DivU).op(Drop);
  main.global_get(g);
  mb.export_func("main", mb.add_func(main));
  const Module m = mb.build();

  const auto expected = Value::i64(12345);
  for (uint32_t threshold : {kNeverOptimize, 1u}) {
    const FlatOutcome tree = run_tree(m, "main", threshold);
    ASSERT_EQ(tree.results, std::vector<Value>{expected}) << describe(tree);
  }
  FlatInterpreter flat(m);
  EXPECT_EQ(flat.invoke("main").results, std::vector<Value>{expected});
}

TEST(EffectOrder, StoresAndLoadsInterleave) {
  ModuleBuilder mb;
  mb.memory({1, std::nullopt});
  FunctionBuilder main(kToI32);
  // load(0) + (store(0, 5); load(0)) must read the old value first.
  const uint32_t tmp = main.local(ValType::I32);
  main.i32(0).i32(7).mem(I32Store);
  main.i32(0).mem(I32Load);
  main.block(ValType::I32).i32(0).i32(5).mem(I32Store).i32(0).mem(I32Load).end();
  main.op(I32Sub).set(tmp).get(tmp);
  mb.export_func("main", mb.add_func(main));
  const Module m = mb.build();
  for (uint32_t threshold : {kNeverOptimize, 1u}) {
    EXPECT_EQ(run_tree(m, "main", threshold, std::nullopt, {}, 2).results, std::vector<Value>{Value::i32(2)});
  }
}

// Tree interpretation, optimized or not, agrees with the flat oracle on
// results, traps and WASI output.
TEST(EffectOrder, GeneratedProgramsMatchFlatOracle) {
  int traps = 0, printed = 0;
  for (uint64_t s = 1; s <= 300; ++s) {
    const Module m = bench::gen_random_program(s, 100 + (s % 3) * 100);
    FlatInterpreter flat(m);
    const FlatOutcome want = flat.invoke("main");
    ASSERT_FALSE(want.out_of_steps) << "seed " << s;
    traps += want.trap.has_value();
    printed += !want.stdout_bytes.empty();
    for (uint32_t threshold : {kNeverOptimize, 1u}) {
      const FlatOutcome got = run_tree(m, "main", threshold, bench::kGeneratedFuelLimit);
      ASSERT_TRUE(same_outcome(got, want))
          << "seed " << s << " threshold " << threshold << ": tree " << describe(got) << " vs flat " << describe(want);
    }
  }
  EXPECT_GT(traps, 0);
  EXPECT_GT(printed, 0);
}
