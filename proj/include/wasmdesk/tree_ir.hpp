#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wasmdesk/model.hpp"
#include "wasmdesk/validator.hpp"

namespace wasmdesk {

enum class NodeKind : uint8_t {
  Const,
  UnaryOp,
  BinaryOp,
  Compare,
  Convert,
  LocalGet,
  LocalSet,
  LocalTee,
  GlobalGet,
  GlobalSet,
  Load,
  Store,
  Block,
  Loop,
  If,
  Br,
  BrIf,
  BrTable,
  Call,
  CallIndirect,
  Select,
  Drop,
  Return,
  Unreachable,
  Nop,
  MemorySize,
  MemoryGrow,
  Seq,
};

std::string_view to_string(NodeKind kind);

// One node of the tree IR. Children are evaluated strictly left to right.
//
// Child layout per kind:
//   UnaryOp/Compare(eqz)/Convert: [operand]     BinaryOp/Compare: [lhs, rhs]
//   LocalSet/LocalTee/GlobalSet/Drop/MemoryGrow/Load: [operand]
//   Store: [address, value]                     Select: [a, b, condition]
//   Block/Loop/Seq: statements, the last one yields the value (if typed)
//   If: [condition, then Seq, optional else Seq]
//   Br/Return: [optional value]                 BrIf: [optional value, condition]
//   BrTable: [optional value, index]            Call: args   CallIndirect: args..., table slot
//
// Immediates: `op` for operators/loads/stores, `bits` for Const, `index` for
// local/global/function/type indices, branch depths and memory offsets,
// `align` for loads/stores, `labels` + `index` (default) for BrTable.
struct ExprNode {
  NodeKind kind = NodeKind::Nop;
  Opcode op = Opcode::Nop;
  std::optional<ValType> type;  // static result type; nullopt for statements
  uint64_t bits = 0;
  uint32_t index = 0;
  uint32_t align = 0;
  std::vector<uint32_t> labels;
  std::vector<ExprNode> children;

  bool operator==(const ExprNode&) const = default;

  bool is_const() const { return kind == NodeKind::Const; }

  static ExprNode constant(ValType type, uint64_t bits);
  static ExprNode i32(int32_t v) { return constant(ValType::I32, static_cast<uint32_t>(v)); }
  static ExprNode i64(int64_t v) { return constant(ValType::I64, static_cast<uint64_t>(v)); }
  static ExprNode nop() { return ExprNode{}; }
  static ExprNode make(NodeKind kind, std::optional<ValType> type, std::vector<ExprNode> children = {});
  static ExprNode op_node(Opcode op, std::vector<ExprNode> children);
};

inline constexpr uint32_t kDefaultOptThreshold = 1000;
inline constexpr uint32_t kNeverOptimize = std::numeric_limits<uint32_t>::max();

// A function body in tree form together with its profiling state.
struct FuncBody {
  ExprNode root;  // a Block typed as the function result
  std::vector<ValType> locals;  // params, declared locals, then synthetic locals
  uint32_t param_count = 0;
  uint32_t profile = 0;  // entry count, saturating at 2^32-1
  bool optimized = false;

  bool operator==(const FuncBody&) const = default;

  void record_entry() {
    if (profile != std::numeric_limits<uint32_t>::max()) ++profile;
  }
};

/// Rebuilds expressions from a validated flat body by simulating the operand
/// stack. Pending values are spilled to fresh synthetic locals whenever a
/// statement is emitted so that effect order matches the flat program.
FuncBody build_tree(const Module& module, uint32_t defined_index, const FunctionFacts& facts);

/// Same as above for a bare body; `locals` lists params then declared locals.
FuncBody build_tree(const Module& module, std::span<const Instr> body, const FuncType& type,
                    std::vector<ValType> locals, const FunctionFacts& facts);

/// Bottom-up folding of operator nodes whose operands are all constants and
/// whose result does not trap.
FuncBody fold_constants(FuncBody body);
ExprNode fold_constants(ExprNode node);

/// Removes statically decided control flow: constant-condition if/br_if/
/// br_table, and blocks whose only child is an untargeted block.
FuncBody prune_dead_branches(FuncBody body);
ExprNode prune_dead_branches(ExprNode node);

/// Runs both passes to a fixed point (at most 10 rounds) once the entry
/// profile reaches `threshold`; otherwise returns the body unchanged.
FuncBody maybe_reoptimize(FuncBody body, uint32_t threshold);

/// True if maybe_reoptimize would rewrite the body.
inline bool wants_reoptimize(const FuncBody& body, uint32_t threshold) {
  return !body.optimized && threshold != kNeverOptimize && body.profile >= threshold;
}

size_t node_count(const ExprNode& node);

/// Recomputes static types bottom-up and checks them against the recorded
/// ones; returns a description of the first inconsistency, if any.
std::optional<std::string> check_tree(const FuncBody& body, const FuncType& type);

/// Indented textual dump, for debugging and test failure messages.
std::string dump(const ExprNode& node);

}  // namespace wasmdesk
