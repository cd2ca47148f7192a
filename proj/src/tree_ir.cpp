#include "wasmdesk/tree_ir.hpp"

#include <sstream>

#include "wasmdesk/numeric.hpp"
#include "wasmdesk/value.hpp"

namespace wasmdesk {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Const: return "Const";
    case NodeKind::UnaryOp: return "UnaryOp";
    case NodeKind::BinaryOp: return "BinaryOp";
    case NodeKind::Compare: return "Compare";
    case NodeKind::Convert: return "Convert";
    case NodeKind::LocalGet: return "LocalGet";
    case NodeKind::LocalSet: return "LocalSet";
    case NodeKind::LocalTee: return "LocalTee";
    case NodeKind::GlobalGet: return "GlobalGet";
    case NodeKind::GlobalSet: return "GlobalSet";
    case NodeKind::Load: return "Load";
    case NodeKind::Store: return "Store";
    case NodeKind::Block: return "Block";
    case NodeKind::Loop: return "Loop";
    case NodeKind::If: return "If";
    case NodeKind::Br: return "Br";
    case NodeKind::BrIf: return "BrIf";
    case NodeKind::BrTable: return "BrTable";
    case NodeKind::Call: return "Call";
    case NodeKind::CallIndirect: return "CallIndirect";
    case NodeKind::Select: return "Select";
    case NodeKind::Drop: return "Drop";
    case NodeKind::Return: return "Return";
    case NodeKind::Unreachable: return "Unreachable";
    case NodeKind::Nop: return "Nop";
    case NodeKind::MemorySize: return "MemorySize";
    case NodeKind::MemoryGrow: return "MemoryGrow";
    case NodeKind::Seq: return "Seq";
  }
  return "?";
}

ExprNode ExprNode::constant(ValType type, uint64_t bits) {
  ExprNode n;
  n.kind = NodeKind::Const;
  n.type = type;
  n.bits = bits;
  return n;
}

ExprNode ExprNode::make(NodeKind kind, std::optional<ValType> type, std::vector<ExprNode> children) {
  ExprNode n;
  n.kind = kind;
  n.type = type;
  n.children = std::move(children);
  return n;
}

namespace {

NodeKind kind_for(Opcode op) {
  switch (opcode_info(op).cls) {
    case OpClass::Unary: return NodeKind::UnaryOp;
    case OpClass::Binary: return NodeKind::BinaryOp;
    case OpClass::Test:
    case OpClass::Compare: return NodeKind::Compare;
    case OpClass::Convert: return NodeKind::Convert;
    default: break;
  }
  throw std::logic_error("not an operator opcode: " + std::string(to_string(op)));
}

}  // namespace

ExprNode ExprNode::op_node(Opcode op, std::vector<ExprNode> children) {
  ExprNode n = make(kind_for(op), opcode_info(op).result, std::move(children));
  n.op = op;
  return n;
}

namespace {

bool is_branch(NodeKind k) { return k == NodeKind::Br || k == NodeKind::BrIf || k == NodeKind::BrTable; }

bool is_labeled(NodeKind k) { return k == NodeKind::Block || k == NodeKind::Loop || k == NodeKind::If; }

// Pure reads whose value cannot change or trap: safe to discard.
bool is_discardable(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Const:
    case NodeKind::LocalGet:
    case NodeKind::GlobalGet:
    case NodeKind::MemorySize: return true;
    default: return false;
  }
}

// ---------------------------------------------------------------------------
// Stack-to-tree reconstruction.

class TreeBuilder {
 public:
  TreeBuilder(const Module& module, const FuncType& type, std::vector<ValType> locals)
      : module_(module), type_(type) {
    body_.param_count = static_cast<uint32_t>(type.params.size());
    body_.locals = std::move(locals);
  }

  FuncBody run(std::span<const Instr> code, const FunctionFacts& facts) {
    stack_.reserve(facts.max_operand_depth + 1);
    std::optional<ValType> result;
    if (!type_.results.empty()) result = type_.results.front();
    open_frame(Opcode::Block, result);

    size_t skip_depth = 0;
    for (const Instr& ins : code) {
      if (frames_.back().unreachable) {
        // Dead code up to the else/end of the current construct.
        if (ins.op == Opcode::Block || ins.op == Opcode::Loop || ins.op == Opcode::If) {
          ++skip_depth;
          continue;
        }
        if (ins.op == Opcode::End && skip_depth > 0) {
          --skip_depth;
          continue;
        }
        if (ins.op != Opcode::End && ins.op != Opcode::Else) continue;
        if (ins.op == Opcode::Else && skip_depth > 0) continue;
      }
      if (step(ins)) break;
    }
    return std::move(body_);
  }

 private:
  struct Frame {
    Opcode opcode = Opcode::Block;
    std::optional<ValType> result;
    size_t height = 0;
    bool unreachable = false;
    std::vector<ExprNode> stmts;
    std::optional<ExprNode> cond;
    std::vector<ExprNode> then_stmts;
    bool in_else = false;
  };

  void open_frame(Opcode op, std::optional<ValType> result) {
    Frame f;
    f.opcode = op;
    f.result = result;
    f.height = stack_.size();
    frames_.push_back(std::move(f));
  }

  ExprNode pop() {
    if (stack_.empty()) throw std::logic_error("build_tree: operand stack underflow on validated input");
    ExprNode n = std::move(stack_.back());
    stack_.pop_back();
    return n;
  }

  std::vector<ExprNode> pop_n(size_t n) {
    std::vector<ExprNode> out(n);
    for (size_t i = n; i > 0; --i) out[i - 1] = pop();
    return out;
  }

  uint32_t new_local(ValType t) {
    body_.locals.push_back(t);
    synthetic_.resize(body_.locals.size(), false);
    synthetic_.back() = true;
    return static_cast<uint32_t>(body_.locals.size() - 1);
  }

  bool is_synthetic_get(const ExprNode& n) const {
    return n.kind == NodeKind::LocalGet && n.index < synthetic_.size() && synthetic_[n.index];
  }

  // Evaluates every pending value of the current frame ahead of a statement.
  // A terminal statement discards them, so pure reads are simply dropped.
  void flush(bool terminal) {
    Frame& f = frames_.back();
    for (size_t i = f.height; i < stack_.size(); ++i) {
      ExprNode& v = stack_[i];
      if (v.is_const() || is_synthetic_get(v)) continue;
      if (terminal) {
        if (!is_discardable(v)) f.stmts.push_back(ExprNode::make(NodeKind::Drop, std::nullopt, {std::move(v)}));
        continue;
      }
      const ValType t = *v.type;
      const uint32_t local = new_local(t);
      ExprNode set = ExprNode::make(NodeKind::LocalSet, std::nullopt, {std::move(v)});
      set.index = local;
      f.stmts.push_back(std::move(set));
      v = ExprNode::make(NodeKind::LocalGet, t);
      v.index = local;
    }
  }

  void emit(ExprNode stmt, bool terminal = false) {
    flush(terminal);
    frames_.back().stmts.push_back(std::move(stmt));
  }

  void make_unreachable() {
    Frame& f = frames_.back();
    stack_.resize(f.height);
    f.unreachable = true;
  }

  std::optional<ValType> label_type(uint32_t depth) const {
    const Frame& f = frames_[frames_.size() - 1 - depth];
    return f.opcode == Opcode::Loop ? std::nullopt : f.result;
  }

  // Places a finished node in the current frame: values go on the stack,
  // statements into the statement list.
  void place(ExprNode n) {
    if (n.type) {
      stack_.push_back(std::move(n));
    } else {
      emit(std::move(n));
    }
  }

  // Returns true when the function's final end has been processed.
  bool step(const Instr& ins) {
    const OpcodeInfo& info = opcode_info(ins.op);
    switch (ins.op) {
      case Opcode::Unreachable:
        emit(ExprNode::make(NodeKind::Unreachable, std::nullopt), true);
        make_unreachable();
        return false;
      case Opcode::Nop: return false;
      case Opcode::Block:
      case Opcode::Loop:
        open_frame(ins.op, ins.block().result);
        return false;
      case Opcode::If: {
        ExprNode cond = pop();
        open_frame(ins.op, ins.block().result);
        frames_.back().cond = std::move(cond);
        return false;
      }
      case Opcode::Else: {
        Frame& f = frames_.back();
        if (!f.unreachable && f.result) f.stmts.push_back(pop());
        stack_.resize(f.height);
        f.then_stmts = std::move(f.stmts);
        f.stmts.clear();
        f.in_else = true;
        f.unreachable = false;
        return false;
      }
      case Opcode::End: return end();
      case Opcode::Br: {
        ExprNode n = ExprNode::make(NodeKind::Br, std::nullopt);
        n.index = ins.index();
        if (label_type(ins.index())) n.children.push_back(pop());
        emit(std::move(n), true);
        make_unreachable();
        return false;
      }
      case Opcode::BrIf: {
        ExprNode cond = pop();
        ExprNode n = ExprNode::make(NodeKind::BrIf, std::nullopt);
        n.index = ins.index();
        if (auto t = label_type(ins.index())) {
          n.children.push_back(pop());
          n.children.push_back(std::move(cond));
          n.type = t;
          stack_.push_back(std::move(n));
        } else {
          n.children.push_back(std::move(cond));
          emit(std::move(n));
        }
        return false;
      }
      case Opcode::BrTable: {
        const auto& table = ins.br_table();
        ExprNode index = pop();
        ExprNode n = ExprNode::make(NodeKind::BrTable, std::nullopt);
        n.labels = table.labels;
        n.index = table.default_label;
        if (label_type(table.default_label)) n.children.push_back(pop());
        n.children.push_back(std::move(index));
        emit(std::move(n), true);
        make_unreachable();
        return false;
      }
      case Opcode::Return: {
        ExprNode n = ExprNode::make(NodeKind::Return, std::nullopt);
        if (!type_.results.empty()) n.children.push_back(pop());
        emit(std::move(n), true);
        make_unreachable();
        return false;
      }
      case Opcode::Call: {
        const FuncType& ft = func_signature(module_, ins.index());
        ExprNode n = ExprNode::make(NodeKind::Call, result_of(ft), pop_n(ft.params.size()));
        n.index = ins.index();
        place(std::move(n));
        return false;
      }
      case Opcode::CallIndirect: {
        const FuncType& ft = module_.types.at(ins.index());
        ExprNode slot = pop();
        ExprNode n = ExprNode::make(NodeKind::CallIndirect, result_of(ft), pop_n(ft.params.size()));
        n.children.push_back(std::move(slot));
        n.index = ins.index();
        place(std::move(n));
        return false;
      }
      case Opcode::Drop: {
        ExprNode v = pop();
        if (!is_discardable(v)) emit(ExprNode::make(NodeKind::Drop, std::nullopt, {std::move(v)}));
        return false;
      }
      case Opcode::Select: {
        auto ops = pop_n(3);
        const auto t = ops[0].type ? ops[0].type : ops[1].type;
        stack_.push_back(ExprNode::make(NodeKind::Select, t, std::move(ops)));
        return false;
      }
      case Opcode::LocalGet: {
        ExprNode n = ExprNode::make(NodeKind::LocalGet, body_.locals.at(ins.index()));
        n.index = ins.index();
        stack_.push_back(std::move(n));
        return false;
      }
      case Opcode::LocalSet:
      case Opcode::LocalTee: {
        const bool tee = ins.op == Opcode::LocalTee;
        ExprNode n = ExprNode::make(tee ? NodeKind::LocalTee : NodeKind::LocalSet,
                                    tee ? std::optional(body_.locals.at(ins.index())) : std::nullopt, {pop()});
        n.index = ins.index();
        place(std::move(n));
        return false;
      }
      case Opcode::GlobalGet: {
        ExprNode n = ExprNode::make(NodeKind::GlobalGet, global_type(module_, ins.index()).type);
        n.index = ins.index();
        stack_.push_back(std::move(n));
        return false;
      }
      case Opcode::GlobalSet: {
        ExprNode n = ExprNode::make(NodeKind::GlobalSet, std::nullopt, {pop()});
        n.index = ins.index();
        emit(std::move(n));
        return false;
      }
      case Opcode::MemorySize:
        stack_.push_back(ExprNode::make(NodeKind::MemorySize, ValType::I32));
        return false;
      case Opcode::MemoryGrow:
        stack_.push_back(ExprNode::make(NodeKind::MemoryGrow, ValType::I32, {pop()}));
        return false;
      case Opcode::I32Const:
        stack_.push_back(ExprNode::i32(std::get<int32_t>(ins.imm)));
        return false;
      case Opcode::I64Const:
        stack_.push_back(ExprNode::i64(std::get<int64_t>(ins.imm)));
        return false;
      case Opcode::F32Const:
        stack_.push_back(ExprNode::constant(ValType::F32, std::get<F32Bits>(ins.imm).bits));
        return false;
      case Opcode::F64Const:
        stack_.push_back(ExprNode::constant(ValType::F64, std::get<F64Bits>(ins.imm).bits));
        return false;
      default: break;
    }

    switch (info.cls) {
      case OpClass::Load: {
        ExprNode n = ExprNode::make(NodeKind::Load, info.result, {pop()});
        n.op = ins.op;
        n.index = ins.memarg().offset;
        n.align = ins.memarg().align;
        stack_.push_back(std::move(n));
        return false;
      }
      case OpClass::Store: {
        ExprNode n = ExprNode::make(NodeKind::Store, std::nullopt, pop_n(2));
        n.op = ins.op;
        n.index = ins.memarg().offset;
        n.align = ins.memarg().align;
        emit(std::move(n));
        return false;
      }
      case OpClass::Unary:
      case OpClass::Test:
      case OpClass::Convert:
        stack_.push_back(ExprNode::op_node(ins.op, pop_n(1)));
        return false;
      case OpClass::Binary:
      case OpClass::Compare:
        stack_.push_back(ExprNode::op_node(ins.op, pop_n(2)));
        return false;
      default: break;
    }
    throw std::logic_error("build_tree: unhandled opcode " + std::string(to_string(ins.op)));
  }

  static std::optional<ValType> result_of(const FuncType& ft) {
    if (ft.results.empty()) return std::nullopt;
    return ft.results.front();
  }

  bool end() {
    Frame& f = frames_.back();
    if (!f.unreachable && f.result) f.stmts.push_back(pop());
    stack_.resize(f.height);
    Frame done = std::move(f);
    frames_.pop_back();

    ExprNode node;
    switch (done.opcode) {
      case Opcode::Block: node = ExprNode::make(NodeKind::Block, done.result, std::move(done.stmts)); break;
      case Opcode::Loop: node = ExprNode::make(NodeKind::Loop, done.result, std::move(done.stmts)); break;
      case Opcode::If: {
        node = ExprNode::make(NodeKind::If, done.result);
        node.children.push_back(std::move(*done.cond));
        if (done.in_else) {
          node.children.push_back(ExprNode::make(NodeKind::Seq, done.result, std::move(done.then_stmts)));
          node.children.push_back(ExprNode::make(NodeKind::Seq, done.result, std::move(done.stmts)));
        } else {
          node.children.push_back(ExprNode::make(NodeKind::Seq, done.result, std::move(done.stmts)));
        }
        break;
      }
      default: throw std::logic_error("build_tree: unexpected frame");
    }
    if (frames_.empty()) {
      body_.root = std::move(node);
      return true;
    }
    place(std::move(node));
    return false;
  }

  const Module& module_;
  const FuncType& type_;
  FuncBody body_;
  std::vector<ExprNode> stack_;
  std::vector<Frame> frames_;
  std::vector<bool> synthetic_;
};

// ---------------------------------------------------------------------------
// Label bookkeeping for rewrites that remove a label level.

// True if a branch inside `n` (at nesting k relative to the label) targets it.
bool targets_label(const ExprNode& n, uint32_t k) {
  if (is_branch(n.kind)) {
    if (n.index == k) return true;
    for (uint32_t l : n.labels) {
      if (l == k) return true;
    }
  }
  for (size_t i = 0; i < n.children.size(); ++i) {
    // An if's condition sits outside its label.
    const bool inside = is_labeled(n.kind) && !(n.kind == NodeKind::If && i == 0);
    if (targets_label(n.children[i], inside ? k + 1 : k)) return true;
  }
  return false;
}

bool children_target_label(const std::vector<ExprNode>& children) {
  for (const auto& c : children) {
    if (targets_label(c, 0)) return true;
  }
  return false;
}

// Renumbers branches that escape past a removed label at nesting k.
void drop_label(ExprNode& n, uint32_t k) {
  if (is_branch(n.kind)) {
    if (n.index > k) --n.index;
    for (uint32_t& l : n.labels) {
      if (l > k) --l;
    }
  }
  for (size_t i = 0; i < n.children.size(); ++i) {
    const bool inside = is_labeled(n.kind) && !(n.kind == NodeKind::If && i == 0);
    drop_label(n.children[i], inside ? k + 1 : k);
  }
}

bool simplify(ExprNode& n) {
  switch (n.kind) {
    case NodeKind::If: {
      if (!n.children[0].is_const()) return false;
      const bool taken = static_cast<uint32_t>(n.children[0].bits) != 0;
      if (!taken && n.children.size() < 3) {
        n = ExprNode::nop();
        return true;
      }
      ExprNode arm = std::move(n.children[taken ? 1 : 2]);
      if (children_target_label(arm.children)) {
        ExprNode block = ExprNode::make(NodeKind::Block, n.type, std::move(arm.children));
        n = std::move(block);
      } else {
        for (auto& c : arm.children) drop_label(c, 0);
        n = std::move(arm);
      }
      return true;
    }
    case NodeKind::BrIf: {
      const ExprNode& cond = n.children.back();
      if (!cond.is_const()) return false;
      if (static_cast<uint32_t>(cond.bits) == 0) {
        if (n.children.size() == 2) {
          ExprNode value = std::move(n.children[0]);
          n = std::move(value);
        } else {
          n = ExprNode::nop();
        }
      } else {
        n.kind = NodeKind::Br;
        n.type.reset();
        n.children.pop_back();
      }
      return true;
    }
    case NodeKind::BrTable: {
      const ExprNode& idx = n.children.back();
      if (!idx.is_const()) return false;
      const uint32_t i = static_cast<uint32_t>(idx.bits);
      const uint32_t target = i < n.labels.size() ? n.labels[i] : n.index;
      n.kind = NodeKind::Br;
      n.index = target;
      n.labels.clear();
      n.children.pop_back();
      return true;
    }
    case NodeKind::Block:
    case NodeKind::Loop:
    case NodeKind::Seq: {
      bool changed = false;
      // Unlabeled sequences splice into their parent.
      for (size_t i = 0; i < n.children.size(); ++i) {
        if (n.children[i].kind != NodeKind::Seq) continue;
        std::vector<ExprNode> inner = std::move(n.children[i].children);
        n.children.erase(n.children.begin() + static_cast<std::ptrdiff_t>(i));
        n.children.insert(n.children.begin() + static_cast<std::ptrdiff_t>(i), std::make_move_iterator(inner.begin()),
                          std::make_move_iterator(inner.end()));
        i += inner.size();
        --i;
        changed = true;
      }
      if (n.kind == NodeKind::Block && n.children.size() == 1 && n.children[0].kind == NodeKind::Block &&
          n.children[0].type == n.type && !children_target_label(n.children[0].children)) {
        std::vector<ExprNode> inner = std::move(n.children[0].children);
        for (auto& c : inner) drop_label(c, 0);
        n.children = std::move(inner);
        changed = true;
      }
      return changed;
    }
    default: return false;
  }
}

size_t count(const ExprNode& n) {
  size_t total = 1;
  for (const auto& c : n.children) total += count(c);
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------

FuncBody build_tree(const Module& module, std::span<const Instr> body, const FuncType& type,
                    std::vector<ValType> locals, const FunctionFacts& facts) {
  return TreeBuilder(module, type, std::move(locals)).run(body, facts);
}

FuncBody build_tree(const Module& module, uint32_t defined_index, const FunctionFacts& facts) {
  const Function& fn = module.funcs.at(defined_index);
  const FuncType& type = module.types.at(fn.type_index);
  std::vector<ValType> locals = type.params;
  locals.insert(locals.end(), fn.locals.begin(), fn.locals.end());
  return build_tree(module, fn.body, type, std::move(locals), facts);
}

ExprNode fold_constants(ExprNode node) {
  for (auto& c : node.children) c = fold_constants(std::move(c));
  switch (node.kind) {
    case NodeKind::UnaryOp:
    case NodeKind::BinaryOp:
    case NodeKind::Compare:
    case NodeKind::Convert: break;
    default: return node;
  }
  for (const auto& c : node.children) {
    if (!c.is_const()) return node;
  }
  try {
    const uint64_t bits = node.children.size() == 1
                              ? numeric::unary(node.op, node.children[0].bits)
                              : numeric::binary(node.op, node.children[0].bits, node.children[1].bits);
    return ExprNode::constant(*node.type, bits);
  } catch (const Trap&) {
    return node;  // the trap must still happen at run time
  }
}

FuncBody fold_constants(FuncBody body) {
  body.root = fold_constants(std::move(body.root));
  return body;
}

ExprNode prune_dead_branches(ExprNode node) {
  for (auto& c : node.children) c = prune_dead_branches(std::move(c));
  while (simplify(node)) {
  }
  return node;
}

FuncBody prune_dead_branches(FuncBody body) {
  body.root = prune_dead_branches(std::move(body.root));
  return body;
}

FuncBody maybe_reoptimize(FuncBody body, uint32_t threshold) {
  if (!wants_reoptimize(body, threshold)) return body;
  for (int round = 0; round < 10; ++round) {
    ExprNode next = prune_dead_branches(fold_constants(body.root));
    if (next == body.root) break;
    body.root = std::move(next);
  }
  body.optimized = true;
  return body;
}

size_t node_count(const ExprNode& node) { return count(node); }

namespace {

class TreeChecker {
 public:
  explicit TreeChecker(const FuncBody& body) : body_(body) {}

  std::optional<std::string> run(const FuncType& type) {
    const auto& root = body_.root;
    const std::optional<ValType> result = type.results.empty() ? std::nullopt : std::optional(type.results.front());
    if (root.kind != NodeKind::Block) return "root is not a Block";
    if (root.type != result) return "root type does not match the function result";
    check(root);
    return error_;
  }

 private:
  void fail(const ExprNode& n, const std::string& what) {
    if (!error_) error_ = std::string(to_string(n.kind)) + ": " + what;
  }

  void expect(const ExprNode& n, const ExprNode& child, std::optional<ValType> t) {
    if (child.type && t && child.type != t) fail(n, "operand type mismatch");
  }

  void check(const ExprNode& n) {
    for (const auto& c : n.children) check(c);
    const auto& info = opcode_info(n.op);
    switch (n.kind) {
      case NodeKind::UnaryOp:
      case NodeKind::Convert:
        if (n.children.size() != 1) return fail(n, "expects one operand");
        expect(n, n.children[0], info.param0);
        break;
      case NodeKind::Compare:
      case NodeKind::BinaryOp:
        if (n.children.size() != (info.cls == OpClass::Test ? 1u : 2u)) return fail(n, "wrong operand count");
        expect(n, n.children[0], info.param0);
        if (n.children.size() == 2) expect(n, n.children[1], info.param1);
        break;
      case NodeKind::LocalGet:
      case NodeKind::LocalSet:
      case NodeKind::LocalTee:
        if (n.index >= body_.locals.size()) return fail(n, "local index out of range");
        if (n.kind != NodeKind::LocalGet) expect(n, n.children.at(0), body_.locals[n.index]);
        break;
      case NodeKind::Load:
      case NodeKind::MemoryGrow:
        if (n.children.size() != 1) return fail(n, "expects one operand");
        expect(n, n.children[0], ValType::I32);
        break;
      case NodeKind::Store:
        if (n.children.size() != 2) return fail(n, "expects two operands");
        expect(n, n.children[0], ValType::I32);
        expect(n, n.children[1], info.param1);
        break;
      case NodeKind::If:
        if (n.children.size() < 2 || n.children.size() > 3) return fail(n, "bad arm count");
        expect(n, n.children[0], ValType::I32);
        break;
      case NodeKind::Select:
        if (n.children.size() != 3) return fail(n, "expects three operands");
        expect(n, n.children[2], ValType::I32);
        break;
      default: break;
    }
  }

  const FuncBody& body_;
  std::optional<std::string> error_;
};

void dump_into(std::ostringstream& os, const ExprNode& n, int depth) {
  os << std::string(static_cast<size_t>(depth) * 2, ' ') << to_string(n.kind);
  if (n.op != Opcode::Nop) os << ' ' << to_string(n.op);
  if (n.kind == NodeKind::Const) os << " 0x" << std::hex << n.bits << std::dec;
  switch (n.kind) {
    case NodeKind::LocalGet: case NodeKind::LocalSet: case NodeKind::LocalTee:
    case NodeKind::GlobalGet: case NodeKind::GlobalSet: case NodeKind::Br: case NodeKind::BrIf:
    case NodeKind::BrTable: case NodeKind::Call: case NodeKind::CallIndirect: case NodeKind::Load:
    case NodeKind::Store:
      os << " #" << n.index;
      break;
    default: break;
  }
  if (n.type) os << " : " << to_string(*n.type);
  os << '\n';
  for (const auto& c : n.children) dump_into(os, c, depth + 1);
}

}  // namespace

std::optional<std::string> check_tree(const FuncBody& body, const FuncType& type) {
  return TreeChecker(body).run(type);
}

std::string dump(const ExprNode& node) {
  std::ostringstream os;
  dump_into(os, node, 0);
  return os.str();
}

}  // namespace wasmdesk
