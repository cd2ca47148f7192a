#include "wasmdesk/binary.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <optional>

namespace wasmdesk {

namespace {

constexpr std::array<uint8_t, 4> kMagic = {0x00, 0x61, 0x73, 0x6D};
constexpr uint32_t kVersion = 1;
constexpr uint64_t kMaxLocals = 50000;

enum SectionId : uint8_t {
  kCustom = 0,
  kType = 1,
  kImport = 2,
  kFunction = 3,
  kTable = 4,
  kMemory = 5,
  kGlobal = 6,
  kExport = 7,
  kStart = 8,
  kElement = 9,
  kCode = 10,
  kData = 11,
};

constexpr uint8_t kFuncTypeTag = 0x60;
constexpr uint8_t kFuncRefTag = 0x70;
constexpr uint8_t kEmptyBlock = 0x40;

bool valid_utf8(std::span<const uint8_t> s) {
  size_t i = 0;
  while (i < s.size()) {
    const uint8_t b = s[i];
    if (b < 0x80) {
      ++i;
      continue;
    }
    size_t len = 0;
    uint32_t cp = 0;
    uint32_t min_cp = 0;
    if ((b & 0xE0) == 0xC0) {
      len = 2; cp = b & 0x1F; min_cp = 0x80;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3; cp = b & 0x0F; min_cp = 0x800;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4; cp = b & 0x07; min_cp = 0x10000;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (size_t k = 1; k < len; ++k) {
      const uint8_t c = s[i + k];
      if ((c & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (c & 0x3F);
    }
    if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

std::optional<ValType> val_type_from_byte(uint8_t b) {
  switch (b) {
    case 0x7F: return ValType::I32;
    case 0x7E: return ValType::I64;
    case 0x7D: return ValType::F32;
    case 0x7C: return ValType::F64;
    default: return std::nullopt;
  }
}

class Decoder {
 public:
  explicit Decoder(std::span<const uint8_t> bytes) : bytes_(bytes), cur_(bytes) {}

  Module run() {
    if (bytes_.size() > kMaxModuleBytes) {
      throw MalformedError(MalformedKind::Truncated, 0, "module exceeds the 256 MiB input bound");
    }
    read_header();
    uint8_t last_id = 0;
    uint32_t declared_funcs = 0;
    bool saw_function_section = false;
    bool saw_code_section = false;
    std::vector<uint32_t> func_type_indices;

    while (!cur_.at_end()) {
      const size_t id_offset = cur_.position();
      const uint8_t id = cur_.read_byte();
      const uint32_t size = u32();
      if (size > cur_.remaining()) {
        cur_.fail(MalformedKind::Truncated, "section size exceeds remaining input");
      }
      if (id != kCustom) {
        if (id > kData) {
          throw MalformedError(MalformedKind::BadSectionOrder, id_offset,
                               "unknown section id " + std::to_string(id));
        }
        if (id <= last_id) {
          throw MalformedError(MalformedKind::BadSectionOrder, id_offset,
                               "section " + std::to_string(id) + " after section " + std::to_string(last_id));
        }
        last_id = id;
      }
      const size_t end = cur_.position() + size;
      const size_t saved = cur_.push_limit(size);
      switch (id) {
        case kCustom: read_custom(last_id); break;
        case kType: read_types(); break;
        case kImport: read_imports(); break;
        case kFunction:
          saw_function_section = true;
          func_type_indices = read_vector<uint32_t>([this] { return u32(); });
          declared_funcs = static_cast<uint32_t>(func_type_indices.size());
          break;
        case kTable: read_tables(); break;
        case kMemory: read_memories(); break;
        case kGlobal: read_globals(); break;
        case kExport: read_exports(); break;
        case kStart: module_.start = u32(); break;
        case kElement: read_elements(); break;
        case kCode:
          saw_code_section = true;
          read_code(func_type_indices);
          break;
        case kData: read_data(); break;
        default: break;
      }
      if (cur_.position() != end) {
        cur_.fail(MalformedKind::SectionSizeMismatch,
                  "section " + std::to_string(id) + " declared " + std::to_string(size) + " bytes, consumed " +
                      std::to_string(size - (end - cur_.position())));
      }
      cur_.pop_limit(saved);
    }
    if (saw_function_section && !saw_code_section && declared_funcs != 0) {
      throw MalformedError(MalformedKind::SectionSizeMismatch, cur_.position(),
                           "function section declares bodies but code section is missing");
    }
    if (!saw_function_section && saw_code_section && !module_.funcs.empty()) {
      throw MalformedError(MalformedKind::SectionSizeMismatch, cur_.position(),
                           "code section without function section");
    }
    return std::move(module_);
  }

 private:
  uint32_t u32() { return static_cast<uint32_t>(read_uleb128(cur_, 32)); }

  template <typename T, typename F>
  std::vector<T> read_vector(F&& read_one) {
    const uint32_t n = u32();
    // Every element occupies at least one byte.
    if (n > cur_.remaining()) cur_.fail(MalformedKind::Truncated, "vector length exceeds remaining bytes");
    std::vector<T> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.push_back(read_one());
    return out;
  }

  void read_header() {
    for (size_t i = 0; i < kMagic.size(); ++i) {
      if (i >= bytes_.size()) {
        throw MalformedError(MalformedKind::Truncated, bytes_.size(), "input ends inside the magic number");
      }
      if (bytes_[i] != kMagic[i]) throw MalformedError(MalformedKind::BadMagic, 0, "missing \\0asm magic");
    }
    cur_.read_bytes(4);
    if (bytes_.size() < 8) {
      throw MalformedError(MalformedKind::Truncated, bytes_.size(), "input ends inside the version field");
    }
    const auto v = cur_.read_bytes(4);
    const uint32_t version = uint32_t{v[0]} | uint32_t{v[1]} << 8 | uint32_t{v[2]} << 16 | uint32_t{v[3]} << 24;
    if (version != kVersion) {
      throw MalformedError(MalformedKind::BadVersion, 4, "unsupported version " + std::to_string(version));
    }
  }

  std::string read_name() {
    const uint32_t len = u32();
    const size_t at = cur_.position();
    const auto raw = cur_.read_bytes(len);
    if (!valid_utf8(raw)) throw MalformedError(MalformedKind::BadUtf8, at, "name is not valid UTF-8");
    return std::string(raw.begin(), raw.end());
  }

  ValType read_val_type() {
    const size_t at = cur_.position();
    const uint8_t b = cur_.read_byte();
    if (auto t = val_type_from_byte(b)) return *t;
    throw MalformedError(MalformedKind::BadEncoding, at, "invalid value type byte " + std::to_string(b));
  }

  Limits read_limits() {
    const size_t at = cur_.position();
    const uint8_t flag = cur_.read_byte();
    Limits lim;
    if (flag == 0x00) {
      lim.min = u32();
    } else if (flag == 0x01) {
      lim.min = u32();
      lim.max = u32();
      if (lim.min > *lim.max) throw MalformedError(MalformedKind::BadEncoding, at, "limits minimum exceeds maximum");
    } else {
      throw MalformedError(MalformedKind::BadEncoding, at, "invalid limits flag " + std::to_string(flag));
    }
    return lim;
  }

  TableType read_table_type() {
    const size_t at = cur_.position();
    if (cur_.read_byte() != kFuncRefTag) throw MalformedError(MalformedKind::BadEncoding, at, "table element type must be funcref");
    return TableType{read_limits()};
  }

  GlobalType read_global_type() {
    GlobalType g;
    g.type = read_val_type();
    const size_t at = cur_.position();
    const uint8_t m = cur_.read_byte();
    if (m > 1) throw MalformedError(MalformedKind::BadEncoding, at, "invalid mutability flag");
    g.is_mutable = m == 1;
    return g;
  }

  void read_custom(uint8_t after) {
    CustomSection cs;
    cs.name = read_name();
    const auto rest = cur_.read_bytes(cur_.remaining());
    cs.bytes.assign(rest.begin(), rest.end());
    cs.after_section = after;
    module_.customs.push_back(std::move(cs));
  }

  void read_types() {
    module_.types = read_vector<FuncType>([this] {
      const size_t at = cur_.position();
      if (cur_.read_byte() != kFuncTypeTag) throw MalformedError(MalformedKind::BadEncoding, at, "expected func type tag 0x60");
      FuncType ft;
      ft.params = read_vector<ValType>([this] { return read_val_type(); });
      ft.results = read_vector<ValType>([this] { return read_val_type(); });
      return ft;
    });
  }

  void read_imports() {
    module_.imports = read_vector<Import>([this] {
      Import imp;
      imp.module = read_name();
      imp.field = read_name();
      const size_t at = cur_.position();
      switch (cur_.read_byte()) {
        case 0x00: imp.desc = FuncImport{u32()}; break;
        case 0x01: imp.desc = read_table_type(); break;
        case 0x02: imp.desc = MemoryType{read_limits()}; break;
        case 0x03: imp.desc = read_global_type(); break;
        default: throw MalformedError(MalformedKind::BadEncoding, at, "invalid import kind");
      }
      return imp;
    });
  }

  void read_tables() {
    module_.tables = read_vector<TableType>([this] { return read_table_type(); });
  }

  void read_memories() {
    module_.memories = read_vector<MemoryType>([this] { return MemoryType{read_limits()}; });
  }

  void read_globals() {
    module_.globals = read_vector<Global>([this] {
      Global g;
      g.type = read_global_type();
      g.init = read_const_expr();
      return g;
    });
  }

  void read_exports() {
    module_.exports = read_vector<Export>([this] {
      Export e;
      e.name = read_name();
      const size_t at = cur_.position();
      const uint8_t kind = cur_.read_byte();
      if (kind > 3) throw MalformedError(MalformedKind::BadEncoding, at, "invalid export kind");
      e.kind = static_cast<ExternKind>(kind);
      e.index = u32();
      return e;
    });
  }

  void read_elements() {
    module_.elements = read_vector<ElementSegment>([this] {
      ElementSegment seg;
      seg.table_index = u32();
      seg.offset = read_const_expr();
      seg.func_indices = read_vector<uint32_t>([this] { return u32(); });
      return seg;
    });
  }

  void read_data() {
    module_.data = read_vector<DataSegment>([this] {
      DataSegment seg;
      seg.memory_index = u32();
      seg.offset = read_const_expr();
      const uint32_t len = u32();
      const auto raw = cur_.read_bytes(len);
      seg.bytes.assign(raw.begin(), raw.end());
      return seg;
    });
  }

  void read_code(const std::vector<uint32_t>& type_indices) {
    const size_t count_at = cur_.position();
    const uint32_t n = u32();
    if (n != type_indices.size()) {
      throw MalformedError(MalformedKind::SectionSizeMismatch, count_at,
                           "code section has " + std::to_string(n) + " bodies, function section declares " +
                               std::to_string(type_indices.size()));
    }
    module_.funcs.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
      const uint32_t size = u32();
      if (size > cur_.remaining()) cur_.fail(MalformedKind::SectionSizeMismatch, "function body exceeds code section");
      const size_t end = cur_.position() + size;
      const size_t saved = cur_.push_limit(size);
      Function fn;
      fn.type_index = type_indices[i];
      const uint32_t groups = u32();
      uint64_t total = 0;
      for (uint32_t g = 0; g < groups; ++g) {
        const size_t at = cur_.position();
        const uint32_t count = u32();
        total += count;
        if (total > kMaxLocals) throw MalformedError(MalformedKind::BadEncoding, at, "too many locals");
        const ValType t = read_val_type();
        fn.locals.insert(fn.locals.end(), count, t);
      }
      fn.body = read_instr_sequence();
      if (cur_.position() != end) {
        cur_.fail(MalformedKind::SectionSizeMismatch, "function body size does not match its declared size");
      }
      cur_.pop_limit(saved);
      module_.funcs.push_back(std::move(fn));
    }
  }

  ConstExpr read_const_expr() {
    ConstExpr e;
    e.instrs = read_instr_sequence();
    e.instrs.pop_back();  // terminating end
    return e;
  }

  // Reads instructions through the end that closes the outermost level.
  // The returned list includes that end.
  std::vector<Instr> read_instr_sequence() {
    std::vector<Instr> out;
    // Open constructs; true marks an `if` that has not seen `else` yet.
    std::vector<bool> open;
    for (;;) {
      const size_t at = cur_.position();
      const uint8_t byte = cur_.read_byte();
      if (!is_valid_opcode(byte)) {
        throw MalformedError(MalformedKind::BadOpcode, at, "unknown opcode 0x" + hex(byte));
      }
      const auto op = static_cast<Opcode>(byte);
      Instr ins{op, std::monostate{}};
      read_immediate(ins);
      switch (op) {
        case Opcode::Block:
        case Opcode::Loop: open.push_back(false); break;
        case Opcode::If: open.push_back(true); break;
        case Opcode::Else:
          if (open.empty() || !open.back()) {
            throw MalformedError(MalformedKind::BadOpcode, at, "else without matching if");
          }
          open.back() = false;
          break;
        default: break;
      }
      out.push_back(std::move(ins));
      if (op == Opcode::End) {
        if (open.empty()) return out;
        open.pop_back();
      }
    }
  }

  void read_immediate(Instr& ins) {
    const size_t at = cur_.position();
    switch (opcode_info(ins.op).imm) {
      case ImmKind::None: break;
      case ImmKind::Block: {
        const uint8_t b = cur_.read_byte();
        if (b == kEmptyBlock) {
          ins.imm = BlockSig{};
        } else if (auto t = val_type_from_byte(b)) {
          ins.imm = BlockSig{*t};
        } else {
          throw MalformedError(MalformedKind::BadEncoding, at, "invalid block type");
        }
        break;
      }
      case ImmKind::Label:
      case ImmKind::Func:
      case ImmKind::Local:
      case ImmKind::Global: ins.imm = u32(); break;
      case ImmKind::BrTable: {
        BrTableImm t;
        t.labels = read_vector<uint32_t>([this] { return u32(); });
        t.default_label = u32();
        ins.imm = std::move(t);
        break;
      }
      case ImmKind::CallIndirect: {
        ins.imm = u32();
        const size_t r = cur_.position();
        if (cur_.read_byte() != 0x00) throw MalformedError(MalformedKind::BadEncoding, r, "call_indirect reserved byte must be zero");
        break;
      }
      case ImmKind::MemArg: {
        MemArg m;
        m.align = u32();
        m.offset = u32();
        ins.imm = m;
        break;
      }
      case ImmKind::MemReserved:
        if (cur_.read_byte() != 0x00) throw MalformedError(MalformedKind::BadEncoding, at, "memory reserved byte must be zero");
        break;
      case ImmKind::I32: ins.imm = static_cast<int32_t>(read_sleb128(cur_, 32)); break;
      case ImmKind::I64: ins.imm = read_sleb128(cur_, 64); break;
      case ImmKind::F32: {
        const auto b = cur_.read_bytes(4);
        uint32_t bits = 0;
        for (int i = 3; i >= 0; --i) bits = bits << 8 | b[i];
        ins.imm = F32Bits{bits};
        break;
      }
      case ImmKind::F64: {
        const auto b = cur_.read_bytes(8);
        uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = bits << 8 | b[i];
        ins.imm = F64Bits{bits};
        break;
      }
    }
  }

  static std::string hex(uint8_t b) {
    static constexpr char digits[] = "0123456789ABCDEF";
    return {digits[b >> 4], digits[b & 0xF]};
  }

  std::span<const uint8_t> bytes_;
  ByteCursor cur_;
  Module module_;
};

// ---------------------------------------------------------------------------

class Encoder {
 public:
  explicit Encoder(const Module& m) : m_(m) {}

  std::vector<uint8_t> run() {
    check_mvp();
    std::vector<uint8_t> out;
    out.reserve(64);
    for (uint8_t b : kMagic) out.push_back(b);
    for (uint8_t b : {0x01, 0x00, 0x00, 0x00}) out.push_back(b);
    emit_customs(out, 0);
    for (uint8_t id = kType; id <= kData; ++id) {
      std::vector<uint8_t> body;
      if (build_section(id, body)) {
        out.push_back(id);
        write_uleb128(out, body.size());
        out.insert(out.end(), body.begin(), body.end());
      }
      emit_customs(out, id);
    }
    return out;
  }

 private:
  void check_mvp() const {
    if (m_.memory_count() > 1) throw StructuralError("MVP modules have at most one memory");
    if (m_.table_count() > 1) throw StructuralError("MVP modules have at most one table");
    for (const auto& t : m_.types) {
      if (t.results.size() > 1) throw StructuralError("MVP function types have at most one result");
    }
  }

  void emit_customs(std::vector<uint8_t>& out, uint8_t after) const {
    for (const auto& cs : m_.customs) {
      if (cs.after_section != after) continue;
      std::vector<uint8_t> body;
      name(body, cs.name);
      body.insert(body.end(), cs.bytes.begin(), cs.bytes.end());
      out.push_back(kCustom);
      write_uleb128(out, body.size());
      out.insert(out.end(), body.begin(), body.end());
    }
  }

  static void name(std::vector<uint8_t>& out, const std::string& s) {
    write_uleb128(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
  }

  static void limits(std::vector<uint8_t>& out, const Limits& l) {
    out.push_back(l.max ? 0x01 : 0x00);
    write_uleb128(out, l.min);
    if (l.max) write_uleb128(out, *l.max);
  }

  static void val_type(std::vector<uint8_t>& out, ValType t) { out.push_back(static_cast<uint8_t>(t)); }

  static void global_type(std::vector<uint8_t>& out, const GlobalType& g) {
    val_type(out, g.type);
    out.push_back(g.is_mutable ? 0x01 : 0x00);
  }

  static void const_expr(std::vector<uint8_t>& out, const ConstExpr& e) {
    for (const auto& ins : e.instrs) instr(out, ins);
    out.push_back(static_cast<uint8_t>(Opcode::End));
  }

  template <typename T>
  static const T& imm(const Instr& ins) {
    if (const auto* p = std::get_if<T>(&ins.imm)) return *p;
    throw StructuralError("immediate does not match opcode " + std::string(to_string(ins.op)));
  }

  static void instr(std::vector<uint8_t>& out, const Instr& ins) {
    out.push_back(static_cast<uint8_t>(ins.op));
    switch (opcode_info(ins.op).imm) {
      case ImmKind::None: break;
      case ImmKind::Block: {
        const auto& b = imm<BlockSig>(ins);
        out.push_back(b.result ? static_cast<uint8_t>(*b.result) : kEmptyBlock);
        break;
      }
      case ImmKind::Label:
      case ImmKind::Func:
      case ImmKind::Local:
      case ImmKind::Global: write_uleb128(out, imm<uint32_t>(ins)); break;
      case ImmKind::BrTable: {
        const auto& t = imm<BrTableImm>(ins);
        write_uleb128(out, t.labels.size());
        for (auto l : t.labels) write_uleb128(out, l);
        write_uleb128(out, t.default_label);
        break;
      }
      case ImmKind::CallIndirect:
        write_uleb128(out, imm<uint32_t>(ins));
        out.push_back(0x00);
        break;
      case ImmKind::MemArg: {
        const auto& m = imm<MemArg>(ins);
        write_uleb128(out, m.align);
        write_uleb128(out, m.offset);
        break;
      }
      case ImmKind::MemReserved: out.push_back(0x00); break;
      case ImmKind::I32: write_sleb128(out, imm<int32_t>(ins)); break;
      case ImmKind::I64: write_sleb128(out, imm<int64_t>(ins)); break;
      case ImmKind::F32: {
        const uint32_t bits = imm<F32Bits>(ins).bits;
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
        break;
      }
      case ImmKind::F64: {
        const uint64_t bits = imm<F64Bits>(ins).bits;
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
        break;
      }
    }
  }

  bool build_section(uint8_t id, std::vector<uint8_t>& b) const {
    switch (id) {
      case kType:
        if (m_.types.empty()) return false;
        write_uleb128(b, m_.types.size());
        for (const auto& t : m_.types) {
          b.push_back(kFuncTypeTag);
          write_uleb128(b, t.params.size());
          for (auto p : t.params) val_type(b, p);
          write_uleb128(b, t.results.size());
          for (auto r : t.results) val_type(b, r);
        }
        return true;
      case kImport:
        if (m_.imports.empty()) return false;
        write_uleb128(b, m_.imports.size());
        for (const auto& imp : m_.imports) {
          name(b, imp.module);
          name(b, imp.field);
          b.push_back(static_cast<uint8_t>(imp.kind()));
          std::visit(
              [&](const auto& d) {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, FuncImport>) {
                  write_uleb128(b, d.type_index);
                } else if constexpr (std::is_same_v<D, TableType>) {
                  b.push_back(kFuncRefTag);
                  limits(b, d.limits);
                } else if constexpr (std::is_same_v<D, MemoryType>) {
                  limits(b, d.limits);
                } else {
                  global_type(b, d);
                }
              },
              imp.desc);
        }
        return true;
      case kFunction:
        if (m_.funcs.empty()) return false;
        write_uleb128(b, m_.funcs.size());
        for (const auto& f : m_.funcs) write_uleb128(b, f.type_index);
        return true;
      case kTable:
        if (m_.tables.empty()) return false;
        write_uleb128(b, m_.tables.size());
        for (const auto& t : m_.tables) {
          b.push_back(kFuncRefTag);
          limits(b, t.limits);
        }
        return true;
      case kMemory:
        if (m_.memories.empty()) return false;
        write_uleb128(b, m_.memories.size());
        for (const auto& mem : m_.memories) limits(b, mem.limits);
        return true;
      case kGlobal:
        if (m_.globals.empty()) return false;
        write_uleb128(b, m_.globals.size());
        for (const auto& g : m_.globals) {
          global_type(b, g.type);
          const_expr(b, g.init);
        }
        return true;
      case kExport:
        if (m_.exports.empty()) return false;
        write_uleb128(b, m_.exports.size());
        for (const auto& e : m_.exports) {
          name(b, e.name);
          b.push_back(static_cast<uint8_t>(e.kind));
          write_uleb128(b, e.index);
        }
        return true;
      case kStart:
        if (!m_.start) return false;
        write_uleb128(b, *m_.start);
        return true;
      case kElement:
        if (m_.elements.empty()) return false;
        write_uleb128(b, m_.elements.size());
        for (const auto& seg : m_.elements) {
          write_uleb128(b, seg.table_index);
          const_expr(b, seg.offset);
          write_uleb128(b, seg.func_indices.size());
          for (auto f : seg.func_indices) write_uleb128(b, f);
        }
        return true;
      case kCode:
        if (m_.funcs.empty()) return false;
        write_uleb128(b, m_.funcs.size());
        for (const auto& f : m_.funcs) {
          std::vector<uint8_t> body;
          std::vector<std::pair<uint32_t, ValType>> groups;
          for (auto t : f.locals) {
            if (!groups.empty() && groups.back().second == t) {
              ++groups.back().first;
            } else {
              groups.emplace_back(1, t);
            }
          }
          write_uleb128(body, groups.size());
          for (const auto& [n, t] : groups) {
            write_uleb128(body, n);
            val_type(body, t);
          }
          for (const auto& ins : f.body) instr(body, ins);
          write_uleb128(b, body.size());
          b.insert(b.end(), body.begin(), body.end());
        }
        return true;
      case kData:
        if (m_.data.empty()) return false;
        write_uleb128(b, m_.data.size());
        for (const auto& seg : m_.data) {
          write_uleb128(b, seg.memory_index);
          const_expr(b, seg.offset);
          write_uleb128(b, seg.bytes.size());
          b.insert(b.end(), seg.bytes.begin(), seg.bytes.end());
        }
        return true;
      default: return false;
    }
  }

  const Module& m_;
};

}  // namespace

std::string_view to_string(MalformedKind kind) {
  switch (kind) {
    case MalformedKind::BadMagic: return "bad-magic";
    case MalformedKind::BadVersion: return "bad-version";
    case MalformedKind::Truncated: return "truncated";
    case MalformedKind::OverlongVarint: return "overlong-varint";
    case MalformedKind::BadSectionOrder: return "bad-section-order";
    case MalformedKind::SectionSizeMismatch: return "section-size-mismatch";
    case MalformedKind::BadOpcode: return "bad-opcode";
    case MalformedKind::BadUtf8: return "bad-utf8";
    case MalformedKind::BadEncoding: return "bad-encoding";
  }
  return "?";
}

MalformedError::MalformedError(MalformedKind kind, size_t offset, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at offset " + std::to_string(offset) + ": " + detail),
      kind_(kind),
      offset_(offset),
      detail_(detail) {}

uint8_t ByteCursor::read_byte() {
  if (pos_ >= limit_) {
    fail(limit_ < bytes_.size() ? MalformedKind::SectionSizeMismatch : MalformedKind::Truncated,
         "unexpected end of input");
  }
  return bytes_[pos_++];
}

std::span<const uint8_t> ByteCursor::read_bytes(size_t n) {
  if (n > remaining()) {
    fail(limit_ < bytes_.size() ? MalformedKind::SectionSizeMismatch : MalformedKind::Truncated,
         "need " + std::to_string(n) + " bytes, " + std::to_string(remaining()) + " remain");
  }
  auto s = bytes_.subspan(pos_, n);
  pos_ += n;
  return s;
}

size_t ByteCursor::push_limit(size_t n) {
  const size_t old = limit_;
  if (n > remaining()) fail(MalformedKind::Truncated, "window exceeds remaining input");
  limit_ = pos_ + n;
  return old;
}

void ByteCursor::fail(MalformedKind kind, const std::string& detail) const {
  throw MalformedError(kind, pos_, detail);
}

uint64_t read_uleb128(ByteCursor& cursor, unsigned bits) {
  const unsigned max_bytes = (bits + 6) / 7;
  const size_t start = cursor.position();
  uint64_t result = 0;
  for (unsigned i = 0; i < max_bytes; ++i) {
    const uint8_t b = cursor.read_byte();
    const unsigned shift = 7 * i;
    result |= uint64_t{b & 0x7Fu} << shift;
    if (i == max_bytes - 1) {
      if (b & 0x80) throw MalformedError(MalformedKind::OverlongVarint, start, "unsigned LEB128 too long");
      // Bits above the target width must be zero.
      const unsigned used = bits - shift;
      if (used < 7 && (b >> used) != 0) {
        throw MalformedError(MalformedKind::OverlongVarint, start, "unsigned LEB128 exceeds bit width");
      }
      return result;
    }
    if (!(b & 0x80)) return result;
  }
  return result;
}

int64_t read_sleb128(ByteCursor& cursor, unsigned bits) {
  const unsigned max_bytes = (bits + 6) / 7;
  const size_t start = cursor.position();
  uint64_t result = 0;
  unsigned shift = 0;
  uint8_t b = 0;
  for (unsigned i = 0; i < max_bytes; ++i) {
    b = cursor.read_byte();
    result |= uint64_t{b & 0x7Fu} << shift;
    shift += 7;
    if (i == max_bytes - 1) {
      if (b & 0x80) throw MalformedError(MalformedKind::OverlongVarint, start, "signed LEB128 too long");
      // Unused high bits of the last byte must replicate the sign bit.
      const unsigned used = bits - (shift - 7);
      if (used < 7) {
        const uint8_t mask = static_cast<uint8_t>(0x7F & ~((1u << used) - 1));
        const bool negative = (b >> (used - 1)) & 1;
        if ((b & mask) != (negative ? mask : 0)) {
          throw MalformedError(MalformedKind::OverlongVarint, start, "signed LEB128 exceeds bit width");
        }
      }
      break;
    }
    if (!(b & 0x80)) break;
  }
  if (shift < 64 && (b & 0x40)) result |= ~uint64_t{0} << shift;
  if (bits == 32) return static_cast<int32_t>(static_cast<uint32_t>(result));
  return static_cast<int64_t>(result);
}

void write_uleb128(std::vector<uint8_t>& out, uint64_t value) {
  do {
    uint8_t b = value & 0x7F;
    value >>= 7;
    if (value != 0) b |= 0x80;
    out.push_back(b);
  } while (value != 0);
}

void write_sleb128(std::vector<uint8_t>& out, int64_t value) {
  for (;;) {
    const uint8_t b = value & 0x7F;
    value >>= 7;  // arithmetic shift
    const bool done = (value == 0 && !(b & 0x40)) || (value == -1 && (b & 0x40));
    out.push_back(done ? b : static_cast<uint8_t>(b | 0x80));
    if (done) return;
  }
}

Module decode_module(std::span<const uint8_t> bytes) { return Decoder(bytes).run(); }

std::vector<uint8_t> encode_module(const Module& module) { return Encoder(module).run(); }

}  // namespace wasmdesk
