// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/kprog.hpp"

#include <fstream>
#include <sstream>

namespace acsim::kprog {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') break;
    tokens.push_back(tok);
  }
  return tokens;
}

[[noreturn]] void parse_fail(size_t line_no, const std::string& msg) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + msg);
}

int64_t parse_int(const std::string& tok, size_t line_no) {
  try {
    size_t pos = 0;
    int64_t v = std::stoll(tok, &pos, 0);
    if (pos != tok.size()) parse_fail(line_no, "trailing characters in number: " + tok);
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    parse_fail(line_no, "expected a number, got: " + tok);
  }
}

uint64_t parse_u64(const std::string& tok, size_t line_no) {
  try {
    size_t pos = 0;
    uint64_t v = std::stoull(tok, &pos, 0);
    if (pos != tok.size()) parse_fail(line_no, "trailing characters in number: " + tok);
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    parse_fail(line_no, "expected an unsigned number, got: " + tok);
  }
}

uint32_t parse_u32(const std::string& tok, size_t line_no) {
  uint64_t v = parse_u64(tok, line_no);
  if (v > UINT32_MAX) parse_fail(line_no, "value does not fit 32 bits: " + tok);
  return static_cast<uint32_t>(v);
}

void expect_args(const std::vector<std::string>& t, size_t n, size_t line_no) {
  if (t.size() != n) {
    parse_fail(line_no, t[0] + " expects " + std::to_string(n - 1) + " arguments, got " +
                            std::to_string(t.size() - 1));
  }
}

DType parse_dtype(const std::string& tok, size_t line_no) {
  try {
    return dtype_from_string(tok);
  } catch (const Error& e) {
    parse_fail(line_no, e.what());
  }
}

Instruction parse_exec(const std::vector<std::string>& t, size_t line_no) {
  if (t.size() < 2) parse_fail(line_no, "EXEC expects a kernel kind");
  const std::string& kind = t[1];
  if (kind == "matmul") {
    expect_args(t, 10, line_no);
    ExecMatmul e;
    e.m = parse_u32(t[2], line_no);
    e.k = parse_u32(t[3], line_no);
    e.n = parse_u32(t[4], line_no);
    e.a_type = parse_dtype(t[5], line_no);
    e.b_type = parse_dtype(t[6], line_no);
    e.a_addr = parse_u64(t[7], line_no);
    e.b_addr = parse_u64(t[8], line_no);
    e.c_addr = parse_u64(t[9], line_no);
    return e;
  }
  if (kind == "im2col") {
    expect_args(t, 9, line_no);
    ExecIm2col e;
    e.h = parse_u32(t[2], line_no);
    e.w = parse_u32(t[3], line_no);
    e.c = parse_u32(t[4], line_no);
    e.kh = parse_u32(t[5], line_no);
    e.kw = parse_u32(t[6], line_no);
    e.in_addr = parse_u64(t[7], line_no);
    e.out_addr = parse_u64(t[8], line_no);
    return e;
  }
  if (kind == "maxpool") {
    expect_args(t, 10, line_no);
    ExecMaxPool e;
    e.dtype = parse_dtype(t[2], line_no);
    e.h = parse_u32(t[3], line_no);
    e.w = parse_u32(t[4], line_no);
    e.c = parse_u32(t[5], line_no);
    e.k = parse_u32(t[6], line_no);
    e.s = parse_u32(t[7], line_no);
    e.in_addr = parse_u64(t[8], line_no);
    e.out_addr = parse_u64(t[9], line_no);
    return e;
  }
  if (kind == "eltwise") {
    expect_args(t, 8, line_no);
    ExecEltwise e;
    try {
      e.func = golden::eltwise_func_from_string(t[2]);
    } catch (const Error& err) {
      parse_fail(line_no, err.what());
    }
    e.elems = parse_u64(t[3], line_no);
    e.in_type = parse_dtype(t[4], line_no);
    e.out_type = parse_dtype(t[5], line_no);
    e.in_addr = parse_u64(t[6], line_no);
    e.out_addr = parse_u64(t[7], line_no);
    return e;
  }
  parse_fail(line_no, "unknown EXEC kernel kind: " + kind);
}

}  // namespace

Program parse_program(const std::string& text) {
  Program prog;
  std::vector<Instruction>* current = nullptr;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = tokenize(line);
    if (t.empty()) continue;
    const std::string& op = t[0];
    if (op == "CORE") {
      expect_args(t, 2, line_no);
      uint32_t id = parse_u32(t[1], line_no);
      if (prog.cores.count(id)) parse_fail(line_no, "duplicate CORE section " + t[1]);
      current = &prog.cores[id];
      continue;
    }
    if (current == nullptr) parse_fail(line_no, "instruction before any CORE section");
    if (op == "CSRW") {
      expect_args(t, 4, line_no);
      current->push_back(CsrWriteInstr{parse_u32(t[1], line_no), parse_u32(t[2], line_no),
                                       static_cast<uint32_t>(parse_int(t[3], line_no))});
    } else if (op == "CSRR") {
      expect_args(t, 3, line_no);
      current->push_back(CsrReadInstr{parse_u32(t[1], line_no), parse_u32(t[2], line_no)});
    } else if (op == "WAIT") {
      expect_args(t, 2, line_no);
      current->push_back(WaitDeviceInstr{parse_u32(t[1], line_no)});
    } else if (op == "DMA") {
      expect_args(t, 7, line_no);
      current->push_back(DmaInstr{parse_u64(t[1], line_no), parse_u64(t[2], line_no),
                                  parse_u32(t[3], line_no), parse_int(t[4], line_no),
                                  parse_int(t[5], line_no), parse_u32(t[6], line_no)});
    } else if (op == "WDMA") {
      expect_args(t, 1, line_no);
      current->push_back(WaitDmaInstr{});
    } else if (op == "BAR") {
      expect_args(t, 2, line_no);
      current->push_back(BarrierInstr{parse_u32(t[1], line_no)});
    } else if (op == "EXEC") {
      current->push_back(parse_exec(t, line_no));
    } else if (op == "TAG") {
      expect_args(t, 2, line_no);
      current->push_back(TagInstr{t[1]});
    } else {
      parse_fail(line_no, "unknown opcode: " + op);
    }
  }
  return prog;
}

Program load_program(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open program file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str());
}

std::string to_text(const Instruction& instr) {
  std::ostringstream out;
  std::visit(
      [&](const auto& i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, CsrWriteInstr>) {
          out << "CSRW " << i.device << ' ' << i.reg << ' ' << static_cast<int32_t>(i.value);
        } else if constexpr (std::is_same_v<T, CsrReadInstr>) {
          out << "CSRR " << i.device << ' ' << i.reg;
        } else if constexpr (std::is_same_v<T, WaitDeviceInstr>) {
          out << "WAIT " << i.device;
        } else if constexpr (std::is_same_v<T, DmaInstr>) {
          out << "DMA 0x" << std::hex << i.src << " 0x" << i.dst << std::dec << ' '
              << i.row_bytes << ' ' << i.src_stride << ' ' << i.dst_stride << ' ' << i.rows;
        } else if constexpr (std::is_same_v<T, WaitDmaInstr>) {
          out << "WDMA";
        } else if constexpr (std::is_same_v<T, BarrierInstr>) {
          out << "BAR " << i.id;
        } else if constexpr (std::is_same_v<T, ExecMatmul>) {
          out << "EXEC matmul " << i.m << ' ' << i.k << ' ' << i.n << ' ' << to_string(i.a_type)
              << ' ' << to_string(i.b_type) << " 0x" << std::hex << i.a_addr << " 0x" << i.b_addr
              << " 0x" << i.c_addr << std::dec;
        } else if constexpr (std::is_same_v<T, ExecIm2col>) {
          out << "EXEC im2col " << i.h << ' ' << i.w << ' ' << i.c << ' ' << i.kh << ' ' << i.kw
              << " 0x" << std::hex << i.in_addr << " 0x" << i.out_addr << std::dec;
        } else if constexpr (std::is_same_v<T, ExecMaxPool>) {
          out << "EXEC maxpool " << to_string(i.dtype) << ' ' << i.h << ' ' << i.w << ' ' << i.c
              << ' ' << i.k << ' ' << i.s << " 0x" << std::hex << i.in_addr << " 0x" << i.out_addr
              << std::dec;
        } else if constexpr (std::is_same_v<T, ExecEltwise>) {
          out << "EXEC eltwise " << golden::to_string(i.func) << ' ' << i.elems << ' '
              << to_string(i.in_type) << ' ' << to_string(i.out_type) << " 0x" << std::hex
              << i.in_addr << " 0x" << i.out_addr << std::dec;
        } else if constexpr (std::is_same_v<T, TagInstr>) {
          out << "TAG " << i.name;
        }
      },
      instr);
  return out.str();
}

std::string serialize(const Program& program) {
  std::ostringstream out;
  for (const auto& [core, instrs] : program.cores) {
    out << "CORE " << core << '\n';
    for (const auto& instr : instrs) out << "  " << to_text(instr) << '\n';
  }
  return out.str();
}

void save_program(const Program& program, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ParseError, "cannot open for writing: " + path);
  out << serialize(program);
}

void validate(const Program& program, const ClusterConfig& config) {
  std::map<uint32_t, std::map<uint32_t, size_t>> barrier_counts;  // id -> core -> count
  for (const auto& [core_id, instrs] : program.cores) {
    const CoreConfig* core = config.find_core(core_id);
    if (core == nullptr) {
      throw Error(ErrorKind::DanglingReference,
                  "program references unknown core " + std::to_string(core_id));
    }
    auto check_device = [&](uint32_t dev) {
      if (config.find_accelerator(dev) == nullptr) {
        throw Error(ErrorKind::DanglingReference, "core " + std::to_string(core_id) +
                                                      " references unknown device " +
                                                      std::to_string(dev));
      }
      for (uint32_t owned : core->accelerator_ids) {
        if (owned == dev) return;
      }
      throw Error(ErrorKind::ValidationError, "core " + std::to_string(core_id) +
                                                  " does not control device " +
                                                  std::to_string(dev));
    };
    for (const auto& instr : instrs) {
      if (const auto* w = std::get_if<CsrWriteInstr>(&instr)) check_device(w->device);
      if (const auto* r = std::get_if<CsrReadInstr>(&instr)) check_device(r->device);
      if (const auto* w = std::get_if<WaitDeviceInstr>(&instr)) check_device(w->device);
      if (std::holds_alternative<DmaInstr>(instr) || std::holds_alternative<WaitDmaInstr>(instr)) {
        if (core->dma_ids.empty()) {
          throw Error(ErrorKind::ValidationError,
                      "core " + std::to_string(core_id) + " has no DMA engine");
        }
      }
      if (const auto* b = std::get_if<BarrierInstr>(&instr)) barrier_counts[b->id][core_id]++;
    }
  }
  for (const auto& [id, per_core] : barrier_counts) {
    size_t expected = per_core.begin()->second;
    for (const auto& [core_id, count] : per_core) {
      if (count != expected) {
        throw Error(ErrorKind::ValidationError,
                    "barrier " + std::to_string(id) + " occurs " + std::to_string(count) +
                        " times on core " + std::to_string(core_id) + " but " +
                        std::to_string(expected) + " times elsewhere");
      }
    }
  }
}

}  // namespace acsim::kprog
