// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/compiler.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <map>
#include <tuple>

#include <nlohmann/json.hpp>

#include "acsim/csr.hpp"
#include "acsim/error.hpp"

namespace acsim::compiler {
namespace {

using nlohmann::json;

constexpr uint64_t pad8(uint64_t bytes) { return (bytes + 7) & ~uint64_t{7}; }
constexpr uint64_t align64(uint64_t bytes) { return (bytes + 63) & ~uint64_t{63}; }
constexpr uint32_t ceil_div8(uint32_t v) { return (v + 7) / 8; }

// ---------------------------------------------------------------------------
// Modeled device timing.  These mirror the simulated devices' throughput so
// placement and instruction ordering can reason about costs without running.

double model_gemm_busy(uint32_t m, uint32_t k, uint32_t n) {
  const uint64_t cm = ceil_div8(m), cn = ceil_div8(n), ct = ceil_div8(k);
  const uint64_t tiles = cm * cn * ct;
  const uint64_t c_tiles = cm * cn;
  if (ct >= 2 || c_tiles == 1) return static_cast<double>(tiles + c_tiles + 1);
  return static_cast<double>(2 * tiles + tiles % 2);
}

double model_pool_busy(uint32_t win, uint32_t out_groups) {
  return 2.0 * win * out_groups + 6.0;
}

double model_descriptor(const kprog::DmaInstr& d, const ClusterConfig& config,
                        uint32_t engine_id) {
  const DmaConfig* engine = config.find_dma(engine_id);
  const uint64_t beat = engine ? engine->beat_width_bytes() : 64;
  const uint64_t bw = config.external_channel.bandwidth_bytes_per_cycle;
  const uint64_t beats_per_row = (d.row_bytes + beat - 1) / beat;
  const double per_beat = std::max<double>(1.0, static_cast<double>(beat) / static_cast<double>(bw));
  return 4.0 + static_cast<double>(d.rows) * static_cast<double>(beats_per_row) * per_beat;
}

// ---------------------------------------------------------------------------
// Internal IR.

enum class Layout { Dense, BlockedA, BlockedB, BlockedC };

const char* layout_name(Layout l) {
  switch (l) {
    case Layout::Dense: return "dense";
    case Layout::BlockedA: return "blocked_a";
    case Layout::BlockedB: return "blocked_b";
    case Layout::BlockedC: return "blocked_c";
  }
  return "?";
}

// One scratchpad buffer (possibly several parity copies of it).
struct SideBuf {
  Layout layout = Layout::Dense;
  uint64_t bytes = 0;                 // one copy
  std::vector<uint64_t> offsets;      // one per parity copy
  uint32_t depth = 1;
  uint32_t bm = 0, bk = 0, bn = 0;    // matmul dims behind a blocked layout

  bool allocated() const { return !offsets.empty(); }
  uint64_t addr(uint32_t iter) const {
    return kSpmBase + offsets[iter % offsets.size()];
  }
  uint64_t off(uint32_t iter) const { return offsets[iter % offsets.size()]; }
};

struct TensorInfo {
  TensorDecl decl;
  bool synthetic = false;
  SideBuf prod;        // written by the producing task
  SideBuf cons;        // read by consumers (aliases prod unless staged/ingested)
  bool consumed = false;
  bool staged = false;  // external round trip between producer and consumers
  bool needs_prod = false, needs_cons = false, cons_aliases_prod = false;
  bool has_slot = false;
  uint64_t slot_addr = 0, slot_stride = 0;
  uint32_t slot_copies = 1;
};

struct Task {
  enum class Kind {
    GemmMatmul,
    GemmConv,
    PoolAccel,
    ScalarMatmul,
    ScalarIm2col,
    ScalarPool,
    ScalarEltwise,
    TransferIn,
    TransferOut,
  };
  Kind kind;
  std::string id, tag, unit;
  uint32_t core = 0;
  uint32_t device = 0;  // accelerator id or dma engine id where applicable
  std::vector<std::string> ins;
  std::string out;      // produced tensor (compute) or moved tensor (transfers)
  // Compute dims.
  uint32_t m = 0, k = 0, n = 0;
  uint32_t h = 0, w = 0, c = 0, kh = 0, kw = 0;
  uint32_t win = 0, stride = 0;
  golden::EltwiseFunc func = golden::EltwiseFunc::Identity;
  DType in_dtype = DType::I8, out_dtype = DType::I8;
  double modeled = 0.0;
  std::vector<size_t> preds;
  int stage = 0;

  bool is_transfer() const { return kind == Kind::TransferIn || kind == Kind::TransferOut; }
  bool is_accel() const {
    return kind == Kind::GemmMatmul || kind == Kind::GemmConv || kind == Kind::PoolAccel;
  }
  bool is_scalar() const { return !is_transfer() && !is_accel(); }
};

struct Plan {
  const Workload* workload = nullptr;
  const ClusterConfig* config = nullptr;
  CompileOptions options;
  std::map<std::string, TensorInfo> tensors;
  std::vector<Task> tasks;
  std::map<std::string, size_t> producer_task;  // tensor -> compute task index
  int max_stage = 0;
  uint64_t spm_used = 0, ext_used = 0;
};

TensorInfo& info_of(Plan& plan, const std::string& id) {
  auto it = plan.tensors.find(id);
  if (it == plan.tensors.end()) internal_error("no tensor info for '" + id + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// Loop nests for the accelerators.

LoopNest blocked_a_nest(uint32_t m, uint32_t k, uint32_t n, uint64_t off) {
  const uint32_t cm = ceil_div8(m), cn = ceil_div8(n), ct = ceil_div8(k);
  return LoopNest{off,
                  {LoopDim{cn, 0},
                   LoopDim{cm, static_cast<int64_t>(64) * ct},
                   LoopDim{ct, 64}}};
}

LoopNest blocked_b_nest(uint32_t m, uint32_t k, uint32_t n, uint64_t off) {
  const uint32_t cm = ceil_div8(m), cn = ceil_div8(n), ct = ceil_div8(k);
  return LoopNest{off,
                  {LoopDim{cn, 64},
                   LoopDim{cm, 0},
                   LoopDim{ct, static_cast<int64_t>(64) * cn}}};
}

LoopNest blocked_c_nest(uint32_t m, uint32_t n, uint64_t off) {
  const uint32_t cm = ceil_div8(m), cn = ceil_div8(n);
  return LoopNest{off,
                  {LoopDim{cn, static_cast<int64_t>(256) * cm},
                   LoopDim{cm, 256}}};
}

// Window taps over the dense image replace a materialized patch matrix: one
// 64-byte grant covers the (dy, dx) tap of eight adjacent output pixels.
LoopNest conv_a_nest(uint32_t h, uint32_t w, uint32_t kh, uint32_t kw, uint64_t img_off) {
  const uint32_t ho = h - kh + 1;
  const uint32_t wo = w - kw + 1;
  const int64_t row = static_cast<int64_t>(w) * 8;
  return LoopNest{img_off,
                  {LoopDim{ho, row},
                   LoopDim{wo / 8, 64},
                   LoopDim{kh, row},
                   LoopDim{kw, 8}}};
}

std::vector<kprog::Instruction> launch_with_nests(uint32_t device_id,
                                                  std::array<uint32_t, 3> params,
                                                  const std::vector<LoopNest>& nests) {
  std::vector<kprog::Instruction> out;
  for (uint32_t i = 0; i < params.size(); ++i) {
    out.push_back(kprog::CsrWriteInstr{device_id, csr::kRegParam0 + i, params[i]});
  }
  for (uint32_t ch = 0; ch < nests.size(); ++ch) {
    for (const auto& [reg, value] : csr::encode_channel(ch, nests[ch])) {
      out.push_back(kprog::CsrWriteInstr{device_id, reg, value});
    }
  }
  out.push_back(kprog::CsrWriteInstr{device_id, csr::kRegLaunch, 1});
  return out;
}

struct PoolShape {
  uint32_t elem = 1;
  uint32_t out_groups = 0;
  LoopNest in, out;
};

PoolShape pool_shape(uint32_t h, uint32_t w, DType dtype, uint64_t in_off, uint64_t out_off) {
  PoolShape s;
  s.elem = dtype_size(dtype);
  const int64_t row_bytes = static_cast<int64_t>(w) * 8 * s.elem;
  s.in.base = in_off;
  s.in.dims = {LoopDim{h / 2, 2 * row_bytes},
               LoopDim{w * s.elem / 16, 128},
               LoopDim{2, 64},
               LoopDim{2, row_bytes}};
  s.out_groups = (h / 2) * (w / 2) * 8 * s.elem / 64;
  s.out.base = out_off;
  s.out.dims = {LoopDim{s.out_groups, 64}};
  return s;
}

// ---------------------------------------------------------------------------
// Eligibility: which nodes the accelerators can run directly.

bool sole_consumer(const Workload& w, const std::string& tensor, const std::string& node) {
  auto consumers = w.consumers_of(tensor);
  return consumers.size() == 1 && consumers[0]->id == node;
}

// A matmul (or flattened fully-connected layer) maps onto the matrix unit
// when its operands can be presented in the blocked layouts: gathered from
// external memory, or already block-identical dense (K == 8 for A, N == 8
// for B and C).
bool gemm_matmul_eligible(const Workload& w, const NodeDecl& node, uint32_t m, uint32_t k,
                          uint32_t n) {
  (void)m;
  const TensorDecl& a = *w.find_tensor(node.inputs[0]);
  const TensorDecl& b = *w.find_tensor(node.inputs[1]);
  const TensorDecl& c = *w.find_tensor(node.output);
  if (a.dtype != DType::I8 || b.dtype != DType::I8) return false;
  if (k < 8 || k % 8 != 0 || n < 8 || n % 8 != 0) return false;
  const bool a_ok = k == 8 || (a.home == TensorHome::External && !a.produced &&
                               sole_consumer(w, a.id, node.id));
  const bool b_ok = n == 8 || (b.home == TensorHome::External && !b.produced &&
                               sole_consumer(w, b.id, node.id));
  const bool c_ok = n == 8 || (c.home == TensorHome::External && w.consumers_of(c.id).empty());
  return a_ok && b_ok && c_ok;
}

// A stride-1 convolution maps onto the matrix unit without materializing
// patches when one image row group feeds the streamer whole: 8 input
// channels (one pixel per bank word octet), output width a multiple of 8
// (one A block per grant), and 8 filters (dense output tiles).
bool gemm_conv_eligible(const NodeDecl& node, const TensorDecl& in, const TensorDecl& w) {
  const uint32_t wo = in.shape[1] - w.shape[1] + 1;
  return node.stride == 1 && in.shape[2] == 8 && w.shape[3] == 8 && wo % 8 == 0;
}

bool pool_eligible(const NodeDecl& node, const TensorDecl& in) {
  const uint32_t elem = dtype_size(in.dtype);
  return node.window == 2 && node.stride == 2 && in.shape[2] == 8 &&
         in.shape[0] % 2 == 0 && (in.shape[1] * elem) % 16 == 0;
}

// The code generator is written against the standard datapath geometry:
// 8x8x8 matmul blocks behind 64-byte read grants and 256-byte write groups,
// and 64-byte pooling groups.  Units configured differently fall back to
// scalar execution rather than getting miscompiled programs.
bool unit_usable(const AcceleratorConfig& accel) {
  if (accel.kind == AcceleratorKind::Gemm) {
    return accel.gemm.mu == 8 && accel.gemm.ku == 8 && accel.gemm.nu == 8 &&
           accel.channels.size() == 3 && accel.channels[0].width_bits == 512 &&
           accel.channels[1].width_bits == 512 && accel.channels[2].width_bits == 2048;
  }
  return accel.maxpool.lanes == 8 && accel.channels.size() == 2 &&
         accel.channels[0].width_bits == 512 && accel.channels[1].width_bits == 512;
}

const AcceleratorConfig* first_accel_of_kind(const ClusterConfig& config, AcceleratorKind kind) {
  const AcceleratorConfig* best = nullptr;
  for (const auto& accel : config.accelerators) {
    if (accel.kind == kind && unit_usable(accel) && (!best || accel.id < best->id)) {
      best = &accel;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// DMA descriptor generation for transfers.

uint64_t slot_addr(const TensorInfo& t, uint32_t iter) {
  return t.slot_addr + (t.slot_copies > 1 ? static_cast<uint64_t>(iter) * t.slot_stride : 0);
}

std::vector<kprog::DmaInstr> transfer_descriptors(const TensorInfo& t, bool ingest,
                                                  uint32_t iter) {
  const SideBuf& buf = ingest ? t.cons : t.prod;
  const uint64_t ext = slot_addr(t, iter);
  const uint64_t spm = buf.addr(iter);
  std::vector<kprog::DmaInstr> out;
  if (buf.layout == Layout::Dense) {
    const uint32_t bytes = static_cast<uint32_t>(pad8(t.decl.bytes()));
    if (ingest) {
      out.push_back(kprog::DmaInstr{ext, spm, bytes, 0, 0, 1});
    } else {
      out.push_back(kprog::DmaInstr{spm, ext, bytes, 0, 0, 1});
    }
    return out;
  }
  if (buf.layout == Layout::BlockedA) {
    // Dense external [M x K] int8 -> 64-byte blocks [m-tile][k-tile].
    const uint32_t m = buf.bm, k = buf.bk;
    const uint32_t cm = ceil_div8(m), ct = ceil_div8(k);
    for (uint32_t tm = 0; tm < cm; ++tm) {
      const uint32_t rows = std::min<uint32_t>(8, m - tm * 8);
      for (uint32_t tk = 0; tk < ct; ++tk) {
        out.push_back(kprog::DmaInstr{ext + static_cast<uint64_t>(tm) * 8 * k + tk * 8,
                                      spm + (static_cast<uint64_t>(tm) * ct + tk) * 64, 8,
                                      static_cast<int64_t>(k), 8, rows});
      }
    }
    return out;
  }
  if (buf.layout == Layout::BlockedB) {
    // Dense external [K x N] int8 -> 64-byte blocks [k-tile][n-tile].
    const uint32_t k = buf.bk, n = buf.bn;
    const uint32_t ct = ceil_div8(k), cn = ceil_div8(n);
    for (uint32_t tk = 0; tk < ct; ++tk) {
      const uint32_t rows = std::min<uint32_t>(8, k - tk * 8);
      for (uint32_t tn = 0; tn < cn; ++tn) {
        out.push_back(kprog::DmaInstr{ext + static_cast<uint64_t>(tk) * 8 * n + tn * 8,
                                      spm + (static_cast<uint64_t>(tk) * cn + tn) * 64, 8,
                                      static_cast<int64_t>(n), 8, rows});
      }
    }
    return out;
  }
  // BlockedC: 256-byte blocks [n-tile][m-tile] -> dense external [M x N] i32.
  const uint32_t m = buf.bm, n = buf.bn;
  const uint32_t cm = ceil_div8(m), cn = ceil_div8(n);
  for (uint32_t tn = 0; tn < cn; ++tn) {
    for (uint32_t tm = 0; tm < cm; ++tm) {
      const uint32_t rows = std::min<uint32_t>(8, m - tm * 8);
      out.push_back(kprog::DmaInstr{spm + (static_cast<uint64_t>(tn) * cm + tm) * 256,
                                    ext + (static_cast<uint64_t>(tm) * 8 * n + tn * 8) * 4, 32,
                                    32, static_cast<int64_t>(n) * 4, rows});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pass 1: lower + place the graph nodes onto devices.

uint32_t scalar_core(const ClusterConfig& config, uint32_t& rr) {
  const uint32_t core = config.control_cores[rr % config.control_cores.size()].id;
  ++rr;
  return core;
}

void lower_and_place(Plan& plan) {
  const Workload& w = *plan.workload;
  const ClusterConfig& config = *plan.config;
  const ScalarCostModel& costs = config.scalar_cost_model;
  const AcceleratorConfig* gemm = first_accel_of_kind(config, AcceleratorKind::Gemm);
  const AcceleratorConfig* pool = first_accel_of_kind(config, AcceleratorKind::MaxPool);
  uint32_t rr = 0;

  // Declared tensors first, so lowering-invented names cannot collide.
  for (const auto& decl : w.tensors) {
    TensorInfo info;
    info.decl = decl;
    plan.tensors.emplace(decl.id, std::move(info));
  }

  auto add_compute = [&](Task task) {
    plan.producer_task[task.out] = plan.tasks.size();
    plan.tasks.push_back(std::move(task));
  };
  auto scalar_task = [&](Task::Kind kind, const std::string& id, const std::string& tag) {
    Task t;
    t.kind = kind;
    t.id = id;
    t.tag = tag;
    t.core = scalar_core(config, rr);
    t.unit = "core" + std::to_string(t.core);
    return t;
  };
  auto accel_task = [&](Task::Kind kind, const std::string& id, const std::string& tag,
                        const AcceleratorConfig& accel) {
    Task t;
    t.kind = kind;
    t.id = id;
    t.tag = tag;
    t.device = accel.id;
    t.core = config.owner_core_of_accelerator(accel.id);
    t.unit = (accel.kind == AcceleratorKind::Gemm ? "gemm" : "maxpool") +
             std::to_string(accel.id);
    return t;
  };
  // A synthetic scratchpad tensor invented by lowering (e.g. a patch matrix).
  auto synth_tensor = [&](std::string id, std::vector<uint32_t> shape, DType dtype) {
    while (plan.tensors.count(id)) id += "+";
    TensorDecl decl;
    decl.id = id;
    decl.shape = std::move(shape);
    decl.dtype = dtype;
    decl.home = TensorHome::Spm;
    decl.iterated = true;
    decl.produced = true;
    TensorInfo info;
    info.decl = decl;
    info.synthetic = true;
    plan.tensors.emplace(id, std::move(info));
    return id;
  };

  for (const NodeDecl* node : w.topo_order()) {
    switch (node->op) {
      case OpKind::Matmul:
      case OpKind::FullyConnected: {
        const TensorDecl& a = *w.find_tensor(node->inputs[0]);
        const TensorDecl& b = *w.find_tensor(node->inputs[1]);
        const bool fc = node->op == OpKind::FullyConnected;
        const uint32_t m = fc ? 1 : a.shape[0];
        const uint32_t k = fc ? static_cast<uint32_t>(a.elems()) : a.shape[1];
        const uint32_t n = b.shape[1];
        const double scalar_cost = golden::scalar_matmul_cycles(m, k, n, costs);
        if (gemm && gemm_matmul_eligible(w, *node, m, k, n) &&
            model_gemm_busy(m, k, n) <= scalar_cost) {
          Task t = accel_task(Task::Kind::GemmMatmul, node->id, node->id, *gemm);
          t.m = m;
          t.k = k;
          t.n = n;
          t.ins = node->inputs;
          t.out = node->output;
          t.modeled = model_gemm_busy(m, k, n);
          add_compute(std::move(t));
        } else {
          Task t = scalar_task(Task::Kind::ScalarMatmul, node->id, node->id);
          t.m = m;
          t.k = k;
          t.n = n;
          t.in_dtype = a.dtype;
          t.ins = node->inputs;
          t.out = node->output;
          t.modeled = scalar_cost;
          add_compute(std::move(t));
        }
        break;
      }
      case OpKind::Conv2d: {
        const TensorDecl& in = *w.find_tensor(node->inputs[0]);
        const TensorDecl& wt = *w.find_tensor(node->inputs[1]);
        const uint32_t kh = wt.shape[0], kw = wt.shape[1];
        const uint32_t ho = in.shape[0] - kh + 1, wo = in.shape[1] - kw + 1;
        const uint32_t m = ho * wo, k = kh * kw * in.shape[2], n = wt.shape[3];
        const double scalar_cost = golden::scalar_im2col_cycles(
                                       static_cast<uint64_t>(m) * k, costs) +
                                   golden::scalar_matmul_cycles(m, k, n, costs);
        if (gemm && gemm_conv_eligible(*node, in, wt) &&
            model_gemm_busy(m, k, n) <= scalar_cost) {
          Task t = accel_task(Task::Kind::GemmConv, node->id, node->id, *gemm);
          t.m = m;
          t.k = k;
          t.n = n;
          t.h = in.shape[0];
          t.w = in.shape[1];
          t.c = in.shape[2];
          t.kh = kh;
          t.kw = kw;
          t.ins = node->inputs;
          t.out = node->output;
          t.modeled = model_gemm_busy(m, k, n);
          add_compute(std::move(t));
        } else {
          // Materialize the patch matrix on a core, then multiply.
          const std::string patches =
              synth_tensor(node->id + ".patches", {m, k}, DType::I8);
          Task t1 = scalar_task(Task::Kind::ScalarIm2col, node->id + ".im2col", node->id);
          t1.h = in.shape[0];
          t1.w = in.shape[1];
          t1.c = in.shape[2];
          t1.kh = kh;
          t1.kw = kw;
          t1.ins = {node->inputs[0]};
          t1.out = patches;
          t1.modeled = golden::scalar_im2col_cycles(static_cast<uint64_t>(m) * k, costs);
          add_compute(std::move(t1));
          Task t2 = scalar_task(Task::Kind::ScalarMatmul, node->id + ".mm", node->id);
          t2.m = m;
          t2.k = k;
          t2.n = n;
          t2.in_dtype = DType::I8;
          t2.ins = {patches, node->inputs[1]};
          t2.out = node->output;
          t2.modeled = golden::scalar_matmul_cycles(m, k, n, costs);
          add_compute(std::move(t2));
        }
        break;
      }
      case OpKind::MaxPool2d: {
        const TensorDecl& in = *w.find_tensor(node->inputs[0]);
        const uint32_t ho = (in.shape[0] - node->window) / node->stride + 1;
        const uint32_t wo = (in.shape[1] - node->window) / node->stride + 1;
        const double scalar_cost =
            golden::scalar_maxpool_cycles(ho, wo, in.shape[2], node->window, costs);
        const uint32_t groups = in.shape[0] / 2 * (in.shape[1] / 2) * dtype_size(in.dtype) / 8;
        if (pool && pool_eligible(*node, in) &&
            model_pool_busy(node->window, groups) <= scalar_cost) {
          Task t = accel_task(Task::Kind::PoolAccel, node->id, node->id, *pool);
          t.h = in.shape[0];
          t.w = in.shape[1];
          t.c = in.shape[2];
          t.win = node->window;
          t.stride = node->stride;
          t.in_dtype = in.dtype;
          t.ins = node->inputs;
          t.out = node->output;
          t.modeled = model_pool_busy(node->window, groups);
          add_compute(std::move(t));
        } else {
          Task t = scalar_task(Task::Kind::ScalarPool, node->id, node->id);
          t.h = in.shape[0];
          t.w = in.shape[1];
          t.c = in.shape[2];
          t.win = node->window;
          t.stride = node->stride;
          t.in_dtype = in.dtype;
          t.ins = node->inputs;
          t.out = node->output;
          t.modeled = scalar_cost;
          add_compute(std::move(t));
        }
        break;
      }
      case OpKind::Eltwise: {
        const TensorDecl& in = *w.find_tensor(node->inputs[0]);
        Task t = scalar_task(Task::Kind::ScalarEltwise, node->id, node->id);
        t.func = node->func;
        t.in_dtype = in.dtype;
        t.out_dtype = w.find_tensor(node->output)->dtype;
        t.ins = node->inputs;
        t.out = node->output;
        t.modeled = golden::scalar_eltwise_cycles(in.elems(), costs);
        add_compute(std::move(t));
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Pass 2: buffer layouts, staging, transfer tasks, dependencies.

uint32_t engine_for_core(const ClusterConfig& config, uint32_t core_id, uint32_t* owner) {
  const CoreConfig* core = config.find_core(core_id);
  if (core && !core->dma_ids.empty()) {
    *owner = core_id;
    return core->dma_ids[0];
  }
  for (const auto& any : config.control_cores) {
    if (!any.dma_ids.empty()) {
      *owner = any.id;
      return any.dma_ids[0];
    }
  }
  throw Error(ErrorKind::ValidationError,
              "the workload needs external transfers but the cluster has no DMA engine");
}

void grow(SideBuf& buf, Layout layout, uint64_t bytes) {
  if (buf.bytes != 0 && buf.layout != layout) {
    throw Error(ErrorKind::UnsupportedOp,
                "conflicting scratchpad layouts requested for one tensor");
  }
  buf.layout = layout;
  buf.bytes = std::max(buf.bytes, bytes);
}

void plan_buffers_and_transfers(Plan& plan) {
  const ClusterConfig& config = *plan.config;

  // Residency: which sides exist and whether an external round trip splits
  // producer from consumers.
  for (auto& [id, t] : plan.tensors) {
    t.consumed = !plan.workload->consumers_of(id).empty() ||
                 (t.synthetic /* consumed by construction */);
    const bool produced = t.decl.produced;
    const bool external = t.decl.home == TensorHome::External;
    t.needs_prod = produced;
    t.staged = produced && external && t.consumed;
    t.needs_cons = t.consumed && (t.staged || (!produced && external));
    t.cons_aliases_prod = t.consumed && produced && !t.staged;
    t.has_slot = external;
    if (!produced && !external && t.decl.iterated && plan.options.batch > 1) {
      throw Error(ErrorKind::ValidationError,
                  id + ": an iterated graph input must live in external memory");
    }
  }

  // Default footprints; device-specific layouts below.  A non-produced
  // scratchpad tensor is preloaded into the initial image, so it owns a
  // consumer-side buffer even without an ingest transfer.
  for (auto& [id, t] : plan.tensors) {
    const uint64_t dense = pad8(t.decl.bytes());
    if (t.needs_prod) grow(t.prod, Layout::Dense, dense);
    if (t.consumed || (!t.decl.produced && t.decl.home == TensorHome::Spm)) {
      grow(t.cons, Layout::Dense, dense);
    }
  }

  // Layout requirements from placement.  Blocked buffers cover whole 8x8
  // blocks, so a ragged-M operand keeps zeroed pad rows that fall through
  // the datapath into pad rows of the result.
  for (const Task& task : plan.tasks) {
    switch (task.kind) {
      case Task::Kind::GemmMatmul: {
        TensorInfo& a = info_of(plan, task.ins[0]);
        TensorInfo& b = info_of(plan, task.ins[1]);
        TensorInfo& c = info_of(plan, task.out);
        const uint64_t cm = ceil_div8(task.m), cn = ceil_div8(task.n), ct = ceil_div8(task.k);
        grow(a.cons, task.k > 8 ? Layout::BlockedA : Layout::Dense, cm * ct * 64);
        grow(b.cons, task.n > 8 ? Layout::BlockedB : Layout::Dense, ct * cn * 64);
        grow(c.prod, task.n > 8 ? Layout::BlockedC : Layout::Dense, cn * cm * 256);
        a.cons.bm = task.m;
        a.cons.bk = task.k;
        b.cons.bk = task.k;
        b.cons.bn = task.n;
        c.prod.bm = task.m;
        c.prod.bn = task.n;
        if (c.cons_aliases_prod) grow(c.cons, c.prod.layout, c.prod.bytes);
        break;
      }
      case Task::Kind::GemmConv: {
        TensorInfo& b = info_of(plan, task.ins[1]);
        TensorInfo& c = info_of(plan, task.out);
        const uint32_t cm = ceil_div8(task.m), ct = ceil_div8(task.k);
        grow(b.cons, Layout::Dense, static_cast<uint64_t>(ct) * 64);
        grow(c.prod, Layout::Dense, static_cast<uint64_t>(cm) * 256);
        if (c.cons_aliases_prod) grow(c.cons, Layout::Dense, c.prod.bytes);
        break;
      }
      default:
        break;
    }
  }

  // Transfer tasks.
  auto add_transfer = [&](const std::string& tensor, bool ingest, uint32_t core_hint) {
    Task t;
    t.kind = ingest ? Task::Kind::TransferIn : Task::Kind::TransferOut;
    t.id = tensor + (ingest ? ".in" : ".out");
    t.tag = "io." + tensor;
    t.out = tensor;
    uint32_t owner = 0;
    t.device = engine_for_core(config, core_hint, &owner);
    t.core = owner;
    t.unit = "dma" + std::to_string(t.device);
    plan.tasks.push_back(std::move(t));
    return plan.tasks.size() - 1;
  };
  auto first_consumer_core = [&](const std::string& tensor) -> uint32_t {
    for (const Task& task : plan.tasks) {
      if (!task.is_transfer() &&
          std::find(task.ins.begin(), task.ins.end(), tensor) != task.ins.end()) {
        return task.core;
      }
    }
    return config.control_cores[0].id;
  };

  std::map<std::string, size_t> ingest_task, egress_task;
  // Iterate over a name snapshot: add_transfer mutates plan.tasks only.
  std::vector<std::string> names;
  for (const auto& [id, t] : plan.tensors) names.push_back(id);
  for (const auto& id : names) {
    TensorInfo& t = plan.tensors.at(id);
    const bool consumed_by_compute = [&] {
      for (const Task& task : plan.tasks) {
        if (!task.is_transfer() &&
            std::find(task.ins.begin(), task.ins.end(), id) != task.ins.end()) {
          return true;
        }
      }
      return false;
    }();
    if (!t.decl.produced && t.has_slot && consumed_by_compute) {
      ingest_task[id] = add_transfer(id, true, first_consumer_core(id));
    } else if (t.staged) {
      const size_t out_idx =
          add_transfer(id, false, plan.tasks[plan.producer_task.at(id)].core);
      egress_task[id] = out_idx;
      ingest_task[id] = add_transfer(id, true, first_consumer_core(id));
    } else if (t.decl.produced && t.has_slot) {
      egress_task[id] = add_transfer(id, false, plan.tasks[plan.producer_task.at(id)].core);
    }
  }

  // Dependencies.
  for (size_t i = 0; i < plan.tasks.size(); ++i) {
    Task& task = plan.tasks[i];
    if (task.kind == Task::Kind::TransferIn) {
      auto staged = egress_task.find(task.out);
      if (staged != egress_task.end()) task.preds.push_back(staged->second);
    } else if (task.kind == Task::Kind::TransferOut) {
      task.preds.push_back(plan.producer_task.at(task.out));
    } else {
      for (const std::string& in : task.ins) {
        auto via_ingest = ingest_task.find(in);
        if (via_ingest != ingest_task.end()) {
          task.preds.push_back(via_ingest->second);
        } else if (auto p = plan.producer_task.find(in); p != plan.producer_task.end()) {
          task.preds.push_back(p->second);
        }
      }
    }
  }

  // Transfer cost models (descriptors depend only on shapes, not iteration).
  for (Task& task : plan.tasks) {
    if (!task.is_transfer()) continue;
    TensorInfo probe = plan.tensors.at(task.out);
    SideBuf& side = task.kind == Task::Kind::TransferIn ? probe.cons : probe.prod;
    if (!side.allocated()) side.offsets = {0};
    probe.slot_addr = kExtBase;
    double cost = 0;
    for (const auto& d :
         transfer_descriptors(probe, task.kind == Task::Kind::TransferIn, 0)) {
      cost += model_descriptor(d, config, task.device);
    }
    task.modeled = cost;
  }
}

// ---------------------------------------------------------------------------
// Pass 3: schedule stages.

std::vector<size_t> topo_task_order(const Plan& plan) {
  const size_t n = plan.tasks.size();
  std::vector<size_t> order;
  std::vector<bool> done(n, false);
  for (size_t emitted = 0; emitted < n; ++emitted) {
    bool progressed = false;
    for (size_t i = 0; i < n && !progressed; ++i) {
      if (done[i]) continue;
      const auto& preds = plan.tasks[i].preds;
      if (std::all_of(preds.begin(), preds.end(), [&](size_t p) { return done[p]; })) {
        order.push_back(i);
        done[i] = true;
        progressed = true;
      }
    }
    if (!progressed) internal_error("task graph has a cycle");
  }
  return order;
}

void assign_stages(Plan& plan) {
  const std::vector<size_t> order = topo_task_order(plan);
  if (plan.options.mode == ScheduleMode::Sequential) {
    int s = 0;
    for (size_t idx : order) plan.tasks[idx].stage = s++;
    plan.max_stage = s - 1;
    return;
  }
  // As soon as possible: consecutive tasks on one unit share a step, a hop to
  // another unit costs a step.
  for (size_t idx : order) {
    Task& t = plan.tasks[idx];
    t.stage = 0;
    for (size_t p : t.preds) {
      const int delta = plan.tasks[p].unit == t.unit ? 0 : 1;
      t.stage = std::max(t.stage, plan.tasks[p].stage + delta);
    }
  }
  // Then as late as possible (sinks pinned), which shortens buffer lifetimes
  // and thus the parity depth the allocator must provide.
  std::vector<std::vector<size_t>> succs(plan.tasks.size());
  for (size_t i = 0; i < plan.tasks.size(); ++i) {
    for (size_t p : plan.tasks[i].preds) succs[p].push_back(i);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Task& t = plan.tasks[*it];
    if (succs[*it].empty()) continue;
    int late = INT32_MAX;
    for (size_t s : succs[*it]) {
      const int delta = plan.tasks[s].unit == t.unit ? 0 : 1;
      late = std::min(late, plan.tasks[s].stage - delta);
    }
    t.stage = late;  // never below the ASAP level, by induction
  }
  plan.max_stage = 0;
  for (const Task& t : plan.tasks) plan.max_stage = std::max(plan.max_stage, t.stage);
}

// Parity depth: a buffer rewritten every iteration must hold enough copies to
// cover the stage distance to its furthest reader.
void assign_depths(Plan& plan) {
  if (plan.options.mode == ScheduleMode::Sequential) return;
  auto writer_of = [&](const std::string& tensor, bool cons_side) -> const Task* {
    for (const Task& t : plan.tasks) {
      if (cons_side) {
        if (t.kind == Task::Kind::TransferIn && t.out == tensor) return &t;
      } else {
        if (!t.is_transfer() && t.out == tensor) return &t;
      }
    }
    return nullptr;
  };
  for (auto& [id, t] : plan.tensors) {
    // Producer-side buffer: read by the egress transfer or by consumers.
    if (t.needs_prod) {
      const Task* wtr = writer_of(id, false);
      int gap = 0;
      for (const Task& rd : plan.tasks) {
        const bool reads = (rd.kind == Task::Kind::TransferOut && rd.out == id) ||
                           (!rd.is_transfer() && !t.staged &&
                            std::find(rd.ins.begin(), rd.ins.end(), id) != rd.ins.end());
        if (reads && wtr) gap = std::max(gap, rd.stage - wtr->stage);
      }
      t.prod.depth = static_cast<uint32_t>(gap) + 1;
    }
    // Consumer-side buffer (staged or ingested): rewritten per iteration too.
    if (t.needs_cons) {
      const Task* wtr = writer_of(id, true);
      int gap = 0;
      for (const Task& rd : plan.tasks) {
        if (!rd.is_transfer() &&
            std::find(rd.ins.begin(), rd.ins.end(), id) != rd.ins.end() && wtr) {
          gap = std::max(gap, rd.stage - wtr->stage);
        }
      }
      t.cons.depth = static_cast<uint32_t>(gap) + 1;
    }
    if (t.cons_aliases_prod) t.cons.depth = t.prod.depth;
  }
}

// ---------------------------------------------------------------------------
// Pass 4: allocation and initial images.

void allocate(Plan& plan) {
  const uint64_t capacity = plan.config->spm.capacity_bytes();
  uint64_t spm = 0;
  auto take_spm = [&](SideBuf& buf, const std::string& tensor) {
    buf.offsets.clear();
    for (uint32_t i = 0; i < buf.depth; ++i) {
      const uint64_t off = align64(spm);
      if (off + buf.bytes > capacity) {
        throw Error(ErrorKind::CapacityExceeded,
                    "scratchpad cannot hold tensor '" + tensor + "' (" +
                        std::to_string(buf.bytes) + " bytes, copy " + std::to_string(i + 1) +
                        " of " + std::to_string(buf.depth) + ")");
      }
      buf.offsets.push_back(off);
      spm = off + buf.bytes;
    }
  };
  uint64_t ext = 0;
  // Declaration order keeps images stable and reports readable.
  auto alloc_tensor = [&](TensorInfo& t) {
    if (t.needs_prod) take_spm(t.prod, t.decl.id);
    if (t.cons_aliases_prod) {
      t.cons.offsets = t.prod.offsets;
      t.cons.bytes = t.prod.bytes;
    } else if (t.needs_cons) {
      take_spm(t.cons, t.decl.id);
    } else if (!t.decl.produced && t.decl.home == TensorHome::Spm) {
      // Preloaded scratchpad constant: consumers read it in place.
      take_spm(t.cons, t.decl.id);
    }
    if (t.has_slot) {
      t.slot_stride = pad8(t.decl.bytes());
      t.slot_copies = t.decl.iterated ? plan.options.batch : 1;
      t.slot_addr = kExtBase + ext;
      ext += t.slot_stride * t.slot_copies;
      if (ext > kExtSize) {
        throw Error(ErrorKind::CapacityExceeded,
                    "external window cannot hold tensor '" + t.decl.id + "'");
      }
    }
  };
  for (const auto& decl : plan.workload->tensors) alloc_tensor(plan.tensors.at(decl.id));
  for (auto& [id, t] : plan.tensors) {
    if (t.synthetic) alloc_tensor(t);
  }
  plan.spm_used = spm;
  plan.ext_used = ext;
}

void build_images(Plan& plan, CompiledBundle& bundle) {
  bundle.spm_image.assign(plan.config->spm.capacity_bytes(), 0);
  bundle.external_image.assign(plan.ext_used, 0);
  for (const auto& decl : plan.workload->tensors) {
    const TensorInfo& t = plan.tensors.at(decl.id);
    if (decl.produced) continue;
    const TensorBytes data = materialize_init(decl, plan.options.batch);
    if (t.has_slot) {
      // Slot by slot; the stream is tight but slots are padded.
      const uint64_t per = decl.bytes();
      for (uint32_t i = 0; i < t.slot_copies; ++i) {
        std::memcpy(bundle.external_image.data() + (t.slot_addr - kExtBase) +
                        i * t.slot_stride,
                    data.data() + i * per, per);
      }
    } else {
      for (uint64_t off : t.cons.offsets) {
        std::memcpy(bundle.spm_image.data() + off, data.data(), data.size());
      }
    }
    if (t.has_slot) {
      bundle.ext_slots.push_back(
          ExtSlotInfo{decl.id, t.slot_addr, t.slot_stride, t.slot_copies});
    }
  }
  for (const auto& decl : plan.workload->tensors) {
    const TensorInfo& t = plan.tensors.at(decl.id);
    if (decl.produced && t.has_slot) {
      bundle.ext_slots.push_back(
          ExtSlotInfo{decl.id, t.slot_addr, t.slot_stride, t.slot_copies});
    }
  }
}

// ---------------------------------------------------------------------------
// Pass 5: code generation.

std::vector<kprog::Instruction> compute_instrs(const Plan& plan, const Task& task,
                                               uint32_t iter) {
  const auto& tensors = plan.tensors;
  auto cons = [&](const std::string& id) -> const SideBuf& { return tensors.at(id).cons; };
  auto prod = [&](const std::string& id) -> const SideBuf& { return tensors.at(id).prod; };
  switch (task.kind) {
    case Task::Kind::GemmMatmul:
      return launch_with_nests(
          task.device, {task.m, task.k, task.n},
          {blocked_a_nest(task.m, task.k, task.n, cons(task.ins[0]).off(iter)),
           blocked_b_nest(task.m, task.k, task.n, cons(task.ins[1]).off(iter)),
           blocked_c_nest(task.m, task.n, prod(task.out).off(iter))});
    case Task::Kind::GemmConv:
      return launch_with_nests(
          task.device, {task.m, task.k, task.n},
          {conv_a_nest(task.h, task.w, task.kh, task.kw, cons(task.ins[0]).off(iter)),
           blocked_b_nest(task.m, task.k, task.n, cons(task.ins[1]).off(iter)),
           blocked_c_nest(task.m, task.n, prod(task.out).off(iter))});
    case Task::Kind::PoolAccel: {
      const PoolShape s = pool_shape(task.h, task.w, task.in_dtype,
                                     cons(task.ins[0]).off(iter), prod(task.out).off(iter));
      return launch_with_nests(task.device, {s.elem, task.win, s.out_groups}, {s.in, s.out});
    }
    case Task::Kind::ScalarMatmul:
      return {kprog::ExecMatmul{task.m, task.k, task.n, task.in_dtype, DType::I8,
                                cons(task.ins[0]).addr(iter), cons(task.ins[1]).addr(iter),
                                prod(task.out).addr(iter)}};
    case Task::Kind::ScalarIm2col:
      return {kprog::ExecIm2col{task.h, task.w, task.c, task.kh, task.kw,
                                cons(task.ins[0]).addr(iter), prod(task.out).addr(iter)}};
    case Task::Kind::ScalarPool:
      return {kprog::ExecMaxPool{task.in_dtype, task.h, task.w, task.c, task.win, task.stride,
                                 cons(task.ins[0]).addr(iter), prod(task.out).addr(iter)}};
    case Task::Kind::ScalarEltwise: {
      const TensorInfo& in = tensors.at(task.ins[0]);
      return {kprog::ExecEltwise{task.func, in.decl.elems(), task.in_dtype, task.out_dtype,
                                 in.cons.addr(iter), prod(task.out).addr(iter)}};
    }
    default:
      internal_error("compute_instrs on a transfer task");
  }
}

std::vector<kprog::Instruction> transfer_instrs(const Plan& plan, const Task& task,
                                                uint32_t iter) {
  const TensorInfo& t = plan.tensors.at(task.out);
  std::vector<kprog::Instruction> out;
  for (const auto& d : transfer_descriptors(t, task.kind == Task::Kind::TransferIn, iter)) {
    out.push_back(d);
  }
  return out;
}

void emit_task(const Plan& plan, const Task& task, uint32_t iter,
               std::vector<kprog::Instruction>& core) {
  core.push_back(kprog::TagInstr{task.tag});
  const auto instrs = task.is_transfer() ? transfer_instrs(plan, task, iter)
                                         : compute_instrs(plan, task, iter);
  core.insert(core.end(), instrs.begin(), instrs.end());
}

kprog::Program generate_program(const Plan& plan) {
  kprog::Program prog;
  for (const auto& core : plan.config->control_cores) prog.cores[core.id];

  const std::vector<size_t> order = topo_task_order(plan);
  uint32_t bar = 0;
  auto bar_all = [&]() {
    for (auto& [id, instrs] : prog.cores) instrs.push_back(kprog::BarrierInstr{bar});
    ++bar;
  };

  if (plan.options.mode == ScheduleMode::Sequential) {
    for (uint32_t iter = 0; iter < plan.options.batch; ++iter) {
      for (size_t idx : order) {
        const Task& task = plan.tasks[idx];
        auto& core = prog.cores[task.core];
        emit_task(plan, task, iter, core);
        if (task.is_transfer()) {
          core.push_back(kprog::WaitDmaInstr{});
        } else if (task.is_accel()) {
          core.push_back(kprog::WaitDeviceInstr{task.device});
        }
        bar_all();
      }
    }
    return prog;
  }

  // Pipelined: wall step w runs stage s on iteration w - s; barriers separate
  // steps globally.  Within a core and step: independent transfers first
  // (longest leading), accelerator launches, scalar kernels, then transfers
  // chained behind a same-engine predecessor, and finally the drains.
  const int last_wall = plan.max_stage + static_cast<int>(plan.options.batch) - 1;
  for (int wall = 0; wall <= last_wall; ++wall) {
    for (const auto& core_cfg : plan.config->control_cores) {
      std::vector<size_t> mine;
      for (size_t idx : order) {
        const Task& t = plan.tasks[idx];
        const int iter = wall - t.stage;
        if (t.core == core_cfg.id && iter >= 0 &&
            iter < static_cast<int>(plan.options.batch)) {
          mine.push_back(idx);
        }
      }
      if (mine.empty()) continue;
      auto& core = prog.cores[core_cfg.id];
      auto in_step = [&](size_t idx) {
        return std::find(mine.begin(), mine.end(), idx) != mine.end();
      };
      std::vector<size_t> lead_xfers, accels, scalars, chained_xfers;
      for (size_t idx : mine) {
        const Task& t = plan.tasks[idx];
        if (t.is_transfer()) {
          const bool chained = std::any_of(t.preds.begin(), t.preds.end(), in_step);
          (chained ? chained_xfers : lead_xfers).push_back(idx);
        } else if (t.is_accel()) {
          accels.push_back(idx);
        } else {
          scalars.push_back(idx);
        }
      }
      std::stable_sort(lead_xfers.begin(), lead_xfers.end(), [&](size_t a, size_t b) {
        return plan.tasks[a].modeled > plan.tasks[b].modeled;
      });
      for (size_t idx : lead_xfers) {
        emit_task(plan, plan.tasks[idx], static_cast<uint32_t>(wall - plan.tasks[idx].stage),
                  core);
      }
      for (size_t idx : accels) {
        emit_task(plan, plan.tasks[idx], static_cast<uint32_t>(wall - plan.tasks[idx].stage),
                  core);
      }
      for (size_t idx : scalars) {
        emit_task(plan, plan.tasks[idx], static_cast<uint32_t>(wall - plan.tasks[idx].stage),
                  core);
      }
      for (size_t idx : chained_xfers) {
        emit_task(plan, plan.tasks[idx], static_cast<uint32_t>(wall - plan.tasks[idx].stage),
                  core);
      }
      if (!lead_xfers.empty() || !chained_xfers.empty()) {
        core.push_back(kprog::WaitDmaInstr{});
      }
      for (size_t idx : accels) {
        core.push_back(kprog::WaitDeviceInstr{plan.tasks[idx].device});
      }
    }
    bar_all();
  }
  return prog;
}

std::string build_report(const Plan& plan) {
  json root;
  root["mode"] = to_string(plan.options.mode);
  root["batch"] = plan.options.batch;
  root["stages"] = plan.max_stage + 1;
  root["spm_bytes_used"] = plan.spm_used;
  root["ext_bytes_used"] = plan.ext_used;
  root["tasks"] = json::array();
  for (const Task& t : plan.tasks) {
    root["tasks"].push_back(json{{"id", t.id},
                                 {"tag", t.tag},
                                 {"unit", t.unit},
                                 {"core", t.core},
                                 {"stage", t.stage},
                                 {"modeled_cycles", t.modeled}});
  }
  root["tensors"] = json::array();
  for (const auto& [id, t] : plan.tensors) {
    json node{{"id", id}};
    if (t.prod.allocated()) {
      node["spm_prod"] = json{{"layout", layout_name(t.prod.layout)},
                              {"bytes", t.prod.bytes},
                              {"offsets", t.prod.offsets}};
    }
    if (t.cons.allocated() && !t.cons_aliases_prod) {
      node["spm_cons"] = json{{"layout", layout_name(t.cons.layout)},
                              {"bytes", t.cons.bytes},
                              {"offsets", t.cons.offsets}};
    }
    if (t.has_slot) {
      node["ext"] = json{
          {"addr", t.slot_addr}, {"stride", t.slot_stride}, {"copies", t.slot_copies}};
    }
    root["tensors"].push_back(std::move(node));
  }
  return root.dump(2) + "\n";
}

void validate_accelerator_nests(const Plan& plan) {
  const uint64_t capacity = plan.config->spm.capacity_bytes();
  const uint32_t word = plan.config->spm.bank_width_bytes();
  for (const Task& task : plan.tasks) {
    if (!task.is_accel()) continue;
    const AcceleratorConfig* accel = plan.config->find_accelerator(task.device);
    // Enough iterations to touch every parity copy of every buffer.
    for (uint32_t iter = 0; iter < std::min<uint32_t>(plan.options.batch, 8); ++iter) {
      std::vector<LoopNest> nests;
      const auto& cons0 = plan.tensors.at(task.ins[0]).cons;
      if (task.kind == Task::Kind::GemmMatmul) {
        nests = {blocked_a_nest(task.m, task.k, task.n, cons0.off(iter)),
                 blocked_b_nest(task.m, task.k, task.n,
                                plan.tensors.at(task.ins[1]).cons.off(iter)),
                 blocked_c_nest(task.m, task.n, plan.tensors.at(task.out).prod.off(iter))};
      } else if (task.kind == Task::Kind::GemmConv) {
        nests = {conv_a_nest(task.h, task.w, task.kh, task.kw, cons0.off(iter)),
                 blocked_b_nest(task.m, task.k, task.n,
                                plan.tensors.at(task.ins[1]).cons.off(iter)),
                 blocked_c_nest(task.m, task.n, plan.tensors.at(task.out).prod.off(iter))};
      } else {
        const PoolShape s = pool_shape(task.h, task.w, task.in_dtype, cons0.off(iter),
                                       plan.tensors.at(task.out).prod.off(iter));
        nests = {s.in, s.out};
      }
      for (size_t ch = 0; ch < nests.size(); ++ch) {
        const ChannelConfig& cfg = accel->channels[ch];
        validate_nest(nests[ch], cfg.width_bits / 8, capacity, cfg.max_loop_depth, word);
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public helpers.

std::string to_string(ScheduleMode mode) {
  return mode == ScheduleMode::Sequential ? "sequential" : "pipelined";
}

double matmul_intensity(uint32_t m, uint32_t k, uint32_t n) {
  const double ops = 2.0 * m * k * n;
  const double bytes = static_cast<double>(m) * k + static_cast<double>(k) * n +
                       4.0 * static_cast<double>(m) * n;
  return ops / bytes;
}

TileChoice tile_matmul(uint32_t m, uint32_t k, uint32_t n, uint64_t spm_capacity_bytes) {
  const uint64_t budget = spm_capacity_bytes / 2;  // double buffered working set
  const uint32_t m_cap = ceil_div8(m) * 8, k_cap = ceil_div8(k) * 8, n_cap = ceil_div8(n) * 8;
  TileChoice best;
  uint64_t best_volume = 0;
  for (uint32_t mt = 8; mt <= m_cap; mt += 8) {
    for (uint32_t nt = 8; nt <= n_cap; nt += 8) {
      const uint64_t c_bytes = 4ull * mt * nt;
      if (c_bytes >= budget) continue;
      uint64_t kt = (budget - c_bytes) / (mt + nt);
      kt = std::min<uint64_t>(kt / 8 * 8, k_cap);
      if (kt < 8) continue;
      const uint64_t volume = static_cast<uint64_t>(mt) * kt * nt;
      const auto key = std::make_tuple(volume, kt, static_cast<uint64_t>(mt));
      const auto best_key =
          std::make_tuple(best_volume, static_cast<uint64_t>(best.kt),
                          static_cast<uint64_t>(best.mt));
      if (key > best_key) {
        best = TileChoice{mt, static_cast<uint32_t>(kt), nt};
        best_volume = volume;
      }
    }
  }
  if (best_volume == 0) {
    throw Error(ErrorKind::CapacityExceeded,
                "no unit tile of " + std::to_string(m) + "x" + std::to_string(k) + "x" +
                    std::to_string(n) + " fits half of " +
                    std::to_string(spm_capacity_bytes) + " bytes");
  }
  return best;
}

std::vector<uint8_t> pack_blocked_a(const std::vector<int8_t>& a, uint32_t m, uint32_t k) {
  if (a.size() != static_cast<size_t>(m) * k) {
    throw Error(ErrorKind::ShapeMismatch, "pack_blocked_a operand size");
  }
  const uint32_t cm = ceil_div8(m), ct = ceil_div8(k);
  std::vector<uint8_t> out(static_cast<size_t>(cm) * ct * 64, 0);
  for (uint32_t mi = 0; mi < m; ++mi) {
    for (uint32_t ki = 0; ki < k; ++ki) {
      const size_t tile = static_cast<size_t>(mi / 8) * ct + ki / 8;
      out[tile * 64 + (mi % 8) * 8 + ki % 8] = static_cast<uint8_t>(a[mi * k + ki]);
    }
  }
  return out;
}

std::vector<uint8_t> pack_blocked_b(const std::vector<int8_t>& b, uint32_t k, uint32_t n) {
  if (b.size() != static_cast<size_t>(k) * n) {
    throw Error(ErrorKind::ShapeMismatch, "pack_blocked_b operand size");
  }
  const uint32_t ct = ceil_div8(k), cn = ceil_div8(n);
  std::vector<uint8_t> out(static_cast<size_t>(ct) * cn * 64, 0);
  for (uint32_t ki = 0; ki < k; ++ki) {
    for (uint32_t ni = 0; ni < n; ++ni) {
      const size_t tile = static_cast<size_t>(ki / 8) * cn + ni / 8;
      out[tile * 64 + (ki % 8) * 8 + ni % 8] = static_cast<uint8_t>(b[ki * n + ni]);
    }
  }
  return out;
}

std::vector<int32_t> unpack_blocked_c(const std::vector<uint8_t>& raw, uint32_t m, uint32_t n) {
  const uint32_t cm = ceil_div8(m), cn = ceil_div8(n);
  if (raw.size() != static_cast<size_t>(cm) * cn * 256) {
    throw Error(ErrorKind::ShapeMismatch, "unpack_blocked_c operand size");
  }
  std::vector<int32_t> out(static_cast<size_t>(m) * n);
  for (uint32_t mi = 0; mi < m; ++mi) {
    for (uint32_t ni = 0; ni < n; ++ni) {
      const size_t tile = static_cast<size_t>(ni / 8) * cm + mi / 8;
      int32_t v;
      std::memcpy(&v, raw.data() + tile * 256 + ((mi % 8) * 8 + ni % 8) * 4, 4);
      out[mi * n + ni] = v;
    }
  }
  return out;
}

std::vector<kprog::Instruction> gemm_launch_instrs(uint32_t device_id, uint32_t m, uint32_t k,
                                                   uint32_t n, uint64_t a_off, uint64_t b_off,
                                                   uint64_t c_off) {
  return launch_with_nests(device_id, {m, k, n},
                           {blocked_a_nest(m, k, n, a_off), blocked_b_nest(m, k, n, b_off),
                            blocked_c_nest(m, n, c_off)});
}

const ExtSlotInfo* find_slot(const CompiledBundle& bundle, const std::string& tensor) {
  for (const auto& slot : bundle.ext_slots) {
    if (slot.tensor == tensor) return &slot;
  }
  return nullptr;
}

CompiledBundle compile(const Workload& workload, const ClusterConfig& config,
                       const CompileOptions& options) {
  if (options.batch == 0) {
    throw Error(ErrorKind::ValidationError, "batch must be at least 1");
  }
  Plan plan;
  plan.workload = &workload;
  plan.config = &config;
  plan.options = options;

  lower_and_place(plan);
  plan_buffers_and_transfers(plan);
  assign_stages(plan);
  assign_depths(plan);
  allocate(plan);
  validate_accelerator_nests(plan);

  CompiledBundle bundle;
  bundle.batch = options.batch;
  bundle.mode = options.mode;
  build_images(plan, bundle);
  bundle.program = generate_program(plan);
  bundle.report_json = build_report(plan);
  kprog::validate(bundle.program, config);
  return bundle;
}

}  // namespace acsim::compiler
