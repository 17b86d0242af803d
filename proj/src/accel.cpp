// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/accel.hpp"

#include "acsim/error.hpp"

#include <algorithm>
#include <cstring>

namespace acsim {

namespace {

AddrRange nest_range(const LoopNest& nest, uint32_t group_bytes) {
  int64_t lo = static_cast<int64_t>(nest.base);
  int64_t hi = lo;
  for (const LoopDim& dim : nest.dims) {
    const int64_t extent = (static_cast<int64_t>(dim.bound) - 1) * dim.stride;
    lo += std::min<int64_t>(0, extent);
    hi += std::max<int64_t>(0, extent);
  }
  return AddrRange{static_cast<uint64_t>(lo), static_cast<uint64_t>(hi) + group_bytes - 1};
}

[[noreturn]] void fault(const std::string& name, const std::string& msg) {
  throw Error(ErrorKind::ProgramFault, name + ": " + msg);
}

}  // namespace

AcceleratorDevice::AcceleratorDevice(const AcceleratorConfig& config, const SpmConfig& spm,
                                     Tcdm& tcdm, Trace* trace)
    : config_(config), spm_(spm), trace_(trace) {
  name_ = (config.kind == AcceleratorKind::Gemm ? "gemm" : "maxpool") + std::to_string(config.id);
  for (size_t i = 0; i < config.channels.size(); ++i) {
    const std::string chan_name = name_ + ".ch" + std::to_string(i);
    const uint32_t port = tcdm.add_port(config.channels[i].width_bits, chan_name);
    channels_.emplace_back(config.channels[i], port, chan_name);
  }
  shadow_.assign(csr::file_size(static_cast<uint32_t>(config.channels.size())), 0);
  active_ = shadow_;
}

std::unique_ptr<AcceleratorDevice> AcceleratorDevice::create(const AcceleratorConfig& config,
                                                             const SpmConfig& spm, Tcdm& tcdm,
                                                             Trace* trace) {
  if (config.kind == AcceleratorKind::Gemm) {
    return std::make_unique<GemmDevice>(config, spm, tcdm, trace);
  }
  return std::make_unique<MaxPoolDevice>(config, spm, tcdm, trace);
}

bool AcceleratorDevice::write_csr(uint32_t reg, uint32_t value, uint64_t cycle,
                                  const std::string& tag) {
  if (reg >= shadow_.size()) {
    throw Error(ErrorKind::InvalidRegister,
                name_ + ": CSR index " + std::to_string(reg) + " out of range");
  }
  if (reg == csr::kRegStatus || reg == csr::kRegDoneCount) {
    throw Error(ErrorKind::InvalidRegister,
                name_ + ": CSR " + std::to_string(reg) + " is read-only");
  }
  if (reg == csr::kRegLaunch) {
    if ((value & 1u) == 0) return true;  // accepted no-op
    if (queued_.has_value()) return false;  // one launch may be queued; stall
    queued_ = QueuedLaunch{shadow_, cycle, tag};
    if (trace_ && trace_->enabled()) trace_->emit(cycle, name_, "launch_queued", "tag=" + tag);
    return true;
  }
  shadow_[reg] = value;
  return true;
}

uint32_t AcceleratorDevice::read_csr(uint32_t reg) const {
  if (reg >= active_.size()) {
    throw Error(ErrorKind::InvalidRegister,
                name_ + ": CSR index " + std::to_string(reg) + " out of range");
  }
  if (reg == csr::kRegStatus) {
    uint32_t status = 0;
    if (busy_visible()) status |= csr::kStatusBusyBit;
    if (running_ && queued_.has_value()) status |= csr::kStatusQueuedBit;
    return status;
  }
  if (reg == csr::kRegDoneCount) return static_cast<uint32_t>(done_count_);
  return active_[reg];
}

void AcceleratorDevice::activate_phase(uint64_t cycle) {
  if (running_ || !queued_ || queued_->at_cycle >= cycle) return;
  active_ = queued_->regs;
  record_ = TaskRecord{};
  record_.unit = name_;
  record_.tag = queued_->tag;
  queued_.reset();
  running_ = true;
  start_cycle_ = cycle;
  record_.start = cycle;
  decode_task(cycle);
  if (trace_ && trace_->enabled()) trace_->emit(cycle, name_, "task_start", "tag=" + record_.tag);
}

LoopNest AcceleratorDevice::decode_validated_nest(uint32_t channel_idx) const {
  LoopNest nest = csr::decode_channel(active_, channel_idx);
  try {
    validate_nest(nest, channels_[channel_idx].group_bytes(), spm_.capacity_bytes(),
                  config_.channels[channel_idx].max_loop_depth, spm_.bank_width_bits / 8);
  } catch (const Error& e) {
    fault(channels_[channel_idx].name(), e.what());
  }
  return nest;
}

void AcceleratorDevice::complete_task(uint64_t cycle) {
  running_ = false;
  ++done_count_;
  record_.end = cycle;
  if (trace_ && trace_->enabled()) {
    trace_->emit(cycle, name_, "task_done",
                 "tag=" + record_.tag + " busy=" + std::to_string(cycle - start_cycle_ + 1));
  }
  if (recorder_) recorder_(std::move(record_));
  record_ = TaskRecord{};
}

// ---------------------------------------------------------------------------
// Matrix unit

void GemmDevice::decode_task(uint64_t /*cycle*/) {
  const uint32_t m = active_[csr::kRegGemmM];
  const uint32_t k = active_[csr::kRegGemmK];
  const uint32_t n = active_[csr::kRegGemmN];
  if (m == 0 || k == 0 || n == 0) fault(name_, "matrix dims must be nonzero");
  const uint64_t cm = (m + 7) / 8;
  const uint64_t cn = (n + 7) / 8;
  t_ = (k + 7) / 8;
  tiles_ = cm * cn * t_;
  consumed_ = 0;
  tk_ = 0;
  acc_.fill(0);

  LoopNest a = decode_validated_nest(0);
  LoopNest b = decode_validated_nest(1);
  LoopNest c = decode_validated_nest(2);
  if (a.total_iterations() != tiles_ || b.total_iterations() != tiles_) {
    fault(name_, "operand streams must supply one block per unit tile");
  }
  if (c.total_iterations() != cm * cn) {
    fault(name_, "result stream must retire one group per output tile");
  }
  record_.kind = "matmul";
  record_.work = tiles_ * 512;  // 8x8x8 MACs per unit tile
  record_.reads = {nest_range(a, channels_[0].group_bytes()),
                   nest_range(b, channels_[1].group_bytes())};
  record_.writes = {nest_range(c, channels_[2].group_bytes())};
  uint64_t cycle = start_cycle_;
  channels_[0].launch(a, cycle);
  channels_[1].launch(b, cycle);
  channels_[2].launch(c, cycle);
}

void GemmDevice::datapath_phase(uint64_t cycle) {
  if (!running_) return;
  StreamerChannel& a = channels_[0];
  StreamerChannel& b = channels_[1];
  StreamerChannel& c = channels_[2];
  if (consumed_ < tiles_) {
    const bool last_k = (tk_ == t_ - 1);
    if (a.can_pop(cycle) && b.can_pop(cycle) && (!last_k || c.can_push())) {
      const std::vector<uint8_t> av = a.pop(cycle);
      const std::vector<uint8_t> bv = b.pop(cycle);
      for (uint32_t mi = 0; mi < 8; ++mi) {
        for (uint32_t ki = 0; ki < 8; ++ki) {
          const int32_t aval = static_cast<int8_t>(av[mi * 8 + ki]);
          if (aval == 0) continue;
          for (uint32_t ni = 0; ni < 8; ++ni) {
            acc_[mi * 8 + ni] += aval * static_cast<int8_t>(bv[ki * 8 + ni]);
          }
        }
      }
      if (last_k) {
        std::vector<uint8_t> group(256);
        std::memcpy(group.data(), acc_.data(), 256);
        c.push(std::move(group));
        acc_.fill(0);
      }
      ++consumed_;
      if (++tk_ == t_) tk_ = 0;
    }
  }
  if (consumed_ == tiles_ && c.idle()) complete_task(cycle);
}

// ---------------------------------------------------------------------------
// Pooling unit

void MaxPoolDevice::decode_task(uint64_t /*cycle*/) {
  elem_size_ = active_[csr::kRegPoolElemSize];
  win_ = active_[csr::kRegPoolWin];
  out_groups_ = active_[csr::kRegPoolOutGroups];
  if (elem_size_ != 1 && elem_size_ != 4) fault(name_, "element size must be 1 or 4 bytes");
  if (win_ == 0) fault(name_, "window must have at least one tap");
  if (out_groups_ == 0) fault(name_, "output group count must be nonzero");
  in_total_ = out_groups_ * 2 * win_;
  consumed_ = produced_ = 0;
  dy_ = slot_ = 0;

  LoopNest in = decode_validated_nest(0);
  LoopNest out = decode_validated_nest(1);
  if (in.total_iterations() != in_total_) {
    fault(name_, "input stream must supply win taps for both halves of each output group");
  }
  if (out.total_iterations() != out_groups_) {
    fault(name_, "output stream length must match the programmed group count");
  }
  record_.kind = "maxpool";
  record_.work = in_total_ * (32 / elem_size_);  // elementwise max ops
  record_.reads = {nest_range(in, channels_[0].group_bytes())};
  record_.writes = {nest_range(out, channels_[1].group_bytes())};
  channels_[0].launch(in, start_cycle_);
  channels_[1].launch(out, start_cycle_);
}

namespace {

// Reduce adjacent pixel pairs of a 64-byte group into a 32-byte half-group.
std::array<uint8_t, 32> fold_pairs(const std::vector<uint8_t>& group, uint32_t elem_size) {
  std::array<uint8_t, 32> out{};
  const uint32_t pixel = 8 * elem_size;
  for (uint32_t p = 0; p < 64 / (2 * pixel); ++p) {
    const uint8_t* left = group.data() + 2 * p * pixel;
    const uint8_t* right = left + pixel;
    uint8_t* dst = out.data() + p * pixel;
    if (elem_size == 1) {
      for (uint32_t i = 0; i < pixel; ++i) {
        dst[i] = static_cast<uint8_t>(
            std::max(static_cast<int8_t>(left[i]), static_cast<int8_t>(right[i])));
      }
    } else {
      for (uint32_t i = 0; i < 8; ++i) {
        int32_t l, r;
        std::memcpy(&l, left + i * 4, 4);
        std::memcpy(&r, right + i * 4, 4);
        const int32_t v = std::max(l, r);
        std::memcpy(dst + i * 4, &v, 4);
      }
    }
  }
  return out;
}

void max_into(std::array<uint8_t, 32>& acc, const std::array<uint8_t, 32>& v,
              uint32_t elem_size) {
  if (elem_size == 1) {
    for (uint32_t i = 0; i < 32; ++i) {
      acc[i] = static_cast<uint8_t>(
          std::max(static_cast<int8_t>(acc[i]), static_cast<int8_t>(v[i])));
    }
  } else {
    for (uint32_t i = 0; i < 8; ++i) {
      int32_t a, b;
      std::memcpy(&a, acc.data() + i * 4, 4);
      std::memcpy(&b, v.data() + i * 4, 4);
      const int32_t m = std::max(a, b);
      std::memcpy(acc.data() + i * 4, &m, 4);
    }
  }
}

}  // namespace

void MaxPoolDevice::datapath_phase(uint64_t cycle) {
  if (!running_) return;
  StreamerChannel& in = channels_[0];
  StreamerChannel& out = channels_[1];
  if (consumed_ < in_total_) {
    const bool final_tap = (dy_ == win_ - 1 && slot_ == 1);
    if (in.can_pop(cycle) && (!final_tap || out.can_push())) {
      const std::array<uint8_t, 32> folded = fold_pairs(in.pop(cycle), elem_size_);
      if (dy_ == 0) {
        slot_acc_ = folded;
      } else {
        max_into(slot_acc_, folded, elem_size_);
      }
      if (++dy_ == win_) {
        std::memcpy(out_buf_.data() + slot_ * 32, slot_acc_.data(), 32);
        dy_ = 0;
        if (++slot_ == 2) {
          out.push(std::vector<uint8_t>(out_buf_.begin(), out_buf_.end()));
          slot_ = 0;
          ++produced_;
        }
      }
      ++consumed_;
    }
  }
  if (produced_ == out_groups_ && out.idle()) complete_task(cycle);
}

}  // namespace acsim
