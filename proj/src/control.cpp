// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/control.hpp"

#include <cmath>
#include <cstring>

#include "acsim/golden.hpp"

namespace acsim {

namespace {

std::vector<uint8_t> peek_vec(const Tcdm& tcdm, uint64_t offset, uint64_t bytes) {
  std::vector<uint8_t> out(bytes);
  tcdm.peek(offset, static_cast<uint32_t>(bytes), out.data());
  return out;
}

void poke_vec(Tcdm& tcdm, uint64_t offset, const std::vector<uint8_t>& data) {
  tcdm.poke(offset, static_cast<uint32_t>(data.size()), data.data());
}

}  // namespace

void BarrierManager::add_participant(uint32_t barrier_id, uint32_t core_id) {
  barriers_[barrier_id].participants.insert(core_id);
}

void BarrierManager::arrive(uint32_t barrier_id, uint32_t core_id, uint64_t /*cycle*/) {
  barriers_.at(barrier_id).arrived.insert(core_id);
}

bool BarrierManager::can_pass(uint32_t barrier_id, uint64_t cycle) const {
  const State& s = barriers_.at(barrier_id);
  return s.released && cycle >= s.release_cycle;
}

void BarrierManager::mark_passed(uint32_t barrier_id, uint32_t core_id) {
  State& s = barriers_.at(barrier_id);
  s.passed.insert(core_id);
  if (s.passed == s.participants) {
    s.arrived.clear();
    s.passed.clear();
    s.released = false;
  }
}

void BarrierManager::end_of_cycle(uint64_t cycle) {
  for (auto& [id, s] : barriers_) {
    if (!s.released && !s.participants.empty() && s.arrived == s.participants) {
      s.released = true;
      s.release_cycle = cycle + 1;
    }
  }
}

Sequencer::Sequencer(uint32_t core_id, std::vector<kprog::Instruction> program,
                     std::map<uint32_t, AcceleratorDevice*> devices, DmaEngine* dma,
                     BarrierManager& barriers, Tcdm& tcdm, const ScalarCostModel& costs,
                     Trace* trace)
    : core_id_(core_id), name_("core" + std::to_string(core_id)), program_(std::move(program)),
      devices_(std::move(devices)), dma_(dma), barriers_(barriers), tcdm_(tcdm), costs_(costs),
      trace_(trace) {
  for (const auto& instr : program_) {
    if (const auto* b = std::get_if<kprog::BarrierInstr>(&instr)) {
      barriers_.add_participant(b->id, core_id_);
    }
  }
}

uint64_t Sequencer::spm_offset(uint64_t addr, uint64_t bytes, const std::string& what) const {
  if (addr < kSpmBase || addr + bytes > kSpmBase + tcdm_.capacity_bytes()) {
    throw Error(ErrorKind::AddressOutOfRange,
                name_ + ": " + what + " buffer outside the scratchpad");
  }
  return addr - kSpmBase;
}

void Sequencer::cycle(uint64_t now) {
  advanced_ = false;
  if (exec_remaining_ > 0) {
    if (--exec_remaining_ == 0) {
      apply_exec_effect(program_[pc_]);
      exec_record_.end = now;
      if (recorder_) recorder_(std::move(exec_record_));
      exec_record_ = TaskRecord{};
      if (trace_ && trace_->enabled()) trace_->emit(now, name_, "exec_done", "tag=" + tag_);
      ++pc_;
      ++retired_;
      advanced_ = true;
    }
    return;
  }
  while (pc_ < program_.size()) {
    const kprog::Instruction& instr = program_[pc_];
    if (const auto* tag = std::get_if<kprog::TagInstr>(&instr)) {
      tag_ = tag->name;
      ++pc_;
      ++retired_;
      advanced_ = true;
      continue;
    }
    if (const auto* wait = std::get_if<kprog::WaitDeviceInstr>(&instr)) {
      if (devices_.at(wait->device)->busy_visible()) return;
      ++pc_;
      ++retired_;
      advanced_ = true;
      continue;
    }
    if (std::holds_alternative<kprog::WaitDmaInstr>(instr)) {
      if (dma_->busy_visible()) return;
      ++pc_;
      ++retired_;
      advanced_ = true;
      continue;
    }
    if (const auto* bar = std::get_if<kprog::BarrierInstr>(&instr)) {
      if (!barrier_arrived_) {
        barriers_.arrive(bar->id, core_id_, now);
        barrier_arrived_ = true;
        advanced_ = true;
        if (trace_ && trace_->enabled()) {
          trace_->emit(now, name_, "barrier_arrive", "id=" + std::to_string(bar->id));
        }
      }
      if (!barriers_.can_pass(bar->id, now)) return;
      barriers_.mark_passed(bar->id, core_id_);
      barrier_arrived_ = false;
      ++pc_;
      ++retired_;
      advanced_ = true;
      continue;
    }
    if (const auto* w = std::get_if<kprog::CsrWriteInstr>(&instr)) {
      if (!devices_.at(w->device)->write_csr(w->reg, w->value, now, tag_)) return;  // stall
      ++pc_;
      ++retired_;
      advanced_ = true;
      return;  // unit cost
    }
    if (const auto* r = std::get_if<kprog::CsrReadInstr>(&instr)) {
      devices_.at(r->device)->read_csr(r->reg);
      ++pc_;
      ++retired_;
      advanced_ = true;
      return;
    }
    if (const auto* d = std::get_if<kprog::DmaInstr>(&instr)) {
      if (dma_->busy_visible()) return;  // stall until the engine frees up
      dma_->start(*d, now, tag_);
      ++pc_;
      ++retired_;
      advanced_ = true;
      return;
    }
    // Scalar kernel.
    begin_exec(instr, now);
    advanced_ = true;
    return;
  }
}

void Sequencer::begin_exec(const kprog::Instruction& instr, uint64_t now) {
  double cost = 0.0;
  exec_record_ = TaskRecord{};
  exec_record_.unit = name_;
  exec_record_.tag = tag_;
  exec_record_.start = now;
  if (const auto* mm = std::get_if<kprog::ExecMatmul>(&instr)) {
    cost = golden::scalar_matmul_cycles(mm->m, mm->k, mm->n, costs_);
    exec_record_.kind = "scalar_matmul";
    exec_record_.work = static_cast<uint64_t>(mm->m) * mm->k * mm->n;
    const uint64_t ab = static_cast<uint64_t>(mm->m) * mm->k * dtype_size(mm->a_type);
    const uint64_t bb = static_cast<uint64_t>(mm->k) * mm->n * dtype_size(mm->b_type);
    const uint64_t cb = static_cast<uint64_t>(mm->m) * mm->n * 4;
    exec_record_.reads = {{spm_offset(mm->a_addr, ab, "matmul A"), spm_offset(mm->a_addr, ab, "matmul A") + ab - 1},
                          {spm_offset(mm->b_addr, bb, "matmul B"), spm_offset(mm->b_addr, bb, "matmul B") + bb - 1}};
    exec_record_.writes = {{spm_offset(mm->c_addr, cb, "matmul C"), spm_offset(mm->c_addr, cb, "matmul C") + cb - 1}};
  } else if (const auto* pool = std::get_if<kprog::ExecMaxPool>(&instr)) {
    if (pool->k == 0 || pool->s == 0 || pool->h < pool->k || pool->w < pool->k) {
      throw Error(ErrorKind::ProgramFault, name_ + ": maxpool window does not fit");
    }
    const uint32_t ho = (pool->h - pool->k) / pool->s + 1;
    const uint32_t wo = (pool->w - pool->k) / pool->s + 1;
    cost = golden::scalar_maxpool_cycles(ho, wo, pool->c, pool->k, costs_);
    exec_record_.kind = "scalar_maxpool";
    exec_record_.work = static_cast<uint64_t>(ho) * wo * pool->c * pool->k * pool->k;
    const uint64_t ib =
        static_cast<uint64_t>(pool->h) * pool->w * pool->c * dtype_size(pool->dtype);
    const uint64_t ob = static_cast<uint64_t>(ho) * wo * pool->c * dtype_size(pool->dtype);
    exec_record_.reads = {{spm_offset(pool->in_addr, ib, "maxpool in"),
                           spm_offset(pool->in_addr, ib, "maxpool in") + ib - 1}};
    exec_record_.writes = {{spm_offset(pool->out_addr, ob, "maxpool out"),
                            spm_offset(pool->out_addr, ob, "maxpool out") + ob - 1}};
  } else if (const auto* elt = std::get_if<kprog::ExecEltwise>(&instr)) {
    cost = golden::scalar_eltwise_cycles(elt->elems, costs_);
    exec_record_.kind = "scalar_eltwise";
    exec_record_.work = elt->elems;
    const uint64_t ib = elt->elems * dtype_size(elt->in_type);
    const uint64_t ob = elt->elems * dtype_size(elt->out_type);
    exec_record_.reads = {{spm_offset(elt->in_addr, ib, "eltwise in"),
                           spm_offset(elt->in_addr, ib, "eltwise in") + ib - 1}};
    exec_record_.writes = {{spm_offset(elt->out_addr, ob, "eltwise out"),
                            spm_offset(elt->out_addr, ob, "eltwise out") + ob - 1}};
  } else if (const auto* im = std::get_if<kprog::ExecIm2col>(&instr)) {
    if (im->kh == 0 || im->kw == 0 || im->h < im->kh || im->w < im->kw) {
      throw Error(ErrorKind::ProgramFault, name_ + ": im2col window does not fit");
    }
    const uint64_t rows = static_cast<uint64_t>(im->h - im->kh + 1) * (im->w - im->kw + 1);
    const uint64_t cols = static_cast<uint64_t>(im->kh) * im->kw * im->c;
    cost = golden::scalar_im2col_cycles(rows * cols, costs_);
    exec_record_.kind = "scalar_im2col";
    exec_record_.work = rows * cols;
    const uint64_t ib = static_cast<uint64_t>(im->h) * im->w * im->c;
    const uint64_t ob = rows * cols;
    exec_record_.reads = {{spm_offset(im->in_addr, ib, "im2col in"),
                           spm_offset(im->in_addr, ib, "im2col in") + ib - 1}};
    exec_record_.writes = {{spm_offset(im->out_addr, ob, "im2col out"),
                            spm_offset(im->out_addr, ob, "im2col out") + ob - 1}};
  } else {
    internal_error("begin_exec on a non-EXEC instruction");
  }
  exec_remaining_ = std::max<uint64_t>(1, static_cast<uint64_t>(std::ceil(cost)));
  if (trace_ && trace_->enabled()) {
    trace_->emit(now, name_, "exec_start",
                 exec_record_.kind + " cycles=" + std::to_string(exec_remaining_) +
                     " tag=" + tag_);
  }
  if (--exec_remaining_ == 0) {
    apply_exec_effect(instr);
    exec_record_.end = now;
    if (recorder_) recorder_(std::move(exec_record_));
    exec_record_ = TaskRecord{};
    ++pc_;
    ++retired_;
  }
}

void Sequencer::apply_exec_effect(const kprog::Instruction& instr) {
  if (const auto* mm = std::get_if<kprog::ExecMatmul>(&instr)) {
    if (mm->b_type != DType::I8) {
      throw Error(ErrorKind::UnsupportedOp, name_ + ": matmul weights must be i8");
    }
    const uint64_t kb = static_cast<uint64_t>(mm->k) * mm->n;
    std::vector<uint8_t> braw = peek_vec(tcdm_, spm_offset(mm->b_addr, kb, "matmul B"), kb);
    std::vector<int8_t> b(braw.begin(), braw.end());
    std::vector<int32_t> c;
    const uint64_t ab = static_cast<uint64_t>(mm->m) * mm->k * dtype_size(mm->a_type);
    std::vector<uint8_t> araw = peek_vec(tcdm_, spm_offset(mm->a_addr, ab, "matmul A"), ab);
    if (mm->a_type == DType::I8) {
      std::vector<int8_t> a(araw.begin(), araw.end());
      c = golden::matmul<int8_t>(a, b, mm->m, mm->k, mm->n);
    } else {
      std::vector<int32_t> a(static_cast<size_t>(mm->m) * mm->k);
      std::memcpy(a.data(), araw.data(), araw.size());
      c = golden::matmul<int32_t>(a, b, mm->m, mm->k, mm->n);
    }
    std::vector<uint8_t> craw(c.size() * 4);
    std::memcpy(craw.data(), c.data(), craw.size());
    poke_vec(tcdm_, spm_offset(mm->c_addr, craw.size(), "matmul C"), craw);
    return;
  }
  if (const auto* pool = std::get_if<kprog::ExecMaxPool>(&instr)) {
    const uint64_t elems = static_cast<uint64_t>(pool->h) * pool->w * pool->c;
    const uint64_t ib = elems * dtype_size(pool->dtype);
    std::vector<uint8_t> in = peek_vec(tcdm_, spm_offset(pool->in_addr, ib, "maxpool in"), ib);
    std::vector<uint8_t> out;
    if (pool->dtype == DType::I8) {
      std::vector<int8_t> t(in.begin(), in.end());
      auto o = golden::maxpool2d<int8_t>(t, pool->h, pool->w, pool->c, pool->k, pool->s);
      out.assign(o.begin(), o.end());
    } else {
      std::vector<int32_t> t(elems);
      std::memcpy(t.data(), in.data(), in.size());
      auto o = golden::maxpool2d<int32_t>(t, pool->h, pool->w, pool->c, pool->k, pool->s);
      out.resize(o.size() * 4);
      std::memcpy(out.data(), o.data(), out.size());
    }
    poke_vec(tcdm_, spm_offset(pool->out_addr, out.size(), "maxpool out"), out);
    return;
  }
  if (const auto* elt = std::get_if<kprog::ExecEltwise>(&instr)) {
    const uint64_t ib = elt->elems * dtype_size(elt->in_type);
    std::vector<uint8_t> in = peek_vec(tcdm_, spm_offset(elt->in_addr, ib, "eltwise in"), ib);
    std::vector<uint8_t> out;
    if (elt->in_type == DType::I8 && elt->out_type == DType::I8) {
      std::vector<int8_t> t(in.begin(), in.end());
      auto o = golden::eltwise_i8(t, elt->func);
      out.assign(o.begin(), o.end());
    } else if (elt->in_type == DType::I32) {
      std::vector<int32_t> t(elt->elems);
      std::memcpy(t.data(), in.data(), in.size());
      if (elt->out_type == DType::I32) {
        auto o = golden::eltwise_i32(t, elt->func);
        out.resize(o.size() * 4);
        std::memcpy(out.data(), o.data(), out.size());
      } else {
        auto o = golden::eltwise_i32_to_i8(t, elt->func);
        out.assign(o.begin(), o.end());
      }
    } else {
      throw Error(ErrorKind::UnsupportedOp, name_ + ": unsupported eltwise type combination");
    }
    poke_vec(tcdm_, spm_offset(elt->out_addr, out.size(), "eltwise out"), out);
    return;
  }
  if (const auto* im = std::get_if<kprog::ExecIm2col>(&instr)) {
    const uint64_t ib = static_cast<uint64_t>(im->h) * im->w * im->c;
    std::vector<uint8_t> in = peek_vec(tcdm_, spm_offset(im->in_addr, ib, "im2col in"), ib);
    std::vector<int8_t> t(in.begin(), in.end());
    auto o = golden::im2col(t, im->h, im->w, im->c, im->kh, im->kw);
    std::vector<uint8_t> out(o.begin(), o.end());
    poke_vec(tcdm_, spm_offset(im->out_addr, out.size(), "im2col out"), out);
    return;
  }
  internal_error("apply_exec_effect on a non-EXEC instruction");
}

}  // namespace acsim
