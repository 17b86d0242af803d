// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/dma.hpp"

#include <algorithm>

namespace acsim {

namespace {

[[noreturn]] void bad(const std::string& name, const std::string& msg) {
  throw Error(ErrorKind::InvalidDescriptor, name + ": " + msg);
}

bool in_spm(uint64_t addr, uint64_t bytes, uint64_t capacity) {
  return addr >= kSpmBase && addr + bytes <= kSpmBase + capacity && addr + bytes >= addr;
}

}  // namespace

DmaEngine::DmaEngine(const DmaConfig& config, const ExternalChannelConfig& ext_config,
                     const SpmConfig& spm, Tcdm& tcdm, ExternalMemory& ext, Trace* trace)
    : config_(config), ext_config_(ext_config), spm_(spm), tcdm_(tcdm), ext_(ext),
      trace_(trace), name_("dma" + std::to_string(config.id)) {
  port_ = tcdm.add_port(config.beat_width_bits, name_);
}

void DmaEngine::start(const kprog::DmaInstr& instr, uint64_t cycle, const std::string& tag) {
  if (active_) internal_error(name_ + " restarted while busy");
  if (instr.rows == 0) bad(name_, "descriptor must cover at least one row");
  if (instr.row_bytes == 0) bad(name_, "descriptor rows must be nonempty");

  const uint32_t beat_bytes = config_.beat_width_bits / 8;
  const uint64_t capacity = spm_.capacity_bytes();
  const bool src_spm = in_spm(instr.src, 1, capacity);
  const bool dst_spm = in_spm(instr.dst, 1, capacity);
  if (src_spm == dst_spm) {
    bad(name_, "one side must be the scratchpad and the other external memory");
  }
  to_spm_ = dst_spm;
  const uint64_t spm_base = to_spm_ ? instr.dst : instr.src;
  const int64_t spm_stride = to_spm_ ? instr.dst_stride : instr.src_stride;
  const uint64_t ext_base = to_spm_ ? instr.src : instr.dst;
  const int64_t ext_stride = to_spm_ ? instr.src_stride : instr.dst_stride;
  const uint32_t word = spm_.bank_width_bits / 8;
  if (spm_base % word != 0 || instr.row_bytes % word != 0 ||
      spm_stride % static_cast<int64_t>(word) != 0) {
    bad(name_, "scratchpad-side base, stride and row bytes must be bank-word aligned");
  }

  AddrRange spm_range{UINT64_MAX, 0};
  beats_.clear();
  for (uint32_t r = 0; r < instr.rows; ++r) {
    const int64_t spm_row =
        static_cast<int64_t>(spm_base) + static_cast<int64_t>(r) * spm_stride;
    const int64_t ext_row =
        static_cast<int64_t>(ext_base) + static_cast<int64_t>(r) * ext_stride;
    if (spm_row < 0 || !in_spm(static_cast<uint64_t>(spm_row), instr.row_bytes, capacity)) {
      bad(name_, "scratchpad-side row outside the scratchpad");
    }
    if (ext_row < 0 ||
        !ExternalMemory::contains(static_cast<uint64_t>(ext_row), instr.row_bytes)) {
      bad(name_, "external-side row outside the external window");
    }
    spm_range.lo = std::min(spm_range.lo, static_cast<uint64_t>(spm_row) - kSpmBase);
    spm_range.hi = std::max(spm_range.hi,
                            static_cast<uint64_t>(spm_row) - kSpmBase + instr.row_bytes - 1);
    for (uint64_t off = 0; off < instr.row_bytes; off += beat_bytes) {
      Beat beat;
      beat.spm_addr = static_cast<uint64_t>(spm_row) - kSpmBase + off;
      beat.ext_addr = static_cast<uint64_t>(ext_row) + off;
      beat.bytes = static_cast<uint32_t>(std::min<uint64_t>(beat_bytes, instr.row_bytes - off));
      beats_.push_back(beat);
    }
  }

  active_ = true;
  active_from_ = cycle + 1;
  setup_remaining_ = 4;
  ext_busy_until_ = 0;
  record_ = TaskRecord{};
  record_.unit = name_;
  record_.kind = "dma";
  record_.tag = tag;
  record_.start = active_from_;
  record_.work = static_cast<uint64_t>(instr.row_bytes) * instr.rows;
  (to_spm_ ? record_.writes : record_.reads).push_back(spm_range);
  if (trace_ && trace_->enabled()) {
    trace_->emit(cycle, name_, "start",
                 "rows=" + std::to_string(instr.rows) +
                     " row_bytes=" + std::to_string(instr.row_bytes) + " tag=" + tag);
  }
}

std::optional<TcdmRequest> DmaEngine::want_request(uint64_t cycle) {
  if (!active_ || cycle < active_from_) return std::nullopt;
  if (setup_remaining_ > 0) {
    --setup_remaining_;
    return std::nullopt;
  }
  if (beats_.empty() || cycle <= ext_busy_until_) return std::nullopt;
  const Beat& beat = beats_.front();
  if (to_spm_) {
    beat_buf_ = ext_.read_vec(beat.ext_addr, beat.bytes);
    return TcdmRequest{port_, true, beat.spm_addr, beat.bytes, beat_buf_.data()};
  }
  return TcdmRequest{port_, false, beat.spm_addr, beat.bytes, nullptr};
}

void DmaEngine::on_grant_result(const TcdmOutcome& outcome, uint64_t cycle) {
  if (!outcome.granted) return;  // lost arbitration: retry next cycle
  const Beat beat = beats_.front();
  beats_.pop_front();
  if (!to_spm_) ext_.write(beat.ext_addr, outcome.read_data.data(), beat.bytes);
  const uint64_t ext_cycles =
      (beat.bytes + ext_config_.bandwidth_bytes_per_cycle - 1) /
      ext_config_.bandwidth_bytes_per_cycle;
  ext_busy_until_ = cycle + ext_cycles - 1;
  if (beats_.empty()) {
    active_ = false;
    ++done_count_;
    record_.end = cycle;
    if (trace_ && trace_->enabled()) {
      trace_->emit(cycle, name_, "done",
                   "busy=" + std::to_string(cycle - record_.start + 1));
    }
    if (recorder_) recorder_(std::move(record_));
    record_ = TaskRecord{};
  }
}

}  // namespace acsim
