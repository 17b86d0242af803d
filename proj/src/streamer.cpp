// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/streamer.hpp"

#include <algorithm>

#include "acsim/error.hpp"

namespace acsim {

std::vector<uint64_t> address_sequence(const LoopNest& nest) {
  std::vector<uint64_t> out;
  out.reserve(nest.total_iterations());
  NestCursor cursor(nest);
  while (!cursor.done()) {
    out.push_back(cursor.address());
    cursor.advance();
  }
  return out;
}

void validate_nest(const LoopNest& nest, uint32_t group_bytes,
                   uint64_t capacity_bytes, uint32_t max_loop_depth,
                   uint32_t bank_word_bytes) {
  if (nest.dims.size() > max_loop_depth) {
    throw Error(ErrorKind::DepthExceeded,
                "nest depth " + std::to_string(nest.dims.size()) +
                    " exceeds channel limit " + std::to_string(max_loop_depth));
  }
  if (nest.base % bank_word_bytes != 0) {
    throw Error(ErrorKind::Misaligned,
                "nest base " + std::to_string(nest.base) +
                    " not bank-word aligned");
  }
  // Interval arithmetic: each dimension independently contributes either 0 or
  // (bound-1)*stride to the extreme addresses, which is exact for affine
  // nests.
  int64_t lo = static_cast<int64_t>(nest.base);
  int64_t hi = static_cast<int64_t>(nest.base);
  for (const LoopDim& dim : nest.dims) {
    if (dim.bound < 1) {
      throw Error(ErrorKind::ValidationError, "loop bound must be >= 1");
    }
    if (dim.stride % static_cast<int64_t>(bank_word_bytes) != 0) {
      throw Error(ErrorKind::Misaligned,
                  "loop stride " + std::to_string(dim.stride) +
                      " not bank-word aligned");
    }
    const int64_t extent = (static_cast<int64_t>(dim.bound) - 1) * dim.stride;
    lo += std::min<int64_t>(0, extent);
    hi += std::max<int64_t>(0, extent);
  }
  if (lo < 0 || static_cast<uint64_t>(hi) + group_bytes > capacity_bytes) {
    throw Error(ErrorKind::AddressOutOfRange,
                "nest addresses span [" + std::to_string(lo) + ", " +
                    std::to_string(hi + group_bytes) +
                    ") outside scratchpad of " +
                    std::to_string(capacity_bytes) + " bytes");
  }
}

NestCursor::NestCursor(const LoopNest& nest)
    : nest_(nest),
      counters_(nest.dims.size(), 0),
      addr_(static_cast<int64_t>(nest.base)),
      total_(nest.total_iterations()) {}

uint64_t NestCursor::address() const {
  if (done()) internal_error("cursor advanced past the end of its nest");
  return static_cast<uint64_t>(addr_);
}

void NestCursor::advance() {
  if (done()) internal_error("cursor advanced past the end of its nest");
  ++emitted_;
  for (size_t level = nest_.dims.size(); level-- > 0;) {
    const LoopDim& dim = nest_.dims[level];
    if (++counters_[level] < dim.bound) {
      addr_ += dim.stride;
      return;
    }
    counters_[level] = 0;
    addr_ -= static_cast<int64_t>(dim.bound - 1) * dim.stride;
  }
}

StreamerChannel::StreamerChannel(const ChannelConfig& config,
                                 uint32_t tcdm_port, std::string name)
    : config_(config), port_(tcdm_port), name_(std::move(name)) {}

void StreamerChannel::launch(const LoopNest& nest, uint64_t /*cycle*/) {
  if (launched_ && !idle()) {
    internal_error("channel " + name_ + " relaunched while active");
  }
  cursor_.emplace(nest);
  fifo_.clear();
  launched_ = true;
}

std::optional<TcdmRequest> StreamerChannel::want_request(
    uint64_t /*cycle*/) const {
  if (!launched_ || !cursor_ || cursor_->done()) return std::nullopt;
  if (config_.direction == ChannelDirection::Read) {
    // Only issue when a FIFO slot is guaranteed for the granted data.
    if (fifo_.size() >= config_.fifo_depth) return std::nullopt;
    return TcdmRequest{port_, false, cursor_->address(), group_bytes(),
                       nullptr};
  }
  // Write channel: retire the FIFO head at the next nest address.
  if (fifo_.empty()) return std::nullopt;
  return TcdmRequest{port_, true, cursor_->address(), group_bytes(),
                     fifo_.front().data.data()};
}

void StreamerChannel::on_grant_result(const TcdmOutcome& outcome,
                                      uint64_t cycle) {
  if (!outcome.granted) return;  // stalled: re-present next cycle
  if (config_.direction == ChannelDirection::Read) {
    fifo_.push_back(Slot{outcome.read_data, cycle + 1});  // 1-cycle fill
  } else {
    fifo_.pop_front();
  }
  cursor_->advance();
  ++groups_moved_;
}

bool StreamerChannel::can_pop(uint64_t cycle) const {
  if (config_.direction != ChannelDirection::Read) return false;
  return !fifo_.empty() && fifo_.front().ready_cycle <= cycle;
}

std::vector<uint8_t> StreamerChannel::pop(uint64_t cycle) {
  if (!can_pop(cycle)) internal_error("pop from empty/unready channel " + name_);
  std::vector<uint8_t> data = std::move(fifo_.front().data);
  fifo_.pop_front();
  return data;
}

bool StreamerChannel::can_push() const {
  return config_.direction == ChannelDirection::Write &&
         fifo_.size() < config_.fifo_depth;
}

void StreamerChannel::push(std::vector<uint8_t> group) {
  if (!can_push()) internal_error("push into full/readonly channel " + name_);
  if (group.size() != group_bytes()) {
    internal_error("group size mismatch on channel " + name_);
  }
  fifo_.push_back(Slot{std::move(group), 0});
}

bool StreamerChannel::idle() const {
  if (!launched_ || !cursor_) return true;
  return cursor_->done() && fifo_.empty();
}

}  // namespace acsim
