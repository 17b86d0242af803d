// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/tcdm.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "acsim/error.hpp"

namespace acsim {

Tcdm::Tcdm(const SpmConfig& spm, Trace* trace)
    : spm_(spm), trace_(trace), mem_(spm.capacity_bytes(), 0) {}

uint32_t Tcdm::add_port(uint32_t width_bits, std::string name) {
  if (width_bits == 0 || width_bits % spm_.bank_width_bits != 0 ||
      width_bits / spm_.bank_width_bits > spm_.num_banks) {
    throw Error(ErrorKind::ValidationError,
                "port width must be a positive multiple of the bank width "
                "spanning at most all banks");
  }
  ports_.push_back(Port{width_bits, std::move(name), {}});
  return static_cast<uint32_t>(ports_.size() - 1);
}

uint32_t Tcdm::bank_of(uint64_t addr) const {
  const uint32_t word = spm_.bank_width_bytes();
  if (addr >= mem_.size()) {
    throw Error(ErrorKind::AddressOutOfRange,
                "scratchpad address " + std::to_string(addr) + " >= capacity " +
                    std::to_string(mem_.size()));
  }
  if (addr % word != 0) {
    throw Error(ErrorKind::Misaligned,
                "address " + std::to_string(addr) +
                    " not aligned to bank word (" + std::to_string(word) + ")");
  }
  return static_cast<uint32_t>((addr / word) % spm_.num_banks);
}

std::pair<uint32_t, uint32_t> Tcdm::validate(const TcdmRequest& request) const {
  if (request.port >= ports_.size()) {
    internal_error("request from unregistered port");
  }
  const uint32_t word = spm_.bank_width_bytes();
  if (request.bytes == 0 || request.bytes % word != 0) {
    throw Error(ErrorKind::Misaligned,
                "request length must be a positive multiple of the bank word");
  }
  if (request.bytes * 8 > ports_[request.port].width_bits) {
    throw Error(ErrorKind::ValidationError,
                "request wider than its port: " + std::to_string(request.bytes) +
                    " bytes on " + ports_[request.port].name);
  }
  if (request.addr % word != 0) {
    throw Error(ErrorKind::Misaligned,
                "request address " + std::to_string(request.addr) +
                    " not bank-word aligned");
  }
  if (request.addr + request.bytes > mem_.size()) {
    throw Error(ErrorKind::AddressOutOfRange,
                "request [" + std::to_string(request.addr) + ", " +
                    std::to_string(request.addr + request.bytes) +
                    ") exceeds scratchpad capacity " +
                    std::to_string(mem_.size()));
  }
  const uint32_t start_bank =
      static_cast<uint32_t>((request.addr / word) % spm_.num_banks);
  const uint32_t bank_count = request.bytes / word;
  return {start_bank, bank_count};
}

std::vector<TcdmOutcome> Tcdm::cycle(uint64_t cycle_no,
                                     const std::vector<TcdmRequest>& requests) {
  const size_t n = requests.size();
  std::vector<TcdmOutcome> outcomes(n);

  std::vector<std::pair<uint32_t, uint32_t>> spans(n);
  std::vector<bool> port_seen(ports_.size(), false);
  for (size_t i = 0; i < n; ++i) {
    spans[i] = validate(requests[i]);
    if (port_seen[requests[i].port]) {
      internal_error("port " + ports_[requests[i].port].name +
                     " presented two requests in one cycle");
    }
    port_seen[requests[i].port] = true;
  }
  // A port that presents nothing has withdrawn; its wait restarts.
  for (size_t p = 0; p < ports_.size(); ++p) {
    if (!port_seen[p]) ports_[p].stall_age = 0;
  }
  if (n == 0) return outcomes;

  // Service order: widest port first, then longest-stalled, then lowest port
  // index.  Aging makes the order rotate among persistent equal-width
  // contenders, so none can wait forever; a granted request occupies all its
  // banks (consecutive modulo num_banks) atomically.
  std::vector<uint32_t> order(n);
  for (uint32_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](uint32_t lhs, uint32_t rhs) {
    const Port& lp = ports_[requests[lhs].port];
    const Port& rp = ports_[requests[rhs].port];
    if (lp.width_bits != rp.width_bits) return lp.width_bits > rp.width_bits;
    if (lp.stall_age != rp.stall_age) return lp.stall_age > rp.stall_age;
    return requests[lhs].port < requests[rhs].port;
  });

  std::vector<bool> bank_taken(spm_.num_banks, false);
  struct PendingWrite {
    uint64_t addr;
    uint32_t bytes;
    const uint8_t* data;
  };
  std::vector<PendingWrite> pending_writes;  // applied after all reads

  for (uint32_t i : order) {
    const auto [start, count] = spans[i];
    bool all_free = true;
    for (uint32_t j = 0; j < count; ++j) {
      if (bank_taken[(start + j) % spm_.num_banks]) {
        all_free = false;
        break;
      }
    }
    const TcdmRequest& request = requests[i];
    Port& port = ports_[request.port];
    if (!all_free) {
      port.stats.stalled += 1;
      port.stall_age += 1;
      if (trace_ && trace_->enabled()) {
        std::ostringstream detail;
        detail << "port=" << port.name << " kind="
               << (request.is_write ? 'w' : 'r') << " addr=" << request.addr
               << " bytes=" << request.bytes;
        trace_->emit(cycle_no, "tcdm", "stall", detail.str());
      }
      continue;
    }
    for (uint32_t j = 0; j < count; ++j) {
      bank_taken[(start + j) % spm_.num_banks] = true;
    }
    outcomes[i].granted = true;
    port.stats.granted += 1;
    port.stall_age = 0;
    bank_busy_slots_ += count;
    if (request.is_write) {
      if (request.write_data == nullptr) {
        internal_error("granted write carries no payload");
      }
      pending_writes.push_back({request.addr, request.bytes, request.write_data});
      port.stats.bytes_written += request.bytes;
    } else {
      outcomes[i].read_data.assign(mem_.begin() + request.addr,
                                   mem_.begin() + request.addr + request.bytes);
      port.stats.bytes_read += request.bytes;
    }
    if (trace_ && trace_->enabled()) {
      std::ostringstream detail;
      detail << "port=" << port.name << " kind="
             << (request.is_write ? 'w' : 'r') << " addr=" << request.addr
             << " bytes=" << request.bytes << " banks=" << start << "+"
             << count;
      trace_->emit(cycle_no, "tcdm", "grant", detail.str());
    }
  }

  // Commit writes after every read captured its cycle-start snapshot.
  for (const PendingWrite& write : pending_writes) {
    std::memcpy(mem_.data() + write.addr, write.data, write.bytes);
  }
  return outcomes;
}

void Tcdm::peek(uint64_t addr, uint32_t bytes, uint8_t* out) const {
  if (addr + bytes > mem_.size()) {
    throw Error(ErrorKind::AddressOutOfRange,
                "peek of [" + std::to_string(addr) + ", " +
                    std::to_string(addr + bytes) + ") exceeds capacity");
  }
  std::memcpy(out, mem_.data() + addr, bytes);
}

void Tcdm::poke(uint64_t addr, uint32_t bytes, const uint8_t* data) {
  if (addr + bytes > mem_.size()) {
    throw Error(ErrorKind::AddressOutOfRange,
                "poke of [" + std::to_string(addr) + ", " +
                    std::to_string(addr + bytes) + ") exceeds capacity");
  }
  std::memcpy(mem_.data() + addr, data, bytes);
}

const TcdmPortStats& Tcdm::port_stats(uint32_t port) const {
  return ports_.at(port).stats;
}

const std::string& Tcdm::port_name(uint32_t port) const {
  return ports_.at(port).name;
}

}  // namespace acsim
