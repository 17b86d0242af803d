// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace acsim {

// Inclusive byte range in scratchpad-local addresses.
struct AddrRange {
  uint64_t lo = 0;
  uint64_t hi = 0;
  bool overlaps(const AddrRange& other) const { return lo <= other.hi && other.lo <= hi; }
};

// One completed unit of hardware work (an accelerator task, a DMA transfer,
// or a scalar kernel), with the scratchpad ranges it touched. Reports and
// the race check are derived from these.
struct TaskRecord {
  std::string unit;
  std::string kind;
  std::string tag;
  uint64_t start = 0;
  uint64_t end = 0;  // inclusive: busy cycles = end - start + 1
  uint64_t work = 0;  // kind-specific: MACs, bytes moved, elements, ...
  std::vector<AddrRange> reads;
  std::vector<AddrRange> writes;

  uint64_t busy() const { return end - start + 1; }
};

// Sink the engine passes to every simulated unit for completed-task records.
using TaskRecorder = std::function<void(TaskRecord&&)>;

// Flat, deterministically ordered name -> value map; serialized as a two-row
// CSV (header + values).
using Metrics = std::map<std::string, double>;

std::string metrics_to_csv(const Metrics& metrics);
void save_metrics(const Metrics& metrics, const std::string& path);

}  // namespace acsim
