// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "acsim/accel.hpp"
#include "acsim/config.hpp"
#include "acsim/control.hpp"
#include "acsim/dma.hpp"
#include "acsim/external_memory.hpp"
#include "acsim/kprog.hpp"
#include "acsim/metrics.hpp"
#include "acsim/tcdm.hpp"
#include "acsim/trace.hpp"

namespace acsim {

struct EngineOptions {
  std::string trace_path;  // empty: tracing off
  uint64_t max_cycles = 1'000'000'000;
  bool race_check = true;
};

struct SimResult {
  uint64_t cycles = 0;
  Metrics metrics;
  std::vector<TaskRecord> tasks;
};

// Cycle-level cluster model. Each cycle advances in fixed phases:
// sequencers, task activation, streamer/DMA request collection, interconnect
// arbitration, datapaths, barrier release. The engine owns all state; run()
// executes until every core has retired its program and all devices are
// idle, and throws on deadlock (kind Deadlock) or when max_cycles elapses.
class Engine {
 public:
  Engine(ClusterConfig config, kprog::Program program, EngineOptions options = {});

  Tcdm& spm() { return *tcdm_; }
  ExternalMemory& external() { return ext_; }
  const ClusterConfig& config() const { return config_; }

  SimResult run();

 private:
  Metrics build_metrics(uint64_t cycles);
  uint64_t count_races();

  ClusterConfig config_;
  kprog::Program program_;
  EngineOptions options_;
  Trace trace_;
  ExternalMemory ext_;
  std::unique_ptr<Tcdm> tcdm_;
  std::vector<std::unique_ptr<AcceleratorDevice>> devices_;
  std::vector<std::unique_ptr<DmaEngine>> dmas_;
  BarrierManager barriers_;
  std::vector<std::unique_ptr<Sequencer>> sequencers_;
  std::vector<TaskRecord> records_;
};

}  // namespace acsim
