// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "acsim/accel.hpp"
#include "acsim/dma.hpp"
#include "acsim/kprog.hpp"
#include "acsim/metrics.hpp"
#include "acsim/tcdm.hpp"
#include "acsim/trace.hpp"

namespace acsim {

// Cluster-wide named barriers. A barrier's participants are the cores whose
// programs contain it; the barrier releases one cycle after the last
// participant arrives, and blocked cores resume on the release cycle.
class BarrierManager {
 public:
  void add_participant(uint32_t barrier_id, uint32_t core_id);
  void arrive(uint32_t barrier_id, uint32_t core_id, uint64_t cycle);
  bool can_pass(uint32_t barrier_id, uint64_t cycle) const;
  void mark_passed(uint32_t barrier_id, uint32_t core_id);
  void end_of_cycle(uint64_t cycle);

 private:
  struct State {
    std::set<uint32_t> participants;
    std::set<uint32_t> arrived;
    std::set<uint32_t> passed;
    uint64_t release_cycle = 0;
    bool released = false;
  };
  std::map<uint32_t, State> barriers_;
};

// In-order single-issue control core: one unit-cost instruction per cycle
// (CSR access, DMA descriptor, scalar-kernel cycles), with WAIT, WDMA, BAR
// and TAG retiring for free on the cycle their condition is observed.
// Scalar kernels (EXEC) block the core for the cost model's cycle count and
// apply their effect to the scratchpad when they finish.
class Sequencer {
 public:
  Sequencer(uint32_t core_id, std::vector<kprog::Instruction> program,
            std::map<uint32_t, AcceleratorDevice*> devices, DmaEngine* dma,
            BarrierManager& barriers, Tcdm& tcdm, const ScalarCostModel& costs, Trace* trace);

  void set_recorder(TaskRecorder recorder) { recorder_ = std::move(recorder); }

  uint32_t core_id() const { return core_id_; }
  bool finished() const { return pc_ == program_.size() && exec_remaining_ == 0; }
  bool advanced_this_cycle() const { return advanced_; }
  bool scalar_busy() const { return exec_remaining_ > 0; }
  uint64_t instructions_retired() const { return retired_; }

  void cycle(uint64_t now);

 private:
  void begin_exec(const kprog::Instruction& instr, uint64_t now);
  void apply_exec_effect(const kprog::Instruction& instr);
  uint64_t spm_offset(uint64_t addr, uint64_t bytes, const std::string& what) const;

  uint32_t core_id_;
  std::string name_;
  std::vector<kprog::Instruction> program_;
  std::map<uint32_t, AcceleratorDevice*> devices_;
  DmaEngine* dma_ = nullptr;
  BarrierManager& barriers_;
  Tcdm& tcdm_;
  ScalarCostModel costs_;
  Trace* trace_ = nullptr;
  TaskRecorder recorder_;

  size_t pc_ = 0;
  bool advanced_ = false;
  bool barrier_arrived_ = false;
  uint64_t exec_remaining_ = 0;
  std::string tag_;
  uint64_t retired_ = 0;
  TaskRecord exec_record_;
};

}  // namespace acsim
