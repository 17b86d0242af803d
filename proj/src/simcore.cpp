// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/simcore.hpp"

#include <algorithm>
#include <utility>

#include "acsim/error.hpp"

namespace acsim {

Engine::Engine(ClusterConfig config, kprog::Program program, EngineOptions options)
    : config_(std::move(config)), program_(std::move(program)), options_(std::move(options)) {
  validate(config_);
  kprog::validate(program_, config_);
  if (!options_.trace_path.empty()) trace_.open(options_.trace_path);
  Trace* trace = trace_.enabled() ? &trace_ : nullptr;

  tcdm_ = std::make_unique<Tcdm>(config_.spm, trace);
  auto record = [this](TaskRecord&& r) { records_.push_back(std::move(r)); };

  for (const auto& acc : config_.accelerators) {
    devices_.push_back(AcceleratorDevice::create(acc, config_.spm, *tcdm_, trace));
    devices_.back()->set_recorder(record);
  }
  for (const auto& dma : config_.dma) {
    dmas_.push_back(std::make_unique<DmaEngine>(dma, config_.external_channel, config_.spm,
                                                *tcdm_, ext_, trace));
    dmas_.back()->set_recorder(record);
  }

  for (const auto& core : config_.control_cores) {
    std::map<uint32_t, AcceleratorDevice*> owned;
    for (uint32_t acc_id : core.accelerator_ids) {
      for (auto& dev : devices_) {
        if (dev->id() == acc_id) owned[acc_id] = dev.get();
      }
    }
    DmaEngine* dma = nullptr;
    if (!core.dma_ids.empty()) {
      for (auto& d : dmas_) {
        if (d->id() == core.dma_ids.front()) dma = d.get();
      }
    }
    std::vector<kprog::Instruction> instrs;
    if (auto it = program_.cores.find(core.id); it != program_.cores.end()) {
      instrs = it->second;
    }
    sequencers_.push_back(std::make_unique<Sequencer>(core.id, std::move(instrs), std::move(owned),
                                                      dma, barriers_, *tcdm_,
                                                      config_.scalar_cost_model, trace));
    sequencers_.back()->set_recorder(record);
  }
}

SimResult Engine::run() {
  records_.clear();
  uint64_t cycle = 0;
  // Request sinks for the grant feedback, parallel to the request vector.
  struct Sink {
    StreamerChannel* channel = nullptr;
    DmaEngine* dma = nullptr;
  };
  std::vector<TcdmRequest> requests;
  std::vector<Sink> sinks;

  for (;; ++cycle) {
    bool all_finished = std::all_of(sequencers_.begin(), sequencers_.end(),
                                    [](const auto& s) { return s->finished(); });
    bool any_device_busy =
        std::any_of(devices_.begin(), devices_.end(),
                    [](const auto& d) { return d->busy_visible(); }) ||
        std::any_of(dmas_.begin(), dmas_.end(), [](const auto& d) { return d->busy_visible(); });
    if (all_finished && !any_device_busy) break;
    if (cycle >= options_.max_cycles) {
      throw Error(ErrorKind::MaxCyclesExceeded,
                  "no completion after " + std::to_string(options_.max_cycles) + " cycles");
    }

    for (auto& seq : sequencers_) seq->cycle(cycle);
    for (auto& dev : devices_) dev->activate_phase(cycle);

    requests.clear();
    sinks.clear();
    for (auto& dev : devices_) {
      for (auto& ch : dev->channels()) {
        if (auto req = ch.want_request(cycle)) {
          requests.push_back(*req);
          sinks.push_back(Sink{&ch, nullptr});
        }
      }
    }
    for (auto& dma : dmas_) {
      if (auto req = dma->want_request(cycle)) {
        requests.push_back(*req);
        sinks.push_back(Sink{nullptr, dma.get()});
      }
    }
    std::vector<TcdmOutcome> outcomes = tcdm_->cycle(cycle, requests);
    for (size_t i = 0; i < outcomes.size(); ++i) {
      if (sinks[i].channel != nullptr) {
        sinks[i].channel->on_grant_result(outcomes[i], cycle);
      } else {
        sinks[i].dma->on_grant_result(outcomes[i], cycle);
      }
    }

    for (auto& dev : devices_) dev->datapath_phase(cycle);
    barriers_.end_of_cycle(cycle);

    // Progress check: if no core advanced, no kernel is in flight, and no
    // device was busy when the cycle began (a completion this cycle can still
    // unblock a waiter next cycle), then no future cycle can differ from this
    // one.
    bool any_advanced = std::any_of(sequencers_.begin(), sequencers_.end(),
                                    [](const auto& s) { return s->advanced_this_cycle(); });
    bool any_exec = std::any_of(sequencers_.begin(), sequencers_.end(),
                                [](const auto& s) { return s->scalar_busy(); });
    bool all_done_now = std::all_of(sequencers_.begin(), sequencers_.end(),
                                    [](const auto& s) { return s->finished(); });
    if (!all_done_now && !any_advanced && !any_exec && !any_device_busy) {
      std::string stuck;
      for (const auto& seq : sequencers_) {
        if (!seq->finished()) {
          if (!stuck.empty()) stuck += ", ";
          stuck += "core" + std::to_string(seq->core_id());
        }
      }
      throw Error(ErrorKind::Deadlock,
                  "no progress at cycle " + std::to_string(cycle) + "; blocked: " + stuck);
    }
  }

  SimResult result;
  result.cycles = cycle;
  result.tasks = records_;
  result.metrics = build_metrics(cycle);
  return result;
}

Metrics Engine::build_metrics(uint64_t cycles) {
  Metrics m;
  m["cycles"] = static_cast<double>(cycles);

  m["spm.bank_busy_slots"] = static_cast<double>(tcdm_->bank_busy_slots());
  if (cycles > 0) {
    m["spm.bank_utilization"] = static_cast<double>(tcdm_->bank_busy_slots()) /
                                (static_cast<double>(cycles) * tcdm_->num_banks());
  }
  for (uint32_t p = 0; p < tcdm_->num_ports(); ++p) {
    const TcdmPortStats& s = tcdm_->port_stats(p);
    const std::string base = "port." + tcdm_->port_name(p);
    m[base + ".granted"] = static_cast<double>(s.granted);
    m[base + ".stalled"] = static_cast<double>(s.stalled);
    m[base + ".bytes_read"] = static_cast<double>(s.bytes_read);
    m[base + ".bytes_written"] = static_cast<double>(s.bytes_written);
  }

  // Per-unit and per-tag aggregates over completed tasks.
  std::map<std::string, std::array<uint64_t, 3>> per_unit;  // busy, tasks, work
  std::map<std::string, uint64_t> per_tag;
  for (const TaskRecord& r : records_) {
    auto& u = per_unit[r.unit];
    u[0] += r.busy();
    u[1] += 1;
    u[2] += r.work;
    if (!r.tag.empty()) per_tag[r.tag] += r.busy();
  }
  for (const auto& [unit, v] : per_unit) {
    m["unit." + unit + ".busy_cycles"] = static_cast<double>(v[0]);
    m["unit." + unit + ".tasks"] = static_cast<double>(v[1]);
    m["unit." + unit + ".work"] = static_cast<double>(v[2]);
  }
  for (const auto& [tag, busy] : per_tag) {
    m["tag." + tag + ".cycles"] = static_cast<double>(busy);
  }

  for (const auto& seq : sequencers_) {
    m["core" + std::to_string(seq->core_id()) + ".instructions"] =
        static_cast<double>(seq->instructions_retired());
  }

  // Matrix-unit throughput: `work` counts MACs, peak is one full tile/cycle.
  for (const auto& dev : devices_) {
    if (dev->config().kind != AcceleratorKind::Gemm) continue;
    const GemmParams& g = dev->config().gemm;
    double peak_ops = 2.0 * g.mu * g.ku * g.nu;
    auto it = per_unit.find(dev->name());
    double macs = it == per_unit.end() ? 0.0 : static_cast<double>(it->second[2]);
    double busy = it == per_unit.end() ? 0.0 : static_cast<double>(it->second[0]);
    const std::string base = "unit." + dev->name();
    m[base + ".macs"] = macs;
    if (cycles > 0) {
      m[base + ".ops_per_cycle"] = 2.0 * macs / static_cast<double>(cycles);
      m[base + ".utilization"] = 2.0 * macs / (static_cast<double>(cycles) * peak_ops);
    }
    if (busy > 0) {
      m[base + ".busy_utilization"] = 2.0 * macs / (busy * peak_ops);
    }
  }

  if (options_.race_check) {
    m["race_warnings"] = static_cast<double>(count_races());
  }
  return m;
}

uint64_t Engine::count_races() {
  // Post-hoc hazard scan: two tasks on different units whose active windows
  // overlap in time and whose scratchpad footprints conflict (write-write or
  // write-read). Non-fatal; the count surfaces in the metrics and each pair
  // is traced once.
  uint64_t warnings = 0;
  for (size_t i = 0; i < records_.size(); ++i) {
    for (size_t j = i + 1; j < records_.size(); ++j) {
      const TaskRecord& a = records_[i];
      const TaskRecord& b = records_[j];
      if (a.unit == b.unit) continue;
      if (a.end < b.start || b.end < a.start) continue;
      bool conflict = false;
      for (const AddrRange& wa : a.writes) {
        for (const AddrRange& wb : b.writes) conflict |= wa.overlaps(wb);
        for (const AddrRange& rb : b.reads) conflict |= wa.overlaps(rb);
      }
      for (const AddrRange& wb : b.writes) {
        for (const AddrRange& ra : a.reads) conflict |= wb.overlaps(ra);
      }
      if (conflict) {
        ++warnings;
        if (trace_.enabled()) {
          trace_.emit(a.end, "engine", "race_warning",
                      a.unit + "/" + a.kind + " overlaps " + b.unit + "/" + b.kind);
        }
      }
    }
  }
  return warnings;
}

}  // namespace acsim
