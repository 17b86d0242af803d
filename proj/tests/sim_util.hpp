// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "acsim/accel.hpp"
#include "acsim/config.hpp"
#include "acsim/csr.hpp"
#include "acsim/golden.hpp"
#include "acsim/kprog.hpp"
#include "acsim/tcdm.hpp"
#include "doctest.h"

namespace acsim::test {

inline AcceleratorConfig gemm_accel(uint32_t id = 0) {
  AcceleratorConfig a;
  a.id = id;
  a.kind = AcceleratorKind::Gemm;
  a.channels = {ChannelConfig{ChannelDirection::Read, 512, 8, 8},
                ChannelConfig{ChannelDirection::Read, 512, 8, 8},
                ChannelConfig{ChannelDirection::Write, 2048, 8, 8}};
  return a;
}

inline AcceleratorConfig pool_accel(uint32_t id = 0) {
  AcceleratorConfig a;
  a.id = id;
  a.kind = AcceleratorKind::MaxPool;
  a.channels = {ChannelConfig{ChannelDirection::Read, 512, 8, 8},
                ChannelConfig{ChannelDirection::Write, 512, 8, 8}};
  return a;
}

// Drives one accelerator through the same per-cycle phases the engine uses,
// with direct CSR access for cycle-precise tests.
struct DeviceHarness {
  SpmConfig spm;
  Tcdm tcdm;
  std::unique_ptr<AcceleratorDevice> dev;
  std::vector<TaskRecord> records;
  uint64_t now = 0;

  explicit DeviceHarness(const AcceleratorConfig& accel) : tcdm(spm) {
    dev = AcceleratorDevice::create(accel, spm, tcdm, nullptr);
    dev->set_recorder([this](TaskRecord&& r) { records.push_back(std::move(r)); });
  }

  void write(uint32_t reg, uint32_t value) { dev->write_csr(reg, value, now, ""); }

  void write_nest(uint32_t channel, const LoopNest& nest) {
    for (const auto& [reg, value] : csr::encode_channel(channel, nest)) write(reg, value);
  }

  void step() {
    dev->activate_phase(now);
    std::vector<TcdmRequest> requests;
    std::vector<StreamerChannel*> sinks;
    for (auto& ch : dev->channels()) {
      if (auto req = ch.want_request(now)) {
        requests.push_back(*req);
        sinks.push_back(&ch);
      }
    }
    auto outcomes = tcdm.cycle(now, requests);
    for (size_t i = 0; i < outcomes.size(); ++i) sinks[i]->on_grant_result(outcomes[i], now);
    dev->datapath_phase(now);
    ++now;
  }

  void run_to_idle(uint64_t limit = 100000) {
    ++now;  // launch cycle itself is over once the CSR write lands
    while (dev->busy_visible()) {
      REQUIRE(now < limit);
      step();
    }
  }
};

// Operand streams for a blocked matrix product, laid out as flat stream
// images (one 64-byte block per slot, in exactly the order the device
// consumes them), plus the expected result tiles in emission order.
struct GemmStreams {
  std::vector<uint8_t> a_stream;   // cm*cn*t blocks
  std::vector<uint8_t> b_stream;   // cm*cn*t blocks
  std::vector<uint8_t> c_tiles;    // cm*cn blocks of 256 bytes
  uint64_t blocks = 0;             // cm*cn*t
  uint64_t out_tiles = 0;          // cm*cn
};

inline GemmStreams make_gemm_streams(uint32_t m, uint32_t k, uint32_t n, uint32_t seed) {
  REQUIRE(m % 8 == 0);
  REQUIRE(k % 8 == 0);
  REQUIRE(n % 8 == 0);
  std::mt19937 rng(seed);
  std::vector<int8_t> a(static_cast<size_t>(m) * k);
  std::vector<int8_t> b(static_cast<size_t>(k) * n);
  for (auto& v : a) v = static_cast<int8_t>(static_cast<int>(rng() % 256) - 128);
  for (auto& v : b) v = static_cast<int8_t>(static_cast<int>(rng() % 256) - 128);
  std::vector<int32_t> c = golden::matmul<int8_t>(a, b, m, k, n);

  GemmStreams s;
  const uint32_t cm = m / 8, t = k / 8, cn = n / 8;
  s.blocks = static_cast<uint64_t>(cm) * cn * t;
  s.out_tiles = static_cast<uint64_t>(cm) * cn;
  for (uint32_t tn = 0; tn < cn; ++tn) {
    for (uint32_t tm = 0; tm < cm; ++tm) {
      for (uint32_t tk = 0; tk < t; ++tk) {
        for (uint32_t r = 0; r < 8; ++r) {
          for (uint32_t col = 0; col < 8; ++col) {
            s.a_stream.push_back(static_cast<uint8_t>(a[(tm * 8 + r) * k + tk * 8 + col]));
          }
        }
        for (uint32_t r = 0; r < 8; ++r) {
          for (uint32_t col = 0; col < 8; ++col) {
            s.b_stream.push_back(static_cast<uint8_t>(b[(tk * 8 + r) * n + tn * 8 + col]));
          }
        }
      }
      for (uint32_t r = 0; r < 8; ++r) {
        for (uint32_t col = 0; col < 8; ++col) {
          const int32_t v = c[(tm * 8 + r) * n + tn * 8 + col];
          const uint8_t* p = reinterpret_cast<const uint8_t*>(&v);
          s.c_tiles.insert(s.c_tiles.end(), p, p + 4);
        }
      }
    }
  }
  return s;
}

// Flat stream-image nests. A at 0x0000 and B at 0x1040 sit in different
// bank quarters at every simultaneous issue index, so the two read ports
// never contend and timing depends only on the result-port arbitration.
inline constexpr uint64_t kABase = 0x0000;
inline constexpr uint64_t kBBase = 0x1040;
inline constexpr uint64_t kCBase = 0x8000;

inline LoopNest flat_nest(uint64_t base, uint64_t count, int64_t stride) {
  return LoopNest{base, {LoopDim{static_cast<uint32_t>(count), stride}}};
}

// Programs a whole matrix task (dims, stream nests, launch) at the current
// harness cycle.
inline void launch_gemm(DeviceHarness& h, uint32_t m, uint32_t k, uint32_t n) {
  const uint64_t blocks = static_cast<uint64_t>(m / 8) * (k / 8) * (n / 8);
  const uint64_t tiles = static_cast<uint64_t>(m / 8) * (n / 8);
  h.write(csr::kRegGemmM, m);
  h.write(csr::kRegGemmK, k);
  h.write(csr::kRegGemmN, n);
  h.write_nest(0, flat_nest(kABase, blocks, 64));
  h.write_nest(1, flat_nest(kBBase, blocks, 64));
  h.write_nest(2, flat_nest(kCBase, tiles, 256));
  h.write(csr::kRegLaunch, 1);
}

}  // namespace acsim::test
