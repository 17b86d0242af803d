// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/streamer.hpp"

#include <doctest.h>

#include <cstring>
#include <random>

#include "acsim/error.hpp"
#include "acsim/tcdm.hpp"

using namespace acsim;

namespace {

SpmConfig default_spm() { return SpmConfig{32, 64, 512}; }

ChannelConfig read_channel(uint32_t width_bits, uint32_t fifo_depth) {
  return ChannelConfig{ChannelDirection::Read, width_bits, fifo_depth, 8};
}

ChannelConfig write_channel(uint32_t width_bits, uint32_t fifo_depth) {
  return ChannelConfig{ChannelDirection::Write, width_bits, fifo_depth, 8};
}

// One interconnect cycle for a set of channels: collect requests, arbitrate,
// deliver grant feedback.  Mirrors the engine's phase order (issue before
// datapath pops/pushes).
void step(Tcdm& tcdm, std::vector<StreamerChannel*> channels, uint64_t cycle) {
  std::vector<TcdmRequest> requests;
  std::vector<StreamerChannel*> requesters;
  for (StreamerChannel* channel : channels) {
    if (auto request = channel->want_request(cycle)) {
      requests.push_back(*request);
      requesters.push_back(channel);
    }
  }
  auto outcomes = tcdm.cycle(cycle, requests);
  for (size_t i = 0; i < outcomes.size(); ++i) {
    requesters[i]->on_grant_result(outcomes[i], cycle);
  }
}

}  // namespace

TEST_CASE("address enumeration matches hand-computed sequences") {
  CHECK(address_sequence({0, {{4, 8}}}) ==
        std::vector<uint64_t>{0, 8, 16, 24});
  CHECK(address_sequence({256, {{2, 512}, {4, 8}}}) ==
        std::vector<uint64_t>{256, 264, 272, 280, 768, 776, 784, 792});
  // Degenerate empty nest: a single access at base.
  CHECK(address_sequence({0, {}}) == std::vector<uint64_t>{0});
}

TEST_CASE("address enumeration equals brute-force nested loops") {
  std::mt19937 rng(20260814);
  for (int trial = 0; trial < 1000; ++trial) {
    uint32_t depth = rng() % 5;  // 0..4
    LoopNest nest;
    nest.base = 4096 + (rng() % 512) * 8;
    for (uint32_t d = 0; d < depth; ++d) {
      uint32_t bound = 1 + rng() % 8;
      int64_t stride = (int64_t(rng() % 9) - 4) * 8;  // -32..32, word-aligned
      nest.dims.push_back({bound, stride});
    }

    std::vector<uint64_t> expected;
    uint32_t bounds[4] = {1, 1, 1, 1};
    int64_t strides[4] = {0, 0, 0, 0};
    for (size_t d = 0; d < nest.dims.size(); ++d) {
      bounds[d] = nest.dims[d].bound;
      strides[d] = nest.dims[d].stride;
    }
    for (uint32_t i0 = 0; i0 < bounds[0]; ++i0)
      for (uint32_t i1 = 0; i1 < bounds[1]; ++i1)
        for (uint32_t i2 = 0; i2 < bounds[2]; ++i2)
          for (uint32_t i3 = 0; i3 < bounds[3]; ++i3)
            expected.push_back(uint64_t(int64_t(nest.base) + i0 * strides[0] +
                                        i1 * strides[1] + i2 * strides[2] +
                                        i3 * strides[3]));

    CAPTURE(trial);
    REQUIRE(address_sequence(nest) == expected);
  }
}

TEST_CASE("nest validation catches depth, range, and alignment faults") {
  const uint64_t capacity = default_spm().capacity_bytes();

  LoopNest too_deep{0, std::vector<LoopDim>(9, LoopDim{2, 8})};
  CHECK_THROWS_AS(validate_nest(too_deep, 8, capacity, 8, 8), Error);

  // Second access would land exactly at the capacity boundary.
  LoopNest off_end{131064, {{2, 8}}};
  try {
    validate_nest(off_end, 8, capacity, 8, 8);
    FAIL("expected range error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AddressOutOfRange);
  }

  // Negative strides are fine while the envelope stays in range...
  LoopNest descending{64, {{4, -8}}};
  CHECK_NOTHROW(validate_nest(descending, 8, capacity, 8, 8));
  // ...and rejected when they dip below zero.
  LoopNest below_zero{8, {{3, -8}}};
  CHECK_THROWS_AS(validate_nest(below_zero, 8, capacity, 8, 8), Error);

  LoopNest misaligned{0, {{4, 4}}};
  CHECK_THROWS_AS(validate_nest(misaligned, 8, capacity, 8, 8), Error);

  LoopNest zero_bound{0, {{0, 8}}};
  CHECK_THROWS_AS(validate_nest(zero_bound, 8, capacity, 8, 8), Error);
}

TEST_CASE("read channel streams one group per cycle after 1-cycle fill") {
  Tcdm tcdm(default_spm());
  uint32_t port = tcdm.add_port(64, "r0");
  StreamerChannel channel(read_channel(64, 2), port, "r0");

  // Distinguishable memory contents: byte i holds i & 0xFF.
  std::vector<uint8_t> image(64);
  for (size_t i = 0; i < image.size(); ++i) image[i] = uint8_t(i);
  tcdm.poke(0, 64, image.data());

  channel.launch(LoopNest{0, {{5, 8}}}, 0);
  std::vector<uint64_t> delivery_cycles;
  std::vector<uint8_t> first_bytes;
  for (uint64_t cycle = 0; cycle < 10; ++cycle) {
    step(tcdm, {&channel}, cycle);
    if (channel.can_pop(cycle)) {
      first_bytes.push_back(channel.pop(cycle)[0]);
      delivery_cycles.push_back(cycle);
    }
  }
  CHECK(delivery_cycles == std::vector<uint64_t>{1, 2, 3, 4, 5});
  CHECK(first_bytes == std::vector<uint8_t>{0, 8, 16, 24, 32});
  CHECK(channel.idle());
}

TEST_CASE("read channel stops at fifo_depth outstanding groups") {
  Tcdm tcdm(default_spm());
  uint32_t port = tcdm.add_port(64, "r0");
  StreamerChannel channel(read_channel(64, 3), port, "r0");
  channel.launch(LoopNest{0, {{16, 8}}}, 0);

  for (uint64_t cycle = 0; cycle < 10; ++cycle) {
    step(tcdm, {&channel}, cycle);  // consumer never pops
  }
  CHECK(channel.groups_moved() == 3);
  CHECK_FALSE(channel.want_request(10).has_value());
}

TEST_CASE("two equal read channels share a bank at half rate each") {
  Tcdm tcdm(default_spm());
  uint32_t port_a = tcdm.add_port(64, "a");
  uint32_t port_b = tcdm.add_port(64, "b");
  StreamerChannel a(read_channel(64, 8), port_a, "a");
  StreamerChannel b(read_channel(64, 8), port_b, "b");

  // Both nests walk bank 0 only (stride = one full turn of the banks).
  a.launch(LoopNest{0, {{4, 256}}}, 0);
  b.launch(LoopNest{2048, {{4, 256}}}, 0);

  uint64_t combined = 0;
  uint64_t cycle = 0;
  for (; cycle < 64 && !(a.idle() && b.idle()); ++cycle) {
    step(tcdm, {&a, &b}, cycle);
    if (a.can_pop(cycle)) {
      a.pop(cycle);
      ++combined;
    }
    if (b.can_pop(cycle)) {
      b.pop(cycle);
      ++combined;
    }
  }
  CHECK(combined == 8);
  // One bank, one grant per cycle: grants span cycles 0..7 and the eighth
  // delivery lands at cycle 8 after fill latency; the loop exits at 9.
  CHECK(cycle == 9);
}

TEST_CASE("write channel retires pushed groups to nest addresses") {
  Tcdm tcdm(default_spm());
  uint32_t port = tcdm.add_port(64, "w0");
  StreamerChannel channel(write_channel(64, 2), port, "w0");
  channel.launch(LoopNest{64, {{4, 8}}}, 0);

  uint64_t first_grant_cycle = UINT64_MAX;
  uint32_t pushed = 0;
  for (uint64_t cycle = 0; cycle < 12 && !channel.idle(); ++cycle) {
    uint64_t before = channel.groups_moved();
    step(tcdm, {&channel}, cycle);
    if (channel.groups_moved() > before && first_grant_cycle == UINT64_MAX) {
      first_grant_cycle = cycle;
    }
    // Datapath pushes one group per cycle while it has output left.
    if (pushed < 4 && channel.can_push()) {
      std::vector<uint8_t> group(8, uint8_t(0xC0 + pushed));
      channel.push(std::move(group));
      ++pushed;
    }
  }
  CHECK(channel.idle());
  // A group pushed during cycle 0 cannot issue before cycle 1.
  CHECK(first_grant_cycle == 1);

  std::vector<uint8_t> written(32);
  tcdm.peek(64, 32, written.data());
  for (int group = 0; group < 4; ++group) {
    for (int byte = 0; byte < 8; ++byte) {
      CHECK(written[group * 8 + byte] == uint8_t(0xC0 + group));
    }
  }
}

TEST_CASE("a full run reads every nest address exactly once, in order") {
  Tcdm tcdm(default_spm());
  uint32_t port = tcdm.add_port(512, "r512");
  StreamerChannel channel(read_channel(512, 4), port, "r512");

  // Tag every 64-bit word with its own address.
  for (uint64_t addr = 0; addr < 8192; addr += 8) {
    uint64_t tag = addr;
    tcdm.poke(addr, 8, reinterpret_cast<const uint8_t*>(&tag));
  }

  LoopNest nest{512, {{3, 2048}, {4, -128}, {2, 64}}};
  std::vector<uint64_t> expected = address_sequence(nest);
  channel.launch(nest, 0);

  std::vector<uint64_t> seen;
  for (uint64_t cycle = 0; cycle < 64 && !channel.idle(); ++cycle) {
    step(tcdm, {&channel}, cycle);
    while (channel.can_pop(cycle)) {
      std::vector<uint8_t> group = channel.pop(cycle);
      uint64_t tag;
      std::memcpy(&tag, group.data(), 8);
      seen.push_back(tag);
    }
  }
  CHECK(seen == expected);
}
