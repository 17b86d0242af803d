// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "acsim/config.hpp"
#include "acsim/error.hpp"

namespace acsim {

// Flat byte-addressable off-cluster memory behind the external channel.
// Storage grows on demand; untouched bytes read as zero. Addresses are
// absolute (within [kExtBase, kExtBase + kExtSize)).
class ExternalMemory {
 public:
  static bool contains(uint64_t addr, uint64_t bytes) {
    return addr >= kExtBase && addr + bytes <= kExtBase + kExtSize && addr + bytes >= addr;
  }

  void write(uint64_t addr, const uint8_t* data, uint64_t bytes);
  void read(uint64_t addr, uint8_t* out, uint64_t bytes) const;

  std::vector<uint8_t> read_vec(uint64_t addr, uint64_t bytes) const;

 private:
  void check(uint64_t addr, uint64_t bytes) const;
  std::vector<uint8_t> data_;
};

}  // namespace acsim
