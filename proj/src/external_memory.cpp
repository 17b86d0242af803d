// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/external_memory.hpp"

#include <cstring>

namespace acsim {

void ExternalMemory::check(uint64_t addr, uint64_t bytes) const {
  if (!contains(addr, bytes)) {
    throw Error(ErrorKind::AddressOutOfRange,
                "external access [" + std::to_string(addr) + ", +" + std::to_string(bytes) +
                    ") outside the external window");
  }
}

void ExternalMemory::write(uint64_t addr, const uint8_t* data, uint64_t bytes) {
  check(addr, bytes);
  const uint64_t off = addr - kExtBase;
  if (off + bytes > data_.size()) data_.resize(off + bytes, 0);
  std::memcpy(data_.data() + off, data, bytes);
}

void ExternalMemory::read(uint64_t addr, uint8_t* out, uint64_t bytes) const {
  check(addr, bytes);
  const uint64_t off = addr - kExtBase;
  for (uint64_t i = 0; i < bytes; ++i) {
    out[i] = (off + i < data_.size()) ? data_[off + i] : 0;
  }
}

std::vector<uint8_t> ExternalMemory::read_vec(uint64_t addr, uint64_t bytes) const {
  std::vector<uint8_t> out(bytes);
  read(addr, out.data(), bytes);
  return out;
}

}  // namespace acsim
