// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/csr.hpp"

#include "acsim/error.hpp"

namespace acsim::csr {

std::vector<std::pair<uint32_t, uint32_t>> encode_channel(uint32_t channel_idx,
                                                          const LoopNest& nest) {
  if (nest.dims.size() > kMaxLoopDepthLimit) {
    throw Error(ErrorKind::DepthExceeded, "loop nest deeper than the CSR file supports");
  }
  if (nest.base > UINT32_MAX) {
    throw Error(ErrorKind::AddressOutOfRange, "channel base does not fit the CSR");
  }
  const uint32_t base_reg = channel_base(channel_idx);
  std::vector<std::pair<uint32_t, uint32_t>> writes;
  writes.emplace_back(base_reg + 0, static_cast<uint32_t>(nest.base));
  writes.emplace_back(base_reg + 1, static_cast<uint32_t>(nest.dims.size()));
  for (size_t i = 0; i < nest.dims.size(); ++i) {
    const auto& dim = nest.dims[i];
    if (dim.stride < INT32_MIN || dim.stride > INT32_MAX) {
      throw Error(ErrorKind::AddressOutOfRange, "channel stride does not fit the CSR");
    }
    writes.emplace_back(base_reg + 2 + 2 * static_cast<uint32_t>(i), dim.bound);
    writes.emplace_back(base_reg + 3 + 2 * static_cast<uint32_t>(i),
                        static_cast<uint32_t>(static_cast<int32_t>(dim.stride)));
  }
  return writes;
}

LoopNest decode_channel(const std::vector<uint32_t>& regs, uint32_t channel_idx) {
  const uint32_t base_reg = channel_base(channel_idx);
  if (regs.size() < base_reg + kRegsPerChannel) {
    throw Error(ErrorKind::Internal, "CSR file too small for channel decode");
  }
  LoopNest nest;
  nest.base = regs[base_reg + 0];
  const uint32_t depth = regs[base_reg + 1];
  if (depth > kMaxLoopDepthLimit) {
    throw Error(ErrorKind::ProgramFault, "programmed loop depth exceeds the hardware limit");
  }
  for (uint32_t i = 0; i < depth; ++i) {
    LoopDim dim;
    dim.bound = regs[base_reg + 2 + 2 * i];
    dim.stride = static_cast<int32_t>(regs[base_reg + 3 + 2 * i]);
    nest.dims.push_back(dim);
  }
  return nest;
}

}  // namespace acsim::csr
