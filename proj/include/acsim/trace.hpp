// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>

namespace acsim {

// Append-only CSV event sink shared by all simulated units.
// Schema: cycle,unit,event,detail.  Detail strings use spaces and '='
// separators (never commas) so rows stay trivially splittable.
class Trace {
 public:
  Trace() = default;

  // Opens a CSV file and writes the header.  Throws on I/O failure.
  void open(const std::string& path);

  bool enabled() const { return out_ != nullptr; }

  void emit(uint64_t cycle, std::string_view unit, std::string_view event,
            std::string_view detail);

 private:
  std::unique_ptr<std::ofstream> out_;
};

}  // namespace acsim
