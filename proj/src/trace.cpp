// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/trace.hpp"

#include "acsim/error.hpp"

namespace acsim {

void Trace::open(const std::string& path) {
  out_ = std::make_unique<std::ofstream>(path);
  if (!*out_) {
    throw Error(ErrorKind::ParseError, "cannot open trace file: " + path);
  }
  *out_ << "cycle,unit,event,detail\n";
}

void Trace::emit(uint64_t cycle, std::string_view unit, std::string_view event,
                 std::string_view detail) {
  if (!out_) return;
  *out_ << cycle << ',' << unit << ',' << event << ',' << detail << '\n';
}

}  // namespace acsim
