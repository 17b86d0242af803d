// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "acsim/error.hpp"

namespace acsim {

std::string metrics_to_csv(const Metrics& metrics) {
  std::ostringstream names, values;
  bool first = true;
  values.precision(12);
  for (const auto& [name, value] : metrics) {
    if (!first) {
      names << ',';
      values << ',';
    }
    first = false;
    names << name;
    if (value == std::floor(value) && std::abs(value) < 1e15) {
      values << static_cast<long long>(value);
    } else {
      values << value;
    }
  }
  return names.str() + "\n" + values.str() + "\n";
}

void save_metrics(const Metrics& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ParseError, "cannot open for writing: " + path);
  out << metrics_to_csv(metrics);
}

}  // namespace acsim
