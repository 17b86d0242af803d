// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include "acsim/error.hpp"

namespace acsim {

enum class DType { I8, I32 };

inline size_t dtype_size(DType t) { return t == DType::I8 ? 1 : 4; }

inline std::string to_string(DType t) { return t == DType::I8 ? "i8" : "i32"; }

inline DType dtype_from_string(const std::string& s) {
  if (s == "i8") return DType::I8;
  if (s == "i32") return DType::I32;
  throw Error(ErrorKind::ParseError, "unknown dtype: " + s);
}

}  // namespace acsim
