// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/error.hpp"

namespace acsim {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "parse error";
    case ErrorKind::ValidationError: return "validation error";
    case ErrorKind::DanglingReference: return "dangling reference";
    case ErrorKind::AddressOutOfRange: return "address out of range";
    case ErrorKind::Misaligned: return "misaligned access";
    case ErrorKind::DepthExceeded: return "loop depth exceeded";
    case ErrorKind::InvalidRegister: return "invalid register";
    case ErrorKind::ProgramFault: return "program fault";
    case ErrorKind::InvalidDescriptor: return "invalid descriptor";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::UnsupportedOp: return "unsupported operator";
    case ErrorKind::CapacityExceeded: return "capacity exceeded";
    case ErrorKind::Deadlock: return "deadlock";
    case ErrorKind::MaxCyclesExceeded: return "cycle limit exceeded";
    case ErrorKind::Internal: return "internal error";
  }
  return "unknown error";
}

}  // namespace acsim
