// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace acsim {

// Every failure the simulator and compiler can produce is funneled through a
// single exception type with a machine-readable kind.  Call sites that need
// to distinguish failures (tests, the CLI exit-code mapping) switch on kind();
// everything else just lets the message propagate.
enum class ErrorKind {
  ParseError,         // malformed config / workload / program text
  ValidationError,    // structurally valid input violating a semantic rule
  DanglingReference,  // id referenced but never declared
  AddressOutOfRange,  // access outside scratchpad or external memory bounds
  Misaligned,         // address or stride violating an alignment rule
  DepthExceeded,      // loop nest deeper than the hardware supports
  InvalidRegister,    // CSR index outside the device's register file
  ProgramFault,       // runtime fault raised by a control program
  InvalidDescriptor,  // DMA descriptor that the engine cannot execute
  ShapeMismatch,      // tensor shapes inconsistent with the operator
  UnsupportedOp,      // operator kind the compiler does not know
  CapacityExceeded,   // allocation does not fit in the scratchpad
  Deadlock,           // simulation cannot make progress
  MaxCyclesExceeded,  // simulation hit the cycle limit
  Internal,           // invariant violation inside the tool itself
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Convenience for "this should never happen" paths.
[[noreturn]] inline void internal_error(const std::string& message) {
  throw Error(ErrorKind::Internal, message);
}

}  // namespace acsim
