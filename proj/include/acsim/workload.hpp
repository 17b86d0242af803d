// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "acsim/dtype.hpp"
#include "acsim/golden.hpp"

namespace acsim {

// A workload is a small feed-forward tensor graph: declared tensors plus the
// operator nodes that connect them.  It is the compiler's input format and it
// doubles as the functional reference, via evaluate() below.

enum class OpKind { Matmul, Conv2d, MaxPool2d, FullyConnected, Eltwise };

std::string to_string(OpKind op);
OpKind op_kind_from_string(const std::string& name);

enum class TensorHome { External, Spm };

struct TensorDecl {
  std::string id;
  std::vector<uint32_t> shape;  // row major, innermost last
  DType dtype = DType::I8;
  TensorHome home = TensorHome::Spm;
  // Initial contents for graph inputs: "zero", "random:<seed>", or
  // "file:<path>".  Empty for tensors produced by a node.
  std::string init;
  // True when the tensor carries a fresh value every batch iteration.  Inputs
  // default to constant; produced tensors are always iterated.
  bool iterated = false;
  // Derived during validation.
  bool produced = false;

  uint64_t elems() const;
  uint64_t bytes() const;
};

struct NodeDecl {
  std::string id;
  OpKind op = OpKind::Matmul;
  std::vector<std::string> inputs;
  std::string output;
  // Op attributes (only the ones relevant to `op` are meaningful).
  uint32_t stride = 1;                                       // conv2d, maxpool2d
  uint32_t window = 2;                                       // maxpool2d
  golden::EltwiseFunc func = golden::EltwiseFunc::Identity;  // eltwise
};

struct Workload {
  std::vector<TensorDecl> tensors;
  std::vector<NodeDecl> nodes;

  const TensorDecl* find_tensor(const std::string& id) const;
  const NodeDecl* find_node(const std::string& id) const;
  // Node producing `tensor_id`, or nullptr for graph inputs.
  const NodeDecl* producer_of(const std::string& tensor_id) const;
  std::vector<const NodeDecl*> consumers_of(const std::string& tensor_id) const;
  // Nodes in a dependency-respecting order (validation guarantees one exists).
  std::vector<const NodeDecl*> topo_order() const;
};

// Parse + structural validation: unique ids, resolvable references, acyclic,
// shape and dtype agreement per operator, init strings well formed.  Marks
// produced tensors.  Throws Error on any violation.
Workload parse_workload(const std::string& text);
Workload load_workload(const std::string& path);
void validate(Workload& workload);

// Raw little-endian bytes of a tensor value.
using TensorBytes = std::vector<uint8_t>;

// Initial contents of a graph input for `iterations` batch iterations
// (iterations copies for an iterated tensor, one otherwise).  "random:<seed>"
// draws every element from mt19937(seed) as (next % 256) - 128, one
// continuous stream across iterations.  "file:<path>" must hold either the
// full stream or a single iteration to replicate.
TensorBytes materialize_init(const TensorDecl& tensor, uint32_t iterations);

// Evaluate one batch iteration functionally: `values` maps every graph input
// id to its bytes for this iteration; on return it also holds every produced
// tensor.  Kernels are the golden reference implementations.
void evaluate(const Workload& workload, std::map<std::string, TensorBytes>& values);

}  // namespace acsim
