// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/workload.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acsim/error.hpp"

namespace acsim {
namespace {

using nlohmann::json;

[[noreturn]] void fail_validation(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ValidationError, where + ": " + what);
}

template <typename T>
std::vector<T> as_typed(const TensorBytes& bytes) {
  if (bytes.size() % sizeof(T) != 0) {
    throw Error(ErrorKind::ShapeMismatch, "tensor byte count is not element aligned");
  }
  std::vector<T> out(bytes.size() / sizeof(T));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

template <typename T>
TensorBytes as_bytes(const std::vector<T>& values) {
  TensorBytes out(values.size() * sizeof(T));
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

const TensorBytes& value_of(const std::map<std::string, TensorBytes>& values,
                            const std::string& id) {
  auto it = values.find(id);
  if (it == values.end()) {
    throw Error(ErrorKind::Internal, "evaluate: no value for tensor '" + id + "'");
  }
  return it->second;
}

}  // namespace

std::string to_string(OpKind op) {
  switch (op) {
    case OpKind::Matmul: return "matmul";
    case OpKind::Conv2d: return "conv2d";
    case OpKind::MaxPool2d: return "maxpool2d";
    case OpKind::FullyConnected: return "fully_connected";
    case OpKind::Eltwise: return "eltwise";
  }
  internal_error("unknown op kind");
}

OpKind op_kind_from_string(const std::string& name) {
  if (name == "matmul") return OpKind::Matmul;
  if (name == "conv2d") return OpKind::Conv2d;
  if (name == "maxpool2d") return OpKind::MaxPool2d;
  if (name == "fully_connected") return OpKind::FullyConnected;
  if (name == "eltwise") return OpKind::Eltwise;
  throw Error(ErrorKind::ParseError, "unknown op '" + name + "'");
}

uint64_t TensorDecl::elems() const {
  uint64_t n = 1;
  for (uint32_t d : shape) n *= d;
  return n;
}

uint64_t TensorDecl::bytes() const { return elems() * dtype_size(dtype); }

const TensorDecl* Workload::find_tensor(const std::string& id) const {
  for (const auto& tensor : tensors) {
    if (tensor.id == id) return &tensor;
  }
  return nullptr;
}

const NodeDecl* Workload::find_node(const std::string& id) const {
  for (const auto& node : nodes) {
    if (node.id == id) return &node;
  }
  return nullptr;
}

const NodeDecl* Workload::producer_of(const std::string& tensor_id) const {
  for (const auto& node : nodes) {
    if (node.output == tensor_id) return &node;
  }
  return nullptr;
}

std::vector<const NodeDecl*> Workload::consumers_of(const std::string& tensor_id) const {
  std::vector<const NodeDecl*> out;
  for (const auto& node : nodes) {
    if (std::find(node.inputs.begin(), node.inputs.end(), tensor_id) != node.inputs.end()) {
      out.push_back(&node);
    }
  }
  return out;
}

std::vector<const NodeDecl*> Workload::topo_order() const {
  std::vector<const NodeDecl*> order;
  std::set<std::string> ready;  // tensors whose value is available
  for (const auto& tensor : tensors) {
    if (producer_of(tensor.id) == nullptr) ready.insert(tensor.id);
  }
  std::vector<bool> emitted(nodes.size(), false);
  // Quadratic scan; graphs are a handful of nodes.
  for (size_t step = 0; step < nodes.size(); ++step) {
    bool progressed = false;
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (emitted[i]) continue;
      const NodeDecl& node = nodes[i];
      const bool runnable = std::all_of(node.inputs.begin(), node.inputs.end(),
                                        [&](const std::string& t) { return ready.count(t); });
      if (runnable) {
        order.push_back(&node);
        ready.insert(node.output);
        emitted[i] = true;
        progressed = true;
        break;
      }
    }
    if (!progressed) {
      fail_validation("nodes", "the graph has a dependency cycle");
    }
  }
  return order;
}

void validate(Workload& workload) {
  std::set<std::string> tensor_ids;
  for (auto& tensor : workload.tensors) {
    if (tensor.id.empty()) fail_validation("tensors", "tensor id must be non-empty");
    if (!tensor_ids.insert(tensor.id).second) {
      fail_validation("tensors", "duplicate tensor id '" + tensor.id + "'");
    }
    if (tensor.shape.empty()) {
      fail_validation(tensor.id, "shape must have at least one dimension");
    }
    for (uint32_t d : tensor.shape) {
      if (d == 0) fail_validation(tensor.id, "shape dimensions must be positive");
    }
    tensor.produced = false;
  }

  std::set<std::string> node_ids;
  for (const auto& node : workload.nodes) {
    if (node.id.empty()) fail_validation("nodes", "node id must be non-empty");
    if (!node_ids.insert(node.id).second) {
      fail_validation("nodes", "duplicate node id '" + node.id + "'");
    }
    for (const auto& input : node.inputs) {
      if (!workload.find_tensor(input)) {
        throw Error(ErrorKind::DanglingReference,
                    node.id + ": unknown input tensor '" + input + "'");
      }
    }
    if (!workload.find_tensor(node.output)) {
      throw Error(ErrorKind::DanglingReference,
                  node.id + ": unknown output tensor '" + node.output + "'");
    }
  }

  for (auto& tensor : workload.tensors) {
    uint32_t producers = 0;
    for (const auto& node : workload.nodes) {
      if (node.output == tensor.id) ++producers;
    }
    if (producers > 1) {
      fail_validation(tensor.id, "tensor is written by more than one node");
    }
    tensor.produced = producers == 1;
    if (tensor.produced) {
      if (!tensor.init.empty()) {
        fail_validation(tensor.id, "a produced tensor may not declare init contents");
      }
      tensor.iterated = true;  // fresh value every iteration by construction
    } else {
      if (tensor.init.empty()) {
        fail_validation(tensor.id, "a graph input must declare init contents");
      }
      const bool ok = tensor.init == "zero" ||
                      tensor.init.rfind("random:", 0) == 0 ||
                      tensor.init.rfind("file:", 0) == 0;
      if (!ok) {
        fail_validation(tensor.id,
                        "init must be 'zero', 'random:<seed>', or 'file:<path>'");
      }
      if (tensor.init.rfind("random:", 0) == 0) {
        const std::string seed = tensor.init.substr(7);
        if (seed.empty() ||
            !std::all_of(seed.begin(), seed.end(), [](char c) { return std::isdigit(c); })) {
          fail_validation(tensor.id, "random init needs an unsigned integer seed");
        }
      }
    }
  }

  // Per-operator shape and dtype agreement.
  auto dims = [&](const std::string& id) -> const TensorDecl& {
    return *workload.find_tensor(id);
  };
  for (const auto& node : workload.nodes) {
    const std::string& where = node.id;
    auto expect_inputs = [&](size_t n) {
      if (node.inputs.size() != n) {
        fail_validation(where, "expected " + std::to_string(n) + " inputs, got " +
                                   std::to_string(node.inputs.size()));
      }
    };
    const TensorDecl& out = dims(node.output);
    switch (node.op) {
      case OpKind::Matmul: {
        expect_inputs(2);
        const TensorDecl& a = dims(node.inputs[0]);
        const TensorDecl& b = dims(node.inputs[1]);
        if (a.shape.size() != 2 || b.shape.size() != 2 || out.shape.size() != 2) {
          fail_validation(where, "matmul operands must be rank 2");
        }
        if (a.shape[1] != b.shape[0] || out.shape[0] != a.shape[0] ||
            out.shape[1] != b.shape[1]) {
          throw Error(ErrorKind::ShapeMismatch, where + ": matmul dims disagree");
        }
        if (b.dtype != DType::I8) fail_validation(where, "matmul rhs must be i8");
        if (out.dtype != DType::I32) fail_validation(where, "matmul output must be i32");
        break;
      }
      case OpKind::FullyConnected: {
        expect_inputs(2);
        const TensorDecl& x = dims(node.inputs[0]);
        const TensorDecl& w = dims(node.inputs[1]);
        if (w.shape.size() != 2 || out.shape.size() != 1) {
          fail_validation(where, "fully_connected wants w[K x N] and out[N]");
        }
        // The input flattens row major, so any rank with K total elements works.
        if (w.shape[0] != x.elems() || out.shape[0] != w.shape[1]) {
          throw Error(ErrorKind::ShapeMismatch, where + ": fully_connected dims disagree");
        }
        if (w.dtype != DType::I8) fail_validation(where, "fully_connected weights must be i8");
        if (out.dtype != DType::I32) {
          fail_validation(where, "fully_connected output must be i32");
        }
        break;
      }
      case OpKind::Conv2d: {
        expect_inputs(2);
        const TensorDecl& in = dims(node.inputs[0]);
        const TensorDecl& w = dims(node.inputs[1]);
        if (in.shape.size() != 3 || w.shape.size() != 4 || out.shape.size() != 3) {
          fail_validation(where, "conv2d wants in[H x W x C], w[kh x kw x C x F]");
        }
        if (node.stride != 1) {
          fail_validation(where, "conv2d supports stride 1 only");
        }
        const uint32_t kh = w.shape[0], kw = w.shape[1];
        if (w.shape[2] != in.shape[2]) {
          throw Error(ErrorKind::ShapeMismatch, where + ": weight channels disagree");
        }
        if (kh > in.shape[0] || kw > in.shape[1]) {
          throw Error(ErrorKind::ShapeMismatch, where + ": window does not fit input");
        }
        const uint32_t ho = in.shape[0] - kh + 1;
        const uint32_t wo = in.shape[1] - kw + 1;
        if (out.shape[0] != ho || out.shape[1] != wo || out.shape[2] != w.shape[3]) {
          throw Error(ErrorKind::ShapeMismatch, where + ": conv2d output shape disagrees");
        }
        if (in.dtype != DType::I8 || w.dtype != DType::I8) {
          fail_validation(where, "conv2d operands must be i8");
        }
        if (out.dtype != DType::I32) fail_validation(where, "conv2d output must be i32");
        break;
      }
      case OpKind::MaxPool2d: {
        expect_inputs(1);
        const TensorDecl& in = dims(node.inputs[0]);
        if (in.shape.size() != 3 || out.shape.size() != 3) {
          fail_validation(where, "maxpool2d wants in[H x W x C]");
        }
        if (node.window == 0 || node.stride == 0) {
          fail_validation(where, "maxpool2d window and stride must be positive");
        }
        if (node.window > in.shape[0] || node.window > in.shape[1]) {
          throw Error(ErrorKind::ShapeMismatch, where + ": window does not fit input");
        }
        const uint32_t ho = (in.shape[0] - node.window) / node.stride + 1;
        const uint32_t wo = (in.shape[1] - node.window) / node.stride + 1;
        if (out.shape[0] != ho || out.shape[1] != wo || out.shape[2] != in.shape[2]) {
          throw Error(ErrorKind::ShapeMismatch, where + ": maxpool2d output shape disagrees");
        }
        if (out.dtype != in.dtype) fail_validation(where, "maxpool2d preserves dtype");
        break;
      }
      case OpKind::Eltwise: {
        expect_inputs(1);
        const TensorDecl& in = dims(node.inputs[0]);
        if (in.shape != out.shape) {
          throw Error(ErrorKind::ShapeMismatch, where + ": eltwise output shape disagrees");
        }
        const bool ok = (in.dtype == DType::I8 && out.dtype == DType::I8) ||
                        (in.dtype == DType::I32 && out.dtype == DType::I32) ||
                        (in.dtype == DType::I32 && out.dtype == DType::I8);
        if (!ok) {
          fail_validation(where, "eltwise supports i8->i8, i32->i32, and i32->i8");
        }
        break;
      }
    }
  }

  // Rejects cyclic graphs.
  workload.topo_order();
}

Workload parse_workload(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  try {
    Workload workload;
    for (const json& node : root.value("tensors", json::array())) {
      TensorDecl tensor;
      tensor.id = node.value("id", "");
      for (const json& d : node.value("shape", json::array())) {
        tensor.shape.push_back(d.get<uint32_t>());
      }
      tensor.dtype = dtype_from_string(node.value("dtype", "i8"));
      const std::string home = node.value("location", "spm");
      if (home == "external") {
        tensor.home = TensorHome::External;
      } else if (home == "spm") {
        tensor.home = TensorHome::Spm;
      } else {
        throw Error(ErrorKind::ParseError,
                    tensor.id + ": location must be 'external' or 'spm'");
      }
      tensor.init = node.value("init", "");
      tensor.iterated = node.value("iterated", false);
      workload.tensors.push_back(std::move(tensor));
    }
    for (const json& node : root.value("nodes", json::array())) {
      NodeDecl decl;
      decl.id = node.value("id", "");
      decl.op = op_kind_from_string(node.value("op", ""));
      for (const json& input : node.value("inputs", json::array())) {
        decl.inputs.push_back(input.get<std::string>());
      }
      decl.output = node.value("output", "");
      const json& attrs = node.contains("attrs") ? node.at("attrs") : json::object();
      decl.stride = attrs.value("stride", 1u);
      decl.window = attrs.value("window", 2u);
      decl.func = golden::eltwise_func_from_string(attrs.value("func", "identity"));
      workload.nodes.push_back(std::move(decl));
    }
    validate(workload);
    return workload;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

Workload load_workload(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw Error(ErrorKind::ParseError, "cannot open workload file: " + path);
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_workload(buffer.str());
}

TensorBytes materialize_init(const TensorDecl& tensor, uint32_t iterations) {
  const uint32_t copies = tensor.iterated ? iterations : 1;
  const uint64_t total = tensor.bytes() * copies;
  if (tensor.init == "zero") {
    return TensorBytes(total, 0);
  }
  if (tensor.init.rfind("random:", 0) == 0) {
    std::mt19937 rng(static_cast<uint32_t>(std::stoul(tensor.init.substr(7))));
    TensorBytes out(total);
    const uint64_t count = tensor.elems() * copies;
    if (tensor.dtype == DType::I8) {
      for (uint64_t i = 0; i < count; ++i) {
        out[i] = static_cast<uint8_t>(static_cast<int>(rng() % 256) - 128);
      }
    } else {
      for (uint64_t i = 0; i < count; ++i) {
        const int32_t v = static_cast<int>(rng() % 256) - 128;
        std::memcpy(out.data() + i * 4, &v, 4);
      }
    }
    return out;
  }
  if (tensor.init.rfind("file:", 0) == 0) {
    const std::string path = tensor.init.substr(5);
    std::ifstream file(path, std::ios::binary);
    if (!file) {
      throw Error(ErrorKind::ParseError, tensor.id + ": cannot open init file " + path);
    }
    TensorBytes data((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());
    if (data.size() == total) return data;
    if (data.size() == tensor.bytes()) {
      TensorBytes out;
      out.reserve(total);
      for (uint32_t i = 0; i < copies; ++i) out.insert(out.end(), data.begin(), data.end());
      return out;
    }
    throw Error(ErrorKind::ShapeMismatch,
                tensor.id + ": init file holds " + std::to_string(data.size()) +
                    " bytes, expected " + std::to_string(tensor.bytes()) + " or " +
                    std::to_string(total));
  }
  internal_error(tensor.id + ": unhandled init '" + tensor.init + "'");
}

void evaluate(const Workload& workload, std::map<std::string, TensorBytes>& values) {
  for (const NodeDecl* node : workload.topo_order()) {
    const TensorDecl& out = *workload.find_tensor(node->output);
    switch (node->op) {
      case OpKind::Matmul:
      case OpKind::FullyConnected: {
        const TensorDecl& a = *workload.find_tensor(node->inputs[0]);
        const TensorDecl& b = *workload.find_tensor(node->inputs[1]);
        const bool fc = node->op == OpKind::FullyConnected;
        const uint32_t m = fc ? 1 : a.shape[0];
        const uint32_t k = fc ? static_cast<uint32_t>(a.elems()) : a.shape[1];
        const uint32_t n = b.shape[1];
        const auto bv = as_typed<int8_t>(value_of(values, b.id));
        std::vector<int32_t> c;
        if (a.dtype == DType::I8) {
          c = golden::matmul<int8_t>(as_typed<int8_t>(value_of(values, a.id)), bv, m, k, n);
        } else {
          c = golden::matmul<int32_t>(as_typed<int32_t>(value_of(values, a.id)), bv, m, k, n);
        }
        values[out.id] = as_bytes(c);
        break;
      }
      case OpKind::Conv2d: {
        const TensorDecl& in = *workload.find_tensor(node->inputs[0]);
        const TensorDecl& w = *workload.find_tensor(node->inputs[1]);
        const uint32_t kh = w.shape[0], kw = w.shape[1];
        const auto patches =
            golden::im2col(as_typed<int8_t>(value_of(values, in.id)), in.shape[0],
                           in.shape[1], in.shape[2], kh, kw);
        const uint32_t rows = (in.shape[0] - kh + 1) * (in.shape[1] - kw + 1);
        const uint32_t depth = kh * kw * in.shape[2];
        values[out.id] = as_bytes(golden::matmul<int8_t>(
            patches, as_typed<int8_t>(value_of(values, w.id)), rows, depth, w.shape[3]));
        break;
      }
      case OpKind::MaxPool2d: {
        const TensorDecl& in = *workload.find_tensor(node->inputs[0]);
        const TensorBytes& raw = value_of(values, in.id);
        if (in.dtype == DType::I8) {
          values[out.id] = as_bytes(
              golden::maxpool2d<int8_t>(as_typed<int8_t>(raw), in.shape[0], in.shape[1],
                                        in.shape[2], node->window, node->stride));
        } else {
          values[out.id] = as_bytes(
              golden::maxpool2d<int32_t>(as_typed<int32_t>(raw), in.shape[0], in.shape[1],
                                         in.shape[2], node->window, node->stride));
        }
        break;
      }
      case OpKind::Eltwise: {
        const TensorDecl& in = *workload.find_tensor(node->inputs[0]);
        const TensorBytes& raw = value_of(values, in.id);
        if (in.dtype == DType::I8) {
          values[out.id] = as_bytes(golden::eltwise_i8(as_typed<int8_t>(raw), node->func));
        } else if (out.dtype == DType::I32) {
          values[out.id] = as_bytes(golden::eltwise_i32(as_typed<int32_t>(raw), node->func));
        } else {
          values[out.id] =
              as_bytes(golden::eltwise_i32_to_i8(as_typed<int32_t>(raw), node->func));
        }
        break;
      }
    }
  }
}

}  // namespace acsim
