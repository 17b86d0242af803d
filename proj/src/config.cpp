// Copyright (c) 2026 acsim contributors
// SPDX-License-Identifier: Apache-2.0
#include "acsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acsim/error.hpp"

namespace acsim {
namespace {

using nlohmann::json;

[[noreturn]] void fail_validation(const std::string& field,
                                  const std::string& what) {
  throw Error(ErrorKind::ValidationError, field + ": " + what);
}

uint32_t get_u32(const json& node, const char* key,
                 std::optional<uint32_t> fallback = std::nullopt) {
  if (!node.contains(key)) {
    if (fallback) return *fallback;
    throw Error(ErrorKind::ParseError, std::string("missing key '") + key + "'");
  }
  const json& value = node.at(key);
  if (!value.is_number_unsigned()) {
    throw Error(ErrorKind::ParseError,
                std::string("key '") + key + "' must be a non-negative integer");
  }
  return value.get<uint32_t>();
}

double get_positive_double(const json& node, const char* key, double fallback) {
  if (!node.contains(key)) return fallback;
  const json& value = node.at(key);
  if (!value.is_number()) {
    throw Error(ErrorKind::ParseError,
                std::string("key '") + key + "' must be a number");
  }
  return value.get<double>();
}

ChannelConfig parse_channel(const json& node) {
  ChannelConfig channel;
  std::string direction = node.value("direction", "");
  if (direction == "read") {
    channel.direction = ChannelDirection::Read;
  } else if (direction == "write") {
    channel.direction = ChannelDirection::Write;
  } else {
    throw Error(ErrorKind::ParseError,
                "channel direction must be 'read' or 'write', got '" +
                    direction + "'");
  }
  channel.width_bits = get_u32(node, "width_bits");
  channel.fifo_depth = get_u32(node, "fifo_depth", 8);
  channel.max_loop_depth = get_u32(node, "max_loop_depth", 8);
  return channel;
}

AcceleratorConfig parse_accelerator(const json& node) {
  AcceleratorConfig accel;
  accel.id = get_u32(node, "id");
  std::string kind = node.value("kind", "");
  if (kind == "gemm") {
    accel.kind = AcceleratorKind::Gemm;
  } else if (kind == "maxpool") {
    accel.kind = AcceleratorKind::MaxPool;
  } else {
    throw Error(ErrorKind::ParseError,
                "accelerator kind must be 'gemm' or 'maxpool', got '" + kind +
                    "'");
  }
  if (!node.contains("channels") || !node.at("channels").is_array()) {
    throw Error(ErrorKind::ParseError,
                "accelerator must list its streamer 'channels'");
  }
  for (const json& channel : node.at("channels")) {
    accel.channels.push_back(parse_channel(channel));
  }
  if (accel.kind == AcceleratorKind::Gemm) {
    const json& params = node.contains("gemm") ? node.at("gemm") : json::object();
    accel.gemm.mu = get_u32(params, "Mu", 8);
    accel.gemm.ku = get_u32(params, "Ku", 8);
    accel.gemm.nu = get_u32(params, "Nu", 8);
  } else {
    const json& params =
        node.contains("maxpool") ? node.at("maxpool") : json::object();
    accel.maxpool.lanes = get_u32(params, "lanes", 8);
  }
  return accel;
}

json channel_to_json(const ChannelConfig& channel) {
  return json{
      {"direction",
       channel.direction == ChannelDirection::Read ? "read" : "write"},
      {"width_bits", channel.width_bits},
      {"fifo_depth", channel.fifo_depth},
      {"max_loop_depth", channel.max_loop_depth},
  };
}

}  // namespace

std::vector<uint32_t> AcceleratorConfig::read_channel_indices() const {
  std::vector<uint32_t> indices;
  for (uint32_t i = 0; i < channels.size(); ++i) {
    if (channels[i].direction == ChannelDirection::Read) indices.push_back(i);
  }
  return indices;
}

std::vector<uint32_t> AcceleratorConfig::write_channel_indices() const {
  std::vector<uint32_t> indices;
  for (uint32_t i = 0; i < channels.size(); ++i) {
    if (channels[i].direction == ChannelDirection::Write) indices.push_back(i);
  }
  return indices;
}

const AcceleratorConfig* ClusterConfig::find_accelerator(uint32_t id) const {
  for (const auto& accel : accelerators) {
    if (accel.id == id) return &accel;
  }
  return nullptr;
}

const DmaConfig* ClusterConfig::find_dma(uint32_t id) const {
  for (const auto& engine : dma) {
    if (engine.id == id) return &engine;
  }
  return nullptr;
}

const CoreConfig* ClusterConfig::find_core(uint32_t id) const {
  for (const auto& core : control_cores) {
    if (core.id == id) return &core;
  }
  return nullptr;
}

uint32_t ClusterConfig::owner_core_of_accelerator(uint32_t id) const {
  for (const auto& core : control_cores) {
    for (uint32_t accel_id : core.accelerator_ids) {
      if (accel_id == id) return core.id;
    }
  }
  internal_error("accelerator " + std::to_string(id) + " has no owner core");
}

uint32_t ClusterConfig::owner_core_of_dma(uint32_t id) const {
  for (const auto& core : control_cores) {
    for (uint32_t dma_id : core.dma_ids) {
      if (dma_id == id) return core.id;
    }
  }
  internal_error("dma " + std::to_string(id) + " has no owner core");
}

void validate(const ClusterConfig& config) {
  // --- scratchpad geometry ---
  const SpmConfig& spm = config.spm;
  if (spm.num_banks == 0 || (spm.num_banks & (spm.num_banks - 1)) != 0) {
    fail_validation("spm.num_banks", "must be a power of two");
  }
  if (spm.bank_width_bits == 0 || spm.bank_width_bits % 8 != 0) {
    fail_validation("spm.bank_width_bits", "must be a positive multiple of 8");
  }
  if (spm.bank_depth_words == 0) {
    fail_validation("spm.bank_depth_words", "must be positive");
  }
  if (spm.capacity_bytes() == 0) {
    fail_validation("spm", "capacity must be positive");
  }

  // --- unique ids ---
  std::set<uint32_t> core_ids, accel_ids, dma_ids;
  for (const auto& core : config.control_cores) {
    if (!core_ids.insert(core.id).second) {
      fail_validation("control_cores", "duplicate core id " + std::to_string(core.id));
    }
  }
  for (const auto& accel : config.accelerators) {
    if (!accel_ids.insert(accel.id).second) {
      fail_validation("accelerators",
                      "duplicate accelerator id " + std::to_string(accel.id));
    }
  }
  for (const auto& engine : config.dma) {
    if (!dma_ids.insert(engine.id).second) {
      fail_validation("dma", "duplicate dma id " + std::to_string(engine.id));
    }
  }
  if (config.control_cores.empty()) {
    fail_validation("control_cores", "at least one control core is required");
  }

  // --- attachment: every device belongs to exactly one core ---
  std::set<uint32_t> attached_accels, attached_dmas;
  for (const auto& core : config.control_cores) {
    for (uint32_t id : core.accelerator_ids) {
      if (!accel_ids.count(id)) {
        throw Error(ErrorKind::DanglingReference,
                    "core " + std::to_string(core.id) +
                        " references unknown accelerator " + std::to_string(id));
      }
      if (!attached_accels.insert(id).second) {
        fail_validation("control_cores", "accelerator " + std::to_string(id) +
                                             " attached to more than one core");
      }
    }
    for (uint32_t id : core.dma_ids) {
      if (!dma_ids.count(id)) {
        throw Error(ErrorKind::DanglingReference,
                    "core " + std::to_string(core.id) +
                        " references unknown dma " + std::to_string(id));
      }
      if (!attached_dmas.insert(id).second) {
        fail_validation("control_cores", "dma " + std::to_string(id) +
                                             " attached to more than one core");
      }
    }
  }
  for (uint32_t id : accel_ids) {
    if (!attached_accels.count(id)) {
      fail_validation("accelerators", "accelerator " + std::to_string(id) +
                                          " is not attached to any core");
    }
  }
  for (uint32_t id : dma_ids) {
    if (!attached_dmas.count(id)) {
      fail_validation("dma", "dma " + std::to_string(id) +
                                 " is not attached to any core");
    }
  }

  // --- streamer channels ---
  for (const auto& accel : config.accelerators) {
    const std::string prefix = "accelerators[" + std::to_string(accel.id) + "]";
    for (size_t i = 0; i < accel.channels.size(); ++i) {
      const ChannelConfig& channel = accel.channels[i];
      const std::string field = prefix + ".channels[" + std::to_string(i) + "]";
      if (channel.width_bits == 0 ||
          channel.width_bits % spm.bank_width_bits != 0) {
        fail_validation(field + ".width_bits",
                        "width not multiple of bank width");
      }
      if (channel.width_bits / spm.bank_width_bits > spm.num_banks) {
        fail_validation(field + ".width_bits",
                        "width spans more banks than the scratchpad has");
      }
      if (channel.fifo_depth == 0) {
        fail_validation(field + ".fifo_depth", "must be positive");
      }
      if (channel.max_loop_depth == 0 ||
          channel.max_loop_depth > kMaxLoopDepthLimit) {
        fail_validation(field + ".max_loop_depth",
                        "must be in 1.." + std::to_string(kMaxLoopDepthLimit));
      }
    }
    if (accel.kind == AcceleratorKind::Gemm) {
      const GemmParams& g = accel.gemm;
      if (g.mu != 8 || g.ku != 8 || g.nu != 8) {
        fail_validation(prefix + ".gemm",
                        "the modeled matrix datapath is fixed at 8x8x8");
      }
      auto reads = accel.read_channel_indices();
      auto writes = accel.write_channel_indices();
      if (reads.size() != 2 || writes.size() != 1 || reads[0] != 0 ||
          reads[1] != 1 || writes[0] != 2) {
        fail_validation(prefix + ".channels",
                        "gemm channels must be [read, read, write]");
      }
      // One cycle moves an Mu x Ku int8 block, a Ku x Nu int8 block, and (on
      // tile completion) an Mu x Nu int32 block; the channel widths must carry
      // exactly one such block.
      if (accel.channels[reads[0]].width_bits != g.mu * g.ku * 8) {
        fail_validation(prefix + ".channels", "first read channel width must be Mu*Ku bytes");
      }
      if (accel.channels[reads[1]].width_bits != g.ku * g.nu * 8) {
        fail_validation(prefix + ".channels", "second read channel width must be Ku*Nu bytes");
      }
      if (accel.channels[writes[0]].width_bits != g.mu * g.nu * 32) {
        fail_validation(prefix + ".channels", "write channel width must be Mu*Nu 32-bit words");
      }
    } else {
      if (accel.maxpool.lanes != 8) {
        fail_validation(prefix + ".maxpool.lanes",
                        "the modeled pooling datapath is fixed at 8 lanes");
      }
      auto reads = accel.read_channel_indices();
      auto writes = accel.write_channel_indices();
      if (reads.size() != 1 || writes.size() != 1 || reads[0] != 0 ||
          writes[0] != 1) {
        fail_validation(prefix + ".channels",
                        "maxpool channels must be [read, write]");
      }
      if (accel.channels[0].width_bits != 512 ||
          accel.channels[1].width_bits != 512) {
        fail_validation(prefix + ".channels",
                        "the modeled pooling datapath moves 512-bit groups");
      }
    }
  }

  // --- dma + external channel ---
  for (const auto& engine : config.dma) {
    if (engine.beat_width_bits == 0 ||
        engine.beat_width_bits % spm.bank_width_bits != 0) {
      fail_validation("dma[" + std::to_string(engine.id) + "].beat_width_bits",
                      "must be a positive multiple of bank width");
    }
  }
  if (config.external_channel.bandwidth_bytes_per_cycle == 0) {
    fail_validation("external_channel.bandwidth_bytes_per_cycle",
                    "must be positive");
  }
  if (config.scalar_cost_model.cycles_per_mac <= 0.0 ||
      config.scalar_cost_model.cycles_per_elementwise_op <= 0.0) {
    fail_validation("scalar_cost_model", "costs must be positive");
  }
}

ClusterConfig parse_and_validate(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  try {
    ClusterConfig config;
    if (root.contains("control_cores")) {
      for (const json& node : root.at("control_cores")) {
        CoreConfig core;
        core.id = get_u32(node, "id");
        for (const json& id : node.value("accelerators", json::array())) {
          core.accelerator_ids.push_back(id.get<uint32_t>());
        }
        for (const json& id : node.value("dma", json::array())) {
          core.dma_ids.push_back(id.get<uint32_t>());
        }
        config.control_cores.push_back(std::move(core));
      }
    }
    if (root.contains("accelerators")) {
      for (const json& node : root.at("accelerators")) {
        config.accelerators.push_back(parse_accelerator(node));
      }
    }
    if (root.contains("spm")) {
      const json& spm = root.at("spm");
      config.spm.num_banks = get_u32(spm, "num_banks", 32);
      config.spm.bank_width_bits = get_u32(spm, "bank_width_bits", 64);
      config.spm.bank_depth_words = get_u32(spm, "bank_depth_words", 512);
    }
    if (root.contains("dma")) {
      for (const json& node : root.at("dma")) {
        DmaConfig engine;
        engine.id = get_u32(node, "id");
        engine.beat_width_bits = get_u32(node, "beat_width_bits", 512);
        config.dma.push_back(engine);
      }
    }
    if (root.contains("external_channel")) {
      config.external_channel.bandwidth_bytes_per_cycle =
          get_u32(root.at("external_channel"), "bandwidth_bytes_per_cycle", 64);
    }
    if (root.contains("scalar_cost_model")) {
      const json& model = root.at("scalar_cost_model");
      config.scalar_cost_model.cycles_per_mac =
          get_positive_double(model, "cycles_per_mac", 0.25);
      config.scalar_cost_model.cycles_per_elementwise_op =
          get_positive_double(model, "cycles_per_elementwise_op", 0.125);
    }
    validate(config);
    return config;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

ClusterConfig load_and_validate(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw Error(ErrorKind::ParseError, "cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_and_validate(buffer.str());
}

std::string serialize(const ClusterConfig& config) {
  json root;
  root["control_cores"] = json::array();
  for (const auto& core : config.control_cores) {
    root["control_cores"].push_back(json{
        {"id", core.id},
        {"accelerators", core.accelerator_ids},
        {"dma", core.dma_ids},
    });
  }
  root["accelerators"] = json::array();
  for (const auto& accel : config.accelerators) {
    json node{
        {"id", accel.id},
        {"kind", accel.kind == AcceleratorKind::Gemm ? "gemm" : "maxpool"},
        {"channels", json::array()},
    };
    for (const auto& channel : accel.channels) {
      node["channels"].push_back(channel_to_json(channel));
    }
    if (accel.kind == AcceleratorKind::Gemm) {
      node["gemm"] = json{
          {"Mu", accel.gemm.mu}, {"Ku", accel.gemm.ku}, {"Nu", accel.gemm.nu}};
    } else {
      node["maxpool"] = json{{"lanes", accel.maxpool.lanes}};
    }
    root["accelerators"].push_back(std::move(node));
  }
  root["spm"] = json{
      {"num_banks", config.spm.num_banks},
      {"bank_width_bits", config.spm.bank_width_bits},
      {"bank_depth_words", config.spm.bank_depth_words},
  };
  root["dma"] = json::array();
  for (const auto& engine : config.dma) {
    root["dma"].push_back(
        json{{"id", engine.id}, {"beat_width_bits", engine.beat_width_bits}});
  }
  root["external_channel"] = json{
      {"bandwidth_bytes_per_cycle",
       config.external_channel.bandwidth_bytes_per_cycle},
  };
  root["scalar_cost_model"] = json{
      {"cycles_per_mac", config.scalar_cost_model.cycles_per_mac},
      {"cycles_per_elementwise_op",
       config.scalar_cost_model.cycles_per_elementwise_op},
  };
  return root.dump(2) + "\n";
}

}  // namespace acsim
