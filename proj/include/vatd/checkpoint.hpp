#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace vatd {

inline constexpr uint32_t kCheckpointVersion = 1;

// On-disk model format: "VATD" magic, little-endian uint32 version, a
// length-prefixed UTF-8 JSON metadata block, then raw float64 tensor data in
// the order the metadata declares. Loading validates magic, version, and
// that the payload length matches what the metadata promises.
void write_checkpoint(const std::string& path, const nlohmann::json& meta,
                      const std::vector<std::span<const double>>& tensors);

struct RawCheckpoint {
    nlohmann::json meta;
    std::vector<double> data;
};

RawCheckpoint read_checkpoint(const std::string& path);

}  // namespace vatd
