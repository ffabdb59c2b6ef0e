#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "lanecast/neighborhood.hpp"
#include "lanecast/network.hpp"

namespace lanecast {

inline constexpr std::uint16_t kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { magic, version, truncated, checksum, shape, io };
  ModelFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct StoredModel {
  Network<Real> network;
  Normalizer normalizer;
};

/// Container layout, little-endian throughout:
///   "STCP" | u16 version | u8 module tag | u32 tensor count |
///   per tensor: u32 rank, rank x u32 dims | f32 parameters, row-major |
///   12 x f64 normalizer statistics | u32 CRC-32 of all preceding bytes
std::vector<std::uint8_t> serialize_model(const Network<Real>& network, const Normalizer& normalizer);
StoredModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const Network<Real>& network, const Normalizer& normalizer, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

}  // namespace lanecast
