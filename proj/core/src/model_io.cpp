#include "lanecast/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include <zlib.h>

namespace lanecast {

namespace {

static_assert(std::endian::native == std::endian::little, "model IO assumes a little-endian host");

constexpr std::array<std::uint8_t, 4> kMagic{'S', 'T', 'C', 'P'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw ModelFormatError(ModelFormatError::Kind::truncated,
                             std::string("model file truncated or corrupt: ran out of data reading ") + what);
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  [[nodiscard]] std::size_t position() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::optional<NetworkConfig> match_layout(ModuleKind kind, const std::vector<std::vector<std::uint32_t>>& shapes) {
  if (shapes.empty() || shapes[0].size() != 4) return std::nullopt;
  for (bool dilated : {true, false}) {
    for (bool maneuver : {true, false}) {
      if (kind == ModuleKind::classifier && !maneuver) continue;
      NetworkConfig cfg;
      cfg.kind = kind;
      cfg.input_channels = shapes[0][1];
      cfg.dilated = dilated;
      cfg.maneuver_input = maneuver;
      try {
        const auto layout = parameter_layout(cfg);
        if (layout.size() != shapes.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < layout.size() && same; ++i) same = layout[i].dims == shapes[i];
        if (same) return cfg;
      } catch (const ShapeError&) {
        continue;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Network<Real>& network, const Normalizer& normalizer) {
  Writer w;
  w.bytes.insert(w.bytes.end(), kMagic.begin(), kMagic.end());
  w.put<std::uint16_t>(kModelFormatVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(network.config().kind));
  const auto& layout = network.layout();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(layout.size()));
  for (const auto& e : layout) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims) w.put<std::uint32_t>(d);
  }
  for (float v : network.parameters()) w.put<float>(v);
  for (double v : normalizer.input_mean) w.put<double>(v);
  for (double v : normalizer.input_std) w.put<double>(v);
  for (double v : normalizer.output_mean) w.put<double>(v);
  for (double v : normalizer.output_std) w.put<double>(v);
  w.put<std::uint32_t>(crc32_of(w.bytes));
  return std::move(w.bytes);
}

StoredModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ModelFormatError(ModelFormatError::Kind::magic, "not a model file: bad magic bytes (expected \"STCP\")");
  }
  Reader r(bytes);
  for (std::size_t i = 0; i < kMagic.size(); ++i) r.get<std::uint8_t>("magic");
  const auto version = r.get<std::uint16_t>("version");
  if (version != kModelFormatVersion) {
    throw ModelFormatError(ModelFormatError::Kind::version, "unsupported model format version " +
                                                                std::to_string(version) + " (this build reads version " +
                                                                std::to_string(kModelFormatVersion) + ")");
  }
  // everything after the version is covered by the checksum, so verify it
  // before trusting any length field
  if (bytes.size() < 4 + 2 + 1 + 4 + 4) {
    throw ModelFormatError(ModelFormatError::Kind::truncated, "model file truncated or corrupt: header incomplete");
  }
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  if (crc32_of(bytes.first(bytes.size() - 4)) != stored_crc) {
    throw ModelFormatError(ModelFormatError::Kind::checksum, "model file truncated or corrupt: checksum mismatch");
  }

  const auto tag = r.get<std::uint8_t>("module tag");
  if (tag > 1) throw ModelFormatError(ModelFormatError::Kind::shape, "unknown module tag " + std::to_string(tag));
  const auto kind = static_cast<ModuleKind>(tag);
  const auto count = r.get<std::uint32_t>("tensor count");
  if (count > 64) throw ModelFormatError(ModelFormatError::Kind::shape, "implausible tensor count " + std::to_string(count));
  std::vector<std::vector<std::uint32_t>> shapes(count);
  for (auto& dims : shapes) {
    const auto rank = r.get<std::uint32_t>("tensor rank");
    if (rank == 0 || rank > 8) throw ModelFormatError(ModelFormatError::Kind::shape, "invalid tensor rank " + std::to_string(rank));
    dims.resize(rank);
    for (auto& d : dims) d = r.get<std::uint32_t>("tensor dims");
  }
  const auto config = match_layout(kind, shapes);
  if (!config) {
    throw ModelFormatError(ModelFormatError::Kind::shape, "shape table does not describe a known " +
                                                              std::string(to_string(kind)) + " architecture");
  }
  StoredModel model{Network<Real>(*config), {}};
  for (auto& v : model.network.parameters()) v = r.get<float>("parameters");
  for (auto& v : model.normalizer.input_mean) v = r.get<double>("normalizer");
  for (auto& v : model.normalizer.input_std) v = r.get<double>("normalizer");
  for (auto& v : model.normalizer.output_mean) v = r.get<double>("normalizer");
  for (auto& v : model.normalizer.output_std) v = r.get<double>("normalizer");
  if (r.position() + 4 != bytes.size()) {
    throw ModelFormatError(ModelFormatError::Kind::truncated, "model file corrupt: " +
                                                                  std::to_string(bytes.size() - r.position() - 4) +
                                                                  " unexpected trailing bytes");
  }
  return model;
}

void save_model(const Network<Real>& network, const Normalizer& normalizer, const std::filesystem::path& path) {
  const auto bytes = serialize_model(network, normalizer);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError(ModelFormatError::Kind::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ModelFormatError(ModelFormatError::Kind::io, "failed writing " + path.string());
}

StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError(ModelFormatError::Kind::io, "cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace lanecast
