#pragma once

// Versioned binary checkpoint for DiffusionModel.
//
//   bytes  0..7   magic "LOCODIFF"
//   u32           schema version (1)
//   u32 + bytes   JSON header: layout, denoiser shape, schedule, train config echo
//   u32           tensor count, then per tensor: u32 name length, name, u32 rows, u32 cols
//   f32 * D       normalizer mean, f32 * D normalizer scale
//   f32 * P       weights, tensors in header order, column-major
//
// Integers and floats are little-endian. The loss curve goes to a CSV sidecar.

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "locoplan/diffusion.hpp"
#include "locoplan/error.hpp"

namespace locoplan {

inline constexpr char kCheckpointMagic[8] = {'L', 'O', 'C', 'O', 'D', 'I', 'F', 'F'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), 4);
}
inline void write_f32(std::ostream& out, float v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), 4);
}
inline std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw CheckpointError("checkpoint truncated");
  return byteswap_if_big(v);
}
inline float read_f32(std::istream& in) {
  float v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw CheckpointError("checkpoint truncated");
  return byteswap_if_big(v);
}

}  // namespace detail

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"steps", c.steps},                 {"seed", c.seed},
          {"T", c.T},                         {"schedule", to_string(c.schedule)},
          {"checkpoint_every", c.checkpoint_every}, {"lr_final_fraction", c.lr_final_fraction}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c = {}) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.steps = j.value("steps", c.steps);
  c.seed = j.value("seed", c.seed);
  c.T = j.value("T", c.T);
  if (j.contains("schedule")) c.schedule = schedule_family_from_string(j.at("schedule").get<std::string>());
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.lr_final_fraction = j.value("lr_final_fraction", c.lr_final_fraction);
  return c;
}

inline nlohmann::json denoiser_config_to_json(const DenoiserConfig& c) {
  return {{"data_dim", c.data_dim},     {"cond_dim", c.cond_dim}, {"cond_embed", c.cond_embed},
          {"time_embed", c.time_embed}, {"width", c.width},       {"layers", c.layers}};
}

inline DenoiserConfig denoiser_config_from_json(const nlohmann::json& j, DenoiserConfig c = {}) {
  c.data_dim = j.value("data_dim", c.data_dim);
  c.cond_dim = j.value("cond_dim", c.cond_dim);
  c.cond_embed = j.value("cond_embed", c.cond_embed);
  c.time_embed = j.value("time_embed", c.time_embed);
  c.width = j.value("width", c.width);
  c.layers = j.value("layers", c.layers);
  return c;
}

inline void write_loss_curve_csv(const std::string& path, const std::vector<double>& curve) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write " + path);
  out << "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, curve[i]);
    out << buf;
  }
}

/// Writes to a temporary file and renames it into place.
inline void save_checkpoint(const DiffusionModel& m, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + tmp);
    out.write(kCheckpointMagic, 8);
    detail::write_u32(out, kCheckpointVersion);
    const nlohmann::json header = {
        {"layout", {{"half", m.layout.half}, {"joints", m.layout.joints}}},
        {"denoiser", denoiser_config_to_json(m.net.config())},
        {"alpha_bar", m.schedule.alpha_bars()},
        {"train", train_config_to_json(m.train_config)},
        {"loss_curve_length", m.loss_curve.size()}};
    const std::string hs = header.dump();
    detail::write_u32(out, static_cast<std::uint32_t>(hs.size()));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    const auto& slots = m.net.layout().slots();
    detail::write_u32(out, static_cast<std::uint32_t>(slots.size()));
    for (const auto& s : slots) {
      detail::write_u32(out, static_cast<std::uint32_t>(s.name.size()));
      out.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
      detail::write_u32(out, static_cast<std::uint32_t>(s.rows));
      detail::write_u32(out, static_cast<std::uint32_t>(s.cols));
    }
    for (Eigen::Index i = 0; i < m.normalizer.mean.size(); ++i) detail::write_f32(out, float(m.normalizer.mean[i]));
    for (Eigen::Index i = 0; i < m.normalizer.scale.size(); ++i) detail::write_f32(out, float(m.normalizer.scale[i]));
    for (Eigen::Index i = 0; i < m.net.params().size(); ++i) detail::write_f32(out, m.net.params()[i]);
    if (!out) throw CheckpointError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
  write_loss_curve_csv(path + ".loss.csv", m.loss_curve);
}

inline DiffusionModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw CheckpointError(path + ": not a locoplan checkpoint");
  const std::uint32_t version = detail::read_u32(in);
  if (version != kCheckpointVersion)
    throw CheckpointError(path + ": unsupported schema version " + std::to_string(version));
  const std::uint32_t hlen = detail::read_u32(in);
  std::string hs(hlen, '\0');
  if (!in.read(hs.data(), hlen)) throw CheckpointError("checkpoint truncated");
  DiffusionModel m;
  try {
    const auto header = nlohmann::json::parse(hs);
    m.layout = {header.at("layout").at("half").get<int>(), header.at("layout").at("joints").get<int>()};
    m.schedule = NoiseSchedule(header.at("alpha_bar").get<std::vector<double>>());
    m.train_config = train_config_from_json(header.at("train"));
    m.net = Denoiser<float>(denoiser_config_from_json(header.at("denoiser")));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  }
  const auto& slots = m.net.layout().slots();
  if (detail::read_u32(in) != slots.size()) throw CheckpointError("checkpoint tensor count mismatch");
  for (const auto& s : slots) {
    const std::uint32_t n = detail::read_u32(in);
    std::string name(n, '\0');
    if (!in.read(name.data(), n)) throw CheckpointError("checkpoint truncated");
    const auto rows = detail::read_u32(in);
    const auto cols = detail::read_u32(in);
    if (name != s.name || rows != std::uint32_t(s.rows) || cols != std::uint32_t(s.cols))
      throw CheckpointError("checkpoint tensor '" + name + "' does not match the declared architecture");
  }
  const int D = m.net.config().data_dim;
  m.normalizer.mean.resize(D);
  m.normalizer.scale.resize(D);
  for (int i = 0; i < D; ++i) m.normalizer.mean[i] = detail::read_f32(in);
  for (int i = 0; i < D; ++i) m.normalizer.scale[i] = detail::read_f32(in);
  for (Eigen::Index i = 0; i < m.net.params().size(); ++i) m.net.params()[i] = detail::read_f32(in);
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("checkpoint has trailing bytes");
  return m;
}

}  // namespace locoplan
