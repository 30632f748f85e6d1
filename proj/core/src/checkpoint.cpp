#include "kscore/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace kscore {

namespace {

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto s = path;
  s += ".json";
  return s;
}

std::array<unsigned char, 8> to_le(double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  std::array<unsigned char, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  return out;
}

double from_le(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyValueNet& net, const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  for (double v : net.parameters()) {
    const auto bytes = to_le(v);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }

  nlohmann::json meta;
  meta["format"] = "float64-le";
  meta["parameter_count"] = net.parameters().size();
  meta["observation_dim"] = net.shape().observation_dim;
  meta["hidden"] = net.shape().hidden;
  meta["action_count"] = net.shape().action_count;
  meta["config_hash"] = config_hash;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& [name, rows, cols] : net.layout()) {
    blocks.push_back({{"name", name}, {"rows", rows}, {"cols", cols}});
  }
  meta["layout"] = blocks;
  std::ofstream side(sidecar(path));
  if (!side) throw std::runtime_error("cannot write checkpoint sidecar for " + path.string());
  side << meta.dump(2) << '\n';
}

PolicyValueNet load_checkpoint(const std::filesystem::path& path, std::string* config_hash) {
  std::ifstream side(sidecar(path));
  if (!side) throw std::runtime_error("missing checkpoint sidecar for " + path.string());
  const nlohmann::json meta = nlohmann::json::parse(side);
  NetShape shape{meta.at("observation_dim").get<int>(), meta.at("hidden").get<int>(),
                 meta.at("action_count").get<int>()};
  PolicyValueNet net(shape);
  if (meta.at("parameter_count").get<Eigen::Index>() != net.parameters().size()) {
    throw std::runtime_error("checkpoint sidecar parameter count disagrees with its shapes");
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::array<unsigned char, 8> buf{};
  for (Eigen::Index i = 0; i < net.parameters().size(); ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
      throw std::runtime_error("checkpoint payload truncated: " + path.string());
    }
    net.parameters()(i) = from_le(buf.data());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("checkpoint payload longer than declared: " + path.string());
  }
  if (config_hash) *config_hash = meta.value("config_hash", "");
  return net;
}

}  // namespace kscore
