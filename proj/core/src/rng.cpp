#include "kscore/rng.hpp"

namespace kscore {

std::uint64_t mix64(std::uint64_t value) {
  value += 0x9E3779B97F4A7C15ULL;
  value = (value ^ (value >> 30)) * 0xBF58476D1CE4E5B9ULL;
  value = (value ^ (value >> 27)) * 0x94D049BB133111EBULL;
  return value ^ (value >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t index) {
  // FNV-1a over the stream name
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(master) ^ h ^ mix64(index + 0x5851F42D4C957F2DULL));
}

}  // namespace kscore
