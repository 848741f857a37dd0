#include "mpw/random.hpp"

namespace mpw {
namespace {

std::mt19937_64 seeded(std::initializer_list<std::uint32_t> words) {
  std::seed_seq seq(words);
  return std::mt19937_64(seq);
}

std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : engine_(seeded({lo(seed), hi(seed)})) {}

RandomStream RandomStream::derive(std::uint64_t master_seed, std::uint64_t stream_index) {
  // The trailing tag keeps derived streams disjoint from RandomStream(seed).
  return RandomStream(seeded({lo(master_seed), hi(master_seed), lo(stream_index),
                              hi(stream_index), 0x6d707721u}));
}

}  // namespace mpw
