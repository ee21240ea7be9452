#pragma once

#include <cstdint>
#include <string>
#include <stdexcept>

#include <Eigen/Core>

namespace a2lc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecI = Eigen::VectorXi;

// Class/mask/pixel indices are dense and stable for the lifetime of a run.
using ClassId = int;
using MaskId = int;
using PixelId = int;

enum class Activation { kRelu, kGelu, kMish };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

// splitmix64: cheap, well-mixed 64-bit finalizer. Used both as a PRNG step
// and as the seed-splitting rule for per-component, per-round seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class SeedTag : std::uint64_t {
  kSynth = 1,
  kProxy = 2,
  kLcm = 3,
  kScorer = 4,
};

// seed(tag, round) = splitmix64(master ^ splitmix64(tag) ^ splitmix64(round << 8)).
// Rounds are individually reproducible given the master seed alone.
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedTag tag, int round = 0) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(tag)) ^
                    splitmix64(static_cast<std::uint64_t>(round) << 8));
}

}  // namespace a2lc
