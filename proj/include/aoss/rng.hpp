#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace aoss {

/// splitmix64 finalizer; used to derive well-separated sub-seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed, a stream name and
/// optional integer coordinates (case id, replicate index, ...). All
/// randomness in the toolkit flows from one master seed through these named
/// streams, so changing e.g. the noise stream never perturbs the covariates.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
  std::uint64_t h = mix64(master);
  for (char c : stream) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  return h;
}

template <typename... Ids>
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, Ids... ids) {
  std::uint64_t h = derive_seed(master, stream);
  ((h = mix64(h ^ static_cast<std::uint64_t>(ids))), ...);
  return h;
}

using Rng = std::mt19937_64;

/// Human-readable generator description, echoed into run metadata.
inline constexpr const char* kRngDescription =
    "mt19937_64 seeded via splitmix64-derived named sub-streams";

}  // namespace aoss
