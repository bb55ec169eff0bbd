#include "qsl/linalg.hpp"

namespace qsl {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_a, std::uint64_t stream_b) {
  return derive_seed(derive_seed(master, stream_a), stream_b);
}

ComplexMatrix complex_gaussian(Index rows, Index cols, Rng& rng) {
  detail::require(rows >= 1 && cols >= 1, "complex_gaussian: dimensions must be positive");
  return gaussian_matrix<Complex>(rows, cols, rng);
}

ComplexMatrix complex_gaussian(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return complex_gaussian(rows, cols, rng);
}

}  // namespace qsl
