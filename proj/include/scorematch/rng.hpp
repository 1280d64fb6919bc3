#pragma once

#include <cstdint>
#include <random>

namespace scorematch {

// Seeded random generator with independent streams.  (seed, stream) fully
// determines the output sequence.  Distributions are implemented here rather
// than taken from <random> so that results do not depend on the standard
// library version.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Derive an independent generator; successive derivations compose, so
  // Rng(s, a).stream(b) and Rng(s, a').stream(b) differ whenever a != a'.
  Rng stream(std::uint64_t stream_id) const {
    return Rng(seed_, stream_id_ * 0x9E3779B97F4A7C15ULL + stream_id + 1);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::int64_t uniform_int(std::int64_t n);

  // Standard normal (polar method).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // N(mean, sd^2) conditioned on X >= lower.  Robust for truncation points
  // deep in the upper tail (exponential rejection, Robert 1995).
  double normal_lower_trunc(double mean, double sd, double lower);

  // Gamma(shape, 1), shape > 0 (Marsaglia-Tsang).
  double gamma(double shape);
  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace scorematch
