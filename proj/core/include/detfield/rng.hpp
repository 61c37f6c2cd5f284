#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace detfield {

// Counter-based 64-bit generator. The sequence is a pure function of
// (seed, stream, counter), so replicas can be assigned disjoint streams and
// produce identical output regardless of how work is scheduled.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed) ^ mix(stream + 0x9e3779b97f4a7c15ULL))), ctr_(0) {}

  RngStream substream(std::uint64_t id) const {
    RngStream s(0, 0);
    s.key_ = mix(key_ ^ mix(id + 0xd1b54a32d192ed03ULL));
    s.ctr_ = 0;
    return s;
  }

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL); }

  // Uniform on the open interval (0,1): never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller with a cached spare; fully deterministic.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double c = std::cos(2.0 * M_PI * u2), s = std::sin(2.0 * M_PI * u2);
    spare_ = r * s;
    has_spare_ = true;
    return r * c;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // P(k) = (1-q) q^k on k = 0,1,2,...
  long geometric(double q) {
    return static_cast<long>(std::floor(std::log(uniform()) / std::log(q)));
  }

  // Knuth product method, splitting large means to stay in normal range.
  long poisson(double theta) {
    if (theta <= 0) return 0;
    if (theta > 60.0) return poisson(theta / 2) + poisson(theta - theta / 2);
    double limit = std::exp(-theta), prod = uniform();
    long k = 0;
    while (prod > limit) {
      prod *= uniform();
      ++k;
    }
    return k;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_, ctr_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Runs fn(replica_index) for indices [0, count) and collects results by index.
// Each replica must derive its randomness from its index alone (substream),
// which makes the output independent of the thread count.
template <typename T>
std::vector<T> run_replicas(std::size_t count, const std::function<T(std::size_t)>& fn,
                            unsigned threads = 0) {
  std::vector<T> out(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, count ? static_cast<unsigned>(count) : 1u);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < count; i += threads) out[i] = fn(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace detfield
