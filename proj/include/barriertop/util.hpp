#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bt {

// C^inf transition: 0 for s<=0, 1 for s>=1, strictly increasing in between
double smoothstep(double s);

// adaptive Simpson to requested absolute tolerance
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

// deterministic xorshift generator; fixed seeds keep every run reproducible
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  // uniform in [-1, 1]
  double uniform() { return 2.0 * (next() >> 11) * 0x1.0p-53 - 1.0; }
};

// index-ordered parallel map; thread count from BARRIERTOP_THREADS (default 1)
void parallel_for(int count, const std::function<void(int)>& body);
int thread_count();

std::string sha256_hex(const std::string& data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

// fixed-format double for artifacts: round-trippable, locale-free
std::string fmt_g17(double v);

}  // namespace bt
