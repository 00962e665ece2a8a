#ifndef SECANTLAB_COMMON_HPP
#define SECANTLAB_COMMON_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace secantlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Hard ceiling on jet / series orders.  Delta_s at order s needs directional
// derivatives of total order <= s; everything in this library targets s <= 10.
inline constexpr int kOrderCeiling = 12;

enum class ErrorCode {
  NotSymmetric,
  ImaginaryPartNotPositiveDefinite,
  RadiusCapExceeded,
  OrderCeilingExceeded,
  JetTooShallow,
  ShapeMismatch,
  ZeroDirection,
  DuplicatePoints,
  DegenerateInput,
  AllCoordinatesVanish,
  LowerOrdersUnsolved,
  NoPointsFound,
  ParseError,
  ValidationError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Deterministic uniform generator.  The mapping from raw 64-bit draws to
// doubles is spelled out here so results do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64();
  // uniform in [0, 1)
  double uniform();
  // uniform in [lo, hi)
  double uniform(double lo, double hi);

 private:
  std::uint64_t state_;
};

// Worker cap shared by all parallel loops; set from the CLI --threads flag.
void set_thread_cap(int n);
int thread_cap();

// Runs fn(i) for i in [0, n).  Results must be written to per-index slots so
// the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace secantlab

#endif
