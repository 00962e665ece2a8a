#include "secantlab/common.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>
#include <vector>

namespace secantlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::ImaginaryPartNotPositiveDefinite: return "ImaginaryPartNotPositiveDefinite";
    case ErrorCode::RadiusCapExceeded: return "RadiusCapExceeded";
    case ErrorCode::OrderCeilingExceeded: return "OrderCeilingExceeded";
    case ErrorCode::JetTooShallow: return "JetTooShallow";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::DuplicatePoints: return "DuplicatePoints";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::AllCoordinatesVanish: return "AllCoordinatesVanish";
    case ErrorCode::LowerOrdersUnsolved: return "LowerOrdersUnsolved";
    case ErrorCode::NoPointsFound: return "NoPointsFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "UnknownError";
}

std::uint64_t Rng::next_u64() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

namespace {
std::atomic<int> g_thread_cap{0};  // 0 = hardware concurrency
}

void set_thread_cap(int n) { g_thread_cap.store(n > 0 ? n : 0); }

int thread_cap() {
  int cap = g_thread_cap.load();
  if (cap > 0) return cap;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int workers = std::min<std::size_t>(static_cast<std::size_t>(thread_cap()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(n);  // drain remaining work
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace secantlab
