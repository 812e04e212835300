#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bamlab {

// Typed runtime error: `code` is a stable machine-readable tag (e.g.
// "SpendExceedsBalance"), `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
  throw Error(code, msg);
}

using Vec = std::vector<double>;
// A node of the discrete history tree: reported support indices for stages
// 1..t. Keyed by indices, not raw values, so float equality never bites.
using IndexPath = std::vector<int>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sum(const Vec& a) { return std::accumulate(a.begin(), a.end(), 0.0); }

}  // namespace bamlab
