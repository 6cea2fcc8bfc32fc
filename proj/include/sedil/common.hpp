#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sedil {

// Error taxonomy. The CLI maps these onto exit codes (usage 2, data 3,
// training 4); library code throws and never calls exit().
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
struct TrainError : Error {
  using Error::Error;
};

inline std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// Raw features are clamped to this symmetric range before standardization,
// both when computing dataset statistics and inside the model input path.
inline constexpr double kFeatureClamp = 6.0;

// FNV-1a, used for parameter freeze checks and reproducibility assertions.
inline constexpr uint64_t kFnvBasis = 0xcbf29ce484222325ull;

inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = kFnvBasis) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64_str(const std::string& s, uint64_t h = kFnvBasis) {
  return fnv1a64(s.data(), s.size(), h);
}

}  // namespace sedil
