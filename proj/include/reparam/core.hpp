#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace reparam {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Tri = std::array<int, 3>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  Parse,
  Io,
  InvalidArgument,
  InvalidMesh,
  Topology,
  Solver,
  Locate,
  Internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidMesh: return "invalid-mesh";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Locate: return "locate";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

/// Library-wide exception. Carries a coarse category and, for pipeline
/// failures, the id of the patch/face that failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<int> patch = std::nullopt)
      : std::runtime_error(message), kind_(kind), patch_(patch) {}

  ErrorKind kind() const { return kind_; }
  std::optional<int> patch() const { return patch_; }

 private:
  ErrorKind kind_;
  std::optional<int> patch_;
};

/// Key for an undirected vertex pair; smaller index in the high word.
inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

inline int key_first(std::uint64_t key) { return static_cast<int>(key >> 32); }
inline int key_second(std::uint64_t key) { return static_cast<int>(key & 0xffffffffu); }

}  // namespace reparam
