#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace signfem {

using Index = std::int32_t;
inline constexpr Index kNoIndex = -1;

/// Absolute tolerance for classifying points on Gamma and Sigma. All benchmark
/// geometries have dyadic coordinates, so this is generous.
inline constexpr double kGeometryTolerance = 1e-10;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

enum class Subdomain : std::uint8_t { Plus, Minus };

inline Subdomain opposite(Subdomain s) {
  return s == Subdomain::Plus ? Subdomain::Minus : Subdomain::Plus;
}

/// The two benchmark partitions of (-1,1)^2.
///   SymmetricSquare:  Omega_+ = (0,1)x(-1,1),  Omega_- = (-1,0)x(-1,1)
///   LShapedInterface: Omega_+ = (0,1)x(0,1),   Omega_- = the remaining L
enum class Geometry : std::uint8_t { SymmetricSquare, LShapedInterface };

std::string_view to_string(Geometry g);
std::string_view to_string(Subdomain s);
Geometry parse_geometry(std::string_view name);

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a factorization detects a (numerically) singular system.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

namespace geometry {

bool on_boundary(Point p, double tol = kGeometryTolerance);
bool on_interface(Geometry g, Point p, double tol = kGeometryTolerance);
/// True if p lies in the closure of the given subdomain.
bool in_closure(Geometry g, Subdomain s, Point p, double tol = kGeometryTolerance);
/// Subdomain containing p in its closure, ties resolved toward Plus.
Subdomain classify(Geometry g, Point p);

}  // namespace geometry
}  // namespace signfem
