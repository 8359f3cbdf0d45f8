#include "signfem/geometry.hpp"

#include <algorithm>

namespace signfem {

std::string_view to_string(Geometry g) {
  switch (g) {
    case Geometry::SymmetricSquare:
      return "square";
    case Geometry::LShapedInterface:
      return "lshape";
  }
  return "unknown";
}

std::string_view to_string(Subdomain s) { return s == Subdomain::Plus ? "plus" : "minus"; }

Geometry parse_geometry(std::string_view name) {
  if (name == "square" || name == "symmetric-square") return Geometry::SymmetricSquare;
  if (name == "lshape" || name == "l-shaped") return Geometry::LShapedInterface;
  throw InvalidArgument("unknown geometry '" + std::string(name) + "'");
}

namespace geometry {

bool on_boundary(Point p, double tol) {
  const bool inside = std::abs(p.x) <= 1.0 + tol && std::abs(p.y) <= 1.0 + tol;
  return inside && (std::abs(std::abs(p.x) - 1.0) <= tol || std::abs(std::abs(p.y) - 1.0) <= tol);
}

bool on_interface(Geometry g, Point p, double tol) {
  switch (g) {
    case Geometry::SymmetricSquare:
      return std::abs(p.x) <= tol && std::abs(p.y) <= 1.0 + tol;
    case Geometry::LShapedInterface: {
      const bool vertical = std::abs(p.x) <= tol && p.y >= -tol && p.y <= 1.0 + tol;
      const bool horizontal = std::abs(p.y) <= tol && p.x >= -tol && p.x <= 1.0 + tol;
      return vertical || horizontal;
    }
  }
  return false;
}

bool in_closure(Geometry g, Subdomain s, Point p, double tol) {
  if (std::abs(p.x) > 1.0 + tol || std::abs(p.y) > 1.0 + tol) return false;
  bool in_plus = false;
  switch (g) {
    case Geometry::SymmetricSquare:
      in_plus = p.x >= -tol;
      break;
    case Geometry::LShapedInterface:
      in_plus = p.x >= -tol && p.y >= -tol;
      break;
  }
  if (s == Subdomain::Plus) return in_plus;
  return !in_plus || on_interface(g, p, tol);
}

Subdomain classify(Geometry g, Point p) {
  return in_closure(g, Subdomain::Plus, p) ? Subdomain::Plus : Subdomain::Minus;
}

}  // namespace geometry
}  // namespace signfem
