#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fishbone {

using DeviceId = std::uint32_t;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double squared_norm(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
constexpr double squared_distance(Vec2 a, Vec2 b) { return squared_norm(a - b); }

/// Counter-clockwise rotation by `radians`.
inline Vec2 rotate(Vec2 v, double radians) {
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Left-hand normal (rotation by +90 degrees).
constexpr Vec2 left_normal(Vec2 v) { return {-v.y, v.x}; }

constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct SymMat2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    static constexpr SymMat2 identity() { return {1.0, 0.0, 1.0}; }
    static constexpr SymMat2 diag(double a, double b) { return {a, 0.0, b}; }

    constexpr double det() const { return xx * yy - xy * xy; }
    constexpr double trace() const { return xx + yy; }
    constexpr Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    /// Caller guarantees det() != 0.
    constexpr SymMat2 inverse() const {
        const double d = det();
        return {yy / d, -xy / d, xx / d};
    }
    constexpr bool operator==(const SymMat2&) const = default;
};

/// Eigen-decomposition of a symmetric 2x2 matrix, largest eigenvalue first.
struct Eigen2 {
    double lambda_major = 0.0;
    double lambda_minor = 0.0;
    Vec2 major{1.0, 0.0};
    Vec2 minor{0.0, 1.0};
};

Eigen2 eigen_decompose(const SymMat2& m);

}  // namespace fishbone
