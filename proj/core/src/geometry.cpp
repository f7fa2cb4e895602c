#include "fishbone/geometry.hpp"

#include <algorithm>

namespace fishbone {

Eigen2 eigen_decompose(const SymMat2& m) {
    const double half_trace = 0.5 * (m.xx + m.yy);
    const double half_diff = 0.5 * (m.xx - m.yy);
    const double radius = std::hypot(half_diff, m.xy);

    Eigen2 e;
    e.lambda_major = half_trace + radius;
    e.lambda_minor = half_trace - radius;
    if (radius == 0.0) return e;  // multiple of identity: any basis works

    // Two algebraically equivalent eigenvector forms; take the better conditioned one.
    const Vec2 a{e.lambda_major - m.yy, m.xy};
    const Vec2 b{m.xy, e.lambda_major - m.xx};
    Vec2 v = squared_norm(a) >= squared_norm(b) ? a : b;
    v = v * (1.0 / norm(v));
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = v * -1.0;
    e.major = v;
    e.minor = left_normal(v);
    return e;
}

}  // namespace fishbone
