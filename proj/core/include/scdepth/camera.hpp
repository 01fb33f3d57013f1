#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace scdepth {

template <typename T>
struct Vec3T {
    T x{}, y{}, z{};

    Vec3T operator+(const Vec3T& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3T operator-(const Vec3T& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3T operator*(const T& s) const { return {x * s, y * s, z * s}; }
    T dot(const Vec3T& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3T cross(const Vec3T& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
};

using Vec3 = Vec3T<double>;

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 mat3_identity() {
    return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}

inline Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline Mat3 mat3_transpose(const Mat3& a) {
    Mat3 t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
    return t;
}

inline Vec3 mat3_apply(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

/// Pinhole camera. Pixel centers sit on integer coordinates; the image
/// domain is [0, W-1] x [0, H-1].
struct CameraIntrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;

    void validate() const {
        if (fx <= 0 || fy <= 0) throw std::invalid_argument("intrinsics: focal lengths must be positive");
        if (!(cx >= 0 && cx < width && cy >= 0 && cy < height))
            throw std::invalid_argument("intrinsics: principal point outside image");
    }
};

/// Rigid transform mapping frame-a points into frame b: p_b = R * p_a + t.
struct PoseSE3 {
    Mat3 rotation = mat3_identity();
    Vec3 translation{0, 0, 0};

    Vec3 apply(const Vec3& p) const { return mat3_apply(rotation, p) + translation; }

    PoseSE3 inverse() const {
        PoseSE3 inv;
        inv.rotation = mat3_transpose(rotation);
        Vec3 rt = mat3_apply(inv.rotation, translation);
        inv.translation = {-rt.x, -rt.y, -rt.z};
        return inv;
    }

    PoseSE3 compose(const PoseSE3& rhs) const {  // this ∘ rhs
        PoseSE3 out;
        out.rotation = mat3_mul(rotation, rhs.rotation);
        out.translation = mat3_apply(rotation, rhs.translation) + translation;
        return out;
    }

    double orthonormality_error() const;
    void validate() const;
};

inline double value_of(double x) { return x; }

/// Rodrigues coefficients A = sin(t)/t and B = (1-cos(t))/t^2 as smooth
/// functions of t^2. Series branch keeps them differentiable through zero.
template <typename T>
void rodrigues_coeffs(const T& theta_sq, T& A, T& B) {
    using std::cos;
    using std::sin;
    using std::sqrt;
    if (value_of(theta_sq) < 1e-8) {
        A = 1.0 - theta_sq * (1.0 / 6.0) + theta_sq * theta_sq * (1.0 / 120.0);
        B = 0.5 - theta_sq * (1.0 / 24.0) + theta_sq * theta_sq * (1.0 / 720.0);
    } else {
        T theta = sqrt(theta_sq);
        A = sin(theta) / theta;
        B = (1.0 - cos(theta)) / theta_sq;
    }
}

/// Axis-angle to rotation matrix, R = I + A*[w]x + B*[w]x^2.
Mat3 axis_angle_to_matrix(const Vec3& w);

/// Rotation matrix to axis-angle (principal branch, |w| <= pi).
Vec3 matrix_to_axis_angle(const Mat3& R);

/// 6-vector parameterization (axis-angle, translation) <-> PoseSE3.
std::array<double, 6> pose_to_params(const PoseSE3& p);
PoseSE3 params_to_pose(const std::array<double, 6>& v);

}  // namespace scdepth
