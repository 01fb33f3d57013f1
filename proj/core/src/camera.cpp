#include "scdepth/camera.hpp"

#include <algorithm>

namespace scdepth {

double PoseSE3::orthonormality_error() const {
    Mat3 rtr = mat3_mul(mat3_transpose(rotation), rotation);
    double err = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(rtr[i][j] - (i == j ? 1.0 : 0.0)));
    return err;
}

void PoseSE3::validate() const {
    if (orthonormality_error() > 1e-9)
        throw std::invalid_argument("pose: rotation is not orthonormal");
    const Mat3& R = rotation;
    double det = R[0][0] * (R[1][1] * R[2][2] - R[1][2] * R[2][1]) -
                 R[0][1] * (R[1][0] * R[2][2] - R[1][2] * R[2][0]) +
                 R[0][2] * (R[1][0] * R[2][1] - R[1][1] * R[2][0]);
    if (std::abs(det - 1.0) > 1e-9)
        throw std::invalid_argument("pose: rotation determinant is not +1");
}

Mat3 axis_angle_to_matrix(const Vec3& w) {
    double theta_sq = w.dot(w);
    double A, B;
    rodrigues_coeffs(theta_sq, A, B);
    Mat3 W = {{{0, -w.z, w.y}, {w.z, 0, -w.x}, {-w.y, w.x, 0}}};
    Mat3 W2 = mat3_mul(W, W);
    Mat3 R;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            R[i][j] = (i == j ? 1.0 : 0.0) + A * W[i][j] + B * W2[i][j];
    return R;
}

Vec3 matrix_to_axis_angle(const Mat3& R) {
    double tr = R[0][0] + R[1][1] + R[2][2];
    double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
    double theta = std::acos(c);
    Vec3 axis = {R[2][1] - R[1][2], R[0][2] - R[2][0], R[1][0] - R[0][1]};
    double s2 = std::sqrt(axis.dot(axis));  // = 2 sin(theta)
    if (theta < 1e-9) {
        // R ~ I + [w]x, so w ~ axis/2
        return axis * 0.5;
    }
    if (s2 < 1e-9) {
        // theta ~ pi; recover axis from the symmetric part.
        Vec3 a;
        a.x = std::sqrt(std::max(0.0, (R[0][0] + 1.0) / 2.0));
        a.y = std::sqrt(std::max(0.0, (R[1][1] + 1.0) / 2.0));
        a.z = std::sqrt(std::max(0.0, (R[2][2] + 1.0) / 2.0));
        // fix signs against off-diagonals
        if (a.x >= a.y && a.x >= a.z) {
            a.y = (R[0][1] + R[1][0]) / (4.0 * a.x);
            a.z = (R[0][2] + R[2][0]) / (4.0 * a.x);
        } else if (a.y >= a.z) {
            a.x = (R[0][1] + R[1][0]) / (4.0 * a.y);
            a.z = (R[1][2] + R[2][1]) / (4.0 * a.y);
        } else {
            a.x = (R[0][2] + R[2][0]) / (4.0 * a.z);
            a.y = (R[1][2] + R[2][1]) / (4.0 * a.z);
        }
        return a * theta;
    }
    return axis * (theta / s2);
}

std::array<double, 6> pose_to_params(const PoseSE3& p) {
    Vec3 w = matrix_to_axis_angle(p.rotation);
    return {w.x, w.y, w.z, p.translation.x, p.translation.y, p.translation.z};
}

PoseSE3 params_to_pose(const std::array<double, 6>& v) {
    PoseSE3 p;
    p.rotation = axis_angle_to_matrix({v[0], v[1], v[2]});
    p.translation = {v[3], v[4], v[5]};
    return p;
}

}  // namespace scdepth
