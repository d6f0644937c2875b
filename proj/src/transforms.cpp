#include "otfs/transforms.hpp"

#include <cmath>
#include <numbers>

namespace otfs {

namespace {

void check_length(const Eigen::Index got, FrameGeometry geom, const char* what) {
    geom.validate();
    if (got != geom.size()) {
        throw std::invalid_argument(std::string(what) + ": vector length does not match M*N");
    }
}

// View a frame vector as its M x N block matrix (column i = time block i /
// Doppler bin i; the vector is stored block-major, so this is a plain
// column-major reinterpretation).
Eigen::Map<const CMat> as_grid(const CVec& v, FrameGeometry geom) {
    return Eigen::Map<const CMat>(v.data(), geom.M, geom.N);
}

}  // namespace

CMat dft_matrix(int n) {
    if (n < 1) throw std::invalid_argument("dft_matrix: n must be >= 1");
    CMat f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            const double ang = -2.0 * std::numbers::pi * k * i / n;
            f(k, i) = scale * Complex(std::cos(ang), std::sin(ang));
        }
    }
    return f;
}

CVec dd_to_time(const CVec& x, FrameGeometry geom) {
    check_length(x.size(), geom, "dd_to_time");
    const CMat f = dft_matrix(geom.N);
    // s(m, i) = sum_k x(m, k) * conj(F(k, i))
    CMat s = as_grid(x, geom) * f.conjugate();
    return Eigen::Map<const CVec>(s.data(), geom.size());
}

CVec time_to_dd(const CVec& r, FrameGeometry geom) {
    check_length(r.size(), geom, "time_to_dd");
    const CMat f = dft_matrix(geom.N);
    // y(m, k) = sum_i r(m, i) * F(k, i)
    CMat y = as_grid(r, geom) * f.transpose();
    return Eigen::Map<const CVec>(y.data(), geom.size());
}

namespace {

RVec lane_average(const RVec& v, FrameGeometry geom, const char* what) {
    check_length(v.size(), geom, what);
    if ((v.array() < 0.0).any()) {
        throw std::domain_error(std::string(what) + ": negative variance");
    }
    Eigen::Map<const RMat> grid(v.data(), geom.M, geom.N);
    RVec lane = grid.rowwise().mean();
    RVec out(v.size());
    Eigen::Map<RMat>(out.data(), geom.M, geom.N).colwise() = lane;
    return out;
}

}  // namespace

RVec variance_time_to_dd(const RVec& v, FrameGeometry geom) {
    return lane_average(v, geom, "variance_time_to_dd");
}

RVec variance_dd_to_time(const RVec& v, FrameGeometry geom) {
    return lane_average(v, geom, "variance_dd_to_time");
}

}  // namespace otfs
