#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace otfs {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

/*
 * Frame geometry. A frame carries M*N symbols arranged on an M x N
 * delay-Doppler grid (M delay bins, N Doppler bins). Every length-M*N
 * vector in the system is indexed so that entry n = i*M + m belongs to
 * time block i at within-block position m; equivalently, in the
 * delay-Doppler domain, entry k*M + m is delay bin m / Doppler bin k.
 */
struct FrameGeometry {
    int M = 1;  // delay bins = time-block length
    int N = 1;  // Doppler bins = number of time blocks

    int size() const { return M * N; }

    void validate() const {
        if (M < 1 || N < 1) {
            throw std::invalid_argument("FrameGeometry: M and N must be >= 1");
        }
    }
};

// Variance clamps applied after every message update. The ceiling equals the
// unit average symbol energy (a variance above it carries no information);
// the floor keeps reciprocal-variance combinations finite.
inline constexpr double kVarFloor = 1e-10;
inline constexpr double kVarCeil = 1.0;

inline double clamp_var(double v) {
    if (!(v > kVarFloor)) return kVarFloor;  // also catches NaN
    return v < kVarCeil ? v : kVarCeil;
}

// Circularly-symmetric complex Gaussian message with diagonal covariance:
// a mean vector plus a per-entry variance vector of the same length.
struct GaussianMessage {
    CVec mean;
    RVec var;

    static GaussianMessage uninformative(int n) {
        GaussianMessage g;
        g.mean = CVec::Zero(n);
        g.var = RVec::Constant(n, kVarCeil);
        return g;
    }

    int size() const { return static_cast<int>(mean.size()); }

    void check_consistent() const {
        if (mean.size() != var.size()) {
            throw std::invalid_argument("GaussianMessage: mean/var length mismatch");
        }
    }
};

}  // namespace otfs
