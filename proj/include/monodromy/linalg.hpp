#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace monodromy {

using Cx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Frobenius norm distance from the identity.
inline double identity_residual(const CMat& m) {
    return (m - CMat::Identity(m.rows(), m.cols())).norm();
}

/// Standard symplectic form J = ((0, I), (-I, 0)) for dimension 2p,
/// coordinate block first, momentum block second.
inline CMat symplectic_form(Eigen::Index dim) {
    CMat j = CMat::Zero(dim, dim);
    const Eigen::Index p = dim / 2;
    for (Eigen::Index k = 0; k < p; ++k) {
        j(k, p + k) = Cx(1.0, 0.0);
        j(p + k, k) = Cx(-1.0, 0.0);
    }
    return j;
}

inline bool all_finite(const CVec& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k].real()) || !std::isfinite(v[k].imag())) return false;
    }
    return true;
}

/// FNV-1a, used to fingerprint system definitions in reports.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace monodromy
