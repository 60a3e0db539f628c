#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace sip {

using Vec3 = std::array<double, 3>;
using CVec3 = std::array<std::complex<double>, 3>;

/// Dense 3x3 real matrix, row major.
struct Mat3 {
    std::array<double, 9> a{};

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(3 * i + j)]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(3 * i + j)]; }

    Mat3 transposed() const {
        Mat3 t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
        return t;
    }
};

double det3(const Mat3& m);
double trace3(const Mat3& m);
/// Sum of the three principal 2x2 minors.
double minor_sum3(const Mat3& m);
double frobenius_norm3(const Mat3& m);

Vec3 mul3(const Mat3& m, const Vec3& v);

/// Solves A x = b for small dense systems with partial pivoting.
/// Returns false if a pivot falls below the degeneracy threshold.
bool solve_dense(double* a, double* b, int n);

/// Complex variant used by the Hopf normal-form projection.
bool solve_dense_c(std::complex<double>* a, std::complex<double>* b, int n);

/// Null vector of a 3x3 matrix with a (near-)zero eigenvalue, from the
/// largest cross product of row pairs. Unit norm; orientation arbitrary.
Vec3 null_vector3(const Mat3& m);

/// Complex null vector of (m - lambda I).
CVec3 eigenvector3(const Mat3& m, std::complex<double> lambda);

inline double dot3(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }
inline double norm3(const Vec3& x) { return std::sqrt(dot3(x, x)); }

/// Roots of lambda^3 + c2 lambda^2 + c1 lambda + c0, polished by one complex
/// Newton step each. has_complex_pair follows the discriminant with a
/// relative threshold of 1e-12.
struct CubicRoots {
    std::array<std::complex<double>, 3> roots;
    bool has_complex_pair = false;
};
CubicRoots solve_cubic(double c2, double c1, double c0);

} // namespace sip
