#include "sip/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace sip {

double det3(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

double trace3(const Mat3& m) { return m(0, 0) + m(1, 1) + m(2, 2); }

double minor_sum3(const Mat3& m) {
    const double m12 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double m13 = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    const double m23 = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    return m12 + m13 + m23;
}

double frobenius_norm3(const Mat3& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return std::sqrt(s);
}

Vec3 mul3(const Mat3& m, const Vec3& v) {
    return {m(0, 0) * v[0] + m(0, 1) * v[1] + m(0, 2) * v[2],
            m(1, 0) * v[0] + m(1, 1) * v[1] + m(1, 2) * v[2],
            m(2, 0) * v[0] + m(2, 1) * v[1] + m(2, 2) * v[2]};
}

bool solve_dense(double* a, double* b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::fabs(a[row * n + col]) > std::fabs(a[piv * n + col])) piv = row;
        if (std::fabs(a[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (int j = col; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
            std::swap(b[col], b[piv]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (int row = col + 1; row < n; ++row) {
            const double f = a[row * n + col] * inv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a[row * n + j] -= f * a[col * n + j];
            b[row] -= f * b[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double s = b[row];
        for (int j = row + 1; j < n; ++j) s -= a[row * n + j] * b[j];
        b[row] = s / a[row * n + row];
    }
    return true;
}

bool solve_dense_c(std::complex<double>* a, std::complex<double>* b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[piv * n + col])) piv = row;
        if (std::abs(a[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (int j = col; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
            std::swap(b[col], b[piv]);
        }
        const std::complex<double> inv = 1.0 / a[col * n + col];
        for (int row = col + 1; row < n; ++row) {
            const std::complex<double> f = a[row * n + col] * inv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a[row * n + j] -= f * a[col * n + j];
            b[row] -= f * b[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        std::complex<double> s = b[row];
        for (int j = row + 1; j < n; ++j) s -= a[row * n + j] * b[j];
        b[row] = s / a[row * n + row];
    }
    return true;
}

Vec3 null_vector3(const Mat3& m) {
    const Vec3 r0{m(0, 0), m(0, 1), m(0, 2)};
    const Vec3 r1{m(1, 0), m(1, 1), m(1, 2)};
    const Vec3 r2{m(2, 0), m(2, 1), m(2, 2)};
    auto cross = [](const Vec3& a, const Vec3& b) {
        return Vec3{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0]};
    };
    Vec3 best{0.0, 0.0, 0.0};
    double best_norm = -1.0;
    for (const auto& c : {cross(r0, r1), cross(r0, r2), cross(r1, r2)}) {
        const double nn = norm3(c);
        if (nn > best_norm) {
            best_norm = nn;
            best = c;
        }
    }
    if (best_norm <= 0.0) return {1.0, 0.0, 0.0};
    for (double& v : best) v /= best_norm;
    return best;
}

CVec3 eigenvector3(const Mat3& m, std::complex<double> lambda) {
    using C = std::complex<double>;
    std::array<std::array<C, 3>, 3> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = C(m(i, j)) - (i == j ? lambda : C(0.0));
    auto cross = [](const std::array<C, 3>& a, const std::array<C, 3>& b) {
        return CVec3{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]};
    };
    CVec3 best{};
    double best_norm = -1.0;
    for (const auto& c : {cross(r[0], r[1]), cross(r[0], r[2]), cross(r[1], r[2])}) {
        const double nn = std::sqrt(std::norm(c[0]) + std::norm(c[1]) + std::norm(c[2]));
        if (nn > best_norm) {
            best_norm = nn;
            best = c;
        }
    }
    if (best_norm <= 0.0) return {1.0, 0.0, 0.0};
    for (auto& v : best) v /= best_norm;
    return best;
}

namespace {

std::complex<double> polish_cubic_root(double c2, double c1, double c0,
                                       std::complex<double> z) {
    // One Newton step on the monic cubic; enough after a closed-form solve.
    for (int it = 0; it < 2; ++it) {
        const std::complex<double> f = ((z + c2) * z + c1) * z + c0;
        const std::complex<double> df = (3.0 * z + 2.0 * c2) * z + c1;
        if (std::abs(df) < 1e-300) break;
        const std::complex<double> step = f / df;
        z -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

} // namespace

CubicRoots solve_cubic(double c2, double c1, double c0) {
    CubicRoots out;
    // Depressed form y^3 + p y + q with lambda = y - c2/3.
    const double shift = c2 / 3.0;
    const double p = c1 - c2 * c2 / 3.0;
    const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    const double half_q = q / 2.0;
    const double third_p = p / 3.0;
    const double disc = half_q * half_q + third_p * third_p * third_p;
    const double scale = std::max({1.0, std::fabs(p), std::cbrt(std::fabs(q) + 1e-300)});
    const double disc_tol = 1e-12 * scale * scale * scale;

    std::array<std::complex<double>, 3> y;
    if (disc > disc_tol) {
        // One real root and a complex-conjugate pair.
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-half_q + s);
        const double v = std::cbrt(-half_q - s);
        const double y0 = u + v;
        const double re = -y0 / 2.0;
        const double im = std::sqrt(3.0) / 2.0 * (u - v);
        y = {std::complex<double>(y0, 0.0), std::complex<double>(re, im),
             std::complex<double>(re, -im)};
        out.has_complex_pair = true;
    } else if (disc < -disc_tol) {
        // Three distinct real roots (trigonometric form; p < 0 here).
        const double rho = std::sqrt(-third_p);
        double cosarg = -half_q / (rho * rho * rho);
        cosarg = std::clamp(cosarg, -1.0, 1.0);
        const double theta = std::acos(cosarg);
        for (int k = 0; k < 3; ++k)
            y[static_cast<std::size_t>(k)] = 2.0 * rho * std::cos((theta - 2.0 * M_PI * k) / 3.0);
        out.has_complex_pair = false;
    } else {
        // Borderline: repeated real roots.
        if (std::fabs(p) < disc_tol && std::fabs(q) < disc_tol) {
            y = {0.0, 0.0, 0.0};
        } else {
            const double y1 = (half_q == 0.0) ? 0.0 : 3.0 * q / p; // double root
            const double y2 = -2.0 * y1;                           // wrong for p==0, fixed by polish
            y = {y1, y1, y2};
        }
        out.has_complex_pair = false;
    }

    for (int k = 0; k < 3; ++k) {
        std::complex<double> z = y[static_cast<std::size_t>(k)] - shift;
        out.roots[static_cast<std::size_t>(k)] = polish_cubic_root(c2, c1, c0, z);
    }
    // Keep the conjugate pair exactly conjugate after polishing.
    if (out.has_complex_pair) {
        const std::complex<double> m = (out.roots[1] + std::conj(out.roots[2])) / 2.0;
        out.roots[1] = m;
        out.roots[2] = std::conj(m);
    } else {
        for (auto& z : out.roots) z = std::complex<double>(z.real(), 0.0);
    }
    return out;
}

} // namespace sip
