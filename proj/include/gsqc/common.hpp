#pragma once
// Shared scalar types, error taxonomy, 2x2 matrix algebra, deterministic RNG.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsqc {

using cplx = std::complex<double>;

// Error taxonomy; the CLI maps these onto exit codes 2/3/4.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& m) : std::runtime_error(m) {}
};
struct configuration_error : std::runtime_error {
    explicit configuration_error(const std::string& m) : std::runtime_error(m) {}
};
struct capacity_error : std::runtime_error {
    explicit capacity_error(const std::string& m) : std::runtime_error(m) {}
};
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& m) : std::runtime_error(m) {}
};

// 2x2 complex matrix, row major.
struct Mat2 {
    std::array<cplx, 4> a{};  // a[2*r + c]

    cplx& operator()(int r, int c) { return a[2 * r + c]; }
    const cplx& operator()(int r, int c) const { return a[2 * r + c]; }

    static Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }
    static Mat2 zero() { return Mat2{}; }
    static Mat2 sigma_x() { return Mat2{{0.0, 1.0, 1.0, 0.0}}; }
    static Mat2 sigma_y() { return Mat2{{0.0, cplx(0, -1), cplx(0, 1), 0.0}}; }
    static Mat2 sigma_z() { return Mat2{{1.0, 0.0, 0.0, -1.0}}; }
    static Mat2 hadamard() {
        const double s = 1.0 / std::sqrt(2.0);
        return Mat2{{s, s, s, -s}};
    }
    // Rotation about y: [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]].
    static Mat2 rot_y(double theta) {
        const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
        return Mat2{{c, -s, s, c}};
    }

    Mat2 adjoint() const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r(i, j) = std::conj((*this)(j, i));
        return r;
    }

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
        return r;
    }
    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        Mat2 r;
        for (int i = 0; i < 4; ++i) r.a[i] = x.a[i] + y.a[i];
        return r;
    }
    friend Mat2 operator*(cplx s, const Mat2& x) {
        Mat2 r;
        for (int i = 0; i < 4; ++i) r.a[i] = s * x.a[i];
        return r;
    }

    double max_abs_diff(const Mat2& o) const {
        double m = 0;
        for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - o.a[i]));
        return m;
    }
    bool is_unitary(double tol = 1e-10) const {
        return (adjoint() * (*this)).max_abs_diff(identity()) <= tol;
    }
    bool is_identity(double tol = 1e-12) const { return max_abs_diff(identity()) <= tol; }
};

// Normalized 2-vector (bit-space state).
struct Vec2 {
    std::array<cplx, 2> a{};
    cplx& operator[](int i) { return a[i]; }
    const cplx& operator[](int i) const { return a[i]; }
    double norm() const { return std::sqrt(std::norm(a[0]) + std::norm(a[1])); }
    static Vec2 basis(int b) {
        Vec2 v;
        v[b] = 1.0;
        return v;
    }
    static Vec2 plus() {
        const double s = 1.0 / std::sqrt(2.0);
        return Vec2{{s, s}};
    }
};

// Pauli combination I + sum_i a_i sigma_i; rank 1 when |a| = 1.
inline Mat2 pauli_affine(const std::array<double, 3>& a) {
    Mat2 m = Mat2::identity();
    m = m + (cplx(a[0]) * Mat2::sigma_x());
    m = m + (cplx(a[1]) * Mat2::sigma_y());
    m = m + (cplx(a[2]) * Mat2::sigma_z());
    return m;
}

// Null vector of I + a.sigma for unit |a|: the -a direction on the Bloch sphere.
inline Vec2 pauli_null_vector(const std::array<double, 3>& a) {
    // (I + a.sigma)/2 projects onto +a; the kernel is the antipodal state.
    const double az = -a[2], ax = -a[0], ay = -a[1];
    const double c = std::sqrt(0.5 * (1.0 + az));
    Vec2 v;
    if (c > 1e-8) {
        v[0] = c;
        v[1] = cplx(ax, ay) / (2.0 * c);
    } else {
        const double s = std::sqrt(0.5 * (1.0 - az));
        v[0] = cplx(ax, -ay) / (2.0 * s);
        v[1] = s;
    }
    return v;
}

// Deterministic RNG: fixed algorithms, no implementation-defined distributions.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() {  // [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    std::uint64_t bounded(std::uint64_t n) {  // [0, n), rejection sampled
        const std::uint64_t lim = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= lim);
        return x % n;
    }
    double normal() {  // Box-Muller, one value per call pair kept simple
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }
};

}  // namespace gsqc
