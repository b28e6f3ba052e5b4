#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace convexflow {

inline constexpr double pi = std::numbers::pi;

// Volume of the unit ball in R^n.
inline double unit_ball_volume(int dim) {
    if (dim == 2) return pi;
    if (dim == 3) return 4.0 * pi / 3.0;
    throw std::invalid_argument("unit_ball_volume: dim must be 2 or 3");
}

// Surface measure of S^{n-1}.
inline double sphere_measure(int dim) {
    if (dim == 2) return 2.0 * pi;
    if (dim == 3) return 4.0 * pi;
    throw std::invalid_argument("sphere_measure: dim must be 2 or 3");
}

// ---------------------------------------------------------------------------
// Error types

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvexBody : Error { using Error::Error; };
struct OriginNotInterior : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct DegenerateBody : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct InteriorLost : Error { using Error::Error; };
struct MeasureNotCentered : Error { using Error::Error; };
struct DimensionUnsupported : Error { using Error::Error; };
struct SymmetryViolation : Error { using Error::Error; };
struct StepCollapse : Error { using Error::Error; };
struct RejectionExhausted : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Small fixed-size vector in R^3. 2D data lives in the first two components
// with z = 0, so one point type serves both ambient dimensions.

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
    double n = norm(a);
    if (n == 0.0) throw InvalidArgument("normalized: zero vector");
    return a / n;
}
inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Row-major n x n matrix stored densely for n <= 3; dim tells how much is used.
struct Mat3 {
    std::array<double, 9> a{};  // a[3*i+j]
    int dim = 3;

    static Mat3 identity(int dim) {
        Mat3 m; m.dim = dim;
        for (int i = 0; i < dim; ++i) m.a[3 * i + i] = 1.0;
        return m;
    }
    double& operator()(int i, int j) { return a[3 * i + j]; }
    double operator()(int i, int j) const { return a[3 * i + j]; }

    Vec3 apply(const Vec3& v) const {
        Vec3 r;
        for (int i = 0; i < dim; ++i) {
            double s = 0;
            for (int j = 0; j < dim; ++j) s += (*this)(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }
    Vec3 apply_transpose(const Vec3& v) const {
        Vec3 r;
        for (int j = 0; j < dim; ++j) {
            double s = 0;
            for (int i = 0; i < dim; ++i) s += (*this)(i, j) * v[i];
            r[j] = s;
        }
        return r;
    }
    Mat3 multiply(const Mat3& o) const {
        Mat3 r; r.dim = dim;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                double s = 0;
                for (int k = 0; k < dim; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    double det() const {
        if (dim == 2) return a[0] * a[4] - a[1] * a[3];
        return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
               a[2] * (a[3] * a[7] - a[4] * a[6]);
    }
};

// Eigen-decomposition of a symmetric matrix (cyclic Jacobi; exact enough for
// the 2x2/3x3 moment and normalization matrices used here). Returns
// eigenvalues ascending and the matrix of column eigenvectors.
inline void sym_eigen(const Mat3& m, std::array<double, 3>& evals, Mat3& evecs) {
    int n = m.dim;
    Mat3 a = m;
    Mat3 v = Mat3::identity(n);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::array<int, 3> order{0, 1, 2};
    std::array<double, 3> d{a(0, 0), n > 1 ? a(1, 1) : 0.0, n > 2 ? a(2, 2) : 0.0};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (d[order[j]] < d[order[i]]) std::swap(order[i], order[j]);
    evecs = Mat3::identity(n);
    for (int i = 0; i < n; ++i) {
        evals[i] = d[order[i]];
        for (int k = 0; k < n; ++k) evecs(k, i) = v(k, order[i]);
    }
}

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 plus hand-built uniform/normal transforms so
// streams do not depend on the standard library's distribution internals.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        if (have_spare_) { have_spare_ = false; return spare_; }
        double u1 = 0, u2 = 0;
        do { u1 = uniform(); } while (u1 <= 1e-300);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * u2);
    }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0;
};

}  // namespace convexflow
