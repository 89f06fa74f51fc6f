#pragma once
// Dense kernel for the small-n geometry used throughout: norms, a one-sided
// Jacobi SVD, orthonormal frames and great-circle angles.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "qcmap/error.hpp"

namespace qcmap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr double pi = std::numbers::pi;
constexpr double half_pi = std::numbers::pi / 2.0;

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline Vector basis_vector(int n, int i)
{
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    return e;
}

struct SvdResult {
    Matrix u;
    Vector sigma; // descending
    Matrix v;
};

/// One-sided (Hestenes) Jacobi SVD. Sweeps rotate column pairs of a working
/// copy until every off-diagonal Gram entry is below 1e-14 * trace(M^T M).
inline SvdResult svd_small_full(const Matrix& m)
{
    if (!all_finite(m))
        throw error(errc::invalid_input, "svd_small: non-finite matrix entry");
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    Matrix a = m;
    Matrix v = Matrix::Identity(cols, cols);

    const double trace = a.squaredNorm();
    const double tol = 1e-14 * trace;
    constexpr int max_sweeps = 80;
    for (int sweep = 0; sweep < max_sweeps && trace > 0.0; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < cols - 1; ++p) {
            for (int q = p + 1; q < cols; ++q) {
                const double alpha = a.col(p).squaredNorm();
                const double beta = a.col(q).squaredNorm();
                const double gamma = a.col(p).dot(a.col(q));
                if (std::abs(gamma) <= tol && std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta))
                    continue;
                if (gamma == 0.0)
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < rows; ++i) {
                    const double ap = a(i, p);
                    const double aq = a(i, q);
                    a(i, p) = c * ap - s * aq;
                    a(i, q) = s * ap + c * aq;
                }
                for (int i = 0; i < cols; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated)
            break;
    }

    std::vector<int> order(cols);
    for (int i = 0; i < cols; ++i)
        order[i] = i;
    Vector norms(cols);
    for (int i = 0; i < cols; ++i)
        norms(i) = a.col(i).norm();
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return norms(x) > norms(y); });

    SvdResult out{Matrix::Zero(rows, cols), Vector(cols), Matrix(cols, cols)};
    for (int k = 0; k < cols; ++k) {
        const int j = order[k];
        out.sigma(k) = norms(j);
        out.v.col(k) = v.col(j);
        if (norms(j) > 0.0)
            out.u.col(k) = a.col(j) / norms(j);
    }
    return out;
}

/// Singular values in descending order.
inline Vector svd_small(const Matrix& m) { return svd_small_full(m).sigma; }

/// An orthonormal n x n matrix with det +1; column 0 is the distinguished
/// direction.
class Frame {
public:
    explicit Frame(Matrix columns) : m_(std::move(columns))
    {
        if (m_.rows() != m_.cols() || m_.rows() < 2)
            throw error(errc::invalid_input, "frame must be square");
        if (!all_finite(m_))
            throw error(errc::invalid_input, "frame has non-finite entries");
        const Matrix gram = m_.transpose() * m_;
        const double dev = (gram - Matrix::Identity(m_.rows(), m_.cols())).cwiseAbs().maxCoeff();
        if (dev > 1e-9)
            throw error(errc::invalid_input, "frame columns are not orthonormal");
        if (m_.determinant() < 0.0)
            throw error(errc::invalid_input, "frame must be orientation preserving");
    }

    static Frame identity(int n) { return Frame(Matrix::Identity(n, n)); }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    Vector column(int i) const { return m_.col(i); }
    Vector direction() const { return m_.col(0); }

    Vector to_local(const Vector& y) const { return m_.transpose() * y; }
    Vector to_world(const Vector& w) const { return m_ * w; }

private:
    Matrix m_;
};

/// Frame with column 0 = sigma. With a hint, column 1 is the normalized part
/// of the hint orthogonal to sigma. Remaining columns come from Gram-Schmidt
/// over e_0, e_1, ...: the first basis vector whose residual exceeds 1/2 is
/// taken, otherwise the largest residual. The last column's sign fixes det = +1.
inline Frame frame_from_direction(const Vector& sigma, const std::optional<Vector>& hint = std::nullopt)
{
    const int n = static_cast<int>(sigma.size());
    if (n < 2 || !all_finite(sigma))
        throw error(errc::invalid_input, "frame_from_direction: bad direction");
    if (std::abs(sigma.norm() - 1.0) > 1e-12)
        throw error(errc::invalid_input, "frame_from_direction: direction is not a unit vector");

    std::vector<Vector> cols;
    cols.push_back(sigma);
    if (hint) {
        if (hint->size() != n || !all_finite(*hint))
            throw error(errc::invalid_input, "frame_from_direction: bad hint");
        Vector r = *hint - hint->dot(sigma) * sigma;
        if (r.norm() <= 1e-10 * std::max(1.0, hint->norm()))
            throw error(errc::degenerate_hint, "hint is parallel to the direction");
        r -= r.dot(sigma) * sigma;
        cols.push_back(r.normalized());
    }

    auto residual = [&](int k) {
        Vector r = basis_vector(n, k);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& c : cols)
                r -= r.dot(c) * c;
        return r;
    };

    while (static_cast<int>(cols.size()) < n) {
        int pick = -1;
        double best = -1.0;
        int largest = 0;
        for (int k = 0; k < n; ++k) {
            const double norm = residual(k).norm();
            if (pick < 0 && norm > 0.5)
                pick = k;
            if (norm > best) {
                best = norm;
                largest = k;
            }
        }
        if (pick < 0)
            pick = largest;
        cols.push_back(residual(pick).normalized());
    }

    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        m.col(i) = cols[i];
    if (m.determinant() < 0.0)
        m.col(n - 1) *= -1.0;
    return Frame(std::move(m));
}

/// Minor-arc angle between two unit directions.
inline double great_circle_angle(const Vector& s1, const Vector& s2)
{
    if (s1.size() != s2.size() || s1.norm() == 0.0 || s2.norm() == 0.0)
        throw error(errc::invalid_input, "great_circle_angle: zero or mismatched directions");
    const Vector a = s1.normalized();
    const Vector b = s2.normalized();
    if ((a + b).norm() <= 1e-10)
        throw error(errc::ambiguous_arc, "antipodal directions have no unique minor arc");
    const double c = a.dot(b);
    const double s = (a - c * b).norm();
    return std::atan2(s, c);
}

/// Identity except for the rotation block in axes (i, j); maps e_i to
/// cos(theta) e_i + sin(theta) e_j. Axes are 0-based.
inline Matrix planar_rotation(int n, double theta, int i, int j)
{
    if (i == j || i < 0 || j < 0 || i >= n || j >= n)
        throw error(errc::invalid_axes, "planar_rotation needs two distinct axes in range");
    Matrix r = Matrix::Identity(n, n);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    r(i, i) = c;
    r(j, j) = c;
    r(i, j) = -s;
    r(j, i) = s;
    return r;
}

/// Point on the great circle from a to b after a fraction of the minor arc.
inline Vector slerp(const Vector& a, const Vector& b, double fraction)
{
    const double theta = great_circle_angle(a, b);
    if (theta < 1e-15)
        return a;
    const double s = std::sin(theta);
    return (std::sin((1.0 - fraction) * theta) / s) * a + (std::sin(fraction * theta) / s) * b;
}

} // namespace qcmap
