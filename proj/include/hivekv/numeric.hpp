// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hivekv {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_) {
            throw std::invalid_argument("Matrix: value count " + std::to_string(values_.size()) +
                                        " does not match shape " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_));
        }
        for (double x : values_) {
            if (!std::isfinite(x)) {
                throw std::invalid_argument("Matrix: non-finite entry");
            }
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

    /// Appends one row; the first row appended to an empty 0x0 matrix fixes the column count.
    void append_row(std::span<const double> r) {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) {
            throw std::invalid_argument("Matrix::append_row: row length mismatch");
        }
        values_.insert(values_.end(), r.begin(), r.end());
        ++rows_;
    }

    std::span<const double> values() const { return values_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline Vec matvec(const Matrix& m, std::span<const double> v) {
    if (m.cols() != v.size()) {
        throw std::invalid_argument("matvec: matrix has " + std::to_string(m.cols()) +
                                    " columns but vector has length " + std::to_string(v.size()));
    }
    Vec out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
    return out;
}

/// softmax(scale * scores), stabilized by subtracting the maximum logit.
inline Vec softmax(std::span<const double> scores, double scale) {
    if (scores.empty()) {
        throw std::invalid_argument("softmax: empty input");
    }
    if (!std::isfinite(scale)) {
        throw std::invalid_argument("softmax: non-finite scale");
    }
    Vec out(scores.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw std::invalid_argument("softmax: non-finite score");
        }
        out[i] = scale * scores[i];
        top = std::max(top, out[i]);
    }
    double total = 0.0;
    for (double& x : out) {
        x = std::exp(x - top);
        total += x;
    }
    for (double& x : out) x /= total;
    return out;
}

/// Solves a * x = b by Gaussian elimination with partial pivoting.
inline Vec solve(Matrix a, Vec b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) {
        throw std::invalid_argument("solve: expected square system");
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        }
        if (a(pivot, col) == 0.0) {
            throw std::invalid_argument("solve: singular matrix");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * x[c];
        x[i] = acc / a(i, i);
    }
    return x;
}

/// Root seed for every generated quantity.
struct Seed {
    std::uint64_t value = 0;
    friend bool operator==(Seed, Seed) = default;
};

/// SplitMix64 finalizer over (root, stream); used to give each independent
/// consumer (weights, stream, trial) its own generator.
inline Seed derive_seed(Seed root, std::uint64_t stream) {
    std::uint64_t z = root.value + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Seed{z ^ (z >> 31)};
}

/// Standard-normal source: std::mt19937_64 (bit-exact across standard
/// libraries) feeding a Box-Muller transform. Uniforms are the top 53 bits of
/// each draw scaled into (0, 1]. std::normal_distribution is avoided because
/// its algorithm is implementation-defined.
class GaussianSource {
public:
    explicit GaussianSource(Seed seed) : engine_(seed.value) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open_closed();
        const double u2 = uniform_open_closed();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform_open_closed() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline Matrix seeded_gaussian_matrix(Seed seed, std::size_t rows, std::size_t cols, double stddev) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("seeded_gaussian_matrix: rows and cols must be >= 1");
    }
    if (!(stddev > 0.0) || !std::isfinite(stddev)) {
        throw std::invalid_argument("seeded_gaussian_matrix: std must be positive");
    }
    GaussianSource source(seed);
    std::vector<double> values(rows * cols);
    for (double& x : values) x = stddev * source.next();
    return Matrix(rows, cols, std::move(values));
}

inline Vec seeded_gaussian_vector(Seed seed, std::size_t n, double stddev = 1.0) {
    const Matrix m = seeded_gaussian_matrix(seed, n, 1, stddev);
    return Vec(m.values().begin(), m.values().end());
}

}  // namespace hivekv
