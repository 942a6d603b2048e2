// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "daeconf/errors.hpp"

namespace daeconf {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// Most of the library works on rank-2 tensors laid out as [batch, features];
/// convolutional layers interpret the feature axis as (channels, height, width).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  /// Builds a rank-2 tensor from nested rows, e.g. {{1, 2}, {3, 4}}.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  bool empty() const { return data_.empty(); }

  /// Rows/cols of a rank-2 tensor. A rank-1 tensor is treated as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row_span(std::size_t r);
  std::span<const double> row_span(std::size_t r) const;
  /// Copy of row r as a [1, cols] tensor.
  Tensor row(std::size_t r) const;
  /// Copy of rows [begin, end) as a [end - begin, cols] tensor.
  Tensor slice_rows(std::size_t begin, std::size_t end) const;
  Tensor gather_rows(std::span<const std::size_t> indices) const;

  Tensor reshaped(Shape shape) const;
  bool all_finite() const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double s);

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(Tensor a, double s);
Tensor operator*(double s, Tensor a);
Tensor hadamard(const Tensor& a, const Tensor& b);

/// a[m,k] * b[k,n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// a^T * b for a[k,m], b[k,n]
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a * b^T for a[m,k], b[n,k]
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Column sums of a rank-2 tensor, returned as shape [cols].
Tensor sum_rows(const Tensor& a);
/// Adds a [cols] vector to every row.
void add_row_vector(Tensor& a, const Tensor& v);

double l2_norm(const Tensor& v);
double sum(const Tensor& v);
double dot(std::span<const double> a, std::span<const double> b);

/// xoshiro256** seeded through splitmix64.
///
/// The algorithm and constants are fixed, so a seed yields the same stream on
/// every platform. Normal draws use the Marsaglia polar method.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  /// Independent generator for stream `stream`, derived from this
  /// generator's seed only (not from its current position).
  Rng split(std::uint64_t stream) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

Tensor gaussian(Rng& rng, const Shape& shape, double mean, double sigma);
Tensor uniform(Rng& rng, const Shape& shape, double lo, double hi);

}  // namespace daeconf
