// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "dignn/errors.hpp"

namespace dignn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const Tensor& t) { return ConstMap(t.data(), t.rows(), t.cols()); }
MutMap view(Tensor& t) { return MutMap(t.data(), t.rows(), t.cols()); }

}  // namespace

Tensor::Tensor(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw ShapeError("negative tensor dimension");
}

Tensor::Tensor(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str());
  }
}

Tensor Tensor::row(std::initializer_list<double> values) {
  return Tensor(1, static_cast<int>(values.size()), std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  const int m = n == 0 ? 0 : static_cast<int>(rows.begin()->size());
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(n) * m);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != m) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor(n, m, std::move(data));
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::string Tensor::shape_str() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_scaled(const Tensor& other, double scale) {
  if (!same_shape(other)) {
    throw ShapeError("add_scaled: " + shape_str() + " vs " + other.shape_str());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

double Tensor::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str());
  return data_[0];
}

Tensor matmul_nt(const Tensor& x, const Tensor& w) {
  if (x.cols() != w.cols()) {
    throw ShapeError("matmul: inner dimensions differ, x " + x.shape_str() + " vs W " +
                     w.shape_str());
  }
  Tensor y(x.rows(), w.rows());
  if (x.rows() > 0 && w.rows() > 0) view(y).noalias() = view(x) * view(w).transpose();
  return y;
}

Tensor matmul_nn(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  Tensor y(a.rows(), b.cols());
  if (a.rows() > 0 && b.cols() > 0) view(y).noalias() = view(a) * view(b);
  return y;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() + "^T vs " +
                     b.shape_str());
  }
  Tensor y(a.cols(), b.cols());
  if (a.cols() > 0 && b.cols() > 0) view(y).noalias() = view(a).transpose() * view(b);
  return y;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("max_abs_diff: " + a.shape_str() + " vs " + b.shape_str());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace dignn
