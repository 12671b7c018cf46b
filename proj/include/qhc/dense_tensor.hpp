#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhc {

/// Raised for precondition violations on tensors, spaces and projector banks.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SymmetryTag : std::uint8_t { none, form, curvature_pair, symmetric2 };

/// Dense real tensor of rank 0..4 over R^dim, stored row-major.
class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(int rank, int dim, SymmetryTag tag = SymmetryTag::none);

  int rank() const { return rank_; }
  int dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }
  SymmetryTag tag() const { return tag_; }
  void set_tag(SymmetryTag t) { tag_ = t; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  double& operator()(int i) { return data_[i]; }
  double operator()(int i) const { return data_[i]; }
  double& operator()(int i, int j) { return data_[idx(i, j)]; }
  double operator()(int i, int j) const { return data_[idx(i, j)]; }
  double& operator()(int i, int j, int k) { return data_[idx(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[idx(i, j, k)]; }
  double& operator()(int i, int j, int k, int l) { return data_[idx(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[idx(i, j, k, l)]; }

  std::size_t idx(int i, int j) const { return std::size_t(i) * dim_ + j; }
  std::size_t idx(int i, int j, int k) const { return (std::size_t(i) * dim_ + j) * dim_ + k; }
  std::size_t idx(int i, int j, int k, int l) const {
    return ((std::size_t(i) * dim_ + j) * dim_ + k) * dim_ + l;
  }

  /// Stride (in entries) of slot s, 0-based.
  std::size_t stride(int s) const;

  DenseTensor& operator+=(const DenseTensor& o);
  DenseTensor& operator-=(const DenseTensor& o);
  DenseTensor& operator*=(double s);
  /// this += s * o
  DenseTensor& axpy(double s, const DenseTensor& o);

  double norm() const;
  double max_abs() const;
  bool same_shape(const DenseTensor& o) const { return rank_ == o.rank_ && dim_ == o.dim_; }
  void require_shape(const DenseTensor& o, const char* where) const;

 private:
  int rank_ = 0;
  int dim_ = 0;
  SymmetryTag tag_ = SymmetryTag::none;
  std::vector<double> data_ = std::vector<double>(1, 0.0);
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double s, DenseTensor a);
DenseTensor operator-(DenseTensor a);

/// Full contraction sum a_I b_I of equally shaped tensors.
double dot(const DenseTensor& a, const DenseTensor& b);

/// Relative distance ||a-b|| / max(||a||, ||b||, floor).
double rel_diff(const DenseTensor& a, const DenseTensor& b, double floor = 1e-300);

}  // namespace qhc
