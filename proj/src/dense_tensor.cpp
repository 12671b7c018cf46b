#include "qhc/dense_tensor.hpp"

#include <algorithm>
#include <cmath>

namespace qhc {

DenseTensor::DenseTensor(int rank, int dim, SymmetryTag tag) : rank_(rank), dim_(dim), tag_(tag) {
  if (rank < 0 || rank > 4) throw Error("DenseTensor: rank must be in 0..4");
  if (dim < 1) throw Error("DenseTensor: dim must be positive");
  std::size_t n = 1;
  for (int s = 0; s < rank; ++s) n *= std::size_t(dim);
  data_.assign(n, 0.0);
}

std::size_t DenseTensor::stride(int s) const {
  std::size_t st = 1;
  for (int t = s + 1; t < rank_; ++t) st *= std::size_t(dim_);
  return st;
}

void DenseTensor::require_shape(const DenseTensor& o, const char* where) const {
  if (!same_shape(o)) throw Error(std::string(where) + ": shape mismatch");
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& o) {
  require_shape(o, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& o) {
  require_shape(o, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseTensor& DenseTensor::axpy(double s, const DenseTensor& o) {
  require_shape(o, "axpy");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
  return *this;
}

double DenseTensor::norm() const {
  double s = 0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double DenseTensor::max_abs() const {
  double m = 0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double s, DenseTensor a) { return a *= s; }
DenseTensor operator-(DenseTensor a) { return a *= -1.0; }

double dot(const DenseTensor& a, const DenseTensor& b) {
  a.require_shape(b, "dot");
  double s = 0;
  const double* x = a.data();
  const double* y = b.data();
  for (std::size_t k = 0; k < a.size(); ++k) s += x[k] * y[k];
  return s;
}

double rel_diff(const DenseTensor& a, const DenseTensor& b, double floor) {
  const double d = (a - b).norm();
  const double s = std::max({a.norm(), b.norm(), floor});
  return d / s;
}

}  // namespace qhc
