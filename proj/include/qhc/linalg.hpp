#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace qhc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Singular values in decreasing order.
Vec singular_values(const Mat& m);

/// Orthonormal basis of the column space; singular values below rel_tol * max are dropped.
Mat orthonormal_range(const Mat& m, double rel_tol = 1e-8);

/// Orthonormal basis of the kernel; singular values up to rel_tol * max(largest, floor) count as zero.
Mat null_space(const Mat& m, double rel_tol = 1e-8, double floor = 0.0);

/// Orthonormal basis of span(w) orthogonal to the given orthonormal bases. Directions shorter
/// than rel_tol * max(largest column of w, floor) are dropped.
Mat range_orthogonal_to(const Mat& w, const std::vector<const Mat*>& prior, double rel_tol = 1e-8,
                        double floor = 1.0);

/// Appends to the orthonormal columns of q the part of span(v) orthogonal to q.
/// Directions shorter than rel_tol times the largest input column are discarded.
/// Returns the number of columns added.
int append_orthonormal(Mat& q, const Mat& v, double rel_tol = 1e-8);

/// Worker count: hardware concurrency capped by the QHC_THREADS environment variable.
int thread_count();

/// Runs fn(i) for i in [0, count); iterations must be independent.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace qhc
