#include "qhc/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace qhc {

namespace {

// Numerical rank from the diagonal of a column-pivoted QR factorization.
int qr_rank(const Eigen::ColPivHouseholderQR<Mat>& qr, double rel_tol, double floor) {
  const Mat& r = qr.matrixR();
  const long k = std::min(r.rows(), r.cols());
  if (k == 0) return 0;
  const double top = std::max(std::abs(r(0, 0)), floor);
  int rank = 0;
  while (rank < k && std::abs(r(rank, rank)) > rel_tol * top) ++rank;
  return rank;
}

Mat leading_q(const Eigen::ColPivHouseholderQR<Mat>& qr, int k) {
  return qr.householderQ() * Mat::Identity(qr.rows(), k);
}

}  // namespace

Vec singular_values(const Mat& m) {
  if (m.size() == 0) return Vec();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues();
}

Mat orthonormal_range(const Mat& m, double rel_tol) {
  if (m.cols() == 0 || m.rows() == 0) return Mat(m.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  return leading_q(qr, qr_rank(qr, rel_tol, 0.0));
}

Mat null_space(const Mat& m, double rel_tol, double floor) {
  const long c = m.cols();
  if (m.rows() == 0 || c == 0) return Mat::Identity(c, c);
  const Mat mt = m.transpose();
  Eigen::ColPivHouseholderQR<Mat> qr(mt);
  const int r = qr_rank(qr, rel_tol, floor);
  const Mat q = qr.householderQ() * Mat::Identity(c, c);
  return q.rightCols(c - r);
}

Mat range_orthogonal_to(const Mat& w, const std::vector<const Mat*>& prior, double rel_tol,
                        double floor) {
  if (w.cols() == 0) return Mat(w.rows(), 0);
  const double scale = std::max(w.colwise().norm().maxCoeff(), floor);
  Mat r = w;
  for (int pass = 0; pass < 2; ++pass)
    for (const Mat* p : prior)
      if (p->cols() > 0) r -= *p * (p->transpose() * r);
  Eigen::ColPivHouseholderQR<Mat> qr(r);
  const int k = qr_rank(qr, rel_tol * scale / std::max(std::abs(qr.matrixR()(0, 0)), 1e-300), 0.0);
  Mat q = leading_q(qr, k);
  for (const Mat* p : prior)
    if (p->cols() > 0) q -= *p * (p->transpose() * q);
  if (k > 0) {
    Eigen::HouseholderQR<Mat> h(q);
    q = h.householderQ() * Mat::Identity(q.rows(), k);
  }
  return q;
}

int append_orthonormal(Mat& q, const Mat& v, double rel_tol) {
  Mat add = range_orthogonal_to(v, {&q}, rel_tol, 0.0);
  const int r = int(add.cols());
  if (r == 0) return 0;
  const long old = q.cols();
  q.conservativeResize(v.rows(), old + r);
  q.rightCols(r) = add;
  return r;
}

int thread_count() {
  int hw = int(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("QHC_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace qhc
