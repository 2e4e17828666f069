#include "hpg/transforms.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "hpg/basis.hpp"

namespace hpg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Lambda(k/2) = Gamma(k/2 + 1/2) / Gamma(k/2 + 1) for k = 0..kmax, by the ratio recurrence.
std::vector<double> lambda_half_table(int kmax) {
  std::vector<double> t(kmax + 1);
  t[0] = std::sqrt(std::numbers::pi);
  if (kmax >= 1) t[1] = 2.0 / std::sqrt(std::numbers::pi);
  for (int k = 2; k <= kmax; ++k) {
    const double z = 0.5 * (k - 2);
    t[k] = t[k - 2] * (z + 0.5) / (z + 1.0);
  }
  return t;
}

std::size_t fft_length(int n) {
  std::size_t len = 1;
  while (len < static_cast<std::size_t>(2 * n)) len <<= 1;
  return len;
}

// y_r = sum_{c >= r} t(c - r) * h(r + c) * x_c with h(r + c) ~= sum_l L(r, l) L(c, l).
class ToeplitzHankel {
 public:
  ToeplitzHankel(int n, const std::vector<double>& toeplitz, const std::vector<double>& hankel)
      : n_(n), len_(fft_length(n)) {
    // Pivoted Cholesky of the positive semidefinite Hankel matrix [h(r + c)].
    VectorXd diag(n);
    for (int i = 0; i < n; ++i) diag(i) = hankel[2 * i];
    const double tol = 1e-17 * diag.maxCoeff() * n;
    std::vector<VectorXd> cols;
    VectorXd resid = diag;
    while (static_cast<int>(cols.size()) < n) {
      Eigen::Index piv;
      const double top = resid.maxCoeff(&piv);
      if (top <= tol) break;
      VectorXd col(n);
      for (int i = 0; i < n; ++i) col(i) = hankel[piv + i];
      for (const auto& l : cols) col -= l(piv) * l;
      col /= std::sqrt(top);
      resid -= col.cwiseAbs2();
      cols.push_back(std::move(col));
    }
    factor_.resize(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t l = 0; l < cols.size(); ++l) factor_.col(l) = cols[l];

    std::vector<double> t(len_, 0.0);
    for (int d = 0; d < n; ++d) t[d] = toeplitz[d];
    Eigen::FFT<double> fft;
    fft.fwd(toeplitz_hat_, t);
  }

  int rank() const { return static_cast<int>(factor_.cols()); }

  VectorXd apply(const VectorXd& x) const {
    Eigen::FFT<double> fft;
    VectorXd y = VectorXd::Zero(n_);
    std::vector<double> buf(len_);
    std::vector<std::complex<double>> spec;
    std::vector<double> conv;
    for (Eigen::Index l = 0; l < factor_.cols(); ++l) {
      std::fill(buf.begin(), buf.end(), 0.0);
      // reversed scaled input: z~_i = L(n-1-i) x(n-1-i)
      for (int i = 0; i < n_; ++i) buf[i] = factor_(n_ - 1 - i, l) * x(n_ - 1 - i);
      fft.fwd(spec, buf);
      for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= toeplitz_hat_[k];
      fft.inv(conv, spec);
      for (int r = 0; r < n_; ++r) y(r) += factor_(r, l) * conv[n_ - 1 - r];
    }
    return y;
  }

 private:
  int n_;
  std::size_t len_;
  MatrixXd factor_;
  std::vector<std::complex<double>> toeplitz_hat_;
};

// Fast Legendre -> Chebyshev:
//   c_k = (2 - delta_k0)/pi * sum_{j >= k, j-k even} Lambda((j-k)/2) Lambda((j+k)/2) a_j
class FastLegToCheb {
 public:
  explicit FastLegToCheb(int n) : n_(n) {
    auto lam = lambda_half_table(2 * n + 2);
    std::vector<double> t(n), h(2 * n);
    for (int d = 0; d < n; ++d) t[d] = (d % 2 == 0) ? lam[d] : 0.0;
    for (int s = 0; s < 2 * n; ++s) h[s] = lam[s];
    op_ = std::make_unique<ToeplitzHankel>(n, t, h);
  }
  VectorXd apply(const VectorXd& a) const {
    VectorXd c = op_->apply(a);
    c *= 2.0 / std::numbers::pi;
    c(0) *= 0.5;
    return c;
  }

 private:
  int n_;
  std::unique_ptr<ToeplitzHankel> op_;
};

// Fast Chebyshev -> Legendre:
//   a_0 = c_0 + sum_{k >= 2 even} L_0k c_k,  L_jj = sqrt(pi) / (2 Lambda(j)) (j >= 1),
//   L_jk = -k (j + 1/2) / ((k + j + 1)(k - j)) Lambda((k-j-2)/2) Lambda((k+j-1)/2), k > j, k-j even.
// Rows/columns j, k >= 1 go through the Toeplitz-Hankel product.
class FastChebToLeg {
 public:
  explicit FastChebToLeg(int n) : n_(n), lam_(lambda_half_table(2 * n + 2)) {
    if (n_ > 1) {
      const int m = n_ - 1;  // local index J = j - 1
      std::vector<double> t(m), h(2 * m);
      for (int d = 0; d < m; ++d) t[d] = (d >= 2 && d % 2 == 0) ? lam_[d - 2] / d : 0.0;
      for (int s = 0; s < 2 * m; ++s) {
        const int sum = s + 2;  // j + k
        h[s] = lam_[sum - 1] / (sum + 1);
      }
      op_ = std::make_unique<ToeplitzHankel>(m, t, h);
    }
  }
  VectorXd apply(const VectorXd& c) const {
    VectorXd a = VectorXd::Zero(n_);
    a(0) = c(0);
    for (int k = 2; k < n_; k += 2) a(0) -= lam_[k - 2] * lam_[k - 1] / (2.0 * (k + 1)) * c(k);
    if (n_ > 1) {
      const int m = n_ - 1;
      VectorXd x(m);
      for (int K = 0; K < m; ++K) x(K) = -(K + 1) * c(K + 1);
      VectorXd y = op_->apply(x);
      for (int J = 0; J < m; ++J) {
        const int j = J + 1;
        a(j) = (j + 0.5) * y(J) + std::sqrt(std::numbers::pi) / (2.0 * lam_[2 * j]) * c(j);
      }
    }
    return a;
  }

 private:
  int n_;
  std::vector<double> lam_;
  std::unique_ptr<ToeplitzHankel> op_;
};

template <typename T>
const T& cached(std::map<int, std::unique_ptr<T>>& cache, std::mutex& mtx, int n) {
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<T>(n)).first;
  return *it->second;
}

std::mutex g_fast_mutex;
std::map<int, std::unique_ptr<FastLegToCheb>> g_leg_to_cheb;
std::map<int, std::unique_ptr<FastChebToLeg>> g_cheb_to_leg;

std::mutex g_dense_mutex;
std::map<int, MatrixXd> g_l2c_dense, g_c2l_dense, g_analysis_dense;

MatrixXd build_leg_to_cheb(int n) {
  // Column j holds the Chebyshev coefficients of P_j.
  MatrixXd m = MatrixXd::Zero(n, n);
  m(0, 0) = 1.0;
  if (n > 1) m(1, 1) = 1.0;
  auto times_x = [n](const VectorXd& c) {
    VectorXd r = VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) {
      if (c(k) == 0.0) continue;
      if (k == 0) {
        if (n > 1) r(1) += c(0);
      } else {
        if (k + 1 < n) r(k + 1) += 0.5 * c(k);
        r(k - 1) += 0.5 * c(k);
      }
    }
    return r;
  };
  for (int j = 1; j + 1 < n; ++j)
    m.col(j + 1) = ((2.0 * j + 1) * times_x(m.col(j)) - j * m.col(j - 1)) / (j + 1.0);
  return m;
}

MatrixXd build_cheb_to_leg(int n) {
  // Column k holds the Legendre coefficients of T_k.
  MatrixXd m = MatrixXd::Zero(n, n);
  m(0, 0) = 1.0;
  if (n > 1) m(1, 1) = 1.0;
  auto times_x = [n](const VectorXd& a) {
    VectorXd r = VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (a(j) == 0.0) continue;
      if (j + 1 < n) r(j + 1) += a(j) * (j + 1.0) / (2.0 * j + 1);
      if (j >= 1) r(j - 1) += a(j) * j / (2.0 * j + 1);
    }
    return r;
  };
  for (int k = 1; k + 1 < n; ++k) m.col(k + 1) = 2.0 * times_x(m.col(k)) - m.col(k - 1);
  return m;
}

const MatrixXd& dense_cached(std::map<int, MatrixXd>& cache, int n, MatrixXd (*build)(int)) {
  std::lock_guard<std::mutex> lock(g_dense_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build(n)).first;
  return it->second;
}

// DCT-I: y_j = sum''_k v_k cos(pi j k / (q - 1)) (end terms halved), through an FFT of the even extension.
VectorXd dct1(const VectorXd& v) {
  const int q = static_cast<int>(v.size());
  if (q == 1) return v;
  const int len = 2 * (q - 1);
  std::vector<double> ext(len);
  for (int k = 0; k < q; ++k) ext[k] = v(k);
  for (int k = q; k < len; ++k) ext[k] = v(len - k);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, ext);
  VectorXd y(q);
  for (int j = 0; j < q; ++j) y(j) = 0.5 * spec[j].real();
  return y;
}

MatrixXd build_cheb_analysis_dense(int q) {
  // samples -> Chebyshev coefficients
  MatrixXd m(q, q);
  if (q == 1) {
    m(0, 0) = 1.0;
    return m;
  }
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k) {
      double w = (k == 0 || k == q - 1) ? 0.5 : 1.0;
      m(j, k) = 2.0 / (q - 1) * w * std::cos(std::numbers::pi * j * k / (q - 1));
    }
  m.row(0) *= 0.5;
  m.row(q - 1) *= 0.5;
  return m;
}

MatrixXd build_analysis(int q) { return build_cheb_to_leg(q) * build_cheb_analysis_dense(q); }

bool use_fast(TransformPath path, int degree) {
  if (path == TransformPath::Fast) return true;
  if (path == TransformPath::Reference) return false;
  return degree > kFastDegreeThreshold;
}

}  // namespace

Eigen::VectorXd chebyshev_points(int q) {
  if (q < 1) throw std::invalid_argument("chebyshev_points: need q >= 1");
  VectorXd x(q);
  if (q == 1) {
    x(0) = 0.0;
    return x;
  }
  for (int k = 0; k < q; ++k) x(k) = std::cos(std::numbers::pi * k / (q - 1));
  // exact symmetry
  for (int k = 0; k < q / 2; ++k) {
    const double s = 0.5 * (x(k) - x(q - 1 - k));
    x(k) = s;
    x(q - 1 - k) = -s;
  }
  if (q % 2 == 1) x(q / 2) = 0.0;
  return x;
}

Eigen::VectorXd values_to_chebyshev(const Eigen::VectorXd& values) {
  const int q = static_cast<int>(values.size());
  if (q < 1) throw std::invalid_argument("values_to_chebyshev: empty sample set");
  if (q == 1) return values;
  VectorXd c = dct1(values) * (2.0 / (q - 1));
  c(0) *= 0.5;
  c(q - 1) *= 0.5;
  return c;
}

Eigen::VectorXd chebyshev_to_values(const Eigen::VectorXd& coeffs, int q) {
  if (q < 1) throw std::invalid_argument("chebyshev_to_values: need q >= 1");
  const int n = static_cast<int>(coeffs.size());
  if (q == 1) {
    // T_j(0) = cos(j pi / 2)
    double s = 0.0;
    for (int j = 0; j < n; j += 2) s += (j % 4 == 0 ? 1.0 : -1.0) * coeffs(j);
    return VectorXd::Constant(1, s);
  }
  const int m = q - 1;
  VectorXd folded = VectorXd::Zero(q);
  for (int j = 0; j < n; ++j) {
    int r = j % (2 * m);
    if (r > m) r = 2 * m - r;
    folded(r) += coeffs(j);
  }
  folded(0) *= 2.0;
  folded(m) *= 2.0;
  return dct1(folded);
}

const Eigen::MatrixXd& legendre_to_chebyshev_matrix(int n) {
  return dense_cached(g_l2c_dense, n, &build_leg_to_cheb);
}

const Eigen::MatrixXd& chebyshev_to_legendre_matrix(int n) {
  return dense_cached(g_c2l_dense, n, &build_cheb_to_leg);
}

Eigen::VectorXd legendre_to_chebyshev(const Eigen::VectorXd& a, TransformPath path) {
  const int n = static_cast<int>(a.size());
  if (n == 0) return a;
  if (use_fast(path, n - 1)) return cached(g_leg_to_cheb, g_fast_mutex, n).apply(a);
  return legendre_to_chebyshev_matrix(n) * a;
}

Eigen::VectorXd chebyshev_to_legendre(const Eigen::VectorXd& c, TransformPath path) {
  const int n = static_cast<int>(c.size());
  if (n == 0) return c;
  if (use_fast(path, n - 1)) return cached(g_cheb_to_leg, g_fast_mutex, n).apply(c);
  return chebyshev_to_legendre_matrix(n) * c;
}

Eigen::VectorXd synthesis(const Eigen::VectorXd& coeffs, int q, TransformPath path) {
  if (q < 1) throw std::invalid_argument("synthesis: need q >= 1");
  const int n = static_cast<int>(coeffs.size());
  if (use_fast(path, n - 1)) return chebyshev_to_values(legendre_to_chebyshev(coeffs, TransformPath::Fast), q);
  // Clenshaw: P_{k+1} = alpha_k(x) P_k + beta_k P_{k-1}, alpha_k = (2k+1)x/(k+1), beta_k = -k/(k+1)
  const VectorXd x = chebyshev_points(q);
  VectorXd v(q);
  for (int i = 0; i < q; ++i) {
    double b1 = 0.0, b2 = 0.0;
    for (int k = n - 1; k >= 1; --k) {
      const double alpha = (2.0 * k + 1) * x(i) / (k + 1.0);
      const double beta = -(k + 1.0) / (k + 2.0);
      const double b0 = coeffs(k) + alpha * b1 + beta * b2;
      b2 = b1;
      b1 = b0;
    }
    // P_1 = x, beta_0 = -1/2
    v(i) = n == 0 ? 0.0 : coeffs(0) + x(i) * b1 - 0.5 * b2;
  }
  return v;
}

CellExpansion analysis(const Eigen::VectorXd& values, TransformPath path) {
  const int q = static_cast<int>(values.size());
  if (q < 1) throw std::invalid_argument("analysis: empty sample set");
  CellExpansion e;
  if (use_fast(path, q - 1))
    e.coeffs = chebyshev_to_legendre(values_to_chebyshev(values), TransformPath::Fast);
  else
    e.coeffs = analysis_matrix(q) * values;
  return e;
}

const Eigen::MatrixXd& analysis_matrix(int q) { return dense_cached(g_analysis_dense, q, &build_analysis); }

Eigen::MatrixXd synthesis_matrix(int n, int q) {
  const VectorXd x = chebyshev_points(q);
  MatrixXd s(q, n);
  for (int k = 0; k < q; ++k) {
    if (n > 0) s.row(k) = legendre_all(n - 1, x(k)).transpose();
  }
  return s;
}

}  // namespace hpg
