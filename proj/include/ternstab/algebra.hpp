#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

// Finite-dimensional ternary Banach algebra of k x k complex matrices with
// the associative triple product [abc] = a*b*c and the operator norm
// (largest singular value). The module X coincides with the algebra, so all
// five bracket-compatibility chains reduce to associativity.

namespace ternstab {

using Complex = std::complex<double>;
using Element = Eigen::MatrixXcd;

inline constexpr std::string_view kProductRule = "matrix-triple-product";
inline constexpr std::string_view kNormRule = "operator-norm-sigma-max";

struct AlgebraDescriptor {
  Eigen::Index matrix_size = 2;
  double norm_tolerance = 1e-10;

  void validate() const {
    if (matrix_size < 1) throw std::invalid_argument("algebra.k must be >= 1");
    if (!(norm_tolerance > 0.0) || !std::isfinite(norm_tolerance))
      throw std::invalid_argument("algebra.norm_tolerance must be positive and finite");
  }
};

namespace detail {

inline void require_square_same(const Element& a, const Element& b, const char* op) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

// splitmix64; used to derive independent sub-seeds from (seed, salt) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

template <typename DerivedA, typename DerivedB>
Element add(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("add: dimension mismatch");
  return a + b;
}

template <typename Derived>
Element scale(Complex lambda, const Eigen::MatrixBase<Derived>& a) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
    throw std::invalid_argument("scale: non-finite scalar");
  return lambda * a;
}

/// Triple product [abc] = a*b*c (left-associated).
template <typename DerivedA, typename DerivedB, typename DerivedC>
Element ternary_product(const Eigen::MatrixBase<DerivedA>& a,
                        const Eigen::MatrixBase<DerivedB>& b,
                        const Eigen::MatrixBase<DerivedC>& c) {
  detail::require_square_same(a.derived(), b.derived(), "ternary_product");
  detail::require_square_same(b.derived(), c.derived(), "ternary_product");
  Element ab = a * b;
  return ab * c;
}

/// Largest singular value of `a` estimated by power iteration on a^H a.
/// Serves as the fallback route when the eigensolver does not converge.
inline double power_iteration_norm(const Element& a, int max_iterations = 200,
                                   double tolerance = 1e-14) {
  const Eigen::Index k = a.cols();
  Element h = a.adjoint() * a;
  Eigen::VectorXcd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v(i) = Complex(1.0 + double(i) / double(k), 0.3 * double(i + 1));
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXcd w = h * v;
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    double next = std::real(v.dot(w));
    v = w / nw;
    if (it > 0 && std::abs(next - lambda) <= tolerance * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

/// Operator norm: largest singular value, computed as sqrt of the top
/// eigenvalue of a^H a. The Gram matrix of -a equals that of a bit for bit,
/// so norms of negated differences are identical — generalized distances
/// built on this norm are exactly symmetric.
template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& a) {
  const Element m = a;
  if (!m.allFinite()) throw std::invalid_argument("operator_norm: non-finite entries");
  if (m.size() == 0) throw std::invalid_argument("operator_norm: empty element");
  Element h = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Element> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) return power_iteration_norm(m);
  double top = solver.eigenvalues().maxCoeff();
  return std::sqrt(std::max(top, 0.0));
}

namespace detail {

// mt19937_64 is fully specified by the standard; the gaussian transform is
// spelled out because std::normal_distribution's algorithm is
// implementation-defined and the draws must be reproducible everywhere.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return double(gen_() >> 11) * 0x1.0p-53 ; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace detail

/// Deterministic seeded element with operator norm equal to target_norm
/// (one rescale of a gaussian draw). Degenerate draws are resampled with an
/// incremented sub-seed; after 8 failures the call gives up.
inline Element random_element(std::uint64_t seed, double target_norm, Eigen::Index k) {
  if (!(target_norm > 0.0) || !std::isfinite(target_norm))
    throw std::invalid_argument("random_element: target_norm must be positive and finite");
  if (k < 1) throw std::invalid_argument("random_element: k must be >= 1");
  constexpr double kNormFloor = 1e-8;
  constexpr int kRetryBudget = 8;
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    detail::GaussianStream stream(detail::mix_seed(seed, std::uint64_t(attempt)));
    Element raw(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) {
        double re = stream.gaussian();
        double im = stream.gaussian();
        raw(i, j) = Complex(re, im);
      }
    double norm = operator_norm(raw);
    if (norm < kNormFloor) continue;
    return (target_norm / norm) * raw;
  }
  throw std::runtime_error("random_element: degenerate draws exhausted the retry budget");
}

/// Seeded element with small integer real/imag entries in [-amplitude,
/// amplitude]. Products of a handful of these are exact in double precision
/// regardless of association order, which makes bracket identities testable
/// as bitwise equalities.
inline Element random_integer_element(std::uint64_t seed, Eigen::Index k, int amplitude = 3) {
  if (k < 1) throw std::invalid_argument("random_integer_element: k must be >= 1");
  if (amplitude < 1) throw std::invalid_argument("random_integer_element: amplitude must be >= 1");
  std::mt19937_64 gen(detail::mix_seed(seed, 0x17eULL));
  const std::uint64_t span = std::uint64_t(2 * amplitude + 1);
  Element out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      double re = double(gen() % span) - amplitude;
      double im = double(gen() % span) - amplitude;
      out(i, j) = Complex(re, im);
    }
  return out;
}

}  // namespace ternstab
