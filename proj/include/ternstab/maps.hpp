#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ternstab/algebra.hpp"

namespace ternstab {

/// The two Hyers dilation operators: J f(x) = f(3x)/3 (expand, for exponents
/// below 1) and J f(x) = 3 f(x/3) (contract, for exponents above 1).
enum class DilationMode { kExpand, kContract };

std::string to_string(DilationMode mode);
DilationMode dilation_mode_from_string(const std::string& text);

/// Raised when evaluating an expression tree produces non-finite values;
/// carries a description of the offending subtree.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& subtree)
      : std::runtime_error("evaluation produced non-finite values in " + subtree),
        subtree_(subtree) {}
  const std::string& subtree() const { return subtree_; }

 private:
  std::string subtree_;
};

/// A map A -> A evaluable at arbitrary points, represented as an immutable
/// expression tree. Every constructor sends 0 to 0; iterates are kept lazy so
/// that evaluation happens at the exact dilated points 3^n x.
class EvaluableMap {
 public:
  enum class Kind { kInnerDerivation, kPowerPerturbation, kSum, kDilationIterate, kScalarMultiple };

  /// x -> m*x - x*m; an exact ternary derivation of the matrix algebra.
  static EvaluableMap inner_derivation(Element m);

  /// x -> amplitude * ||x||^exponent * direction for x != 0, and 0 -> 0.
  /// The direction is rescaled to unit operator norm.
  static EvaluableMap power_perturbation(double amplitude, double exponent, Element direction);

  static EvaluableMap sum(EvaluableMap lhs, EvaluableMap rhs);

  /// x -> 3^-n base(3^n x) (expand) or x -> 3^n base(x / 3^n) (contract).
  static EvaluableMap dilation_iterate(EvaluableMap base, int steps, DilationMode mode);

  static EvaluableMap scalar_multiple(Complex lambda, EvaluableMap base);

  Element operator()(const Element& x) const;

  Eigen::Index dimension() const;
  Kind kind() const;
  /// Steps of the root dilation node; 0 for any other root.
  int dilation_steps() const;
  DilationMode dilation_mode() const;

  /// One more dilation step. A dilation root of the same mode is deepened in
  /// place, so n applications starting from f yield dilation_iterate(f, n).
  EvaluableMap dilate_once(DilationMode mode) const;

  std::string describe() const;

  struct Node;

 private:
  explicit EvaluableMap(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

using MapFn = std::function<Element(const Element&)>;

inline MapFn as_fn(const EvaluableMap& map) {
  return [map](const Element& x) { return map(x); };
}

/// Power-type control function theta * sum_i ||x_i||^p over `arity` slots
/// (6 for the full derivation premise, 4 for the Jordan one), with the
/// convention ||0||^p = 0 for every p.
class ControlFunction {
 public:
  ControlFunction(double theta, double exponent, int arity, DilationMode mode_hint);

  double theta() const { return theta_; }
  double exponent() const { return exponent_; }
  int arity() const { return arity_; }
  DilationMode mode_hint() const { return mode_hint_; }

  double operator()(std::span<const Element> args) const;
  /// phi(x, 0, ..., 0) = theta * ||x||^p.
  double first_slot(const Element& x) const;
  /// phi(x, y, z, 0, ...) — the Jensen-premise slots.
  double jensen_slots(const Element& x, const Element& y, const Element& z) const;
  /// phi(0, 0, 0, a, b, c) for arity 6, phi(0, 0, 0, a) for arity 4.
  double bracket_slots(std::span<const Element> args) const;

  /// Least L with phi <= 3 L phi(./3) (expand: L = 3^{p-1}) or
  /// phi <= (L/3) phi(3.) (contract: L = 3^{1-p}).
  double contraction_constant() const;

 private:
  double theta_;
  double exponent_;
  int arity_;
  DilationMode mode_hint_;
};

struct ProbeConfig {
  std::uint64_t seed = 7;
  int element_count = 16;
  double r_min = 0.25;
  double r_max = 2.0;
  int mu_count = 8;

  void validate() const;
};

/// Seeded finite sample of algebra elements (norms log-spaced in
/// [r_min, r_max], never zero), unit-circle scalars (roots of unity plus
/// 1, i, -1), complex scalars for linearity probes, and deterministic index
/// triples used by premise and residual estimators.
class ProbeSet {
 public:
  ProbeSet(Eigen::Index k, const ProbeConfig& config);
  /// Explicit probe set for controlled experiments and oracle tests.
  ProbeSet(std::vector<Element> elements, std::vector<Complex> unit_scalars,
           std::vector<Complex> complex_scalars);

  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Complex>& unit_scalars() const { return unit_scalars_; }
  const std::vector<Complex>& complex_scalars() const { return complex_scalars_; }
  const std::vector<std::array<int, 3>>& triples() const { return triples_; }

  Eigen::Index dimension() const { return dimension_; }
  std::uint64_t seed() const { return seed_; }

 private:
  void build_triples();

  std::vector<Element> elements_;
  std::vector<Complex> unit_scalars_;
  std::vector<Complex> complex_scalars_;
  std::vector<std::array<int, 3>> triples_;
  Eigen::Index dimension_ = 0;
  std::uint64_t seed_ = 0;
};

inline constexpr double kDefaultRatioCap = 1e12;

/// Probe estimate of the generalized metric d(h, g) = inf{C :
/// ||g(x) - h(x)|| <= C phi(x, 0, ..., 0) for all x}: the supremum of the
/// ratio over probe elements, a certified lower bound of the true infimum.
/// Ratios beyond ratio_cap report the metric's infinite branch as +inf.
double generalized_distance(const MapFn& h, const MapFn& g, const ControlFunction& phi,
                            const ProbeSet& probes, double ratio_cap = kDefaultRatioCap);

double generalized_distance(const EvaluableMap& h, const EvaluableMap& g,
                            const ControlFunction& phi, const ProbeSet& probes,
                            double ratio_cap = kDefaultRatioCap);

}  // namespace ternstab
