#include "ternstab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace ternstab {

std::string to_string(DilationMode mode) {
  return mode == DilationMode::kExpand ? "expand" : "contract";
}

DilationMode dilation_mode_from_string(const std::string& text) {
  if (text == "expand") return DilationMode::kExpand;
  if (text == "contract") return DilationMode::kContract;
  throw std::invalid_argument("stabilizer.mode must be 'expand' or 'contract', got '" + text + "'");
}

struct EvaluableMap::Node {
  virtual ~Node() = default;
  virtual Element eval(const Element& x) const = 0;
  virtual Eigen::Index dimension() const = 0;
  virtual std::string describe() const = 0;
  virtual Kind kind() const = 0;

  Element checked_eval(const Element& x) const {
    Element out = eval(x);
    if (!out.allFinite()) throw EvaluationError(describe());
    return out;
  }
};

namespace {

using Node = EvaluableMap::Node;
using Kind = EvaluableMap::Kind;

struct InnerDerivationNode final : Node {
  Element m;
  explicit InnerDerivationNode(Element m_in) : m(std::move(m_in)) {}
  Element eval(const Element& x) const override { return m * x - x * m; }
  Eigen::Index dimension() const override { return m.rows(); }
  std::string describe() const override { return "inner_derivation"; }
  Kind kind() const override { return Kind::kInnerDerivation; }
};

struct PowerPerturbationNode final : Node {
  double amplitude;
  double exponent;
  Element direction;
  PowerPerturbationNode(double a, double p, Element u)
      : amplitude(a), exponent(p), direction(std::move(u)) {}
  Element eval(const Element& x) const override {
    if (x.isZero(0.0)) return Element::Zero(direction.rows(), direction.cols());
    double r = operator_norm(x);
    return (amplitude * std::pow(r, exponent)) * direction;
  }
  Eigen::Index dimension() const override { return direction.rows(); }
  std::string describe() const override {
    return "power_perturbation(amplitude=" + std::to_string(amplitude) +
           ", exponent=" + std::to_string(exponent) + ")";
  }
  Kind kind() const override { return Kind::kPowerPerturbation; }
};

struct SumNode final : Node {
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  SumNode(std::shared_ptr<const Node> l, std::shared_ptr<const Node> r)
      : lhs(std::move(l)), rhs(std::move(r)) {}
  Element eval(const Element& x) const override {
    return lhs->checked_eval(x) + rhs->checked_eval(x);
  }
  Eigen::Index dimension() const override { return lhs->dimension(); }
  std::string describe() const override {
    return "sum(" + lhs->describe() + ", " + rhs->describe() + ")";
  }
  Kind kind() const override { return Kind::kSum; }
};

struct DilationNode final : Node {
  std::shared_ptr<const Node> base;
  int steps;
  DilationMode mode;
  DilationNode(std::shared_ptr<const Node> b, int n, DilationMode m)
      : base(std::move(b)), steps(n), mode(m) {}
  Element eval(const Element& x) const override {
    if (steps == 0) return base->checked_eval(x);
    const double dilation = std::pow(3.0, steps);
    if (mode == DilationMode::kExpand) return base->checked_eval(dilation * x) / dilation;
    return dilation * base->checked_eval(x / dilation);
  }
  Eigen::Index dimension() const override { return base->dimension(); }
  std::string describe() const override {
    return "dilation_iterate(n=" + std::to_string(steps) + ", " + to_string(mode) + ", " +
           base->describe() + ")";
  }
  Kind kind() const override { return Kind::kDilationIterate; }
};

struct ScalarMultipleNode final : Node {
  Complex lambda;
  std::shared_ptr<const Node> base;
  ScalarMultipleNode(Complex l, std::shared_ptr<const Node> b) : lambda(l), base(std::move(b)) {}
  Element eval(const Element& x) const override { return lambda * base->checked_eval(x); }
  Eigen::Index dimension() const override { return base->dimension(); }
  std::string describe() const override { return "scalar_multiple(" + base->describe() + ")"; }
  Kind kind() const override { return Kind::kScalarMultiple; }
};

std::shared_ptr<const Node> require_node(const std::shared_ptr<const Node>& node) {
  if (!node) throw std::invalid_argument("EvaluableMap: empty expression");
  return node;
}

}  // namespace

EvaluableMap EvaluableMap::inner_derivation(Element m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("inner_derivation: m must be square and non-empty");
  if (!m.allFinite()) throw std::invalid_argument("inner_derivation: non-finite entries");
  return EvaluableMap(std::make_shared<InnerDerivationNode>(std::move(m)));
}

EvaluableMap EvaluableMap::power_perturbation(double amplitude, double exponent,
                                              Element direction) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("power_perturbation: amplitude must be finite and >= 0");
  if (!std::isfinite(exponent))
    throw std::invalid_argument("power_perturbation: exponent must be finite");
  if (direction.rows() != direction.cols() || direction.rows() < 1)
    throw std::invalid_argument("power_perturbation: direction must be square and non-empty");
  double norm = operator_norm(direction);
  if (!(norm > 0.0))
    throw std::invalid_argument("power_perturbation: direction must be nonzero");
  Element unit = direction / norm;
  return EvaluableMap(std::make_shared<PowerPerturbationNode>(amplitude, exponent, std::move(unit)));
}

EvaluableMap EvaluableMap::sum(EvaluableMap lhs, EvaluableMap rhs) {
  auto l = require_node(lhs.node_);
  auto r = require_node(rhs.node_);
  if (l->dimension() != r->dimension())
    throw std::invalid_argument("sum: dimension mismatch between summands");
  return EvaluableMap(std::make_shared<SumNode>(std::move(l), std::move(r)));
}

EvaluableMap EvaluableMap::dilation_iterate(EvaluableMap base, int steps, DilationMode mode) {
  if (steps < 0) throw std::invalid_argument("dilation_iterate: steps must be >= 0");
  return EvaluableMap(std::make_shared<DilationNode>(require_node(base.node_), steps, mode));
}

EvaluableMap EvaluableMap::scalar_multiple(Complex lambda, EvaluableMap base) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
    throw std::invalid_argument("scalar_multiple: non-finite scalar");
  return EvaluableMap(std::make_shared<ScalarMultipleNode>(lambda, require_node(base.node_)));
}

Element EvaluableMap::operator()(const Element& x) const {
  if (!x.allFinite()) throw std::invalid_argument("EvaluableMap: non-finite argument");
  if (x.rows() != dimension() || x.cols() != dimension())
    throw std::invalid_argument("EvaluableMap: argument dimension mismatch");
  return node_->checked_eval(x);
}

Eigen::Index EvaluableMap::dimension() const { return node_->dimension(); }

EvaluableMap::Kind EvaluableMap::kind() const { return node_->kind(); }

int EvaluableMap::dilation_steps() const {
  if (auto* d = dynamic_cast<const DilationNode*>(node_.get())) return d->steps;
  return 0;
}

DilationMode EvaluableMap::dilation_mode() const {
  if (auto* d = dynamic_cast<const DilationNode*>(node_.get())) return d->mode;
  throw std::logic_error("dilation_mode: root is not a dilation iterate");
}

EvaluableMap EvaluableMap::dilate_once(DilationMode mode) const {
  if (auto* d = dynamic_cast<const DilationNode*>(node_.get()); d && d->mode == mode)
    return EvaluableMap(std::make_shared<DilationNode>(d->base, d->steps + 1, mode));
  return EvaluableMap(std::make_shared<DilationNode>(node_, 1, mode));
}

std::string EvaluableMap::describe() const { return node_->describe(); }

ControlFunction::ControlFunction(double theta, double exponent, int arity, DilationMode mode_hint)
    : theta_(theta), exponent_(exponent), arity_(arity), mode_hint_(mode_hint) {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("control.theta must be finite and >= 0");
  if (!std::isfinite(exponent)) throw std::invalid_argument("control exponent must be finite");
  if (arity != 4 && arity != 6) throw std::invalid_argument("control.arity must be 4 or 6");
  if (mode_hint == DilationMode::kExpand && !(exponent < 1.0))
    throw std::invalid_argument(
        "mode/exponent inconsistency: expand mode requires p < 1 (contraction constant 3^(p-1))");
  if (mode_hint == DilationMode::kContract && !(exponent > 1.0))
    throw std::invalid_argument(
        "mode/exponent inconsistency: contract mode requires p > 1 (contraction constant 3^(1-p))");
}

namespace {
double power_term(const Element& x, double exponent) {
  if (x.isZero(0.0)) return 0.0;  // ||0||^p = 0 for every p
  return std::pow(operator_norm(x), exponent);
}
}  // namespace

double ControlFunction::operator()(std::span<const Element> args) const {
  if (int(args.size()) > arity_)
    throw std::invalid_argument("ControlFunction: more arguments than arity");
  double sum = 0.0;
  for (const Element& a : args) sum += power_term(a, exponent_);
  return theta_ * sum;
}

double ControlFunction::first_slot(const Element& x) const {
  return theta_ * power_term(x, exponent_);
}

double ControlFunction::jensen_slots(const Element& x, const Element& y, const Element& z) const {
  return theta_ * (power_term(x, exponent_) + power_term(y, exponent_) + power_term(z, exponent_));
}

double ControlFunction::bracket_slots(std::span<const Element> args) const {
  const std::size_t slots = arity_ == 6 ? 3 : 1;
  if (args.size() != slots)
    throw std::invalid_argument("ControlFunction: bracket slot count must match arity");
  double sum = 0.0;
  for (const Element& a : args) sum += power_term(a, exponent_);
  return theta_ * sum;
}

double ControlFunction::contraction_constant() const {
  return mode_hint_ == DilationMode::kExpand ? std::pow(3.0, exponent_ - 1.0)
                                             : std::pow(3.0, 1.0 - exponent_);
}

void ProbeConfig::validate() const {
  if (element_count < 1) throw std::invalid_argument("probes.element_count must be >= 1");
  if (!(r_min > 0.0)) throw std::invalid_argument("probes.r_min must be > 0");
  if (!(r_max >= r_min)) throw std::invalid_argument("probes.r_max must be >= probes.r_min");
  if (mu_count < 1) throw std::invalid_argument("probes.mu_count must be >= 1");
}

namespace {

Complex snap_unit(Complex mu) {
  static const Complex anchors[] = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  for (Complex a : anchors)
    if (std::abs(mu - a) < 1e-9) return a;
  return mu;
}

bool contains_scalar(const std::vector<Complex>& list, Complex v) {
  return std::any_of(list.begin(), list.end(),
                     [v](Complex w) { return std::abs(w - v) < 1e-12; });
}

}  // namespace

ProbeSet::ProbeSet(Eigen::Index k, const ProbeConfig& config) : seed_(config.seed) {
  config.validate();
  if (k < 1) throw std::invalid_argument("ProbeSet: k must be >= 1");
  dimension_ = k;

  const int n = config.element_count;
  elements_.reserve(n);
  for (int i = 0; i < n; ++i) {
    double t = n == 1 ? 0.5 : double(i) / double(n - 1);
    double radius = config.r_min * std::pow(config.r_max / config.r_min, t);
    elements_.push_back(random_element(detail::mix_seed(config.seed, 0x9000 + i), radius, k));
  }

  for (int j = 0; j < config.mu_count; ++j) {
    double angle = 2.0 * std::numbers::pi * double(j) / double(config.mu_count);
    Complex mu = snap_unit(std::polar(1.0, angle));
    if (!contains_scalar(unit_scalars_, mu)) unit_scalars_.push_back(mu);
  }
  for (Complex required : {Complex(1, 0), Complex(0, 1), Complex(-1, 0)})
    if (!contains_scalar(unit_scalars_, required)) unit_scalars_.push_back(required);

  std::mt19937_64 gen(detail::mix_seed(config.seed, 0xCAFE));
  const int lambda_count = std::max(config.mu_count, 4);
  for (int j = 0; j < lambda_count; ++j) {
    double t = lambda_count == 1 ? 0.5 : double(j) / double(lambda_count - 1);
    double modulus = 0.5 * std::pow(4.0, t);  // log-spaced moduli in [0.5, 2]
    double angle = 2.0 * std::numbers::pi * (double(gen() >> 11) * 0x1.0p-53);
    complex_scalars_.push_back(std::polar(modulus, angle));
  }

  build_triples();
}

ProbeSet::ProbeSet(std::vector<Element> elements, std::vector<Complex> unit_scalars,
                   std::vector<Complex> complex_scalars)
    : elements_(std::move(elements)),
      unit_scalars_(std::move(unit_scalars)),
      complex_scalars_(std::move(complex_scalars)) {
  if (elements_.empty()) throw std::invalid_argument("ProbeSet: empty element list");
  dimension_ = elements_.front().rows();
  for (const Element& e : elements_) {
    if (e.rows() != dimension_ || e.cols() != dimension_)
      throw std::invalid_argument("ProbeSet: mixed element dimensions");
    if (e.isZero(0.0)) throw std::invalid_argument("ProbeSet: zero is never a probe");
  }
  if (unit_scalars_.empty()) unit_scalars_.push_back(Complex(1, 0));
  if (complex_scalars_.empty()) complex_scalars_.push_back(Complex(1, 0));
  build_triples();
}

void ProbeSet::build_triples() {
  const int n = int(elements_.size());
  std::set<std::array<int, 3>> seen;
  auto push = [&](int i, int j, int l) {
    std::array<int, 3> t{i, j, l};
    if (seen.insert(t).second) triples_.push_back(t);
  };
  for (int i = 0; i < n; ++i) push(i, i, i);
  for (int shift = 1; shift <= 3; ++shift)
    for (int i = 0; i < n; ++i) push(i, (i + shift) % n, (i + 2 * shift) % n);
}

namespace {

double distance_impl(const MapFn& h, const MapFn& g, const ControlFunction& phi,
                     const ProbeSet& probes, double ratio_cap) {
  if (probes.elements().empty())
    throw std::invalid_argument("generalized_distance: empty probe set");
  double sup = 0.0;
  for (const Element& x : probes.elements()) {
    double denom = phi.first_slot(x);
    if (!(denom > 0.0))
      throw std::invalid_argument(
          "generalized_distance: phi(x, 0, ...) must be positive at every probe");
    double ratio = operator_norm(Element(g(x) - h(x))) / denom;
    if (ratio > ratio_cap) return std::numeric_limits<double>::infinity();
    sup = std::max(sup, ratio);
  }
  return sup;
}

}  // namespace

double generalized_distance(const MapFn& h, const MapFn& g, const ControlFunction& phi,
                            const ProbeSet& probes, double ratio_cap) {
  return distance_impl(h, g, phi, probes, ratio_cap);
}

double generalized_distance(const EvaluableMap& h, const EvaluableMap& g,
                            const ControlFunction& phi, const ProbeSet& probes,
                            double ratio_cap) {
  return distance_impl(as_fn(h), as_fn(g), phi, probes, ratio_cap);
}

}  // namespace ternstab
