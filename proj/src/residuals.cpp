#include "ternstab/residuals.hpp"

#include <cmath>

namespace ternstab {

namespace {

void fold(ResidualPair& acc, double defect, double scale) {
  acc.raw = std::max(acc.raw, defect);
  acc.normalized = std::max(acc.normalized, defect / (1.0 + scale));
}

}  // namespace

ResidualPair jensen_residual(const MapFn& map, const ProbeSet& probes) {
  ResidualPair out;
  const auto& elements = probes.elements();
  for (const auto& [ix, iy, iz] : probes.triples()) {
    const Element& x = elements[ix];
    const Element& y = elements[iy];
    const Element& z = elements[iz];
    const Element dw = map(Element((x + y + z) / 3.0));
    const Element dt = map(Element((x - 2.0 * y + z) / 3.0));
    const Element ds = map(Element((x + y - 2.0 * z) / 3.0));
    const double scale = operator_norm(x) + operator_norm(y) + operator_norm(z);
    for (Complex mu : probes.unit_scalars()) {
      double defect = operator_norm(Element(mu * (dw + dt + ds) - map(Element(mu * x))));
      fold(out, defect, scale);
    }
  }
  return out;
}

SubstitutionReport substitution_check(const MapFn& map, const ProbeSet& probes) {
  SubstitutionReport report;
  const auto& elements = probes.elements();
  for (const auto& [ix, iy, iz] : probes.triples()) {
    const Element& x = elements[ix];
    const Element& y = elements[iy];
    const Element& z = elements[iz];

    // Additivity defect with (w, t, s) drawn directly from the probe triple.
    double defect = operator_norm(
        Element(map(Element(x + y + z)) - map(x) - map(y) - map(z)));
    fold(report.additivity, defect,
         operator_norm(x) + operator_norm(y) + operator_norm(z));

    // Change-of-variables algebra: the y and z coefficients of w + t + s are
    // (1 - 2 + 1)/3 and (1 + 1 - 2)/3, so the sum must reconstruct x.
    const Element w = (x + y + z) / 3.0;
    const Element t = (x - 2.0 * y + z) / 3.0;
    const Element s = (x + y - 2.0 * z) / 3.0;
    const Element recon = w + t + s;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        double entry_scale =
            1.0 + std::abs(x(r, c)) + 2.0 * std::abs(y(r, c)) + 2.0 * std::abs(z(r, c));
        double err = std::abs(recon(r, c) - x(r, c)) / entry_scale;
        report.max_reconstruction_error = std::max(report.max_reconstruction_error, err);
      }
  }
  report.reconstruction_ok = report.max_reconstruction_error <= 1e-15;
  return report;
}

ResidualPair homogeneity_T_residual(const MapFn& map, const ProbeSet& probes) {
  ResidualPair out;
  for (const Element& x : probes.elements()) {
    const Element dx = map(x);
    const double scale = operator_norm(x);
    for (Complex mu : probes.unit_scalars()) {
      double defect = operator_norm(Element(map(Element(mu * x)) - mu * dx));
      fold(out, defect, scale);
    }
  }
  return out;
}

ResidualPair homogeneity_C_residual(const MapFn& map, const ProbeSet& probes) {
  ResidualPair out;
  for (const Element& x : probes.elements()) {
    const Element dx = map(x);
    const double norm_x = operator_norm(x);
    for (Complex lambda : probes.complex_scalars()) {
      double defect = operator_norm(Element(map(Element(lambda * x)) - lambda * dx));
      fold(out, defect, (1.0 + std::abs(lambda)) * norm_x);
    }
  }
  return out;
}

namespace {

ResidualPair derivation_defect_over(const MapFn& map, const ProbeSet& probes,
                                    bool diagonal_only) {
  ResidualPair out;
  const auto& elements = probes.elements();
  for (const auto& [ix, iy, iz] : probes.triples()) {
    if (diagonal_only && (ix != iy || iy != iz)) continue;
    const Element& x = elements[ix];
    const Element& y = elements[iy];
    const Element& z = elements[iz];
    Element lhs = map(ternary_product(x, y, z)) - ternary_product(map(x), y, z) -
                  ternary_product(x, map(y), z) - ternary_product(x, y, map(z));
    fold(out, operator_norm(lhs), operator_norm(x) + operator_norm(y) + operator_norm(z));
  }
  return out;
}

}  // namespace

ResidualPair derivation_residual(const MapFn& map, const ProbeSet& probes) {
  return derivation_defect_over(map, probes, false);
}

ResidualPair jordan_residual(const MapFn& map, const ProbeSet& probes) {
  return derivation_defect_over(map, probes, true);
}

ResidualReport compute_residual_report(const MapFn& map, const ProbeSet& probes) {
  ResidualReport report;
  report.jensen = jensen_residual(map, probes);
  report.additivity = substitution_check(map, probes).additivity;
  report.homogeneity_T = homogeneity_T_residual(map, probes);
  report.homogeneity_C = homogeneity_C_residual(map, probes);
  report.derivation = derivation_residual(map, probes);
  report.jordan = jordan_residual(map, probes);
  return report;
}

}  // namespace ternstab
