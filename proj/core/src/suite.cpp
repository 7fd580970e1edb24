#include "qkverify/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>

#include "qkverify/ck_forms.hpp"
#include "qkverify/hpn_geometry.hpp"
#include "qkverify/quat_algebra.hpp"
#include "qkverify/sampling.hpp"
#include "qkverify/twistor.hpp"

namespace qk::report {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using algebra::TwoForm;
using geometry::HpnGeometry;
using geometry::KillingField;
using twistor::TwistorSpace;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Negative controls report threshold / observed, so they pass at ratio <= 1.
constexpr double kControlTolerance = 1.0;
constexpr double kControlThreshold = 1e-2;
constexpr double kWitnessThreshold = 1e-3;
constexpr double kObataControlThreshold = 1e-1;

struct Outcome {
  double max_residual = 0.0;
  int samples_used = 0;
  std::optional<double> value;

  void add(double r) {
    ++samples_used;
    if (std::isnan(r) || std::isnan(max_residual))
      max_residual = kNaN;
    else
      max_residual = std::max(max_residual, r);
  }
};

class Context {
 public:
  explicit Context(const SuiteConfig& c) : config(c) {}

  const SuiteConfig& config;

  const HpnGeometry& geo() {
    if (!geo_) geo_ = std::make_unique<HpnGeometry>(config.n, FdConfig{config.fd_step, false});
    return *geo_;
  }
  const TwistorSpace& twistor() {
    if (!twistor_) twistor_ = std::make_unique<TwistorSpace>(geo(), FdConfig{config.twistor_fd_step, false});
    return *twistor_;
  }
  const std::vector<KillingField>& basis() {
    if (basis_.empty()) basis_ = geometry::killing_basis(config.n);
    return basis_;
  }
  int dim() const { return 4 * config.n; }
  int samples() const { return config.samples; }
  /// A fraction of the sample budget for the expensive evaluators, at least one.
  int budget(int divisor) const { return std::max(1, (config.samples + divisor - 1) / divisor); }

 private:
  std::unique_ptr<HpnGeometry> geo_;
  std::unique_ptr<TwistorSpace> twistor_;
  std::vector<KillingField> basis_;
};

using CheckFn = std::function<Outcome(Context&, Rng&)>;

struct Entry {
  CheckInfo info;
  CheckFn run;
};

// ---------------------------------------------------------------------------
// sampling helpers

TwoForm random_form(Rng& rng, int d) { return TwoForm::skew_part(sample_gaussian(rng, d, d)); }

Vec3 sample_fiber(Rng& rng) {
  // Keep away from the stereographic pole.
  while (true) {
    Vec3 a = sample_unit_vector(rng, 3);
    if (a(2) <= 0.5) return a;
  }
}

Vec3 unit_orthogonal(Rng& rng, const Vec3& a) {
  while (true) {
    Vec3 v = sample_unit_vector(rng, 3);
    v -= v.dot(a) * a;
    if (v.norm() > 1e-3) return v.normalized();
  }
}

Vec sample_twistor_point(Context& ctx, Rng& rng) {
  const Vec x = sample_ball(rng, ctx.dim());
  return ctx.twistor().to_coordinates(twistor::TwistorPoint::make(x, sample_fiber(rng)));
}

// Unit horizontal or vertical tangent vector (twistor coordinates).
Vec unit_twistor_vector(Context& ctx, Rng& rng, const twistor::LocalData& L, bool vertical) {
  const TwistorSpace& Z = ctx.twistor();
  Vec v = vertical ? Z.vertical_vector(L, unit_orthogonal(rng, L.a))
                   : Z.horizontal_lift(L, sample_unit_vector(rng, ctx.dim()));
  return v / Z.norm(L.z, v);
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// algebra

int form_count(const Context& ctx) { return 10 * ctx.samples(); }

Outcome decomposition_idempotence(Context& ctx, Rng& rng) {
  const auto S = algebra::standard_structure(ctx.config.n);
  Outcome out;
  for (int s = 0; s < form_count(ctx); ++s) {
    const auto parts = algebra::decompose(random_form(rng, ctx.dim()), S);
    const auto h = algebra::decompose(parts.s2h, S);
    const auto e = algebra::decompose(parts.s2e, S);
    const auto r = algebra::decompose(parts.rest, S);
    out.add(std::max({max_abs(h.s2h.matrix() - parts.s2h.matrix()), h.s2e.max_abs(), h.rest.max_abs(),
                      max_abs(e.s2e.matrix() - parts.s2e.matrix()), e.s2h.max_abs(), e.rest.max_abs(),
                      max_abs(r.rest.matrix() - parts.rest.matrix()), r.s2h.max_abs(), r.s2e.max_abs()}));
  }
  return out;
}

Outcome decomposition_orthogonality(Context& ctx, Rng& rng) {
  const auto S = algebra::standard_structure(ctx.config.n);
  Outcome out;
  for (int s = 0; s < form_count(ctx); ++s) {
    const auto p = algebra::decompose(random_form(rng, ctx.dim()), S);
    out.add(std::max({std::abs(algebra::form_inner(S, p.s2h, p.s2e)), std::abs(algebra::form_inner(S, p.s2h, p.rest)),
                      std::abs(algebra::form_inner(S, p.s2e, p.rest))}));
  }
  return out;
}

Outcome decomposition_completeness(Context& ctx, Rng& rng) {
  const auto S = algebra::standard_structure(ctx.config.n);
  Outcome out;
  for (int s = 0; s < form_count(ctx); ++s) {
    const TwoForm psi = random_form(rng, ctx.dim());
    const auto p = algebra::decompose(psi, S);
    out.add(max_abs(p.s2h.matrix() + p.s2e.matrix() + p.rest.matrix() - psi.matrix()));
  }
  return out;
}

Outcome decomposable_formulas(Context& ctx, Rng& rng) {
  const auto S = algebra::standard_structure(ctx.config.n);
  Outcome out;
  for (int s = 0; s < form_count(ctx); ++s) {
    const Vec X = sample_gaussian(rng, ctx.dim());
    const Vec Y = sample_gaussian(rng, ctx.dim());
    const auto p = algebra::decompose(algebra::wedge(S, X, Y), S);
    const auto [h, e] = algebra::project_decomposable(X, Y, S);
    out.add(std::max(max_abs(p.s2h.matrix() - h.matrix()), max_abs(p.s2e.matrix() - e.matrix())));
  }
  return out;
}

// q(R) on one summand: |q(R) psi - c psi| with the measured Rayleigh quotient as value.
Outcome qr_constant(Context& ctx, Rng& rng, bool s2h) {
  const int n = ctx.config.n;
  const auto S = algebra::standard_structure(n);
  const auto R = algebra::model_curvature(S, 1.0);
  const double expected = s2h ? 4.0 : 2.0 * (n + 2);
  Outcome out;
  for (int s = 0; s < form_count(ctx); ++s) {
    const auto p = algebra::decompose(random_form(rng, ctx.dim()), S);
    const TwoForm& psi = s2h ? p.s2h : p.rest;
    const TwoForm q = algebra::q_of_R(R, psi, S);
    const double nrm = algebra::form_norm(S, psi);
    out.add(max_abs(q.matrix() - expected * psi.matrix()) / std::max(1.0, nrm));
    if (!out.value) out.value = algebra::form_inner(S, q, psi) / (nrm * nrm);
  }
  return out;
}

// ---------------------------------------------------------------------------
// geometry

int curvature_points(const Context& ctx) { return std::max(20, 2 * ctx.samples()); }

Outcome riemann_model(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  const auto model = algebra::model_curvature(geo.frame_structure(), 1.0);
  const double scale = model.max_abs();
  Outcome out;
  for (int s = 0; s < curvature_points(ctx); ++s) {
    const Vec p = sample_ball(rng, ctx.dim());
    const auto R = geo.riemann_at(p).transformed(geo.frame_at(p).E);
    double m = 0.0;
    const int d = ctx.dim();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) m = std::max(m, std::abs(R(a, b, c, e) - model(a, b, c, e)));
    out.add(m / scale);
  }
  return out;
}

Outcome ricci_einstein(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  const int n = ctx.config.n;
  Outcome out;
  for (int s = 0; s < curvature_points(ctx); ++s) {
    const Vec p = sample_ball(rng, ctx.dim());
    const Mat E = geo.frame_at(p).E;
    const Mat ric = E.transpose() * geo.ricci_at(p) * E;
    out.add(max_abs(ric - (n + 2.0) * Mat::Identity(ctx.dim(), ctx.dim())) / (n + 2.0));
  }
  return out;
}

Outcome scalar_curvature(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  const int n = ctx.config.n;
  const double expected = 4.0 * n * (n + 2);
  Outcome out;
  for (int s = 0; s < curvature_points(ctx); ++s) {
    const double k = geo.scalar_curvature_at(sample_ball(rng, ctx.dim()));
    if (!out.value) out.value = k;
    out.add(std::abs(k - expected) / expected);
  }
  return out;
}

Outcome killing_basis_dimension(Context& ctx, Rng&) {
  const int n = ctx.config.n;
  Outcome out;
  const auto count = static_cast<double>(ctx.basis().size());
  out.value = count;
  out.add(std::abs(count - (n + 1.0) * (2.0 * n + 3.0)));
  return out;
}

Outcome killing_equation(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) {
    const Vec p = sample_ball(rng, ctx.dim());
    for (const auto& xi : ctx.basis()) out.add(geo.killing_defect(xi.field(), p));
  }
  return out;
}

Outcome konstant_formula(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) {
    const Vec p = sample_ball(rng, ctx.dim());
    for (int k = 0; k < 3; ++k) {
      const Vec Y = sample_unit_vector(rng, ctx.dim());
      for (const auto& xi : ctx.basis()) out.add(geo.konstant_residual(xi, p, Y));
    }
  }
  return out;
}

Outcome metric_compatibility(Context& ctx, Rng& rng) {
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) out.add(ctx.geo().metric_compatibility_defect(sample_ball(rng, ctx.dim())));
  return out;
}

Outcome q_parallelism(Context& ctx, Rng& rng) {
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) {
    const Vec p = sample_ball(rng, ctx.dim());
    out.add(ctx.geo().q_parallelism_defect(p, sample_unit_vector(rng, ctx.dim())));
  }
  return out;
}

// Smallest, over control fields and evaluators, of the largest residual over the samples.
Outcome control_outcome(const std::vector<double>& observed, double threshold = kControlThreshold) {
  Outcome out;
  const double m = *std::min_element(observed.begin(), observed.end());
  out.samples_used = static_cast<int>(observed.size());
  out.value = m;
  out.max_residual = m > 0.0 ? threshold / m : std::numeric_limits<double>::infinity();
  return out;
}

Outcome killing_negative_control(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  const int d = ctx.dim();
  const Mat A = sample_gaussian(rng, d, d);
  const std::vector<geometry::VectorField> fields = {
      [d](const Vec&) { return Vec(Vec::Unit(d, 0)); },
      [](const Vec& p) { return Vec(p); },
      [A](const Vec& p) { return Vec(A * p); },
  };
  std::vector<double> observed;
  int evaluations = 0;
  for (const auto& X : fields) {
    double killing = 0.0, konstant = 0.0;
    for (int s = 0; s < ctx.samples(); ++s) {
      const Vec p = sample_ball(rng, d);
      killing = std::max(killing, geo.killing_defect(X, p));
      konstant = std::max(konstant, geo.konstant_residual(X, p, sample_unit_vector(rng, d)));
      evaluations += 2;
    }
    observed.push_back(killing);
    observed.push_back(konstant);
  }
  Outcome out = control_outcome(observed);
  out.samples_used = evaluations;
  return out;
}

// ---------------------------------------------------------------------------
// conformal-Killing forms

constexpr int kCkDirections = 5;

template <class PerPoint>
Outcome over_ck_forms(Context& ctx, Rng& rng, int points, PerPoint&& per_point) {
  const HpnGeometry& geo = ctx.geo();
  Outcome out;
  for (const auto& xi : ctx.basis()) {
    const auto psi = ckforms::build_ck_form(geo, xi);
    for (int s = 0; s < points; ++s) per_point(out, psi, xi, Vec(sample_ball(rng, ctx.dim())));
  }
  return out;
}

Outcome ck_equation(Context& ctx, Rng& rng) {
  return over_ck_forms(ctx, rng, ctx.samples(), [&](Outcome& out, const ckforms::CKForm& psi, const KillingField&,
                                                     const Vec& p) {
    const ckforms::CkPointEvaluation ev(ctx.geo(), psi, p);
    for (int k = 0; k < kCkDirections; ++k) out.add(ev.ck_residual(sample_unit_vector(rng, ctx.dim())));
  });
}

Outcome codifferential_source(Context& ctx, Rng& rng) {
  return over_ck_forms(ctx, rng, ctx.samples(), [&](Outcome& out, const ckforms::CKForm& psi, const KillingField&,
                                                     const Vec& p) {
    out.add(ckforms::codiff_check(ctx.geo(), psi, p));
  });
}

Outcome lemma_ecd(Context& ctx, Rng& rng) {
  return over_ck_forms(ctx, rng, ctx.samples(), [&](Outcome& out, const ckforms::CKForm& psi, const KillingField&,
                                                     const Vec& p) {
    const ckforms::CkPointEvaluation ev(ctx.geo(), psi, p);
    for (int k = 0; k < kCkDirections; ++k) out.add(ev.lemma_ecd_residual(sample_unit_vector(rng, ctx.dim())));
  });
}

Outcome dpsi_formula(Context& ctx, Rng& rng) {
  return over_ck_forms(ctx, rng, ctx.samples(), [&](Outcome& out, const ckforms::CKForm& psi, const KillingField&,
                                                     const Vec& p) {
    out.add(ckforms::dpsi_residual(ctx.geo(), psi, p));
  });
}

Outcome dpsi_cheie_consistency(Context& ctx, Rng& rng) {
  Outcome out;
  for (int s = 0; s < form_count(ctx); ++s) {
    const Vec X = sample_gaussian(rng, ctx.dim());
    out.add(ckforms::dpsi_cheie_consistency(ctx.config.n, X, sample_unit_vector(rng, ctx.dim())));
  }
  return out;
}

Outcome rest_component(Context& ctx, Rng& rng) {
  return over_ck_forms(ctx, rng, ctx.samples(), [&](Outcome& out, const ckforms::CKForm& psi, const KillingField&,
                                                     const Vec& p) {
    out.add(ckforms::rest_component(ctx.geo(), psi, p));
  });
}

Outcome u_residual(Context& ctx, Rng& rng) {
  return over_ck_forms(ctx, rng, ctx.samples(), [&](Outcome& out, const ckforms::CKForm& psi, const KillingField&,
                                                     const Vec& p) {
    out.add(ckforms::u_residual(ctx.geo(), psi, p));
  });
}

Outcome non_killing_witness(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  Outcome out;
  double weakest = std::numeric_limits<double>::infinity();
  for (const auto& xi : ctx.basis()) {
    const auto psi = ckforms::build_ck_form(geo, xi);
    double largest = 0.0;
    for (int s = 0; s < ctx.samples(); ++s) {
      largest = std::max(largest, ckforms::codifferential_norm(geo, psi, sample_ball(rng, ctx.dim())));
      ++out.samples_used;
    }
    weakest = std::min(weakest, largest);
  }
  out.value = weakest;
  out.max_residual = weakest > 0.0 ? kWitnessThreshold / weakest : std::numeric_limits<double>::infinity();
  return out;
}

int integrated_points(const Context& ctx) { return ctx.budget(2); }

Outcome integrated_equation(Context& ctx, Rng& rng) {
  return over_ck_forms(ctx, rng, integrated_points(ctx), [&](Outcome& out, const ckforms::CKForm& psi,
                                                              const KillingField&, const Vec& p) {
    out.add(ckforms::integrated_residual(ctx.geo(), psi, p));
  });
}

Outcome s2h_eigenform(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  Outcome out;
  for (const auto& xi : ctx.basis())
    for (int s = 0; s < integrated_points(ctx); ++s)
      out.add(ckforms::s2h_eigenform_relative_residual(geo, xi, sample_ball(rng, ctx.dim())));
  return out;
}

Outcome ck_dimension(Context& ctx, Rng& rng) {
  const auto report = ckforms::independence_report(ctx.geo(), 3, rng());
  const int n = ctx.config.n;
  Outcome out;
  out.value = report.rank;
  out.samples_used = report.sample_count;
  out.max_residual = std::abs(report.rank - (n + 1.0) * (2.0 * n + 3.0));
  return out;
}

Outcome ck_negative_control(Context& ctx, Rng& rng) {
  const HpnGeometry& geo = ctx.geo();
  const int d = ctx.dim();
  const Mat constant = random_form(rng, d).matrix();
  const auto& xi = ctx.basis()[rng() % ctx.basis().size()];
  const std::vector<ckforms::CKForm> controls = {
      // A constant-coefficient chart form.
      ckforms::CKForm(KillingField::zero(ctx.config.n), [constant](const Vec&) { return constant; }),
      // Only the S^2H part of the conformal-Killing combination.
      ckforms::CKForm(xi, ckforms::nabla_x_part(geo, xi, ckforms::Summand::S2H)),
  };
  std::vector<double> observed;
  int evaluations = 0;
  for (const auto& psi : controls) {
    double ck = 0.0, integrated = 0.0;
    for (int s = 0; s < integrated_points(ctx); ++s) {
      const Vec p = sample_ball(rng, d);
      const ckforms::CkPointEvaluation ev(geo, psi, p);
      for (int k = 0; k < kCkDirections; ++k) ck = std::max(ck, ev.ck_residual(sample_unit_vector(rng, d)));
      integrated = std::max(integrated, ckforms::integrated_residual(geo, psi, p));
      evaluations += kCkDirections + 1;
    }
    observed.push_back(ck);
    observed.push_back(integrated);
  }
  Outcome out = control_outcome(observed);
  out.samples_used = evaluations;
  return out;
}

// ---------------------------------------------------------------------------
// twistor

const KillingField& cycle(Context& ctx, int i) {
  const auto& b = ctx.basis();
  return b[static_cast<size_t>(i * 5) % b.size()];
}

Outcome twistor_complex_structure(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) {
    const Vec z = sample_twistor_point(ctx, rng);
    const Mat J = Z.complex_structure_at(z);
    const Mat g = Z.metric_at(z);
    const Mat I = Mat::Identity(Z.dim(), Z.dim());
    out.add(std::max(max_abs(J * J + I), max_abs(J.transpose() * g * J - g) / max_abs(g)));
  }
  return out;
}

Outcome twistor_submersion(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) {
    const Vec z = sample_twistor_point(ctx, rng);
    const auto L = Z.local(z);
    const Mat gb = Z.metric_at(z);
    const Vec Y = sample_unit_vector(rng, ctx.dim()), U = sample_unit_vector(rng, ctx.dim());
    const Vec3 B = unit_orthogonal(rng, L.a), C = unit_orthogonal(rng, L.a);
    const Vec hY = Z.horizontal_lift(L, Y), hU = Z.horizontal_lift(L, U);
    const Vec vB = Z.vertical_vector(L, B), vC = Z.vertical_vector(L, C);
    const double horizontal = std::abs(hY.dot(gb * hU) - Y.dot(L.g * U));
    const double orthogonal = std::max(std::abs(hY.dot(gb * vB)), std::abs(hU.dot(gb * vC)));
    const double fiber = std::abs(vB.dot(gb * vC) - B.dot(C));
    const double projection = (hY.head(ctx.dim()) - Y).cwiseAbs().maxCoeff();
    out.add(std::max({horizontal, orthogonal, fiber, projection}));
  }
  return out;
}

Outcome twistor_kaehler(Context& ctx, Rng& rng) {
  Outcome out;
  for (int s = 0; s < ctx.budget(2); ++s) out.add(ctx.twistor().kaehler_defect(sample_twistor_point(ctx, rng)));
  return out;
}

Outcome lc_formulas(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  Outcome out;
  for (int s = 0; s < ctx.budget(2); ++s) {
    const Vec z = sample_twistor_point(ctx, rng);
    const Vec3 a = Z.local(z).a;
    const twistor::LcArguments args{sample_unit_vector(rng, ctx.dim()), sample_unit_vector(rng, ctx.dim()),
                                    unit_orthogonal(rng, a), sample_unit_vector(rng, 3)};
    for (auto c : {twistor::LcCase::HorizontalHorizontal, twistor::LcCase::VerticalHorizontal,
                   twistor::LcCase::HorizontalVertical, twistor::LcCase::VerticalVertical})
      out.add(Z.lc_residual(z, c, args));
  }
  return out;
}

Outcome lift_commutator(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) {
    const auto z = twistor::TwistorPoint::make(sample_ball(rng, ctx.dim()), sample_fiber(rng));
    for (const auto& xi : ctx.basis()) out.add(Z.lift_commutator_residual(xi, z));
  }
  return out;
}

Outcome lift_flow(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  Outcome out;
  for (int s = 0; s < ctx.budget(2); ++s) {
    const Vec z = sample_twistor_point(ctx, rng);
    for (const auto& xi : ctx.basis()) {
      const Vec diff = Z.lift_killing_coords(xi, z) - Z.natural_lift_coords(xi, z);
      out.add(Z.norm(z, diff));
    }
  }
  return out;
}

Outcome lift_killing(Context& ctx, Rng& rng) {
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) out.add(ctx.twistor().lift_killing_defect(cycle(ctx, s), sample_twistor_point(ctx, rng)));
  return out;
}

Outcome lift_holomorphic(Context& ctx, Rng& rng) {
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s)
    out.add(ctx.twistor().lift_holomorphy_defect(cycle(ctx, s), sample_twistor_point(ctx, rng)));
  return out;
}

Outcome hamiltonian_gradient(Context& ctx, Rng& rng) {
  Outcome out;
  for (int s = 0; s < ctx.samples(); ++s) out.add(ctx.twistor().gradient_check(cycle(ctx, s), sample_twistor_point(ctx, rng)));
  return out;
}

// f^X against <A, J>: least-squares constant as value, worst relative misfit as residual.
Outcome hamiltonian_fiber_linear(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  std::vector<double> f, pairing;
  for (int s = 0; s < ctx.samples(); ++s) {
    const Vec x = sample_ball(rng, ctx.dim());
    const Vec3 a = sample_fiber(rng);
    const auto& xi = cycle(ctx, s);
    f.push_back(Z.hamiltonian(xi, Z.to_coordinates(twistor::TwistorPoint::make(x, a))));
    pairing.push_back(Z.s2h_coefficients(xi, x).dot(a));
  }
  double num = 0.0, den = 0.0, scale = 0.0;
  for (size_t i = 0; i < f.size(); ++i) {
    num += f[i] * pairing[i];
    den += pairing[i] * pairing[i];
    scale = std::max(scale, std::abs(f[i]));
  }
  const double lambda = num / den;
  Outcome out;
  for (size_t i = 0; i < f.size(); ++i) out.add(std::abs(f[i] - lambda * pairing[i]) / scale);
  out.value = lambda;
  return out;
}

Outcome second_derivatives(Context& ctx, Rng& rng, int first, int last) {
  const TwistorSpace& Z = ctx.twistor();
  Outcome out;
  for (int s = 0; s < ctx.budget(3); ++s) {
    const Vec z = sample_twistor_point(ctx, rng);
    const Vec3 a = Z.local(z).a;
    const twistor::SecondDerivArguments args{sample_unit_vector(rng, ctx.dim()), sample_unit_vector(rng, ctx.dim()),
                                             sample_unit_vector(rng, ctx.dim()), unit_orthogonal(rng, a),
                                             unit_orthogonal(rng, a)};
    const auto& xi = cycle(ctx, s);
    for (int c = first; c < last; ++c) out.add(Z.second_deriv_residual(xi, z, static_cast<twistor::SecondDerivCase>(c), args));
  }
  return out;
}

constexpr int kLemma1Cases = 7;

Outcome obata_equation(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  Outcome out;
  for (int s = 0; s < ctx.budget(5); ++s) {
    const Vec z = sample_twistor_point(ctx, rng);
    const auto L = Z.local(z);
    const auto f = Z.hamiltonian_field(cycle(ctx, s));
    for (int pattern = 0; pattern < 8; ++pattern) {
      const Vec Y = unit_twistor_vector(ctx, rng, L, pattern & 4);
      const Vec U = unit_twistor_vector(ctx, rng, L, pattern & 2);
      const Vec V = unit_twistor_vector(ctx, rng, L, pattern & 1);
      out.add(Z.obata_residual(f, z, Y, U, V));
    }
  }
  return out;
}

Outcome obata_negative_control(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  const Vec w = sample_gaussian(rng, Z.dim());
  const twistor::ScalarField f = [w](const Vec& y) { return std::sin(w.dot(y)) + 0.3 * y.squaredNorm(); };
  const Vec z = sample_twistor_point(ctx, rng);
  const auto L = Z.local(z);
  double largest = 0.0;
  for (bool vertical : {false, true}) {
    const Vec Y = unit_twistor_vector(ctx, rng, L, vertical);
    largest = std::max(largest, Z.obata_residual(f, z, Y, unit_twistor_vector(ctx, rng, L, false),
                                                 unit_twistor_vector(ctx, rng, L, vertical)));
  }
  Outcome out = control_outcome({largest}, kObataControlThreshold);
  out.samples_used = 2;
  return out;
}

double twistor_scalar_expected(int n) { return 2.0 * (2 * n + 1) * (n + 1); }

Outcome twistor_scalar_curvature(Context& ctx, Rng& rng) {
  const double expected = twistor_scalar_expected(ctx.config.n);
  Outcome out;
  for (int s = 0; s < ctx.budget(5); ++s) {
    const double k = ctx.twistor().scalar_curvature_at(sample_twistor_point(ctx, rng));
    if (!out.value) out.value = k;
    out.add(std::abs(k - expected) / expected);
  }
  return out;
}

Outcome twistor_einstein(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  const double einstein = twistor_scalar_expected(ctx.config.n) / Z.dim();
  Outcome out;
  for (int s = 0; s < ctx.budget(5); ++s) {
    const Vec z = sample_twistor_point(ctx, rng);
    const Mat g = Z.metric_at(z);
    // Compare in a gbar-orthonormal basis.
    const Mat Linv = g.llt().matrixL().solve(Mat::Identity(Z.dim(), Z.dim()));
    const Mat ric = Linv * Z.ricci_at(z) * Linv.transpose();
    out.add(max_abs(ric - einstein * Mat::Identity(Z.dim(), Z.dim())) / einstein);
  }
  return out;
}

Outcome twistor_fiber_curvature(Context& ctx, Rng& rng) {
  const TwistorSpace& Z = ctx.twistor();
  Outcome out;
  for (int s = 0; s < ctx.budget(5); ++s) {
    const Vec z = sample_twistor_point(ctx, rng);
    const auto L = Z.local(z);
    const Vec3 B = unit_orthogonal(rng, L.a);
    const double k = Z.sectional_curvature(z, Z.vertical_vector(L, B), Z.vertical_vector(L, L.a.cross(B)));
    if (!out.value) out.value = k;
    out.add(std::abs(k - 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<Entry>& registry() {
  using S = Suite;
  static const std::vector<Entry> entries = {
      {{"decomposition_idempotence", S::Algebra, "Eq. (decf)", kAlgebraicTolerance,
        "each projection is idempotent and kills the other summands"},
       decomposition_idempotence},
      {{"decomposition_orthogonality", S::Algebra, "Eq. (decf)", kAlgebraicTolerance,
        "the three summands are mutually orthogonal"},
       decomposition_orthogonality},
      {{"decomposition_completeness", S::Algebra, "Eq. (decf)", kAlgebraicTolerance, "the summands add up to the form"},
       decomposition_completeness},
      {{"decomposable_formulas", S::Algebra, "§2", kAlgebraicTolerance,
        "closed-form S2H and S2E parts of X^Y match the projections"},
       decomposable_formulas},
      {{"qr_s2h_constant", S::Algebra, "Eq. (constante)", kAlgebraicTolerance, "q(R) acts as 4 nu on S2H"},
       [](Context& c, Rng& r) { return qr_constant(c, r, true); }},
      {{"qr_rest_constant", S::Algebra, "Eq. (constante)", kAlgebraicTolerance,
        "q(R) acts as 2 nu (n+2) on the remaining summand"},
       [](Context& c, Rng& r) { return qr_constant(c, r, false); }},

      {{"riemann_model", S::Geometry, "Eq. (rg)", 1e-6, "relative deviation of the FD Riemann tensor from the model"},
       riemann_model},
      {{"ricci_einstein", S::Geometry, "Eq. (rg)", 1e-6, "Ricci = (n+2) g, relative"}, ricci_einstein},
      {{"scalar_curvature", S::Geometry, "Eq. (rg)", 1e-6, "scalar curvature 4n(n+2), relative"}, scalar_curvature},
      {{"killing_basis_dimension", S::Geometry, "§5", kAlgebraicTolerance, "(n+1)(2n+3) Killing basis fields"},
       killing_basis_dimension},
      {{"killing_equation", S::Geometry, "§1", 1e-6, "symmetric part of nabla X for every basis field"},
       killing_equation},
      {{"konstant_formula", S::Geometry, "§3", kFirstOrderTolerance, "nabla_Y(nabla X) = R(Y, X)"}, konstant_formula},
      {{"metric_compatibility", S::Geometry, "§2", kFirstOrderTolerance, "nabla g = 0"}, metric_compatibility},
      {{"q_parallelism", S::Geometry, "§2", kFirstOrderTolerance, "nabla preserves span{omega_1, omega_2, omega_3}"},
       q_parallelism},
      {{"killing_negative_control", S::Geometry, "§1", kControlTolerance,
        "non-Killing fields must leave Killing and Konstant residuals >= 1e-2 (reported as ratio)"},
       killing_negative_control},

      {{"ck_equation", S::CkForms, "Eq. (1)", kFirstOrderTolerance, "conformal-Killing equation for every form"},
       ck_equation},
      {{"codifferential_source", S::CkForms, "Theorem 1(2)", kFirstOrderTolerance, "delta psi = X"},
       codifferential_source},
      {{"lemma_ecd", S::CkForms, "Eq. (cheie)", kFirstOrderTolerance, "closed form of nabla_Y psi"}, lemma_ecd},
      {{"dpsi_formula", S::CkForms, "Eq. (dpsi)", kFirstOrderTolerance, "closed form of d psi"}, dpsi_formula},
      {{"dpsi_cheie_consistency", S::CkForms, "Eq. (dpsi)", kAlgebraicTolerance,
        "the closed forms of d psi and nabla psi satisfy the conformal-Killing equation"},
       dpsi_cheie_consistency},
      {{"rest_component", S::CkForms, "Lemma inc", kAlgebraicTolerance, "psi has no S2H (x) L^2_0 E part"},
       rest_component},
      {{"u_residual", S::CkForms, "Eq. (f)", kAlgebraicTolerance, "psi is the stated combination of nabla X"},
       u_residual},
      {{"non_killing_witness", S::CkForms, "Theorem 1(2)", kControlTolerance,
        "every form has |delta psi| > 1e-3 somewhere (reported as ratio)"},
       non_killing_witness},
      {{"integrated_equation", S::CkForms, "Eq. (confkill)", kSecondOrderTolerance,
        "second-order conformal-Killing equation"},
       integrated_equation},
      {{"s2h_eigenform", S::CkForms, "§3", kSecondOrderTolerance,
        "Laplacian of (nabla X)^{S2H} is 2 nu (n+2) times it, relative"},
       s2h_eigenform},
      {{"ck_dimension", S::CkForms, "§5", kAlgebraicTolerance, "Gram rank (n+1)(2n+3) of the constructed forms"},
       ck_dimension},
      {{"ck_negative_control", S::CkForms, "Eq. (1)", kControlTolerance,
        "non-conformal-Killing forms must leave residuals >= 1e-2 (reported as ratio)"},
       ck_negative_control},

      {{"twistor_complex_structure", S::Twistor, "Eq. (cs)", kAlgebraicTolerance, "Jcal^2 = -Id and gbar is Hermitian"},
       twistor_complex_structure},
      {{"twistor_submersion", S::Twistor, "§4", kAlgebraicTolerance,
        "horizontal lifts are isometric, orthogonal to the round fiber"},
       twistor_submersion},
      {{"twistor_kaehler", S::Twistor, "§4", kFirstOrderTolerance, "nabla Jcal = 0"}, twistor_kaehler},
      {{"lc_formulas", S::Twistor, "Lemma lc", kFirstOrderTolerance,
        "the four Levi-Civita formulas against the coordinate connection"},
       lc_formulas},
      {{"lift_commutator", S::Twistor, "Eq. (lift1)", kAlgebraicTolerance, "[nabla X, J] + 2 J A = 0"},
       lift_commutator},
      {{"lift_flow", S::Twistor, "Eq. (lift1)", kFirstOrderTolerance,
        "X^Z equals the velocity of the induced flow on complex structures"},
       lift_flow},
      {{"lift_killing", S::Twistor, "Eq. (new)", 1e-4, "X^Z is Killing for gbar"}, lift_killing},
      {{"lift_holomorphic", S::Twistor, "Eq. (new)", 1e-4, "X^Z preserves Jcal"}, lift_holomorphic},
      {{"hamiltonian_gradient", S::Twistor, "§4", 1e-4, "X^Z = Jcal grad f^X"}, hamiltonian_gradient},
      {{"hamiltonian_fiber_linear", S::Twistor, "§4", kFirstOrderTolerance,
        "f^X is a fixed multiple of <A, J> (value: the multiple)"},
       hamiltonian_fiber_linear},
      {{"lemma1_second_derivatives", S::Twistor, "Lemma 1", kSecondOrderTolerance,
        "second covariant derivatives of Xbar"},
       [](Context& c, Rng& r) { return second_derivatives(c, r, 0, kLemma1Cases); }},
      {{"lemma2_second_derivatives", S::Twistor, "Lemma 2", kSecondOrderTolerance,
        "second covariant derivatives of A~"},
       [](Context& c, Rng& r) { return second_derivatives(c, r, kLemma1Cases, twistor::kSecondDerivCaseCount); }},
      {{"obata_equation", S::Twistor, "Theorem obatat", kSecondOrderTolerance,
        "Obata equation for f^X over all horizontal/vertical patterns"},
       obata_equation},
      {{"obata_negative_control", S::Twistor, "Theorem obatat", kControlTolerance,
        "a generic function must leave an Obata residual >= 1e-1 (reported as ratio)"},
       obata_negative_control},
      {{"twistor_scalar_curvature", S::Twistor, "§4", 1e-2, "scalar curvature 2(2n+1)(n+1), relative"},
       twistor_scalar_curvature},
      {{"twistor_einstein", S::Twistor, "§4", 1e-2, "gbar is Einstein, relative"}, twistor_einstein},
      {{"twistor_fiber_curvature", S::Twistor, "§4", kSecondOrderTolerance, "fibers are round of curvature 1"},
       twistor_fiber_curvature},
  };
  return entries;
}

CheckResult execute(const Entry& e, const SuiteConfig& config, Context& ctx) {
  CheckResult r;
  r.name = e.info.name;
  r.paper_ref = e.info.paper_ref;
  r.n = config.n;
  r.tolerance = config.tolerance_for(e.info.name, e.info.default_tolerance);
  const auto start = std::chrono::steady_clock::now();
  try {
    Rng rng = derive_rng(config.seed, e.info.name);
    const Outcome o = e.run(ctx, rng);
    r.samples_used = o.samples_used;
    r.max_residual = o.max_residual;
    r.value = o.value;
  } catch (const std::exception& ex) {
    r.max_residual = kNaN;
    r.error = ex.what();
  }
  r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.pass = !std::isnan(r.max_residual) && r.max_residual <= r.tolerance;
  return r;
}

}  // namespace

std::string to_string(Suite s) {
  switch (s) {
    case Suite::Algebra: return "algebra";
    case Suite::Geometry: return "geometry";
    case Suite::CkForms: return "ckforms";
    case Suite::Twistor: return "twistor";
  }
  return "unknown";
}

Suite parse_suite(std::string_view name) {
  for (Suite s : all_suites())
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown suite '" + std::string(name) + "' (expected algebra, geometry, ckforms or twistor)");
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> s = {Suite::Algebra, Suite::Geometry, Suite::CkForms, Suite::Twistor};
  return s;
}

void SuiteConfig::validate() const {
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  FdConfig{fd_step, false}.validate();
  FdConfig{twistor_fd_step, false}.validate();
  for (const auto& [name, tol] : tolerances) {
    if (!find_check(name)) throw std::invalid_argument("tolerance given for unknown check '" + name + "'");
    if (!(tol >= 0.0)) throw std::invalid_argument("tolerance for '" + name + "' must be nonnegative");
  }
}

double SuiteConfig::tolerance_for(const std::string& check, double fallback) const {
  const auto it = tolerances.find(check);
  return it == tolerances.end() ? fallback : it->second;
}

const std::vector<CheckInfo>& registered_checks() {
  static const std::vector<CheckInfo> infos = [] {
    std::vector<CheckInfo> v;
    for (const auto& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

const CheckInfo* find_check(std::string_view name) {
  for (const auto& c : registered_checks())
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<CheckResult> run_suite(const SuiteConfig& config) {
  config.validate();
  Context ctx(config);
  std::vector<CheckResult> out;
  for (const auto& e : registry())
    if (config.selects(e.info.suite)) out.push_back(execute(e, config, ctx));
  return out;
}

CheckResult run_check(const SuiteConfig& config, std::string_view name) {
  config.validate();
  for (const auto& e : registry())
    if (e.info.name == name) {
      Context ctx(config);
      return execute(e, config, ctx);
    }
  throw std::invalid_argument("unknown check '" + std::string(name) + "'");
}

int exit_code(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; }) ? 0 : 1;
}

}  // namespace qk::report
