#include "qkverify/twistor.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace qk::twistor {

using geometry::Frame;

TwistorPoint TwistorPoint::make(ChartPoint base, const Vec3& fiber, double tol) {
  if (!(std::abs(fiber.norm() - 1.0) <= tol)) throw std::invalid_argument("TwistorPoint: fiber triple is not a unit vector");
  return {std::move(base), fiber};
}

Vec3 fiber_from_stereo(const Eigen::Vector2d& s) {
  const double r2 = s.squaredNorm();
  return Vec3(2.0 * s(0), 2.0 * s(1), r2 - 1.0) / (r2 + 1.0);
}

Eigen::Vector2d stereo_from_fiber(const Vec3& a) {
  const double den = 1.0 - a(2);
  if (den < 1e-8) throw std::domain_error("stereographic chart: fiber point too close to the pole");
  return Eigen::Vector2d(a(0), a(1)) / den;
}

std::array<Vec3, 3> complete_basis(const Vec3& a) {
  Eigen::Index axis = 0;
  a.cwiseAbs().minCoeff(&axis);
  Vec3 v = Vec3::Unit(axis);
  const Vec3 e2 = (v - v.dot(a) * a).normalized();
  return {a, e2, a.cross(e2)};
}

std::string to_string(SecondDerivCase c) {
  switch (c) {
    case SecondDerivCase::XbarHHH: return "xbar_hhh";
    case SecondDerivCase::XbarHHV: return "xbar_hhv";
    case SecondDerivCase::XbarHVH: return "xbar_hvh";
    case SecondDerivCase::XbarVHH: return "xbar_vhh";
    case SecondDerivCase::XbarVHV: return "xbar_vhv";
    case SecondDerivCase::XbarVVH: return "xbar_vvh";
    case SecondDerivCase::XbarHVV: return "xbar_hvv";
    case SecondDerivCase::AHHH: return "a_hhh";
    case SecondDerivCase::AHHV: return "a_hhv";
    case SecondDerivCase::AHVH: return "a_hvh";
    case SecondDerivCase::AHVV: return "a_hvv";
    case SecondDerivCase::AVHH: return "a_vhh";
    case SecondDerivCase::AVHV: return "a_vhv";
    case SecondDerivCase::AVVH: return "a_vvh";
  }
  return "unknown";
}

TwistorSpace::TwistorSpace(const HpnGeometry& base, FdConfig fd) : base_(base), fd_(fd) { fd_.validate(); }

Vec TwistorSpace::to_coordinates(const TwistorPoint& z) const {
  geometry::check_chart_point(z.base, n());
  Vec out(dim());
  out << z.base, stereo_from_fiber(z.fiber);
  return out;
}

TwistorPoint TwistorSpace::from_coordinates(const Vec& z) const {
  if (z.size() != dim()) throw std::invalid_argument("twistor coordinates have the wrong size");
  return {z.head(4 * n()), fiber_from_stereo(z.tail<2>())};
}

LocalData TwistorSpace::local(const Vec& z) const {
  if (z.size() != dim()) throw std::invalid_argument("twistor coordinates have the wrong size");
  const int d = 4 * n();
  LocalData L;
  L.z = z;
  L.x = z.head(d);
  const Eigen::Vector2d s = z.tail<2>();
  L.a = fiber_from_stereo(s);
  const double den = s.squaredNorm() + 1.0;
  const double den2 = den * den;
  L.M.resize(3, 2);
  L.M << (2.0 * den - 4.0 * s(0) * s(0)) / den2, -4.0 * s(0) * s(1) / den2,
         -4.0 * s(0) * s(1) / den2, (2.0 * den - 4.0 * s(1) * s(1)) / den2,
         4.0 * s(0) / den2, 4.0 * s(1) / den2;
  L.frame = base_.frame_at(L.x);
  L.g = base_.metric_at(L.x);
  L.J = Mat::Zero(d, d);
  for (int k = 0; k < 3; ++k) L.J += L.a(k) * L.frame.J[static_cast<size_t>(k)];

  // theta_kl(v) = <nabla_v J_k, J_l>, read off in the frame where J_k are the model structures.
  const Christoffel G = base_.christoffel_exact_at(L.x);
  const auto& S = base_.frame_structure();
  L.theta.resize(static_cast<size_t>(d));
  L.C.resize(3, d);
  for (int mu = 0; mu < d; ++mu) {
    const Vec e = Vec::Unit(d, mu);
    const Mat omega = L.frame.E_inv * (base_.frame_differential(L.x, e) + G.along(e) * L.frame.E);
    Eigen::Matrix3d th;
    for (int k = 0; k < 3; ++k) {
      const Mat dJ = omega * S.J(k) - S.J(k) * omega;
      for (int l = 0; l < 3; ++l) th(k, l) = (dJ.transpose() * S.J(l)).trace() / d;
    }
    L.theta[static_cast<size_t>(mu)] = th;
    L.C.col(mu) = th.transpose() * L.a;
  }
  L.basis = complete_basis(L.a);
  return L;
}

Vec TwistorSpace::assemble(const LocalData& L, const TwistorTangent& t) const {
  const int d = 4 * n();
  const Vec3 w = t.vertical - L.C * t.horizontal;
  const Eigen::Vector2d sdot = (L.M.transpose() * L.M).ldlt().solve(L.M.transpose() * w);
  Vec out(d + 2);
  out << t.horizontal, sdot;
  return out;
}

TwistorTangent TwistorSpace::split(const LocalData& L, const Vec& v) const {
  const int d = 4 * n();
  TwistorTangent t;
  t.horizontal = v.head(d);
  t.vertical = L.M * v.tail<2>() + L.C * t.horizontal;
  return t;
}

Mat TwistorSpace::metric_at(const Vec& z) const {
  const LocalData L = local(z);
  const int d = 4 * n();
  Mat lift = Mat::Zero(d + 3, d + 2);
  lift.topLeftCorner(d, d).setIdentity();
  lift.block(d, 0, 3, d) = L.C;
  lift.block(d, d, 3, 2) = L.M;
  Mat block = Mat::Identity(d + 3, d + 3);
  block.topLeftCorner(d, d) = L.g;
  return lift.transpose() * block * lift;
}

Mat TwistorSpace::complex_structure_at(const Vec& z) const {
  const LocalData L = local(z);
  Mat out(dim(), dim());
  for (int i = 0; i < dim(); ++i) {
    const TwistorTangent t = split(L, Vec::Unit(dim(), i));
    out.col(i) = assemble(L, {L.J * t.horizontal, L.a.cross(t.vertical)});
  }
  return out;
}

Mat TwistorSpace::kaehler_form_at(const Vec& z) const {
  return complex_structure_at(z).transpose() * metric_at(z);
}

Christoffel TwistorSpace::christoffel_at(const Vec& z) const {
  auto metric = [this](const Vec& y) -> Mat { return metric_at(y); };
  std::vector<Mat> dg(static_cast<size_t>(dim()));
  for (int l = 0; l < dim(); ++l) dg[static_cast<size_t>(l)] = partial_derivative(metric, z, l, fd_);
  return geometry::christoffel_from(dg, metric_at(z));
}

algebra::CurvatureTensor TwistorSpace::riemann_at(const Vec& z) const {
  return geometry::riemann_from([this](const Vec& y) { return christoffel_at(y); }, metric_at(z), z, fd_);
}

Mat TwistorSpace::ricci_at(const Vec& z) const { return riemann_at(z).ricci(metric_at(z).inverse()); }

double TwistorSpace::scalar_curvature_at(const Vec& z) const { return riemann_at(z).scalar(metric_at(z).inverse()); }

double TwistorSpace::norm(const Vec& z, const Vec& v) const { return std::sqrt(std::max(0.0, v.dot(metric_at(z) * v))); }

double TwistorSpace::sectional_curvature(const Vec& z, const Vec& P, const Vec& Q) const {
  const Mat gb = metric_at(z);
  const double area = P.dot(gb * P) * Q.dot(gb * Q) - std::pow(P.dot(gb * Q), 2);
  if (area < 1e-14) throw std::invalid_argument("sectional_curvature: degenerate plane");
  // R(P, Q, Q, P) = g(R(P, Q) Q, P)
  return Q.dot(riemann_at(z).form(P, Q) * P) / area;
}

// ---------------------------------------------------------------------------
// Lift of Killing fields

Mat TwistorSpace::q_endomorphism(const LocalData& L, const Vec3& b) const {
  Mat out = Mat::Zero(4 * n(), 4 * n());
  for (int k = 0; k < 3; ++k) out += b(k) * L.frame.J[static_cast<size_t>(k)];
  return out;
}

Vec3 TwistorSpace::s2h_coefficients(const KillingField& xi, const Vec& x, const Frame& f) const {
  const int d = 4 * n();
  const Christoffel G = base_.christoffel_exact_at(x);
  const Mat N = xi.jacobian(x) + G.along(xi.value(x));
  const Mat hat = f.E_inv * N * f.E;
  const auto& S = base_.frame_structure();
  Vec3 c;
  for (int k = 0; k < 3; ++k) c(k) = (hat.transpose() * S.J(k)).trace() / d;
  return c;
}

Vec3 TwistorSpace::s2h_coefficients(const KillingField& xi, const Vec& x) const {
  return s2h_coefficients(xi, x, base_.frame_at(x));
}

TwistorTangent TwistorSpace::lift_killing(const KillingField& xi, const TwistorPoint& z) const {
  const Vec3 c = s2h_coefficients(xi, z.base);
  // -2 Jcal(A~) = -2 a x (c - <c,a> a) = 2 c x a
  return {xi.value(z.base), 2.0 * c.cross(z.fiber)};
}

Vec TwistorSpace::lift_killing_coords(const KillingField& xi, const Vec& z) const {
  const LocalData L = local(z);
  const Vec3 c = s2h_coefficients(xi, L.x, L.frame);
  return assemble(L, {xi.value(L.x), 2.0 * c.cross(L.a)});
}

Vec TwistorSpace::natural_lift_coords(const KillingField& xi, const Vec& z) const {
  const int d = 4 * n();
  const Vec x = z.head(d);
  const Vec3 a = fiber_from_stereo(z.tail<2>());
  const Frame f0 = base_.frame_at(x);
  Mat J = Mat::Zero(d, d);
  for (int k = 0; k < 3; ++k) J += a(k) * f0.J[static_cast<size_t>(k)];
  const auto& S = base_.frame_structure();
  // phi_t acts on complex structures by J -> dphi J dphi^{-1}.
  auto curve = [&](const Vec& t) -> Vec {
    const QuatMatrix M = geometry::quat_exp(xi.generator(), t(0));
    const Vec xt = geometry::mobius(M, x);
    const Mat D = geometry::mobius_differential(M, x);
    const Mat Jt = D * J * D.inverse();
    const Frame ft = base_.frame_at(xt);
    const Mat hat = ft.E_inv * Jt * ft.E;
    Vec3 at;
    for (int k = 0; k < 3; ++k) at(k) = (hat.transpose() * S.J(k)).trace() / d;
    Vec out(d + 2);
    out << xt, stereo_from_fiber(at);
    return out;
  };
  return directional_derivative(curve, Vec::Zero(1), Vec::Ones(1), fd_);
}

double TwistorSpace::lift_commutator_residual(const KillingField& xi, const TwistorPoint& z) const {
  const LocalData L = local(to_coordinates(z));
  const Christoffel G = base_.christoffel_exact_at(L.x);
  const Mat N = xi.jacobian(L.x) + G.along(xi.value(L.x));
  const Vec3 c = s2h_coefficients(xi, L.x, L.frame);
  const Vec3 tilde = c - c.dot(L.a) * L.a;
  const Mat defect = N * L.J - L.J * N + 2.0 * L.J * q_endomorphism(L, tilde);
  return (L.frame.E_inv * defect * L.frame.E).norm();
}

Mat TwistorSpace::cov_jacobian(const std::function<Vec(const Vec&)>& W, const Vec& z) const {
  Mat N(dim(), dim());
  for (int i = 0; i < dim(); ++i) N.col(i) = partial_derivative(W, z, i, fd_);
  return N + christoffel_at(z).along(W(z));
}

namespace {

// Columns form a gbar-orthonormal basis.
Mat orthonormal_basis(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw std::domain_error("twistor metric is not positive definite");
  return llt.matrixL().transpose().solve(Mat::Identity(g.rows(), g.cols()));
}

}  // namespace

double TwistorSpace::lift_killing_defect(const KillingField& xi, const Vec& z) const {
  auto W = [this, &xi](const Vec& y) { return lift_killing_coords(xi, y); };
  const Mat gb = metric_at(z);
  const Mat F = cov_jacobian(W, z).transpose() * gb;  // F(U, V) = gbar(nabla_U X, V)
  const Mat B = orthonormal_basis(gb);
  return (B.transpose() * (0.5 * (F + F.transpose())) * B).norm();
}

double TwistorSpace::kaehler_defect(const Vec& z) const {
  const Christoffel G = christoffel_at(z);
  const Mat Jz = complex_structure_at(z);
  auto Jcal = [this](const Vec& y) { return complex_structure_at(y); };
  const Mat B = orthonormal_basis(metric_at(z));
  const Mat B_inv = B.inverse();
  double out = 0.0;
  for (int k = 0; k < dim(); ++k) {
    const Vec e = B.col(k);
    const Mat Gk = G.along(e);
    const Mat nabla = directional_derivative(Jcal, z, e, fd_) + Gk * Jz - Jz * Gk;
    out = std::max(out, (B_inv * nabla * B).norm());
  }
  return out;
}

double TwistorSpace::lift_holomorphy_defect(const KillingField& xi, const Vec& z) const {
  auto W = [this, &xi](const Vec& y) { return lift_killing_coords(xi, y); };
  auto Jcal = [this](const Vec& y) { return complex_structure_at(y); };
  const Vec X = W(z);
  Mat dX(dim(), dim());
  for (int i = 0; i < dim(); ++i) dX.col(i) = partial_derivative(W, z, i, fd_);
  const Mat Jz = Jcal(z);
  // (L_X J) = X(J) - [dX, J] in coordinates
  const Mat lie = directional_derivative(Jcal, z, X, fd_) - dX * Jz + Jz * dX;
  const Mat B = orthonormal_basis(metric_at(z));
  return (B.inverse() * lie * B).norm();
}

// ---------------------------------------------------------------------------
// Levi-Civita connection of the twistor metric in split form

namespace {

Vec3 tilde(const Vec3& b, const Vec3& a) { return b - b.dot(a) * a; }

Eigen::Matrix3d theta_along(const LocalData& L, const Vec& Y) {
  Eigen::Matrix3d th = Eigen::Matrix3d::Zero();
  for (Eigen::Index mu = 0; mu < Y.size(); ++mu) th += Y(mu) * L.theta[static_cast<size_t>(mu)];
  return th;
}

}  // namespace

TwistorTangent TwistorSpace::lc_connection(const Vec& z, LcCase c, const LcArguments& args) const {
  const LocalData L = local(z);
  const int d = 4 * n();
  const Vec3& e2 = L.basis[1];
  const Vec3& e3 = L.basis[2];
  TwistorTangent out{Vec::Zero(d), Vec3::Zero()};
  switch (c) {
    case LcCase::HorizontalHorizontal: {
      const Christoffel G = base_.christoffel_exact_at(L.x);
      const double w2 = (q_endomorphism(L, e2) * args.Y).dot(L.g * args.V);
      const double w3 = (q_endomorphism(L, e3) * args.Y).dot(L.g * args.V);
      out.horizontal = G.apply(args.Y, args.V);
      out.vertical = -0.5 * (w2 * e3 - w3 * e2);
      break;
    }
    case LcCase::VerticalHorizontal:
      out.horizontal = -0.5 * L.J * (q_endomorphism(L, tilde(args.B, L.a)) * args.V);
      break;
    case LcCase::HorizontalVertical:
      out.horizontal = -0.5 * L.J * (q_endomorphism(L, tilde(args.C, L.a)) * args.Y);
      out.vertical = tilde(theta_along(L, args.Y).transpose() * args.C, L.a);
      break;
    case LcCase::VerticalVertical:
      out.vertical = -args.C.dot(L.a) * tilde(args.B, L.a);
      break;
  }
  return out;
}

TwistorTangent TwistorSpace::lc_fd(const Vec& z, LcCase c, const LcArguments& args) const {
  const LocalData L = local(z);
  std::function<Vec(const Vec&)> field;
  Vec P;
  const bool horizontal_field = c == LcCase::HorizontalHorizontal || c == LcCase::VerticalHorizontal;
  const bool horizontal_dir = c == LcCase::HorizontalHorizontal || c == LcCase::HorizontalVertical;
  if (horizontal_field) {
    field = [this, V = args.V](const Vec& y) { return horizontal_lift(local(y), V); };
  } else {
    field = [this, C = args.C](const Vec& y) {
      const LocalData Ly = local(y);
      return vertical_vector(Ly, tilde(C, Ly.a));
    };
  }
  P = horizontal_dir ? horizontal_lift(L, args.Y) : vertical_vector(L, tilde(args.B, L.a));
  const Vec nabla = directional_derivative(field, z, P, fd_) + christoffel_at(z).apply(P, field(z));
  return split(L, nabla);
}

double TwistorSpace::lc_residual(const Vec& z, LcCase c, const LcArguments& args) const {
  const TwistorTangent a = lc_connection(z, c, args);
  const TwistorTangent b = lc_fd(z, c, args);
  const Mat g = base_.metric_at(z.head(4 * n()));
  const Vec dh = a.horizontal - b.horizontal;
  return std::sqrt(std::max(0.0, dh.dot(g * dh)) + (a.vertical - b.vertical).squaredNorm());
}

// ---------------------------------------------------------------------------
// Hamiltonian

double TwistorSpace::hamiltonian(const KillingField& xi, const Vec& z) const {
  auto W = [this, &xi](const Vec& y) { return lift_killing_coords(xi, y); };
  // gbar-trace of the 2-form (U, V) -> gbar(nabla_U X^Z, Jcal V), which equals -trace(Jcal o nabla X^Z).
  return (complex_structure_at(z) * cov_jacobian(W, z)).trace() / (2.0 * (n() + 1));
}

ScalarField TwistorSpace::hamiltonian_field(const KillingField& xi) const {
  return [this, xi](const Vec& y) { return hamiltonian(xi, y); };
}

double TwistorSpace::gradient_check(const KillingField& xi, const Vec& z) const {
  const ScalarField f = hamiltonian_field(xi);
  Vec df(dim());
  for (int i = 0; i < dim(); ++i) df(i) = partial_derivative(f, z, i, fd_);
  const Mat gb = metric_at(z);
  const Vec grad = gb.ldlt().solve(df);
  const Vec diff = lift_killing_coords(xi, z) - complex_structure_at(z) * grad;
  return std::sqrt(std::max(0.0, diff.dot(gb * diff)));
}

// ---------------------------------------------------------------------------
// Second derivatives of the lifted fields

namespace {

bool is_xbar(SecondDerivCase c) { return static_cast<int>(c) <= static_cast<int>(SecondDerivCase::XbarHVV); }

}  // namespace

double TwistorSpace::second_deriv_fd(const KillingField& xi, const Vec& z, SecondDerivCase c,
                                     const SecondDerivArguments& args) const {
  const LocalData L = local(z);
  for (const Vec3* v : {&args.B, &args.C})
    if (std::abs(v->dot(L.a)) > 1e-9) throw std::invalid_argument("vertical argument is not orthogonal to the fiber point");
  std::function<Vec(const Vec&)> W;
  if (is_xbar(c)) {
    W = [this, xi](const Vec& y) {
      const LocalData Ly = local(y);
      return horizontal_lift(Ly, xi.value(Ly.x));
    };
  } else {
    W = [this, xi](const Vec& y) {
      const LocalData Ly = local(y);
      const Vec3 cy = s2h_coefficients(xi, Ly.x, Ly.frame);
      return vertical_vector(Ly, tilde(cy, Ly.a));
    };
  }
  const Vec Y = horizontal_lift(L, args.Y);
  const Vec U = horizontal_lift(L, args.U);
  const Vec V = horizontal_lift(L, args.V);
  const Vec B = vertical_vector(L, args.B);
  const Vec C = vertical_vector(L, args.C);
  Vec P, Q, R;
  switch (c) {
    case SecondDerivCase::XbarHHH: case SecondDerivCase::AHHH: P = Y; Q = U; R = V; break;
    case SecondDerivCase::XbarHHV: case SecondDerivCase::AHHV: P = Y; Q = U; R = B; break;
    case SecondDerivCase::XbarHVH: case SecondDerivCase::AHVH: P = Y; Q = B; R = U; break;
    case SecondDerivCase::XbarVHH: case SecondDerivCase::AVHH: P = B; Q = Y; R = U; break;
    case SecondDerivCase::XbarVHV: case SecondDerivCase::AVHV: P = B; Q = Y; R = C; break;
    case SecondDerivCase::XbarVVH: case SecondDerivCase::AVVH: P = B; Q = C; R = Y; break;
    case SecondDerivCase::XbarHVV: case SecondDerivCase::AHVV: P = Y; Q = B; R = C; break;
  }
  // nabla^2 W(P, Q) = nabla_P (T Q) - T(nabla_P Q), T = nabla W, with P, Q constant in coordinates.
  auto TQ = [this, &W](const Vec& y, const Vec& q) -> Vec {
    return directional_derivative(W, y, q, fd_) + christoffel_at(y).apply(q, W(y));
  };
  const Christoffel G = christoffel_at(z);
  auto tq = [&](const Vec& y) { return TQ(y, Q); };
  const Vec second = directional_derivative(tq, z, P, fd_) + G.apply(P, tq(z)) - TQ(z, G.apply(P, Q));
  return second.dot(metric_at(z) * R);
}

double TwistorSpace::second_deriv_formula(const KillingField& xi, const Vec& z, SecondDerivCase c,
                                          const SecondDerivArguments& args) const {
  const LocalData L = local(z);
  const Mat& g = L.g;
  const Vec X = xi.value(L.x);
  const Christoffel G = base_.christoffel_exact_at(L.x);
  const Mat N = xi.jacobian(L.x) + G.along(X);  // nabla_Y X = N Y
  const Vec3 cA = s2h_coefficients(xi, L.x, L.frame);
  const Vec3 At = tilde(cA, L.a);
  const double AJ = cA.dot(L.a);
  const Mat J2 = q_endomorphism(L, L.basis[1]);
  const Mat J3 = q_endomorphism(L, L.basis[2]);
  const Mat& J = L.J;
  const Mat Bend = q_endomorphism(L, args.B);
  const Mat Aend = q_endomorphism(L, cA);
  const Vec &Y = args.Y, &U = args.U, &V = args.V;
  const Vec3 &B = args.B, &C = args.C;

  auto gg = [&](const Vec& p, const Vec& q) { return p.dot(g * q); };
  auto w2 = [&](const Vec& p, const Vec& q) { return gg(J2 * p, q); };
  auto w3 = [&](const Vec& p, const Vec& q) { return gg(J3 * p, q); };
  auto wbarH = [&](const Vec& p, const Vec& q) { return gg(J * p, q); };       // horizontal pair
  auto wbarV = [&](const Vec3& p, const Vec3& q) { return L.a.cross(p).dot(q); };  // vertical pair
  auto wedge = [&](const Vec& p, const Vec& q, const Vec& u, const Vec& v) {
    return gg(p, u) * gg(q, v) - gg(q, u) * gg(p, v);
  };
  auto wedge_s2e = [&](const Vec& p, const Vec& q, const Vec& u, const Vec& v) {
    double s = wedge(p, q, u, v);
    for (int k = 0; k < 3; ++k) {
      const Mat& Jk = L.frame.J[static_cast<size_t>(k)];
      s += wedge(Jk * p, Jk * q, u, v);
    }
    return 0.25 * s;
  };

  switch (c) {
    case SecondDerivCase::XbarHHH:
      return 0.25 * (w2(Y, V) * w2(X, U) + w3(Y, V) * w3(X, U)) + 0.25 * (w2(X, V) * w2(Y, U) + w3(X, V) * w3(Y, U)) +
             0.5 * (w2(X, Y) * w2(U, V) + w3(X, Y) * w3(U, V)) + wedge_s2e(X, Y, U, V) +
             0.5 * wbarH(X, Y) * wbarH(U, V);
    case SecondDerivCase::XbarHHV:
      return 0.5 * (gg(Bend * (N * Y), J * U) + gg(Bend * (N * U), J * Y));
    case SecondDerivCase::XbarHVH:
      return -AJ * gg(Bend * Y, U) + At.dot(B) * wbarH(Y, U);
    case SecondDerivCase::XbarVHH:
      return At.dot(B) * wbarH(Y, U) - AJ * gg(Bend * Y, U);
    case SecondDerivCase::XbarVHV:
      return -0.25 * (wbarH(X, Y) * wbarV(B, C) + gg(X, Y) * B.dot(C));
    case SecondDerivCase::XbarVVH:
      return -0.25 * (gg(X, Y) * B.dot(C) + wbarH(X, Y) * wbarV(B, C));
    case SecondDerivCase::XbarHVV:
      return -0.5 * B.dot(C) * gg(X, Y);
    case SecondDerivCase::AHHH:
      return 0.25 * (w2(Y, X) * w3(U, V) - w2(U, V) * w3(Y, X)) + 0.25 * (w2(U, X) * w3(Y, V) - w2(Y, V) * w3(U, X));
    case SecondDerivCase::AHHV:
      return -0.5 * (gg(Bend * U, N * Y) + AJ * gg(Bend * Y, J * U)) -
             0.25 * (wbarH(Y, U) * wbarV(B, At) + gg(Y, U) * At.dot(B));
    case SecondDerivCase::AHVH:
      return 0.25 * (gg(Aend * U, Bend * Y) - AJ * gg(Bend * Y, J * U)) - 0.5 * AJ * gg(Bend * Y, J * U);
    case SecondDerivCase::AHVV:
      return 0.25 * (gg(X, Y) * wbarV(B, C) - wbarH(X, Y) * B.dot(C));
    case SecondDerivCase::AVHH:
      return -0.5 * AJ * gg(Bend * Y, J * U);
    case SecondDerivCase::AVHV:
      return 0.25 * (gg(X, Y) * wbarV(B, C) - wbarH(X, Y) * B.dot(C));
    case SecondDerivCase::AVVH:
      return 0.0;
  }
  return 0.0;
}

double TwistorSpace::second_deriv_residual(const KillingField& xi, const Vec& z, SecondDerivCase c,
                                           const SecondDerivArguments& args) const {
  return std::abs(second_deriv_fd(xi, z, c, args) - second_deriv_formula(xi, z, c, args));
}

// ---------------------------------------------------------------------------
// Obata

double TwistorSpace::obata_residual(const ScalarField& f, const Vec& z, const Vec& Y, const Vec& U, const Vec& V) const {
  auto df = [&](const Vec& y, const Vec& w) { return directional_derivative(f, y, w, fd_); };
  // Hessian of f on coordinate-constant vectors: d_u d_v f - df(Gamma(u, v)).
  auto hess = [&](const Vec& y, const Vec& u, const Vec& v, const Christoffel& G) {
    auto dv = [&](const Vec& w) { return df(w, v); };
    return directional_derivative(dv, y, u, fd_) - df(y, G.apply(u, v));
  };
  const Christoffel G = christoffel_at(z);
  auto hess_uv = [&](const Vec& y) { return hess(y, U, V, christoffel_at(y)); };
  const double third =
      directional_derivative(hess_uv, z, Y, fd_) - hess(z, G.apply(Y, U), V, G) - hess(z, U, G.apply(Y, V), G);

  const Mat gb = metric_at(z);
  const Mat Jc = complex_structure_at(z);
  auto gbar = [&](const Vec& p, const Vec& q) { return p.dot(gb * q); };
  auto wbar = [&](const Vec& p, const Vec& q) { return gbar(Jc * p, q); };
  return std::abs(4.0 * third + 2.0 * df(z, Y) * gbar(U, V) + df(z, U) * gbar(Y, V) + df(z, V) * gbar(Y, U) -
         df(z, Jc * U) * wbar(Y, V) - df(z, Jc * V) * wbar(Y, U));
}

}  // namespace qk::twistor
