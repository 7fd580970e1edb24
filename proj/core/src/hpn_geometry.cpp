#include "qkverify/hpn_geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

namespace qk::geometry {

using algebra::QuaternionicStructure;

void check_chart_point(const ChartPoint& p, int n) {
  if (p.size() != 4 * n) throw ChartError("chart point has " + std::to_string(p.size()) + " coordinates, expected " + std::to_string(4 * n));
  if (!p.allFinite()) throw ChartError("chart point has non-finite coordinates");
  if (p.norm() > kMaxChartNorm) throw ChartError("chart point too far from the origin (|q| > 1e3)");
}

Mat Christoffel::along(const Vec& Y) const {
  const int d = dim();
  Mat m(d, d);
  for (int k = 0; k < d; ++k) m.row(k) = Y.transpose() * upper[static_cast<size_t>(k)];
  return m;
}

Vec Christoffel::apply(const Vec& U, const Vec& V) const {
  const int d = dim();
  Vec out(d);
  for (int k = 0; k < d; ++k) out(k) = U.dot(upper[static_cast<size_t>(k)] * V);
  return out;
}

// ---------------------------------------------------------------------------
// Killing fields and the Sp(n+1) action

KillingField KillingField::make(QuatMatrix xi, double tol) {
  if (xi.rows() != xi.cols() || xi.rows() < 2) throw std::invalid_argument("KillingField: generator must be square of size n+1 >= 2");
  const double defect = (xi + xi.adjoint()).max_abs();
  if (defect > tol * std::max(1.0, xi.max_abs()))
    throw std::invalid_argument("KillingField: generator is not in sp(n+1) (xi + xi^* != 0)");
  return KillingField(std::move(xi));
}

KillingField KillingField::zero(int n) { return KillingField(QuatMatrix(n + 1, n + 1)); }

Vec KillingField::value(const ChartPoint& p) const {
  const int n = this->n();
  const auto q = to_quats(p);
  if (static_cast<int>(q.size()) != n) throw ChartError("KillingField: point dimension mismatch");
  Quat tail = xi_(n, n);
  for (int b = 0; b < n; ++b) tail += xi_(n, b) * q[static_cast<size_t>(b)];
  std::vector<Quat> out(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) {
    Quat acc = xi_(a, n);
    for (int b = 0; b < n; ++b) acc += xi_(a, b) * q[static_cast<size_t>(b)];
    out[static_cast<size_t>(a)] = acc - q[static_cast<size_t>(a)] * tail;
  }
  return from_quats(out);
}

Mat KillingField::jacobian(const ChartPoint& p) const {
  const int n = this->n();
  const auto q = to_quats(p);
  if (static_cast<int>(q.size()) != n) throw ChartError("KillingField: point dimension mismatch");
  Quat tail = xi_(n, n);
  for (int b = 0; b < n; ++b) tail += xi_(n, b) * q[static_cast<size_t>(b)];
  Mat Jac(4 * n, 4 * n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < 4; ++c) {
      const Quat v = Quat::unit(c);
      const Quat dtail = xi_(n, b) * v;
      std::vector<Quat> col(static_cast<size_t>(n));
      for (int a = 0; a < n; ++a) {
        Quat acc = xi_(a, b) * v - q[static_cast<size_t>(a)] * dtail;
        if (a == b) acc -= v * tail;
        col[static_cast<size_t>(a)] = acc;
      }
      Jac.col(4 * b + c) = from_quats(col);
    }
  return Jac;
}

VectorField KillingField::field() const {
  return [self = *this](const ChartPoint& p) { return self.value(p); };
}

KillingField operator+(const KillingField& a, const KillingField& b) { return KillingField(a.xi_ + b.xi_); }
KillingField operator*(double s, const KillingField& a) { return KillingField(a.xi_ * s); }

std::vector<KillingField> killing_basis(int n) {
  if (n < 2) throw std::invalid_argument("killing_basis: n must be >= 2");
  const int m = n + 1;
  std::vector<KillingField> out;
  out.reserve(static_cast<size_t>(m * (2 * n + 3)));
  for (int a = 0; a < m; ++a)
    for (int u = 1; u <= 3; ++u) {
      QuatMatrix xi(m, m);
      xi(a, a) = Quat::unit(u);
      out.push_back(KillingField::make(std::move(xi)));
    }
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int u = 0; u <= 3; ++u) {
        QuatMatrix xi(m, m);
        xi(a, b) = Quat::unit(u);
        xi(b, a) = -1.0 * Quat::unit(u).conj();
        out.push_back(KillingField::make(std::move(xi)));
      }
  return out;
}

ChartPoint mobius(const QuatMatrix& M, const ChartPoint& p) {
  const int n = M.rows() - 1;
  const auto q = to_quats(p);
  Quat bottom = M(n, n);
  for (int b = 0; b < n; ++b) bottom += M(n, b) * q[static_cast<size_t>(b)];
  if (bottom.norm2() < 1e-300) throw ChartError("mobius: image lies on the hyperplane at infinity");
  const Quat inv = bottom.inverse();
  std::vector<Quat> out(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) {
    Quat top = M(a, n);
    for (int b = 0; b < n; ++b) top += M(a, b) * q[static_cast<size_t>(b)];
    out[static_cast<size_t>(a)] = top * inv;
  }
  return from_quats(out);
}

Mat mobius_differential(const QuatMatrix& M, const ChartPoint& p) {
  const int n = M.rows() - 1;
  const auto q = to_quats(p);
  Quat bottom = M(n, n);
  for (int b = 0; b < n; ++b) bottom += M(n, b) * q[static_cast<size_t>(b)];
  const Quat inv = bottom.inverse();
  const auto image = to_quats(mobius(M, p));
  Mat D(4 * n, 4 * n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < 4; ++c) {
      const Quat v = Quat::unit(c);  // tangent vector e_{4b+c}
      const Quat cv = M(n, b) * v;
      std::vector<Quat> col(static_cast<size_t>(n));
      for (int a = 0; a < n; ++a)
        col[static_cast<size_t>(a)] = (M(a, b) * v) * inv - image[static_cast<size_t>(a)] * cv * inv;
      D.col(4 * b + c) = from_quats(col);
    }
  return D;
}

QuatMatrix quat_exp(const QuatMatrix& xi, double t) {
  const Mat real = (t * xi.to_real()).exp();
  return QuatMatrix::from_real(real);
}

ChartPoint killing_flow(const KillingField& xi, double t, const ChartPoint& p) {
  return mobius(quat_exp(xi.generator(), t), p);
}

QuatMatrix transvection(const ChartPoint& p) {
  const auto q = to_quats(p);
  const int n = static_cast<int>(q.size());
  double r2 = 0.0;
  for (const auto& x : q) r2 += x.norm2();
  const double s = std::sqrt(1.0 + r2);
  // (cos(theta) - 1)/|q|^2 written without the removable singularity at q = 0.
  const double c = -1.0 / (s * (1.0 + s));
  QuatMatrix T = QuatMatrix::identity(n + 1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b)
      T(a, b) += c * (q[static_cast<size_t>(a)] * q[static_cast<size_t>(b)].conj());
    T(a, n) = (1.0 / s) * q[static_cast<size_t>(a)];
    T(n, a) = (-1.0 / s) * q[static_cast<size_t>(a)].conj();
  }
  T(n, n) = Quat::real(1.0 / s);
  return T;
}

// ---------------------------------------------------------------------------
// Metric and curvature

namespace {

// Fixed high-accuracy configuration for the normalization constant.
constexpr FdConfig kCalibrationFd{1e-2, true};

// Real 4 x 4n matrix of v -> <q, v> = sum_a conj(q_a) v_a.
Mat h_matrix(const std::vector<Quat>& q) {
  const int n = static_cast<int>(q.size());
  Mat H(4, 4 * n);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < 4; ++c) {
      const Quat h = q[static_cast<size_t>(a)].conj() * Quat::unit(c);
      H.col(4 * a + c) << h.w, h.x, h.y, h.z;
    }
  return H;
}

Mat pack_christoffel(const Christoffel& G) {
  const int d = G.dim();
  Mat out(d, d * d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i) out.block(k, i * d, 1, d) = G.upper[static_cast<size_t>(k)].row(i);
  return out;
}

}  // namespace

HpnGeometry::HpnGeometry(int n, FdConfig fd, double scale)
    : n_(n), fd_(fd), scale_(scale), std_(algebra::standard_structure(n)), model_(algebra::model_curvature(std_, 1.0)) {
  fd_.validate();
}

HpnGeometry::HpnGeometry(int n, FdConfig fd) : HpnGeometry(n, fd, 1.0) {
  // Normalize so that the scalar curvature at the origin is 4n(n+2), i.e. nu = 1.
  const HpnGeometry unit(n, kCalibrationFd, 1.0);
  const double k_unit = unit.scalar_curvature_at(Vec::Zero(4 * n));
  scale_ = k_unit / (4.0 * n * (n + 2));
}

HpnGeometry HpnGeometry::with_fd(FdConfig fd) const { return HpnGeometry(n_, fd, scale_); }

Mat HpnGeometry::unit_metric(const ChartPoint& p) const {
  const int d = dim();
  const double s2 = 1.0 + p.squaredNorm();
  // Column mu of H is the quaternion <q, e_mu> = conj(q_a) * unit(c).
  const Mat H = h_matrix(to_quats(p));
  return (s2 * Mat::Identity(d, d) - H.transpose() * H) / (s2 * s2);
}

Mat HpnGeometry::metric_at(const ChartPoint& p) const {
  check_chart_point(p, n_);
  return scale_ * unit_metric(p);
}

Christoffel christoffel_from(const std::vector<Mat>& dg, const Mat& g) {
  const int d = static_cast<int>(g.rows());
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw ChartError("metric lost positive-definiteness at chart point");
  const Mat gi = llt.solve(Mat::Identity(d, d));
  Christoffel G;
  G.upper.assign(static_cast<size_t>(d), Mat::Zero(d, d));
  // lower(l, i, j) = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
  std::vector<Mat> lower(static_cast<size_t>(d), Mat(d, d));
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        lower[static_cast<size_t>(l)](i, j) = 0.5 * (dg[static_cast<size_t>(i)](l, j) + dg[static_cast<size_t>(j)](l, i) -
                                                     dg[static_cast<size_t>(l)](i, j));
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      const double w = gi(k, l);
      if (w != 0.0) G.upper[static_cast<size_t>(k)] += w * lower[static_cast<size_t>(l)];
    }
  return G;
}

Christoffel HpnGeometry::christoffel_at(const ChartPoint& p) const {
  check_chart_point(p, n_);
  const int d = dim();
  auto metric = [this](const Vec& x) -> Mat { return scale_ * unit_metric(x); };
  std::vector<Mat> dg(static_cast<size_t>(d));
  for (int l = 0; l < d; ++l) dg[static_cast<size_t>(l)] = partial_derivative(metric, p, l, fd_);
  return christoffel_from(dg, metric(p));
}

std::vector<Mat> HpnGeometry::metric_derivatives(const ChartPoint& p) const {
  check_chart_point(p, n_);
  const int d = dim();
  const auto q = to_quats(p);
  const double s2 = 1.0 + p.squaredNorm();
  const Mat H = h_matrix(q);
  const Mat num = s2 * Mat::Identity(d, d) - H.transpose() * H;
  std::vector<Mat> out(static_cast<size_t>(d));
  for (int l = 0; l < d; ++l) {
    // H is linear in q, so d_l H = H(e_l).
    const Mat dH = h_matrix(to_quats(Vec::Unit(d, l)));
    const Mat dnum = 2.0 * p(l) * Mat::Identity(d, d) - dH.transpose() * H - H.transpose() * dH;
    out[static_cast<size_t>(l)] = scale_ * (dnum / (s2 * s2) - 4.0 * p(l) * num / (s2 * s2 * s2));
  }
  return out;
}

Christoffel HpnGeometry::christoffel_exact_at(const ChartPoint& p) const {
  return christoffel_from(metric_derivatives(p), metric_at(p));
}

CurvatureTensor riemann_from(const std::function<Christoffel(const Vec&)>& christoffel, const Mat& g, const Vec& p,
                             const FdConfig& fd) {
  const int d = static_cast<int>(p.size());
  const Christoffel G = christoffel(p);
  auto packed = [&christoffel](const Vec& x) -> Mat { return pack_christoffel(christoffel(x)); };
  std::vector<Mat> dG(static_cast<size_t>(d));
  for (int m = 0; m < d; ++m) dG[static_cast<size_t>(m)] = partial_derivative(packed, p, m, fd);
  auto gam = [&](int k, int i, int j) { return G.upper[static_cast<size_t>(k)](i, j); };
  auto dgam = [&](int m, int k, int i, int j) { return dG[static_cast<size_t>(m)](k, i * d + j); };
  // Rup(rho, sigma, mu, nu) = R^rho_{sigma mu nu}; R(d_mu, d_nu) d_sigma = R^rho_{sigma mu nu} d_rho.
  CurvatureTensor R(d);
  Vec rup(d);
  for (int mu = 0; mu < d; ++mu)
    for (int nu = mu + 1; nu < d; ++nu)
      for (int sigma = 0; sigma < d; ++sigma) {
        for (int rho = 0; rho < d; ++rho) {
          double v = dgam(mu, rho, nu, sigma) - dgam(nu, rho, mu, sigma);
          for (int l = 0; l < d; ++l) v += gam(rho, mu, l) * gam(l, nu, sigma) - gam(rho, nu, l) * gam(l, mu, sigma);
          rup(rho) = v;
        }
        const Vec lowered = g * rup;
        for (int tau = 0; tau < d; ++tau) {
          R(mu, nu, sigma, tau) = lowered(tau);
          R(nu, mu, sigma, tau) = -lowered(tau);
        }
      }
  return R;
}

CurvatureTensor HpnGeometry::riemann_at(const ChartPoint& p) const {
  return riemann_from([this](const Vec& x) { return christoffel_at(x); }, metric_at(p), p, fd_);
}

Mat HpnGeometry::ricci_at(const ChartPoint& p) const {
  return riemann_at(p).ricci(metric_at(p).inverse());
}

double HpnGeometry::scalar_curvature_at(const ChartPoint& p) const {
  return riemann_at(p).scalar(metric_at(p).inverse());
}

Frame HpnGeometry::frame_at(const ChartPoint& p) const {
  check_chart_point(p, n_);
  // The transvection is an isometry fixing Q, so its differential at the origin carries the
  // standard orthonormal admissible frame to one at p.
  const Mat D = mobius_differential(transvection(p), Vec::Zero(dim()));
  const Mat D_inv = D.inverse();
  Frame f;
  f.E = D / std::sqrt(scale_);
  f.E_inv = std::sqrt(scale_) * D_inv;
  for (int i = 0; i < 3; ++i) f.J[static_cast<size_t>(i)] = D * std_.J(i) * D_inv;
  return f;
}

Mat HpnGeometry::frame_differential(const ChartPoint& p, const Vec& w) const {
  check_chart_point(p, n_);
  // The transvection frame is D(v) = s v + k(s) q <q, v> with k(s) = s / (1 + s).
  const int d = dim();
  const double s = std::sqrt(1.0 + p.squaredNorm());
  const double ds = p.dot(w) / s;
  const double k = s / (1.0 + s);
  const double dk = ds / ((1.0 + s) * (1.0 + s));
  const auto q = to_quats(p);
  const auto dq = to_quats(w);
  const Mat H = h_matrix(q);
  const Mat dH = h_matrix(dq);
  // left multiplication by q_a, stacked over a
  Mat Lq(d, 4), Ldq(d, 4);
  for (int a = 0; a < n_; ++a) {
    Lq.block(4 * a, 0, 4, 4) = left_mult_matrix(q[static_cast<size_t>(a)]);
    Ldq.block(4 * a, 0, 4, 4) = left_mult_matrix(dq[static_cast<size_t>(a)]);
  }
  const Mat dD = ds * Mat::Identity(d, d) + dk * Lq * H + k * (Ldq * H + Lq * dH);
  return dD / std::sqrt(scale_);
}

// ---------------------------------------------------------------------------
// Covariant calculus

Mat HpnGeometry::cov_jacobian(const VectorField& X, const ChartPoint& p) const {
  const int d = dim();
  const Christoffel G = christoffel_at(p);
  const Vec x = X(p);
  Mat N(d, d);
  for (int i = 0; i < d; ++i) N.col(i) = partial_derivative(X, p, i, fd_);
  for (int k = 0; k < d; ++k) N.row(k) += (G.upper[static_cast<size_t>(k)] * x).transpose();
  return N;
}

Vec HpnGeometry::cov_deriv_vector(const VectorField& X, const ChartPoint& p, const Vec& Y) const {
  const Christoffel G = christoffel_at(p);
  return directional_derivative(X, p, Y, fd_) + G.apply(Y, X(p));
}

Mat HpnGeometry::nabla_form(const VectorField& X, const ChartPoint& p) const {
  return cov_jacobian(X, p).transpose() * metric_at(p);
}

Mat HpnGeometry::cov_deriv_form(const FormField& psi, const ChartPoint& p, const Vec& Y) const {
  const Christoffel G = christoffel_at(p);
  const Mat GY = G.along(Y);
  const Mat val = psi(p);
  return directional_derivative(psi, p, Y, fd_) - GY.transpose() * val - val * GY;
}

std::vector<Mat> HpnGeometry::cov_deriv_form_all(const FormField& psi, const ChartPoint& p) const {
  const int d = dim();
  const Christoffel G = christoffel_at(p);
  const Mat val = psi(p);
  std::vector<Mat> out(static_cast<size_t>(d));
  for (int l = 0; l < d; ++l) {
    const Mat Gl = G.along(Vec::Unit(d, l));
    out[static_cast<size_t>(l)] = partial_derivative(psi, p, l, fd_) - Gl.transpose() * val - val * Gl;
  }
  return out;
}

std::vector<std::vector<Mat>> HpnGeometry::second_cov_deriv_form(const FormField& psi, const ChartPoint& p) const {
  const int d = dim();
  auto packed = [&](const Vec& x) -> Mat {
    const auto all = cov_deriv_form_all(psi, x);
    Mat out(d, d * d);
    for (int l = 0; l < d; ++l) out.block(0, l * d, d, d) = all[static_cast<size_t>(l)];
    return out;
  };
  const Mat T = packed(p);
  const Christoffel G = christoffel_at(p);
  auto block = [&](const Mat& m, int l) { return m.block(0, l * d, d, d); };
  std::vector<std::vector<Mat>> S(static_cast<size_t>(d), std::vector<Mat>(static_cast<size_t>(d)));
  for (int k = 0; k < d; ++k) {
    const Mat dT = partial_derivative(packed, p, k, fd_);
    const Mat Gk = G.along(Vec::Unit(d, k));
    for (int l = 0; l < d; ++l) {
      Mat s = block(dT, l) - Gk.transpose() * block(T, l) - block(T, l) * Gk;
      for (int a = 0; a < d; ++a) {
        const double w = G.upper[static_cast<size_t>(a)](k, l);
        if (w != 0.0) s -= w * block(T, a);
      }
      S[static_cast<size_t>(k)][static_cast<size_t>(l)] = s;
    }
  }
  return S;
}

Mat HpnGeometry::exterior_d(const CovectorField& alpha, const ChartPoint& p) const {
  const int d = dim();
  const Christoffel G = christoffel_at(p);
  const Vec a = alpha(p);
  Mat nab(d, d);  // nab(mu, nu) = nabla_mu alpha_nu
  for (int mu = 0; mu < d; ++mu) nab.row(mu) = partial_derivative(alpha, p, mu, fd_).transpose();
  for (int k = 0; k < d; ++k) nab -= a(k) * G.upper[static_cast<size_t>(k)];
  return nab - nab.transpose();
}

ThreeForm HpnGeometry::exterior_d(const FormField& psi, const ChartPoint& p) const {
  const int d = dim();
  const auto nab = cov_deriv_form_all(psi, p);
  ThreeForm out(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        out(a, b, c) = nab[static_cast<size_t>(a)](b, c) - nab[static_cast<size_t>(b)](a, c) + nab[static_cast<size_t>(c)](a, b);
  return out;
}

Vec HpnGeometry::codifferential(const FormField& psi, const ChartPoint& p) const {
  const int d = dim();
  const auto nab = cov_deriv_form_all(psi, p);
  const Mat gi = metric_at(p).inverse();
  Vec delta = Vec::Zero(d);
  for (int l = 0; l < d; ++l) delta -= nab[static_cast<size_t>(l)].transpose() * gi.col(l);
  return gi * delta;
}

Mat HpnGeometry::laplacian(const FormField& psi, const ChartPoint& p) const {
  const int d = dim();
  const auto S = second_cov_deriv_form(psi, p);
  const Mat gi = metric_at(p).inverse();
  auto s = [&](int k, int l) -> const Mat& { return S[static_cast<size_t>(k)][static_cast<size_t>(l)]; };
  // nabla_k (delta psi)_nu = -g^{lm} (nabla^2 psi)(k, l)_{m nu}
  Mat nab_delta = Mat::Zero(d, d);  // (k, nu)
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) nab_delta.row(k) -= (s(k, l).transpose() * gi.col(l)).transpose();
  const Mat d_delta = nab_delta - nab_delta.transpose();
  // (delta d psi)_{bc} = -g^{ka} (S[k][a]_{bc} - S[k][b]_{ac} + S[k][c]_{ab})
  Mat delta_d = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k)
    for (int a = 0; a < d; ++a) {
      const double w = gi(k, a);
      if (w == 0.0) continue;
      delta_d -= w * s(k, a);
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) delta_d(b, c) -= w * (-s(k, b)(a, c) + s(k, c)(a, b));
    }
  return d_delta + delta_d;
}

Mat HpnGeometry::q_of_R_at(const Mat& psi, const ChartPoint& p) const {
  const Frame f = frame_at(p);
  const TwoForm hat = TwoForm::skew_part(f.form_to_frame(psi));
  return f.form_from_frame(algebra::q_of_R(model_, hat, std_).matrix());
}

Mat HpnGeometry::weitzenbock_laplacian(const FormField& psi, const ChartPoint& p) const {
  const int d = dim();
  const auto S = second_cov_deriv_form(psi, p);
  const Mat gi = metric_at(p).inverse();
  Mat rough = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      if (gi(k, l) != 0.0) rough -= gi(k, l) * S[static_cast<size_t>(k)][static_cast<size_t>(l)];
  return rough + q_of_R_at(psi(p), p);
}

// ---------------------------------------------------------------------------
// Residuals

double HpnGeometry::metric_compatibility_defect(const ChartPoint& p) const {
  const int d = dim();
  const Christoffel G = christoffel_at(p);
  const Mat g = metric_at(p);
  auto metric = [this](const Vec& x) -> Mat { return metric_at(x); };
  double m = 0.0;
  for (int l = 0; l < d; ++l) {
    const Mat Gl = G.along(Vec::Unit(d, l));
    const Mat nab = partial_derivative(metric, p, l, fd_) - Gl.transpose() * g - g * Gl;
    m = std::max(m, nab.cwiseAbs().maxCoeff());
  }
  return m;
}

double HpnGeometry::killing_defect(const VectorField& X, const ChartPoint& p) const {
  const Frame f = frame_at(p);
  const Mat hat = f.form_to_frame(nabla_form(X, p));
  return (0.5 * (hat + hat.transpose())).norm();
}

double HpnGeometry::konstant_residual(const VectorField& X, const ChartPoint& p, const Vec& Y_frame) const {
  const Frame f = frame_at(p);
  const Vec Y = f.from_frame(Y_frame);
  const Christoffel G = christoffel_at(p);
  const Mat GY = G.along(Y);
  auto jac = [&](const Vec& x) -> Mat { return cov_jacobian(X, x); };
  const Mat N = jac(p);
  const Mat nabla_N = directional_derivative(jac, p, Y, fd_) + GY * N - N * GY;
  const Vec X_hat = f.to_frame(X(p));
  const Mat R_form = model_.form(Y_frame, X_hat);
  const Mat R_endo = algebra::form_to_endomorphism(std_, TwoForm::skew_part(R_form));
  return (f.endo_to_frame(nabla_N) - R_endo).norm();
}

double HpnGeometry::konstant_residual(const KillingField& xi, const ChartPoint& p, const Vec& Y_frame) const {
  return konstant_residual(xi.field(), p, Y_frame);
}

double HpnGeometry::q_parallelism_defect(const ChartPoint& p, const Vec& Y_frame) const {
  const Frame f = frame_at(p);
  const Vec Y = f.from_frame(Y_frame);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    FormField omega = [this, i](const Vec& x) -> Mat { return frame_at(x).J[static_cast<size_t>(i)].transpose() * metric_at(x); };
    const TwoForm hat = TwoForm::skew_part(f.form_to_frame(cov_deriv_form(omega, p, Y)));
    const auto parts = algebra::decompose(hat, std_);
    worst = std::max(worst, algebra::form_norm(std_, hat - parts.s2h));
  }
  return worst;
}

double HpnGeometry::form_norm_at(const Mat& psi, const ChartPoint& p) const {
  const Frame f = frame_at(p);
  return std::sqrt(0.5 * f.form_to_frame(psi).squaredNorm());
}

double HpnGeometry::vector_norm_at(const Vec& v, const ChartPoint& p) const {
  return std::sqrt(std::max(0.0, v.dot(metric_at(p) * v)));
}

}  // namespace qk::geometry
