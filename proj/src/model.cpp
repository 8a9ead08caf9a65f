#include "barriertop/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// sech^2 u = sum c_{2m} u^{2m}; c from the tanh' recurrence, exact rationals in double
std::vector<double> sech2_series(int max_even_order) {
  int kmax = max_even_order / 2;
  std::vector<double> t(2 * kmax + 2, 0.0);  // tanh coefficients, odd slots
  t[1] = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    double s = 0.0;
    for (int i = 1; i <= 2 * k - 1; i += 2) s += t[i] * t[2 * k - i];
    t[2 * k + 1] = -s / double(2 * k + 1);
  }
  std::vector<double> c(kmax + 1);
  for (int m = 0; m <= kmax; ++m) c[m] = double(2 * m + 1) * t[2 * m + 1];
  return c;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// natural cubic spline second derivatives for the user table
std::vector<double> spline_m(const std::vector<double>& x, const std::vector<double>& v) {
  size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i) {
    double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
    a[i] = hl / 6.0;
    b[i] = (hl + hr) / 3.0;
    c[i] = hr / 6.0;
    d[i] = (v[i + 1] - v[i]) / hr - (v[i] - v[i - 1]) / hl;
  }
  // thomas sweep on the interior
  for (size_t i = 2; i + 1 < n; ++i) {
    double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  for (size_t i = n - 2; i >= 1; --i) {
    m[i] = (d[i] - c[i] * (i + 2 < n ? m[i + 1] : 0.0)) / b[i];
    if (i == 1) break;
  }
  return m;
}

double spline_eval(const std::vector<double>& xs, const std::vector<double>& vs,
                   const std::vector<double>& ms, double x) {
  if (xs.empty()) return 0.0;
  if (x <= xs.front() || x >= xs.back()) return 0.0;  // barrier tables decay to 0
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  size_t i = size_t(it - xs.begin()) - 1;
  double h = xs[i + 1] - xs[i];
  double A = (xs[i + 1] - x) / h, B = (x - xs[i]) / h;
  return A * vs[i] + B * vs[i + 1] +
         ((A * A * A - A) * ms[i] + (B * B * B - B) * ms[i + 1]) * h * h / 6.0;
}

double table_scale(const Potential& p) { return p.table_x.back() - p.table_x.front(); }

double table_eval(const Potential& p, double x) {
  // recomputed per call; tables are short and assemblies touch them once
  auto ms = spline_m(p.table_x, p.table_v);
  return spline_eval(p.table_x, p.table_v, ms, x);
}

// centered 4th-order first/second differences of a scalar callable
template <class F>
double fd1(const F& f, double x, double s) {
  return (-f(x + 2 * s) + 8 * f(x + s) - 8 * f(x - s) + f(x - 2 * s)) / (12 * s);
}
template <class F>
double fd2c(const F& f, double x, double s) {
  return (-f(x + 2 * s) + 16 * f(x + s) - 30 * f(x) + 16 * f(x - s) - f(x - 2 * s)) /
         (12 * s * s);
}

void require_dim(const Potential& p, const char* op) {
  if ((p.family == Family::sech2_barrier || p.family == Family::user_table) && p.dim != 1)
    throw Error(ErrorCode::DimensionUnsupported, std::string(op) + ": family is 1-d only");
}

double poly_eval(const std::vector<Monomial>& terms, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (const auto& t : terms) {
    double m = t.coef;
    for (size_t j = 0; j < t.beta.size(); ++j)
      for (int r = 0; r < t.beta[j]; ++r) m *= x[long(j)];
    s += m;
  }
  return s;
}

cplx poly_eval(const std::vector<Monomial>& terms, const Eigen::VectorXcd& x) {
  cplx s = 0.0;
  for (const auto& t : terms) {
    cplx m = t.coef;
    for (size_t j = 0; j < t.beta.size(); ++j)
      for (int r = 0; r < t.beta[j]; ++r) m *= x[long(j)];
    s += m;
  }
  return s;
}

}  // namespace

double Potential::sector_half_angle() const {
  switch (family) {
    case Family::sech2_barrier: return kPi / 4.0 - 0.01;  // cosh poles on the imaginary axis
    case Family::gaussian_barrier:
    case Family::anisotropic_gaussian:
    case Family::quadratic_model: return kPi / 2.0;  // entire
    case Family::user_table: return 0.0;
  }
  return 0.0;
}

double Potential::decay_exponent() const {
  // super-exponential / exponential families coded as a large finite value;
  // only the short-range condition (> 1) is ever tested
  switch (family) {
    case Family::sech2_barrier:
    case Family::gaussian_barrier:
    case Family::anisotropic_gaussian: return 1e9;
    case Family::user_table: return 1e9;  // compactly supported after the table ends
    case Family::quadratic_model: return -1.0;
  }
  return -1.0;
}

Potential make_sech2(double E0, double w) {
  Potential p;
  p.family = Family::sech2_barrier;
  p.dim = 1;
  p.height = E0;
  p.widths = {w};
  return p;
}

Potential make_gaussian(double E0, double w, int dim) {
  Potential p;
  p.family = Family::gaussian_barrier;
  p.dim = dim;
  p.height = E0;
  p.widths = {w};
  return p;
}

Potential make_anisotropic_gaussian(double E0, const std::vector<double>& a) {
  Potential p;
  p.family = Family::anisotropic_gaussian;
  p.dim = int(a.size());
  p.height = E0;
  p.widths = a;
  return p;
}

Potential make_quadratic(double E0, const std::vector<double>& lambda,
                         std::vector<Monomial> perturbation) {
  Potential p;
  p.family = Family::quadratic_model;
  p.dim = int(lambda.size());
  p.height = E0;
  p.widths = lambda;
  p.perturbation = std::move(perturbation);
  for (const auto& t : p.perturbation) {
    int deg = std::accumulate(t.beta.begin(), t.beta.end(), 0);
    if (int(t.beta.size()) != p.dim || deg < 3)
      throw Error(ErrorCode::ConfigError, "perturbation monomials must have degree >= 3");
  }
  return p;
}

Potential make_table(std::vector<double> x, std::vector<double> v) {
  if (x.size() != v.size() || x.size() < 5)
    throw Error(ErrorCode::ConfigError, "table needs >= 5 matching samples");
  for (size_t i = 1; i < x.size(); ++i)
    if (x[i] <= x[i - 1]) throw Error(ErrorCode::ConfigError, "table x not increasing");
  Potential p;
  p.family = Family::user_table;
  p.dim = 1;
  p.table_x = std::move(x);
  p.table_v = std::move(v);
  p.height = *std::max_element(p.table_v.begin(), p.table_v.end());
  return p;
}

double eval_potential(const Potential& p, const Eigen::VectorXd& x) {
  require_dim(p, "eval");
  switch (p.family) {
    case Family::sech2_barrier: {
      double u = x[0] / p.widths[0];
      double s = 1.0 / std::cosh(u);
      return p.height * s * s;
    }
    case Family::gaussian_barrier:
      return p.height * std::exp(-x.squaredNorm() / (p.widths[0] * p.widths[0]));
    case Family::anisotropic_gaussian: {
      double q = 0.0;
      for (int j = 0; j < p.dim; ++j) q += p.widths[j] * x[j] * x[j];
      return p.height * std::exp(-q);
    }
    case Family::quadratic_model: {
      double s = p.height;
      for (int j = 0; j < p.dim; ++j) s -= 0.25 * p.widths[j] * p.widths[j] * x[j] * x[j];
      return s + poly_eval(p.perturbation, x);
    }
    case Family::user_table: return table_eval(p, x[0]);
  }
  return 0.0;
}

cplx eval_potential(const Potential& p, const Eigen::VectorXcd& x) {
  require_dim(p, "eval");
  double delta = p.sector_half_angle();
  for (long j = 0; j < x.size(); ++j) {
    cplx z = x[j];
    if (std::abs(z) > 1e-300 && std::abs(std::arg(z)) > delta &&
        std::abs(std::arg(-z)) > delta)
      throw Error(ErrorCode::SectorViolation,
                  "argument leaves the analyticity sector (half-angle " +
                      std::to_string(delta) + ")");
  }
  switch (p.family) {
    case Family::sech2_barrier: {
      cplx u = x[0] / p.widths[0];
      // poles of sech^2 at u = i pi (k + 1/2)
      double k = std::round(u.imag() / kPi - 0.5);
      cplx pole(0.0, kPi * (k + 0.5));
      if (std::abs(u - pole) < 1e-6 || std::abs(u + pole) < 1e-6)
        throw Error(ErrorCode::PoleProximity, "within 1e-6 of a cosh zero");
      cplx s = 1.0 / std::cosh(u);
      return p.height * s * s;
    }
    case Family::gaussian_barrier: {
      cplx q = 0.0;
      for (long j = 0; j < x.size(); ++j) q += x[j] * x[j];
      return p.height * std::exp(-q / (p.widths[0] * p.widths[0]));
    }
    case Family::anisotropic_gaussian: {
      cplx q = 0.0;
      for (int j = 0; j < p.dim; ++j) q += p.widths[j] * x[j] * x[j];
      return p.height * std::exp(-q);
    }
    case Family::quadratic_model: {
      cplx s = p.height;
      for (int j = 0; j < p.dim; ++j) s -= 0.25 * p.widths[j] * p.widths[j] * x[j] * x[j];
      return s + poly_eval(p.perturbation, x);
    }
    case Family::user_table:
      if (x[0].imag() != 0.0)
        throw Error(ErrorCode::SectorViolation, "tabulated data has no continuation");
      return table_eval(p, x[0].real());
  }
  return 0.0;
}

double eval_potential1(const Potential& p, double x) {
  Eigen::VectorXd v(1);
  v << x;
  return eval_potential(p, v);
}

cplx eval_potential1(const Potential& p, cplx x) {
  Eigen::VectorXcd v(1);
  v << x;
  return eval_potential(p, v);
}

double barrier_deficit(const Potential& p, const Eigen::VectorXd& x) {
  require_dim(p, "deficit");
  switch (p.family) {
    case Family::sech2_barrier: {
      double t = std::tanh(x[0] / p.widths[0]);
      return p.height * t * t;
    }
    case Family::gaussian_barrier:
      return -p.height * std::expm1(-x.squaredNorm() / (p.widths[0] * p.widths[0]));
    case Family::anisotropic_gaussian: {
      double q = 0.0;
      for (int j = 0; j < p.dim; ++j) q += p.widths[j] * x[j] * x[j];
      return -p.height * std::expm1(-q);
    }
    case Family::quadratic_model: {
      double s = 0.0;
      for (int j = 0; j < p.dim; ++j) s += 0.25 * p.widths[j] * p.widths[j] * x[j] * x[j];
      return s - poly_eval(p.perturbation, x);
    }
    case Family::user_table: return p.height - table_eval(p, x[0]);
  }
  return 0.0;
}

double barrier_deficit1(const Potential& p, double x) {
  Eigen::VectorXd v(1);
  v << x;
  return barrier_deficit(p, v);
}

Eigen::VectorXd grad_potential(const Potential& p, const Eigen::VectorXd& x) {
  require_dim(p, "grad");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p.dim);
  switch (p.family) {
    case Family::sech2_barrier: {
      double w = p.widths[0], u = x[0] / w;
      double s = 1.0 / std::cosh(u);
      g[0] = -2.0 * p.height / w * s * s * std::tanh(u);
      break;
    }
    case Family::gaussian_barrier: {
      double v = eval_potential(p, x);
      g = (-2.0 / (p.widths[0] * p.widths[0])) * v * x;
      break;
    }
    case Family::anisotropic_gaussian: {
      double v = eval_potential(p, x);
      for (int j = 0; j < p.dim; ++j) g[j] = -2.0 * p.widths[j] * x[j] * v;
      break;
    }
    case Family::quadratic_model: {
      for (int j = 0; j < p.dim; ++j) g[j] = -0.5 * p.widths[j] * p.widths[j] * x[j];
      for (const auto& t : p.perturbation)
        for (int j = 0; j < p.dim; ++j) {
          if (t.beta[j] == 0) continue;
          double m = t.coef * t.beta[j];
          for (int l = 0; l < p.dim; ++l)
            for (int r = 0; r < t.beta[l] - (l == j ? 1 : 0); ++r) m *= x[l];
          g[j] += m;
        }
      break;
    }
    case Family::user_table: {
      double s = 1e-4 * table_scale(p);
      g[0] = fd1([&](double t) { return table_eval(p, t); }, x[0], s);
      break;
    }
  }
  return g;
}

Eigen::MatrixXd hess_potential(const Potential& p, const Eigen::VectorXd& x) {
  require_dim(p, "hess");
  Eigen::MatrixXd hmat = Eigen::MatrixXd::Zero(p.dim, p.dim);
  switch (p.family) {
    case Family::sech2_barrier: {
      double w = p.widths[0], u = x[0] / w;
      double s2 = 1.0 / (std::cosh(u) * std::cosh(u));
      double t2 = std::tanh(u) * std::tanh(u);
      hmat(0, 0) = -2.0 * p.height / (w * w) * s2 * (s2 - 2.0 * t2);
      break;
    }
    case Family::gaussian_barrier: {
      double v = eval_potential(p, x);
      double iw2 = 1.0 / (p.widths[0] * p.widths[0]);
      hmat = (4.0 * iw2 * iw2) * v * (x * x.transpose());
      hmat.diagonal().array() -= 2.0 * iw2 * v;
      break;
    }
    case Family::anisotropic_gaussian: {
      double v = eval_potential(p, x);
      for (int j = 0; j < p.dim; ++j)
        for (int k = 0; k < p.dim; ++k) {
          hmat(j, k) = 4.0 * p.widths[j] * p.widths[k] * x[j] * x[k] * v;
          if (j == k) hmat(j, j) -= 2.0 * p.widths[j] * v;
        }
      break;
    }
    case Family::quadratic_model: {
      for (int j = 0; j < p.dim; ++j) hmat(j, j) = -0.5 * p.widths[j] * p.widths[j];
      for (const auto& t : p.perturbation)
        for (int j = 0; j < p.dim; ++j)
          for (int k = 0; k < p.dim; ++k) {
            std::vector<int> b = t.beta;
            if (b[j] == 0) continue;
            double m = t.coef * b[j];
            b[j] -= 1;
            if (b[k] == 0) continue;
            m *= b[k];
            b[k] -= 1;
            for (int l = 0; l < p.dim; ++l)
              for (int r = 0; r < b[l]; ++r) m *= x[l];
            hmat(j, k) += m;
          }
      break;
    }
    case Family::user_table: {
      double s = 1e-4 * table_scale(p);
      hmat(0, 0) = fd2c([&](double t) { return table_eval(p, t); }, x[0], s);
      break;
    }
  }
  return hmat;
}

BarrierData barrier_data(const Potential& p) {
  BarrierData b;
  b.apex = Eigen::VectorXd::Zero(p.dim);
  if (p.family == Family::user_table) {
    // refine the sample argmax with a local quadratic fit
    size_t i = size_t(std::max_element(p.table_v.begin(), p.table_v.end()) -
                      p.table_v.begin());
    if (i == 0 || i + 1 == p.table_x.size())
      throw Error(ErrorCode::DegenerateMaximum, "maximum on the table boundary");
    double xl = p.table_x[i - 1], xc = p.table_x[i], xr = p.table_x[i + 1];
    double vl = p.table_v[i - 1], vc = p.table_v[i], vr = p.table_v[i + 1];
    double num = (xc - xl) * (xc - xl) * (vc - vr) - (xc - xr) * (xc - xr) * (vc - vl);
    double den = (xc - xl) * (vc - vr) - (xc - xr) * (vc - vl);
    if (std::abs(den) < 1e-300)
      throw Error(ErrorCode::DegenerateMaximum, "flat sample triple at the maximum");
    b.apex[0] = xc - 0.5 * num / den;
  }
  b.energy = eval_potential(p, b.apex);
  Eigen::MatrixXd hmat = hess_potential(p, b.apex);
  // built-in hessians are diagonal at the apex; sorting by eigenvalue gives a
  // coordinate permutation, which keeps taylor_field exact
  std::vector<int> idx(p.dim);
  for (int j = 0; j < p.dim; ++j) idx[j] = j;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int c) { return -hmat(a, a) < -hmat(c, c); });
  b.lambda.resize(p.dim);
  b.axes = Eigen::MatrixXd::Zero(p.dim, p.dim);
  for (int j = 0; j < p.dim; ++j) {
    double ev = hmat(idx[j], idx[j]);
    if (ev >= -1e-10)
      throw Error(ErrorCode::DegenerateMaximum,
                  "hessian eigenvalue " + std::to_string(ev) + " not negative");
    b.lambda[j] = std::sqrt(-2.0 * ev);
    b.axes(idx[j], j) = 1.0;
  }
  // off-diagonal entries must vanish for the permutation shortcut to be exact
  for (int j = 0; j < p.dim; ++j)
    for (int k = 0; k < p.dim; ++k)
      if (j != k && std::abs(hmat(j, k)) > 1e-12 * hmat.norm())
        throw Error(ErrorCode::DegenerateMaximum, "non-diagonal apex hessian");
  return b;
}

Eigen::VectorXd hamiltonian_field(const Potential& p, const Eigen::VectorXd& state) {
  int n = p.dim;
  Eigen::VectorXd f(2 * n);
  f.head(n) = 2.0 * state.tail(n);
  f.tail(n) = -grad_potential(p, state.head(n));
  return f;
}

Eigen::MatrixXd hamiltonian_jacobian(const Potential& p, const Eigen::VectorXd& state) {
  int n = p.dim;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = 2.0 * Eigen::MatrixXd::Identity(n, n);
  j.bottomLeftCorner(n, n) = -hess_potential(p, state.head(n));
  return j;
}

double taylor_coefficient(const Potential& p, const std::vector<int>& beta) {
  if (int(beta.size()) != p.dim)
    throw Error(ErrorCode::ConfigError, "beta size mismatch");
  // map principal coordinates back to original ones through the axes permutation
  BarrierData b = barrier_data(p);
  std::vector<int> bo(p.dim, 0);
  for (int j = 0; j < p.dim; ++j) {
    int orig = 0;
    for (int i = 0; i < p.dim; ++i)
      if (b.axes(i, j) != 0.0) orig = i;
    bo[orig] = beta[j];
  }
  switch (p.family) {
    case Family::sech2_barrier: {
      int m = bo[0];
      if (m % 2 == 1) return 0.0;
      auto c = sech2_series(m);
      return p.height * c[m / 2] / std::pow(p.widths[0], m);
    }
    case Family::gaussian_barrier:
    case Family::anisotropic_gaussian: {
      double v = p.height;
      for (int j = 0; j < p.dim; ++j) {
        if (bo[j] % 2 == 1) return 0.0;
        int m = bo[j] / 2;
        double a = p.family == Family::gaussian_barrier
                       ? 1.0 / (p.widths[0] * p.widths[0])
                       : p.widths[j];
        v *= std::pow(-a, m) / factorial(m);
      }
      return v;
    }
    case Family::quadratic_model: {
      int deg = std::accumulate(bo.begin(), bo.end(), 0);
      double v = 0.0;
      if (deg == 0) v = p.height;
      if (deg == 2)
        for (int j = 0; j < p.dim; ++j)
          if (bo[j] == 2) v = -0.25 * p.widths[j] * p.widths[j];
      for (const auto& t : p.perturbation)
        if (t.beta == bo) v += t.coef;
      return v;
    }
    case Family::user_table: {
      // finite differences only go so far; degree 4 is the documented limit
      int m = bo[0];
      if (m > 4)
        throw Error(ErrorCode::ConfigError, "tabulated Taylor data limited to order 4");
      double s = 1e-4 * table_scale(p);
      auto f = [&](double t) { return table_eval(p, t + b.apex[0]); };
      double d = 0.0;
      switch (m) {
        case 0: d = f(0.0); break;
        case 1: d = fd1(f, 0.0, s); break;
        case 2: d = fd2c(f, 0.0, s); break;
        case 3:
          d = (f(2 * s) - 2 * f(s) + 2 * f(-s) - f(-2 * s)) / (2 * s * s * s);
          break;
        case 4:
          d = (f(2 * s) - 4 * f(s) + 6 * f(0) - 4 * f(-s) + f(-2 * s)) / (s * s * s * s);
          break;
      }
      return d / factorial(m);
    }
  }
  return 0.0;
}

namespace {

void enumerate_beta(int dim, int degree, std::vector<int>& cur, int pos,
                    std::vector<std::vector<int>>& out) {
  if (pos == dim - 1) {
    cur[pos] = degree;
    out.push_back(cur);
    return;
  }
  for (int d = 0; d <= degree; ++d) {
    cur[pos] = d;
    enumerate_beta(dim, degree - d, cur, pos + 1, out);
  }
}

std::vector<std::vector<int>> all_beta(int dim, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dim, 0);
  enumerate_beta(dim, degree, cur, 0, out);
  return out;
}

}  // namespace

std::vector<PolyField> taylor_field(const Potential& p, int K) {
  if (K < 2) throw Error(ErrorCode::ConfigError, "K >= 2 required");
  int n = p.dim;
  std::vector<PolyField> fields;
  for (int k = 2; k <= K; ++k) {
    PolyField fk;
    fk.degree = k;
    fk.comp.assign(2 * n, {});
    // G_k = (0, -grad of the degree-(k+1) Taylor piece of V)
    for (const auto& beta : all_beta(n, k + 1)) {
      double c = taylor_coefficient(p, beta);
      if (c == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        if (beta[j] == 0) continue;
        Monomial m;
        m.coef = -c * beta[j];
        m.beta = beta;
        m.beta[j] -= 1;
        fk.comp[n + j].push_back(m);
      }
    }
    fields.push_back(std::move(fk));
  }
  return fields;
}

}  // namespace bt
