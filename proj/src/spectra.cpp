#include "bandspike/spectra.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include <lapacke.h>

#include "bandspike/errors.hpp"

namespace bandspike {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd real_eigen(Eigen::MatrixXd a, bool vectors, Eigen::MatrixXd* out) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n, a.data(), n, w.data());
  if (info < 0) throw ArgumentError("dsyevd: illegal argument " + std::to_string(-info));
  if (info > 0) {
    throw NumericalError("dsyevd failed to converge (info=" + std::to_string(info) +
                         ", n=" + std::to_string(n) + ")");
  }
  if (out) *out = std::move(a);
  return w;
}

Eigen::VectorXd complex_eigen(Eigen::MatrixXcd a, bool vectors, Eigen::MatrixXcd* out) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                     reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
  if (info < 0) throw ArgumentError("zheevd: illegal argument " + std::to_string(-info));
  if (info > 0) {
    throw NumericalError("zheevd failed to converge (info=" + std::to_string(info) +
                         ", n=" + std::to_string(n) + ")");
  }
  if (out) *out = std::move(a);
  return w;
}

void require_unit(const Eigen::VectorXd& u) {
  if (std::abs(u.norm() - 1.0) > 1e-10) {
    throw ArgumentError("vector state needs a unit vector (norm " + std::to_string(u.norm()) + ")");
  }
}

// Some OpenBLAS builds select kernels that return garbage eigenvectors on
// CPUs they misdetect.
bool lapack_healthy() {
  constexpr int n = 200;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = std::sin(0.37 * (i + 1) * (j + 1) + 0.11 * (i - j));
  }
  Eigen::MatrixXd v;
  Eigen::VectorXd w;
  try {
    w = real_eigen(a, true, &v);
  } catch (const std::exception&) {
    return false;
  }
  const double scale = 1.0 + w.cwiseAbs().maxCoeff();
  const double residual = (a * v - v * w.asDiagonal()).colwise().norm().maxCoeff();
  const double orth = (v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  return residual <= 1e-10 * scale && orth <= 1e-10;
}

template <class Matrix>
Eigen::VectorXd eigen_fallback(const Matrix& a, bool vectors, Matrix* out) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, vectors ? Eigen::ComputeEigenvectors
                                                          : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Eigen solver failed to converge (n=" + std::to_string(a.rows()) + ")");
  }
  if (out) *out = solver.eigenvectors();
  return solver.eigenvalues();
}

Eigen::VectorXd solve(const Eigen::MatrixXd& a, bool vectors, Eigen::MatrixXd* out) {
  if (eigen_backend() == EigenBackend::Lapack) return real_eigen(a, vectors, out);
  return eigen_fallback(a, vectors, out);
}

Eigen::VectorXd solve(const Eigen::MatrixXcd& a, bool vectors, Eigen::MatrixXcd* out) {
  if (eigen_backend() == EigenBackend::Lapack) return complex_eigen(a, vectors, out);
  return eigen_fallback(a, vectors, out);
}

}  // namespace

EigenBackend eigen_backend() {
  static const EigenBackend backend = lapack_healthy() ? EigenBackend::Lapack : EigenBackend::Eigen;
  return backend;
}

SpectralDecomposition eigh(const HermitianMatrix& h) {
  SpectralDecomposition d;
  if (h.is_complex()) {
    Eigen::MatrixXcd v;
    d.eigenvalues = solve(h.complex(), true, &v);
    d.eigenvectors = std::move(v);
  } else {
    Eigen::MatrixXd v;
    d.eigenvalues = solve(h.real(), true, &v);
    d.eigenvectors = std::move(v);
  }
  return d;
}

Eigen::VectorXd eigvalsh(const HermitianMatrix& h) {
  if (h.is_complex()) return solve(h.complex(), false, nullptr);
  return solve(h.real(), false, nullptr);
}

Eigen::VectorXd SpectralDecomposition::overlaps_squared(const Eigen::VectorXd& u) const {
  if (u.size() != n()) throw ArgumentError("overlap vector dimension mismatch");
  return std::visit(
      [&](const auto& v) -> Eigen::VectorXd {
        return (v.adjoint() * u.cast<typename std::decay_t<decltype(v)>::Scalar>())
            .cwiseAbs2();
      },
      eigenvectors);
}

Eigen::VectorXcd SpectralDecomposition::eigenvector(int k) const {
  if (k < 0 || k >= n()) throw ArgumentError("eigenvector index out of range");
  return std::visit([&](const auto& v) -> Eigen::VectorXcd { return v.col(k).template cast<Complex>(); },
                    eigenvectors);
}

bool DecompositionCheck::ok() const {
  return ascending && residual <= 1e-8 * (1.0 + max_abs_eigenvalue) && orthogonality <= 1e-8;
}

DecompositionCheck check_decomposition(const HermitianMatrix& h, const SpectralDecomposition& d) {
  DecompositionCheck c;
  const Eigen::MatrixXcd hc = h.to_complex();
  const Eigen::MatrixXcd v = std::visit(
      [](const auto& m) -> Eigen::MatrixXcd { return m.template cast<Complex>(); }, d.eigenvectors);
  const Eigen::MatrixXcd r = hc * v - v * d.eigenvalues.cast<Complex>().asDiagonal();
  c.residual = r.colwise().norm().maxCoeff();
  c.orthogonality =
      (v.adjoint() * v - Eigen::MatrixXcd::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
  c.max_abs_eigenvalue = d.eigenvalues.cwiseAbs().maxCoeff();
  for (int k = 1; k < d.n(); ++k) {
    if (d.eigenvalues(k) < d.eigenvalues(k - 1)) c.ascending = false;
  }
  return c;
}

// ---------------------------------------------------------------------------

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const auto& a : atoms) {
    if (a.weight < 0.0) throw ArgumentError("negative atom weight");
    if (a.weight == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().location == a.location) {
      atoms_.back().weight += a.weight;
    } else {
      atoms_.push_back(a);
    }
  }
}

double SpectralMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

double SpectralMeasure::moment(int m) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight * std::pow(a.location, m);
  return s;
}

double SpectralMeasure::cdf(double x) const {
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (a.location > x) break;
    s += a.weight;
  }
  return s;
}

double SpectralMeasure::cdf_left(double x) const {
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (a.location >= x) break;
    s += a.weight;
  }
  return s;
}

double SpectralMeasure::weight_at(double location) const {
  for (const auto& a : atoms_) {
    if (a.location == location) return a.weight;
  }
  return 0.0;
}

void SpectralMeasure::write_csv(std::ostream& os) const {
  const auto old = os.precision(12);
  os << "location,weight\n";
  for (const auto& a : atoms_) os << a.location << ',' << a.weight << '\n';
  os.precision(old);
}

SpectralMeasure esd(const Eigen::VectorXd& eigenvalues) {
  std::vector<Atom> atoms;
  const double w = 1.0 / static_cast<double>(eigenvalues.size());
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) atoms.push_back({eigenvalues(k), w});
  return SpectralMeasure(std::move(atoms));
}

SpectralMeasure esd(const HermitianMatrix& h) { return esd(eigvalsh(h)); }

SpectralMeasure vector_measure(const SpectralDecomposition& d, const Eigen::VectorXd& u) {
  require_unit(u);
  const Eigen::VectorXd w = d.overlaps_squared(u);
  std::vector<Atom> atoms;
  for (int k = 0; k < d.n(); ++k) atoms.push_back({d.eigenvalues(k), w(k)});
  return SpectralMeasure(std::move(atoms));
}

SpectralMeasure vector_measure(const HermitianMatrix& h, const Eigen::VectorXd& u) {
  require_unit(u);
  if (u.size() != h.n()) throw ArgumentError("vector state dimension mismatch");
  return vector_measure(eigh(h), u);
}

Complex weighted_trace(const Word& p, const std::map<Label, HermitianMatrix>& mats,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ArgumentError("weighted trace vectors differ in dimension");
  Eigen::VectorXcd v = x.cast<Complex>();
  for (auto it = p.letters.rbegin(); it != p.letters.rend(); ++it) {
    auto m = mats.find(*it);
    if (m == mats.end()) throw ArgumentError("no matrix for letter " + Word({*it}).to_string());
    if (m->second.n() != v.size()) throw ArgumentError("weighted trace dimension mismatch");
    v = m->second.visit([&](const auto& a) -> Eigen::VectorXcd { return a * v; });
  }
  return y.cast<Complex>().dot(v);
}

Complex weighted_power_trace(const HermitianMatrix& h, int m, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y) {
  if (m < 0) throw ArgumentError("negative power");
  if (x.size() != h.n() || y.size() != h.n()) {
    throw ArgumentError("weighted trace dimension mismatch");
  }
  if (!h.is_complex()) {
    Eigen::VectorXd v = x;
    for (int k = 0; k < m; ++k) v = h.real() * v;
    return {y.dot(v), 0.0};
  }
  Eigen::VectorXcd v = x.cast<Complex>();
  for (int k = 0; k < m; ++k) v = h.complex() * v;
  return y.cast<Complex>().dot(v);
}

// ---------------------------------------------------------------------------

double semicircle_density(double x, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("sigma must be positive");
  const double r2 = 4.0 * sigma * sigma - x * x;
  if (r2 <= 0.0) return 0.0;
  return std::sqrt(r2) / (2.0 * kPi * sigma * sigma);
}

double semicircle_cdf(double x, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("sigma must be positive");
  const double edge = 2.0 * sigma;
  if (x <= -edge) return 0.0;
  if (x >= edge) return 1.0;
  const double value = 0.5 + x * std::sqrt(edge * edge - x * x) / (4.0 * kPi * sigma * sigma) +
                       std::asin(x / edge) / kPi;
  return std::clamp(value, 0.0, 1.0);
}

DensityModel::DensityModel(Kind kind, double sigma, double theta)
    : kind_(kind), sigma_(sigma), theta_(theta) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("sigma must be positive");
  if (kind == Kind::MuTheta) {
    if (theta == 0.0 || !std::isfinite(theta)) {
      throw ArgumentError("spike eigenvalue theta must be nonzero");
    }
    if (std::abs(theta) > sigma) {
      atom_ = Atom{theta + sigma * sigma / theta, 1.0 - sigma * sigma / (theta * theta)};
    }
  }
}

DensityModel DensityModel::semicircle(double sigma) { return DensityModel(Kind::Semicircle, sigma, 0.0); }

DensityModel DensityModel::mu_theta(double theta, double sigma) {
  return DensityModel(Kind::MuTheta, sigma, theta);
}

double DensityModel::density(double x) const {
  if (kind_ == Kind::Semicircle) return semicircle_density(x, sigma_);
  const double r2 = 4.0 * sigma_ * sigma_ - x * x;
  if (r2 <= 0.0) return 0.0;
  return std::sqrt(r2) / (2.0 * kPi * (theta_ * theta_ + sigma_ * sigma_ - theta_ * x));
}

double DensityModel::continuous_integral(int m, double x_hi) const {
  const double edge = 2.0 * sigma_;
  if (x_hi <= -edge) return 0.0;
  const double phi_lo = x_hi >= edge ? 0.0 : std::acos(x_hi / edge);
  // x = 2 sigma cos(phi): the square-root edges become smooth endpoints.
  auto integrand = [&](double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double x = edge * c;
    const double xm = m == 0 ? 1.0 : std::pow(x, m);
    if (kind_ == Kind::Semicircle) return xm * 2.0 * s * s / kPi;
    const double t = theta_, sg = sigma_;
    // theta^2 + sigma^2 - theta x = (theta - sigma)^2 + 4 sigma theta sin^2(phi / 2)
    //                             = (theta + sigma)^2 - 4 sigma theta cos^2(phi / 2),
    // picking the form without cancellation near the touching edge.
    const double denom = t > 0 ? (t - sg) * (t - sg) + 4.0 * sg * t * std::pow(std::sin(0.5 * phi), 2)
                               : (t + sg) * (t + sg) - 4.0 * sg * t * std::pow(std::cos(0.5 * phi), 2);
    if (denom == 0.0) {
      // |theta| = sigma at the touching edge: limit of the ratio.
      return xm * (t > 0 ? 1.0 + c : 1.0 - c) / kPi;
    }
    return xm * (edge * s) * (edge * s) / (2.0 * kPi * denom);
  };
  return adaptive_simpson(integrand, phi_lo, kPi, 1e-12);
}

double DensityModel::cdf(double x) const {
  if (kind_ == Kind::Semicircle) return semicircle_cdf(x, sigma_);
  double value = continuous_integral(0, x);
  if (atom_ && atom_->location <= x) value += atom_->weight;
  return std::clamp(value, 0.0, 1.0);
}

double DensityModel::continuous_mass() const {
  return continuous_integral(0, std::numeric_limits<double>::infinity());
}

double DensityModel::total_mass() const {
  return continuous_mass() + (atom_ ? atom_->weight : 0.0);
}

double DensityModel::moment(int m) const {
  if (m < 0) throw ArgumentError("negative moment order");
  double value = continuous_integral(m, std::numeric_limits<double>::infinity());
  if (atom_) value += atom_->weight * std::pow(atom_->location, m);
  return value;
}

void DensityModel::write_csv(std::ostream& os, int points) const {
  if (points < 2) throw ArgumentError("need at least two tabulation points");
  double lo = -2.0 * sigma_, hi = 2.0 * sigma_;
  if (atom_) {
    lo = std::min(lo, atom_->location);
    hi = std::max(hi, atom_->location);
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const auto old = os.precision(12);
  os << "x,density,cdf\n";
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    os << x << ',' << density(x) << ',' << cdf(x) << '\n';
  }
  os.precision(old);
}

std::optional<double> predicted_outlier(double theta, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("sigma must be positive");
  if (std::abs(theta) > sigma) return theta + sigma * sigma / theta;
  return std::nullopt;
}

double predicted_alignment(double theta, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("sigma must be positive");
  if (theta == 0.0) throw ArgumentError("spike eigenvalue theta must be nonzero");
  if (std::abs(theta) > sigma) return 1.0 - sigma * sigma / (theta * theta);
  return 0.0;
}

OutlierCounts outlier_counts(const std::vector<double>& thetas, double sigma) {
  OutlierCounts c;
  for (double t : thetas) {
    if (t < -sigma) ++c.below;
    if (t > sigma) ++c.above;
  }
  return c;
}

double ks_distance(const SpectralMeasure& m, const DensityModel& model, int grid_points) {
  if (grid_points < 2) throw ArgumentError("KS grid needs at least two points");
  const double total = m.total_mass();
  if (!(total > 0.0)) throw ArgumentError("KS distance of an empty measure");
  double lo = -2.0 * model.sigma(), hi = 2.0 * model.sigma();
  if (model.atom()) {
    lo = std::min(lo, model.atom()->location);
    hi = std::max(hi, model.atom()->location);
  }
  double sup = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double x = lo + (hi - lo) * i / (grid_points - 1);
    sup = std::max(sup, std::abs(m.cdf(x) / total - model.cdf(x)));
  }
  const auto& model_atom = model.atom();
  for (const auto& a : m.atoms()) {
    const double right = model.cdf(a.location);
    double left = right;
    if (model_atom && model_atom->location == a.location) left -= model_atom->weight;
    sup = std::max(sup, std::abs(m.cdf(a.location) / total - right));
    sup = std::max(sup, std::abs(m.cdf_left(a.location) / total - left));
  }
  return std::clamp(sup, 0.0, 1.0);
}

int interlacing_violations(const Eigen::VectorXd& base, const Eigen::VectorXd& perturbed,
                           double slack) {
  if (base.size() != perturbed.size()) throw ArgumentError("interlacing spectra differ in size");
  int violations = 0;
  const Eigen::Index n = base.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (base(k) > perturbed(k) + slack) ++violations;
    if (k + 1 < n && perturbed(k) > base(k + 1) + slack) ++violations;
  }
  return violations;
}

bool interlaces(const Eigen::VectorXd& base, const Eigen::VectorXd& perturbed, double slack) {
  return interlacing_violations(base, perturbed, slack) == 0;
}

bool interlacing_check(const HermitianMatrix& h, double theta, const Eigen::VectorXd& v) {
  const Eigen::VectorXd before = eigvalsh(h);
  const Eigen::VectorXd after = eigvalsh(rank_one_update(h, theta, v));
  return theta >= 0.0 ? interlaces(before, after) : interlaces(after, before);
}

}  // namespace bandspike
