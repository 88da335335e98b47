#pragma once

// Spectral side: Hermitian eigendecomposition, empirical and vector-state
// spectral measures, limit laws (semicircle and the rank-one spiked vector
// state law), spiked-model predictions and distances between measures.

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bandspike/ensembles.hpp"
#include "bandspike/graph_moments.hpp"

namespace bandspike {

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;  // ascending
  std::variant<Eigen::MatrixXd, Eigen::MatrixXcd> eigenvectors;  // columns

  int n() const { return static_cast<int>(eigenvalues.size()); }
  // |<u, h^(k)>|^2 for every k.
  Eigen::VectorXd overlaps_squared(const Eigen::VectorXd& u) const;
  Eigen::VectorXcd eigenvector(int k) const;
};

SpectralDecomposition eigh(const HermitianMatrix& h);
Eigen::VectorXd eigvalsh(const HermitianMatrix& h);

// LAPACK (divide and conquer) is used when a one-time self-test on a
// 200 x 200 matrix passes; otherwise Eigen's tridiagonal QR solver.
enum class EigenBackend { Lapack, Eigen };
EigenBackend eigen_backend();

struct DecompositionCheck {
  double residual = 0.0;       // max_k ||H h_k - lambda_k h_k||
  double orthogonality = 0.0;  // ||V^* V - I||_max
  double max_abs_eigenvalue = 0.0;
  bool ascending = true;

  // residual <= 1e-8 (1 + max|lambda|), orthogonality <= 1e-8, ascending.
  bool ok() const;
};

DecompositionCheck check_decomposition(const HermitianMatrix& h, const SpectralDecomposition& d);

struct Atom {
  double location;
  double weight;
};

class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  // Sorts by location and merges atoms at identical locations; drops atoms of
  // weight exactly zero.
  explicit SpectralMeasure(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double total_mass() const;
  double moment(int m) const;
  // Mass of (-inf, x].
  double cdf(double x) const;
  // Mass of (-inf, x).
  double cdf_left(double x) const;
  double weight_at(double location) const;

  // CSV with header "location,weight".
  void write_csv(std::ostream& os) const;

 private:
  std::vector<Atom> atoms_;
};

SpectralMeasure esd(const HermitianMatrix& h);
SpectralMeasure esd(const Eigen::VectorXd& eigenvalues);

// Atoms at eigenvalues weighted by |<u, h^(k)>|^2. Throws ArgumentError
// unless ||u|| = 1 within 1e-10.
SpectralMeasure vector_measure(const HermitianMatrix& h, const Eigen::VectorXd& u);
SpectralMeasure vector_measure(const SpectralDecomposition& d, const Eigen::VectorXd& u);

// y^* p(M) x, i.e. Tr(p(M) x y^*), by repeated matrix-vector products.
template <class Scalar>
Scalar weighted_trace(const Word& p, const MatrixFamily<Scalar>& mats,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  if (x.size() != y.size()) throw ArgumentError("weighted trace vectors differ in dimension");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = x;
  for (auto it = p.letters.rbegin(); it != p.letters.rend(); ++it) {
    auto m = mats.find(*it);
    if (m == mats.end()) throw ArgumentError("no matrix for letter " + Word({*it}).to_string());
    if (m->second.rows() != v.size() || m->second.cols() != v.size()) {
      throw ArgumentError("weighted trace dimension mismatch");
    }
    v = m->second * v;
  }
  return y.dot(v);  // conjugates y
}

Complex weighted_trace(const Word& p, const std::map<Label, HermitianMatrix>& mats,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// y^* H^m x for a single matrix.
Complex weighted_power_trace(const HermitianMatrix& h, int m, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y);

double semicircle_density(double x, double sigma);
double semicircle_cdf(double x, double sigma);

// Absolutely continuous part plus an optional atom.
class DensityModel {
 public:
  enum class Kind { Semicircle, MuTheta };

  static DensityModel semicircle(double sigma);
  // Throws ArgumentError for theta = 0 or sigma <= 0.
  static DensityModel mu_theta(double theta, double sigma);

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  double theta() const { return theta_; }
  const std::optional<Atom>& atom() const { return atom_; }

  double density(double x) const;
  // Continuous mass of (-inf, x] plus the atom when its location is <= x.
  double cdf(double x) const;
  double continuous_mass() const;
  double total_mass() const;
  // Integral of x^m against the model (quadrature plus atom).
  double moment(int m) const;

  // CSV "x,density,cdf" on a uniform grid covering the support and atom.
  void write_csv(std::ostream& os, int points = 401) const;

 private:
  DensityModel(Kind kind, double sigma, double theta);
  // Integral of x^m density(x) over [-2 sigma, min(x_hi, 2 sigma)].
  double continuous_integral(int m, double x_hi) const;

  Kind kind_;
  double sigma_;
  double theta_;
  std::optional<Atom> atom_;
};

inline DensityModel mu_theta(double theta, double sigma) {
  return DensityModel::mu_theta(theta, sigma);
}

// Adaptive Simpson quadrature on [a, b] to absolute tolerance tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 50);

// theta + sigma^2 / theta when |theta| > sigma (strict).
std::optional<double> predicted_outlier(double theta, double sigma);
// 1 - sigma^2 / theta^2 when |theta| > sigma, else 0.
double predicted_alignment(double theta, double sigma);

struct OutlierCounts {
  int below = 0;  // theta < -sigma
  int above = 0;  // theta > sigma
  bool operator==(const OutlierCounts&) const = default;
};
OutlierCounts outlier_counts(const std::vector<double>& thetas, double sigma);

// sup |F_m - F_model| over the empirical atoms (both one-sided limits) and a
// uniform model grid of grid_points points.
double ks_distance(const SpectralMeasure& m, const DensityModel& model, int grid_points = 10000);

// lambda_k(base) <= lambda_k(perturbed) <= lambda_{k+1}(base) within slack,
// i.e. perturbed = base + (positive semidefinite rank one).
bool interlaces(const Eigen::VectorXd& base, const Eigen::VectorXd& perturbed,
                double slack = 1e-8);
// Number of violated inequalities in the same chain.
int interlacing_violations(const Eigen::VectorXd& base, const Eigen::VectorXd& perturbed,
                           double slack = 1e-8);

// Weyl interlacing for h + theta v v^*. For theta < 0 the roles of the two
// spectra swap.
bool interlacing_check(const HermitianMatrix& h, double theta, const Eigen::VectorXd& v);

// ---------------------------------------------------------------------------

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth) {
  auto simpson = [](double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); };
  auto recurse = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi,
                     double whole, double eps, int depth) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(flo, flm, fmid, mid - lo);
    const double right = simpson(fmid, frm, fhi, hi - mid);
    const double delta = left + right - whole;
    // Below the round-off floor further splitting only chases noise.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (hi - lo) *
                         (std::abs(flo) + std::abs(fmid) + std::abs(fhi));
    if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(eps, floor)) return left + right + delta / 15.0;
    return self(self, lo, mid, flo, flm, fmid, left, eps / 2.0, depth - 1) +
           self(self, mid, hi, fmid, frm, fhi, right, eps / 2.0, depth - 1);
  };
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return recurse(recurse, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, max_depth);
}

}  // namespace bandspike
