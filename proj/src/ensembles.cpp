#include "bandspike/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <type_traits>

#include "bandspike/errors.hpp"

namespace bandspike {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t entry_key(std::uint64_t seed, int i, int j, std::uint64_t lane) {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (static_cast<std::uint64_t>(i) + kGolden * 3));
  h = mix64(h ^ (static_cast<std::uint64_t>(j) + kGolden * 5));
  return mix64(h ^ (lane + kGolden * 7));
}

// Uniform on (0, 1].
double open_unit(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Two independent standard normals for entry (i, j).
std::pair<double, double> normal_pair(std::uint64_t seed, int i, int j) {
  const double u1 = open_unit(entry_key(seed, i, j, 0));
  const double u2 = open_unit(entry_key(seed, i, j, 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(angle), r * std::sin(angle)};
}

double sign_entry(std::uint64_t seed, int i, int j) {
  return (entry_key(seed, i, j, 2) >> 63) ? 1.0 : -1.0;
}

double real_entry(const EntryDistribution& dist, std::uint64_t seed, int i, int j) {
  const double sd = std::sqrt(i == j ? dist.diagonal_variance() : dist.off_diag_variance);
  if (dist.kind == EntryKind::Rademacher) return sd * sign_entry(seed, i, j);
  return sd * normal_pair(seed, i, j).first;
}

Complex complex_entry(const EntryDistribution& dist, std::uint64_t seed, int i, int j) {
  if (i == j) return {real_entry(dist, seed, i, j), 0.0};
  const auto [re, im] = normal_pair(seed, i, j);
  const double sd = std::sqrt(dist.off_diag_variance / 2.0);
  return {sd * re, sd * im};
}

// Fills the Hermitian matrix whose upper triangle is given row by row by
// columns(i).
template <class Columns>
HermitianMatrix fill_masked(int n, double scale, const EntryDistribution& dist,
                            std::uint64_t seed, Columns&& columns) {
  if (dist.is_complex()) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      columns(i, [&](int j) {
        const Complex v = scale * complex_entry(dist, seed, i, j);
        m(i, j) = v;
        m(j, i) = std::conj(v);
      });
    }
    return HermitianMatrix(std::move(m));
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    columns(i, [&](int j) {
      const double v = scale * real_entry(dist, seed, i, j);
      m(i, j) = v;
      m(j, i) = v;
    });
  }
  return HermitianMatrix(std::move(m));
}

void check_index(int i, int n, const char* what) {
  if (i < 0 || i >= n) {
    throw ArgumentError(std::string(what) + " index " + std::to_string(i) +
                        " out of range for dimension " + std::to_string(n));
  }
}

}  // namespace

void EntryDistribution::validate() const {
  if (!(off_diag_variance > 0.0) || !std::isfinite(off_diag_variance)) {
    throw ArgumentError("off-diagonal variance must be positive and finite");
  }
  if (!(diagonal_variance() >= 0.0) || !std::isfinite(diagonal_variance())) {
    throw ArgumentError("diagonal variance must be nonnegative and finite");
  }
}

int BandSpec::xi() const { return std::min(2 * band_width + 1, n); }

void BandSpec::validate() const {
  if (n < 1) throw ArgumentError("band spec needs n >= 1");
  if (band_width < 0) throw ArgumentError("band width must be nonnegative");
}

int BandSchedule::evaluate(int n) const {
  switch (kind) {
    case Kind::Fixed:
      return width;
    case Kind::Power:
      return std::max(1, static_cast<int>(std::lround(c * std::pow(static_cast<double>(n), alpha))));
    case Kind::Log:
      return std::max(1, static_cast<int>(std::lround(c * std::log(static_cast<double>(n)))));
  }
  return width;
}

SymmetricMask::SymmetricMask(int n, std::vector<std::uint8_t> entries)
    : n_(n), entries_(std::move(entries)) {
  if (n < 0 || entries_.size() != static_cast<std::size_t>(n) * n) {
    throw ValidationError("mask entries do not form an n x n array");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto v = entries_[static_cast<std::size_t>(i) * n + j];
      if (v > 1) throw ValidationError("mask entries must be 0 or 1");
      if (v != entries_[static_cast<std::size_t>(j) * n + i]) {
        throw ValidationError("mask is not symmetric");
      }
    }
  }
}

SymmetricMask SymmetricMask::ones(int n) {
  return SymmetricMask(n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 1));
}

int SymmetricMask::row_sum(int i) const {
  check_index(i, n_, "row");
  int s = 0;
  for (int j = 0; j < n_; ++j) s += (*this)(i, j) ? 1 : 0;
  return s;
}

std::vector<int> SymmetricMask::upper_support(int i) const {
  std::vector<int> cols;
  for (int j = i; j < n_; ++j) {
    if ((*this)(i, j)) cols.push_back(j);
  }
  return cols;
}

int periodic_distance(int i, int j, int n) {
  if (n < 1) throw ArgumentError("dimension must be positive");
  check_index(i, n, "row");
  check_index(j, n, "column");
  const int d = std::abs(i - j);
  return std::min(d, n - d);
}

SymmetricMask band_mask(const BandSpec& spec) {
  spec.validate();
  const int n = spec.n;
  std::vector<std::uint8_t> entries(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      entries[static_cast<std::size_t>(i) * n + j] = periodic_distance(i, j, n) <= spec.band_width;
    }
  }
  return SymmetricMask(n, std::move(entries));
}

SymmetricMask regular_mask(int n, int k, RegularKind kind) {
  if (kind != RegularKind::Circulant) throw ValidationError("unsupported regular mask kind");
  if (n < 1 || k < 1 || k > n) {
    throw ValidationError("circulant mask infeasible: need 1 <= k <= n (got n=" +
                          std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  const int half = (k - 1) / 2;
  const bool antipode = (k - 1) % 2 == 1;
  if (antipode && n % 2 == 1) {
    throw ValidationError("circulant mask infeasible: even degree " + std::to_string(k) +
                          " (diagonal included) needs an even dimension, got " +
                          std::to_string(n));
  }
  std::vector<std::uint8_t> entries(static_cast<std::size_t>(n) * n, 0);
  auto set = [&](int i, int offset) {
    const int j = ((i + offset) % n + n) % n;
    entries[static_cast<std::size_t>(i) * n + j] = 1;
  };
  for (int i = 0; i < n; ++i) {
    set(i, 0);
    for (int o = 1; o <= half; ++o) {
      set(i, o);
      set(i, -o);
    }
    if (antipode) set(i, n / 2);
  }
  SymmetricMask mask(n, std::move(entries));
  for (int i = 0; i < n; ++i) {
    if (mask.row_sum(i) != k) {
      throw ValidationError("circulant offsets collide for n=" + std::to_string(n) +
                            ", k=" + std::to_string(k));
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------

HermitianMatrix::HermitianMatrix(RealMatrix m) : data_(std::move(m)) {
  const auto& a = std::get<RealMatrix>(data_);
  if (a.rows() != a.cols()) throw ValidationError("matrix is not square");
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      if (a(i, j) != a(j, i)) throw ValidationError("matrix is not symmetric");
    }
  }
}

HermitianMatrix::HermitianMatrix(ComplexMatrix m) : data_(std::move(m)) {
  const auto& a = std::get<ComplexMatrix>(data_);
  if (a.rows() != a.cols()) throw ValidationError("matrix is not square");
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (a(j, j).imag() != 0.0) throw ValidationError("diagonal entry is not real");
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      if (a(i, j) != std::conj(a(j, i))) throw ValidationError("matrix is not Hermitian");
    }
  }
}

HermitianMatrix HermitianMatrix::zero(int n, bool complex) {
  if (complex) return HermitianMatrix(ComplexMatrix(ComplexMatrix::Zero(n, n)));
  return HermitianMatrix(RealMatrix(RealMatrix::Zero(n, n)));
}

int HermitianMatrix::n() const {
  return visit([](const auto& m) { return static_cast<int>(m.rows()); });
}

const HermitianMatrix::RealMatrix& HermitianMatrix::real() const {
  if (is_complex()) throw ArgumentError("matrix is complex");
  return std::get<RealMatrix>(data_);
}

const HermitianMatrix::ComplexMatrix& HermitianMatrix::complex() const {
  if (!is_complex()) throw ArgumentError("matrix is real");
  return std::get<ComplexMatrix>(data_);
}

HermitianMatrix::ComplexMatrix HermitianMatrix::to_complex() const {
  if (is_complex()) return std::get<ComplexMatrix>(data_);
  return std::get<RealMatrix>(data_).cast<Complex>();
}

Complex HermitianMatrix::operator()(int i, int j) const {
  return visit([&](const auto& m) { return Complex(m(i, j)); });
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& other) const {
  if (n() != other.n()) throw ArgumentError("dimension mismatch in matrix sum");
  if (!is_complex() && !other.is_complex()) {
    return HermitianMatrix(RealMatrix(real() + other.real()));
  }
  return HermitianMatrix(ComplexMatrix(to_complex() + other.to_complex()));
}

HermitianMatrix HermitianMatrix::operator-() const {
  return visit([](const auto& m) { return HermitianMatrix(std::decay_t<decltype(m)>(-m)); });
}

HermitianMatrix HermitianMatrix::scaled(double factor) const {
  return visit(
      [&](const auto& m) { return HermitianMatrix(std::decay_t<decltype(m)>(factor * m)); });
}

bool HermitianMatrix::operator==(const HermitianMatrix& other) const {
  if (is_complex() != other.is_complex() || n() != other.n()) return false;
  if (is_complex()) return complex() == other.complex();
  return real() == other.real();
}

void write_matrix(std::ostream& os, const HermitianMatrix& h) {
  const int n = h.n();
  os << n << ' ' << (h.is_complex() ? "complex" : "real") << '\n';
  const auto old_precision = os.precision(17);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j > 0) os << ' ';
      const Complex v = h(i, j);
      if (h.is_complex()) {
        os << v.real() << (v.imag() < 0 || std::signbit(v.imag()) ? "-" : "+")
           << std::abs(v.imag()) << 'j';
      } else {
        os << v.real();
      }
    }
    os << '\n';
  }
  os.precision(old_precision);
}

HermitianMatrix sample_sparse(int n, const SymmetricMask& mask, int normalizer,
                              const EntryDistribution& dist, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("dimension must be positive");
  if (mask.n() != n) throw ArgumentError("mask dimension does not match n");
  if (normalizer <= 0) throw ArgumentError("normalizer must be a positive integer");
  dist.validate();
  const double scale = 1.0 / std::sqrt(static_cast<double>(normalizer));
  return fill_masked(n, scale, dist, seed, [&](int i, auto&& emit) {
    for (int j = i; j < n; ++j) {
      if (mask(i, j)) emit(j);
    }
  });
}

HermitianMatrix sample_wigner(int n, const EntryDistribution& dist, std::uint64_t seed) {
  return sample_sparse(n, SymmetricMask::ones(n), n, dist, seed);
}

HermitianMatrix sample_band(const BandSpec& spec, const EntryDistribution& dist,
                            std::uint64_t seed) {
  spec.validate();
  dist.validate();
  const int n = spec.n;
  const int b = spec.band_width;
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.xi()));
  if (2 * b + 1 >= n) {
    return fill_masked(n, scale, dist, seed, [&](int i, auto&& emit) {
      for (int j = i; j < n; ++j) emit(j);
    });
  }
  // Upper-triangle columns within periodic distance b: j in [i, i+b] and the
  // wrapped block j >= n - b + i.
  return fill_masked(n, scale, dist, seed, [&](int i, auto&& emit) {
    const int direct_end = std::min(n - 1, i + b);
    for (int j = i; j <= direct_end; ++j) emit(j);
    for (int j = std::max(direct_end + 1, n - b + i); j < n; ++j) emit(j);
  });
}

Eigen::VectorXd preset_vector(const VectorPreset& preset, int n) {
  if (n < 1) throw ArgumentError("dimension must be positive");
  switch (preset.kind) {
    case VectorPreset::Kind::Basis: {
      check_index(preset.index, n, "basis");
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      v(preset.index) = 1.0;
      return v;
    }
    case VectorPreset::Kind::Uniform:
      return Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    case VectorPreset::Kind::RandomUnit: {
      std::mt19937_64 gen(preset.seed);
      std::normal_distribution<double> normal;
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = normal(gen);
      return v / v.norm();
    }
  }
  throw ArgumentError("unknown vector preset");
}

std::vector<Eigen::VectorXd> orthonormalize(std::vector<Eigen::VectorXd> vectors) {
  for (std::size_t s = 0; s < vectors.size(); ++s) {
    auto& v = vectors[s];
    const double original = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t t = 0; t < s; ++t) v -= vectors[t].dot(v) * vectors[t];
    }
    const double norm = v.norm();
    if (!(original > 0.0) || norm <= 1e-8 * original) {
      throw ValidationError("spike vector " + std::to_string(s) +
                            " is linearly dependent on the previous ones");
    }
    v /= norm;
  }
  return vectors;
}

void SpikeSpec::validate() const {
  if (thetas.size() != vectors.size()) {
    throw ValidationError("spike spec has " + std::to_string(thetas.size()) + " thetas but " +
                          std::to_string(vectors.size()) + " vectors");
  }
  const int dim = n();
  for (std::size_t s = 0; s < thetas.size(); ++s) {
    if (thetas[s] == 0.0 || !std::isfinite(thetas[s])) {
      throw ValidationError("spike eigenvalue " + std::to_string(s) + " must be nonzero");
    }
    if (vectors[s].size() != dim) throw ValidationError("spike vectors differ in dimension");
  }
  if (rank() > dim && dim > 0) throw ValidationError("spike rank exceeds dimension");
  for (std::size_t s = 0; s < vectors.size(); ++s) {
    for (std::size_t t = s; t < vectors.size(); ++t) {
      const double g = vectors[s].dot(vectors[t]);
      if (std::abs(g - (s == t ? 1.0 : 0.0)) > 1e-12) {
        throw ValidationError("spike vectors are not orthonormal (Gram entry " +
                              std::to_string(s) + "," + std::to_string(t) + ")");
      }
    }
  }
}

SpikeSpec SpikeSpec::sorted() const {
  std::vector<std::size_t> order(thetas.size());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return thetas[a] < thetas[b]; });
  SpikeSpec out;
  for (auto s : order) {
    out.thetas.push_back(thetas[s]);
    out.vectors.push_back(vectors[s]);
  }
  return out;
}

HermitianMatrix assemble_spike(const SpikeSpec& spike) {
  spike.validate();
  const int n = spike.n();
  if (n == 0) throw ValidationError("spike spec has no vectors");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < spike.rank(); ++s) {
    a.noalias() += spike.thetas[s] * spike.vectors[s] * spike.vectors[s].transpose();
  }
  // Exact symmetry from the upper triangle.
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) a(i, j) = a(j, i);
  }
  return HermitianMatrix(std::move(a));
}

HermitianMatrix rank_one_update(const HermitianMatrix& h, double theta, const Eigen::VectorXd& v) {
  const int n = h.n();
  if (v.size() != n) throw ArgumentError("rank one update dimension mismatch");
  return h.visit([&](const auto& m) {
    auto out = m;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        out(i, j) += theta * (v(i) * v(j));
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Eigen::MatrixXd>) {
          out(j, i) = out(i, j);
        } else {
          out(j, i) = std::conj(out(i, j));
        }
      }
      out(j, j) += theta * (v(j) * v(j));
    }
    return HermitianMatrix(std::move(out));
  });
}

HermitianMatrix spiked_model(const HermitianMatrix& xi, const HermitianMatrix& a) {
  if (xi.n() != a.n()) {
    throw ArgumentError("spiked model dimension mismatch: " + std::to_string(xi.n()) + " vs " +
                        std::to_string(a.n()));
  }
  return xi + a;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(mix64(master) ^ mix64(stream + kGolden));
}

}  // namespace bandspike
