#pragma once

// Random matrix ensembles: periodic band masks, circulant regular masks,
// Wigner / band / sparse sampling and finite-rank spiked models.
//
// All indices are 0-based. Sampling is a pure function of (arguments, seed):
// every upper-triangular entry (i, j) is drawn from a counter-based stream
// keyed by (seed, i, j), so masking never shifts the values of the entries
// that survive.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace bandspike {

using Complex = std::complex<double>;

enum class EntryKind { GaussianReal, GaussianComplex, Rademacher };

struct EntryDistribution {
  EntryKind kind = EntryKind::GaussianReal;
  double off_diag_variance = 1.0;
  // Defaults to off_diag_variance when absent.
  std::optional<double> diag_variance;

  double diagonal_variance() const { return diag_variance.value_or(off_diag_variance); }
  bool is_complex() const { return kind == EntryKind::GaussianComplex; }
  void validate() const;

  bool operator==(const EntryDistribution&) const = default;
};

struct BandSpec {
  int n = 1;
  int band_width = 0;

  // Effective row degree min(2b + 1, n).
  int xi() const;
  void validate() const;
};

// b(N) schedule used by experiment configs.
struct BandSchedule {
  enum class Kind { Fixed, Power, Log };
  Kind kind = Kind::Fixed;
  int width = 1;       // Fixed
  double c = 1.0;      // Power: max(1, round(c N^alpha)); Log: max(1, round(c log N))
  double alpha = 0.5;

  int evaluate(int n) const;
  bool operator==(const BandSchedule&) const = default;
};

class SymmetricMask {
 public:
  SymmetricMask() = default;
  // Throws ValidationError unless entries is n*n, 0/1 valued and symmetric.
  SymmetricMask(int n, std::vector<std::uint8_t> entries);

  static SymmetricMask ones(int n);

  int n() const { return n_; }
  bool operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  int row_sum(int i) const;
  // Column indices j >= i with mask(i, j) = 1, ascending.
  std::vector<int> upper_support(int i) const;

 private:
  int n_ = 0;
  std::vector<std::uint8_t> entries_;
};

// min(|i - j|, n - |i - j|) on the n-cycle.
int periodic_distance(int i, int j, int n);

SymmetricMask band_mask(const BandSpec& spec);

enum class RegularKind { Circulant };

// k-regular circulant mask with the diagonal counted in the degree:
// offsets {0, +-1, ..., +-floor((k-1)/2)} plus the antipode n/2 when k-1 is
// odd. Infeasible when k < 1, k > n, or k is even and n is odd.
SymmetricMask regular_mask(int n, int k, RegularKind kind = RegularKind::Circulant);

// Dense self-adjoint matrix over the reals or the complex numbers. The
// stored array is always exactly Hermitian.
class HermitianMatrix {
 public:
  using RealMatrix = Eigen::MatrixXd;
  using ComplexMatrix = Eigen::MatrixXcd;

  HermitianMatrix() : data_(RealMatrix()) {}
  // Both constructors throw ValidationError if the input is not square or
  // not exactly self-adjoint.
  explicit HermitianMatrix(RealMatrix m);
  explicit HermitianMatrix(ComplexMatrix m);

  static HermitianMatrix zero(int n, bool complex = false);

  int n() const;
  bool is_complex() const { return std::holds_alternative<ComplexMatrix>(data_); }

  const RealMatrix& real() const;
  const ComplexMatrix& complex() const;
  ComplexMatrix to_complex() const;
  Complex operator()(int i, int j) const;

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), data_);
  }

  HermitianMatrix operator+(const HermitianMatrix& other) const;
  HermitianMatrix operator-() const;
  HermitianMatrix scaled(double factor) const;

  bool operator==(const HermitianMatrix& other) const;

 private:
  std::variant<RealMatrix, ComplexMatrix> data_;
};

// Debug dump: first line "N real|complex", then N rows of N entries.
// Complex entries print as "re+imj".
void write_matrix(std::ostream& os, const HermitianMatrix& h);

// (1 / sqrt(normalizer)) * (mask o X) with X drawn entrywise from dist.
HermitianMatrix sample_sparse(int n, const SymmetricMask& mask, int normalizer,
                              const EntryDistribution& dist, std::uint64_t seed);

// Full Wigner matrix (1 / sqrt(n)) X. Bitwise equal to sample_sparse with an
// all-ones mask and normalizer n.
HermitianMatrix sample_wigner(int n, const EntryDistribution& dist, std::uint64_t seed);

// Periodic random band matrix (1 / sqrt(xi)) B o X.
HermitianMatrix sample_band(const BandSpec& spec, const EntryDistribution& dist,
                            std::uint64_t seed);

struct VectorPreset {
  enum class Kind { Basis, Uniform, RandomUnit };
  Kind kind = Kind::Uniform;
  int index = 0;            // Basis
  std::uint64_t seed = 0;   // RandomUnit

  static VectorPreset basis(int i) { return {Kind::Basis, i, 0}; }
  static VectorPreset uniform() { return {Kind::Uniform, 0, 0}; }
  static VectorPreset random_unit(std::uint64_t seed) { return {Kind::RandomUnit, 0, seed}; }

  bool operator==(const VectorPreset&) const = default;
};

Eigen::VectorXd preset_vector(const VectorPreset& preset, int n);

// Modified Gram-Schmidt (two passes). Throws ValidationError when the
// vectors are linearly dependent.
std::vector<Eigen::VectorXd> orthonormalize(std::vector<Eigen::VectorXd> vectors);

struct SpikeSpec {
  std::vector<double> thetas;
  std::vector<Eigen::VectorXd> vectors;

  int rank() const { return static_cast<int>(thetas.size()); }
  int n() const { return vectors.empty() ? 0 : static_cast<int>(vectors.front().size()); }
  // Throws ValidationError on zero thetas, size mismatches, r > n, or a Gram
  // matrix that differs from the identity by more than 1e-12.
  void validate() const;
  // Same spikes with thetas ascending (vectors permuted alongside).
  SpikeSpec sorted() const;
};

// Sum of theta_s a_s a_s^T.
HermitianMatrix assemble_spike(const SpikeSpec& spike);

// h + theta v v^T, kept exactly self-adjoint.
HermitianMatrix rank_one_update(const HermitianMatrix& h, double theta, const Eigen::VectorXd& v);

// Entrywise sum; the result is complex if either operand is.
HermitianMatrix spiked_model(const HermitianMatrix& xi, const HermitianMatrix& a);

// Stream seed for trial t of a campaign with the given master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace bandspike
