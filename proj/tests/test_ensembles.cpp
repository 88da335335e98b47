#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "bandspike/ensembles.hpp"
#include "bandspike/errors.hpp"
#include "bandspike/spectra.hpp"

using namespace bandspike;

namespace {

// Brute-force periodic distance straight from the definition.
int distance_oracle(int i, int j, int n) {
  int best = n;
  for (int shift = -n; shift <= n; shift += n) best = std::min(best, std::abs(i - j + shift));
  return best;
}

Eigen::MatrixXd dense(const SymmetricMask& m) {
  Eigen::MatrixXd out(m.n(), m.n());
  for (int i = 0; i < m.n(); ++i) {
    for (int j = 0; j < m.n(); ++j) out(i, j) = m(i, j);
  }
  return out;
}

}  // namespace

// Spec examples use 1-based indices; the API is 0-based.
TEST(PeriodicDistance, Examples) {
  EXPECT_EQ(periodic_distance(0, 9, 10), 1);
  EXPECT_EQ(periodic_distance(2, 6, 10), 4);
  EXPECT_EQ(periodic_distance(0, 5, 10), 5);
}

TEST(PeriodicDistance, MatchesBruteForceAndIsSymmetric) {
  for (int n = 1; n <= 12; ++n) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        EXPECT_EQ(periodic_distance(i, j, n), distance_oracle(i, j, n));
        EXPECT_EQ(periodic_distance(i, j, n), periodic_distance(j, i, n));
        EXPECT_EQ(periodic_distance(i, j, n) == 0, i == j);
      }
    }
  }
}

TEST(PeriodicDistance, RejectsOutOfRange) {
  EXPECT_THROW(periodic_distance(-1, 0, 5), ArgumentError);
  EXPECT_THROW(periodic_distance(0, 5, 5), ArgumentError);
}

TEST(BandSpec, XiSaturates) {
  EXPECT_EQ((BandSpec{10, 0}).xi(), 1);
  EXPECT_EQ((BandSpec{4, 2}).xi(), 4);
  EXPECT_EQ((BandSpec{1000, 60}).xi(), 121);
  EXPECT_THROW((BandSpec{5, -1}).validate(), ArgumentError);
}

TEST(BandMask, Examples) {
  const SymmetricMask id = band_mask({10, 0});
  EXPECT_TRUE(dense(id).isIdentity());

  const SymmetricMask full = band_mask({4, 2});
  EXPECT_EQ(dense(full), Eigen::MatrixXd::Ones(4, 4));

  Eigen::MatrixXd expected(5, 5);
  expected << 1, 1, 0, 0, 1,
              1, 1, 1, 0, 0,
              0, 1, 1, 1, 0,
              0, 0, 1, 1, 1,
              1, 0, 0, 1, 1;
  EXPECT_EQ(dense(band_mask({5, 1})), expected);
}

TEST(BandMask, RowSumsEqualXi) {
  for (int n = 1; n <= 20; ++n) {
    for (int b = 0; b <= n; ++b) {
      const BandSpec spec{n, b};
      const SymmetricMask m = band_mask(spec);
      for (int i = 0; i < n; ++i) {
        ASSERT_EQ(m.row_sum(i), spec.xi()) << "n=" << n << " b=" << b;
        for (int j = 0; j < n; ++j) ASSERT_EQ(m(i, j), m(j, i));
      }
    }
  }
}

TEST(SymmetricMask, RejectsAsymmetric) {
  EXPECT_THROW(SymmetricMask(2, {1, 1, 0, 1}), ValidationError);
  EXPECT_THROW(SymmetricMask(2, {1, 2, 2, 1}), ValidationError);
  EXPECT_THROW(SymmetricMask(2, {1, 1, 1}), ValidationError);
}

TEST(RegularMask, Examples) {
  EXPECT_EQ(dense(regular_mask(6, 6)), Eigen::MatrixXd::Ones(6, 6));
  EXPECT_TRUE(dense(regular_mask(5, 1)).isIdentity());

  const SymmetricMask m = regular_mask(8, 3);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(m.row_sum(i), 3);
    for (int j = 0; j < 8; ++j) EXPECT_EQ(m(i, j), periodic_distance(i, j, 8) <= 1);
  }
}

TEST(RegularMask, RowSumsOrInfeasible) {
  for (int n = 1; n <= 14; ++n) {
    for (int k = 1; k <= n; ++k) {
      if (k % 2 == 0 && n % 2 == 1) {
        EXPECT_THROW(regular_mask(n, k), ValidationError) << n << " " << k;
        continue;
      }
      const SymmetricMask m = regular_mask(n, k);
      for (int i = 0; i < n; ++i) ASSERT_EQ(m.row_sum(i), k) << n << " " << k;
    }
  }
  EXPECT_THROW(regular_mask(4, 0), ValidationError);
  EXPECT_THROW(regular_mask(4, 5), ValidationError);
}

TEST(SampleWigner, SingleEntryIsReal) {
  const HermitianMatrix h = sample_wigner(1, {}, 3);
  EXPECT_EQ(h.n(), 1);
  EXPECT_FALSE(h.is_complex());
  const HermitianMatrix c = sample_wigner(1, {EntryKind::GaussianComplex, 1.0, {}}, 3);
  EXPECT_EQ(c(0, 0).imag(), 0.0);
}

TEST(SampleWigner, Deterministic) {
  EXPECT_TRUE(sample_wigner(30, {}, 42) == sample_wigner(30, {}, 42));
  EXPECT_FALSE(sample_wigner(30, {}, 42) == sample_wigner(30, {}, 43));
}

TEST(SampleSparse, AllOnesMaskEqualsWignerBitwise) {
  for (auto kind : {EntryKind::GaussianReal, EntryKind::GaussianComplex, EntryKind::Rademacher}) {
    const EntryDistribution dist{kind, 1.5, {}};
    for (int n : {1, 2, 7, 31}) {
      EXPECT_TRUE(sample_sparse(n, SymmetricMask::ones(n), n, dist, 9) == sample_wigner(n, dist, 9));
    }
  }
}

TEST(SampleSparse, IdentityMaskGivesDiagonal) {
  const SymmetricMask id = band_mask({3, 0});
  const HermitianMatrix h = sample_sparse(3, id, 1, {}, 5);
  const Eigen::MatrixXd& a = h.real();
  EXPECT_TRUE(a.isApprox(Eigen::MatrixXd(a.diagonal().asDiagonal())));
  EXPECT_NE(a(0, 0), 0.0);
}

TEST(SampleSparse, FullBandIsHalfScaledWigner) {
  // xi = 4 saturates, so the band matrix is the unmasked draw divided by 2.
  const HermitianMatrix a = sample_sparse(4, band_mask({4, 2}), 4, {}, 11);
  const HermitianMatrix b = sample_band({4, 2}, {}, 11);
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a == sample_wigner(4, {}, 11));
  const HermitianMatrix raw = sample_sparse(4, band_mask({4, 2}), 1, {}, 11);
  EXPECT_TRUE(a.real().isApprox(0.5 * raw.real(), 1e-15));
}

TEST(SampleSparse, RejectsBadNormalizer) {
  EXPECT_THROW(sample_sparse(3, SymmetricMask::ones(3), 0, {}, 1), ArgumentError);
  EXPECT_THROW(sample_sparse(3, SymmetricMask::ones(4), 3, {}, 1), ArgumentError);
}

TEST(SampleBand, MatchesMaskedSampling) {
  for (int n : {5, 9, 16}) {
    for (int b = 0; b <= n; ++b) {
      const BandSpec spec{n, b};
      const HermitianMatrix direct = sample_band(spec, {}, 77);
      const HermitianMatrix masked = sample_sparse(n, band_mask(spec), spec.xi(), {}, 77);
      ASSERT_TRUE(direct == masked) << "n=" << n << " b=" << b;
    }
  }
}

TEST(SampleBand, ZerosOutsideBand) {
  const BandSpec spec{40, 3};
  const HermitianMatrix h = sample_band(spec, {EntryKind::GaussianComplex, 1.0, {}}, 2);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      if (periodic_distance(i, j, 40) > 3) ASSERT_EQ(h(i, j), Complex(0.0));
      ASSERT_EQ(h(i, j), std::conj(h(j, i)));
    }
  }
}

TEST(SampleBand, LargestEigenvalueNearEdge) {
  double sum = 0.0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    sum += eigvalsh(sample_band({1000, 60}, {}, derive_seed(5, t))).maxCoeff();
  }
  EXPECT_NEAR(sum / trials, 2.0, 0.1);
}

TEST(EntryDistribution, MomentsAtScale) {
  // 10^6 off-diagonal entries of a unit-normalized mask.
  const int n = 1415;
  for (auto kind : {EntryKind::GaussianReal, EntryKind::GaussianComplex, EntryKind::Rademacher}) {
    const HermitianMatrix h = sample_sparse(n, SymmetricMask::ones(n), 1, {kind, 2.0, 0.5}, 123);
    double sum = 0.0, sq = 0.0, re2 = 0.0, im2 = 0.0, diag_sq = 0.0;
    std::size_t count = 0;
    for (int i = 0; i < n; ++i) {
      const Complex d = h(i, i);
      EXPECT_EQ(d.imag(), 0.0);
      diag_sq += d.real() * d.real();
      for (int j = i + 1; j < n; ++j) {
        const Complex z = h(i, j);
        sum += z.real();
        sq += std::norm(z);
        re2 += z.real() * z.real();
        im2 += z.imag() * z.imag();
        ++count;
      }
    }
    const double c = static_cast<double>(count);
    const double var = sq / c;
    // Three standard errors; the fourth moment of a centered normal is 3 var^2.
    EXPECT_NEAR(sum / c, 0.0, 3.0 * std::sqrt(2.0 / c));
    EXPECT_NEAR(var, 2.0, 3.0 * std::sqrt(2.0 * 4.0 / c));
    if (kind == EntryKind::GaussianComplex) {
      EXPECT_NEAR(re2 / c, 1.0, 3.0 * std::sqrt(2.0 / c));
      EXPECT_NEAR(im2 / c, 1.0, 3.0 * std::sqrt(2.0 / c));
    }
    if (kind == EntryKind::Rademacher) EXPECT_DOUBLE_EQ(var, 2.0);
    EXPECT_NEAR(diag_sq / n, 0.5, 0.1);
  }
}

TEST(EntryDistribution, Validation) {
  EXPECT_THROW((EntryDistribution{EntryKind::GaussianReal, 0.0, {}}).validate(), ArgumentError);
  EXPECT_THROW((EntryDistribution{EntryKind::GaussianReal, 1.0, -1.0}).validate(), ArgumentError);
  EXPECT_NO_THROW((EntryDistribution{EntryKind::GaussianReal, 1.0, 0.0}).validate());
}

TEST(HermitianMatrix, RejectsNonSymmetric) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_THROW(HermitianMatrix{a}, ValidationError);
  Eigen::MatrixXcd c(2, 2);
  c << Complex(1, 1), Complex(0, 1), Complex(0, -1), 1;
  EXPECT_THROW(HermitianMatrix{c}, ValidationError);
  EXPECT_THROW(HermitianMatrix{Eigen::MatrixXd(2, 3)}, ValidationError);
}

TEST(HermitianMatrix, WriteMatrixFormat) {
  Eigen::MatrixXcd c(2, 2);
  c << 1, Complex(0.5, -2), Complex(0.5, 2), -1;
  std::ostringstream os;
  write_matrix(os, HermitianMatrix(c));
  EXPECT_EQ(os.str(), "2 complex\n1+0j 0.5-2j\n0.5+2j -1+0j\n");

  std::ostringstream rs;
  write_matrix(rs, HermitianMatrix(Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2))));
  EXPECT_EQ(rs.str(), "2 real\n1 0\n0 1\n");
}

TEST(PresetVector, Examples) {
  Eigen::VectorXd e(5);
  e << 1, 0, 0, 0, 0;
  EXPECT_EQ(preset_vector(VectorPreset::basis(0), 5), e);
  EXPECT_EQ(preset_vector(VectorPreset::uniform(), 4), Eigen::VectorXd::Constant(4, 0.5));
  EXPECT_THROW(preset_vector(VectorPreset::basis(5), 5), ArgumentError);
}

TEST(PresetVector, RandomUnitVectorsNearlyOrthogonal) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::VectorXd u = preset_vector(VectorPreset::random_unit(s), 1000);
    const Eigen::VectorXd v = preset_vector(VectorPreset::random_unit(s + 100), 1000);
    EXPECT_NEAR(u.norm(), 1.0, 1e-12);
    EXPECT_LE(std::abs(u.dot(v)), 0.2);
    EXPECT_EQ(u, preset_vector(VectorPreset::random_unit(s), 1000));
  }
}

TEST(AssembleSpike, Examples) {
  SpikeSpec one{{2.0}, {preset_vector(VectorPreset::basis(0), 3)}};
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
  expected(0, 0) = 2.0;
  EXPECT_EQ(assemble_spike(one).real(), expected);

  Eigen::VectorXd a(3), b(3);
  a << 1, 1, 0;
  b << 1, -1, 0;
  SpikeSpec two{{-1.0, 3.0}, {a / std::sqrt(2.0), b / std::sqrt(2.0)}};
  const Eigen::VectorXd ev = eigvalsh(assemble_spike(two));
  EXPECT_NEAR(ev(0), -1.0, 1e-12);
  EXPECT_NEAR(ev(1), 0.0, 1e-12);
  EXPECT_NEAR(ev(2), 3.0, 1e-12);
}

TEST(AssembleSpike, RandomTripleSpectrum) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Eigen::VectorXd> raw(3, Eigen::VectorXd(50));
    for (auto& v : raw) {
      for (int i = 0; i < 50; ++i) v(i) = normal(gen);
    }
    std::vector<double> thetas{normal(gen) * 3, normal(gen) * 3, normal(gen) * 3};
    SpikeSpec spec{thetas, orthonormalize(raw)};
    ASSERT_NO_THROW(spec.validate());
    const Eigen::VectorXd ev = eigvalsh(assemble_spike(spec));
    std::vector<double> nonzero;
    for (int i = 0; i < 50; ++i) {
      if (std::abs(ev(i)) > 1e-8) nonzero.push_back(ev(i));
    }
    std::sort(thetas.begin(), thetas.end());
    ASSERT_EQ(nonzero.size(), 3u);
    for (int s = 0; s < 3; ++s) EXPECT_NEAR(nonzero[s], thetas[s], 1e-10);
  }
}

TEST(AssembleSpike, RejectsNonOrthonormal) {
  Eigen::VectorXd a(3), b(3);
  a << 1, 0, 0;
  b << 1, 1, 0;
  EXPECT_THROW(assemble_spike(SpikeSpec{{1.0, 2.0}, {a, b}}), ValidationError);
  EXPECT_THROW(assemble_spike(SpikeSpec{{0.0}, {a}}), ValidationError);
  EXPECT_THROW(orthonormalize({a, 2.0 * a}), ValidationError);
}

TEST(SpikeSpec, SortedPermutesVectors) {
  Eigen::VectorXd a = preset_vector(VectorPreset::basis(0), 3);
  Eigen::VectorXd b = preset_vector(VectorPreset::basis(1), 3);
  const SpikeSpec s = SpikeSpec{{2.0, -1.0}, {a, b}}.sorted();
  EXPECT_EQ(s.thetas, (std::vector<double>{-1.0, 2.0}));
  EXPECT_EQ(s.vectors[0], b);
  EXPECT_EQ(s.vectors[1], a);
}

TEST(SpikedModel, Examples) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 2.0;
  const HermitianMatrix a(d);
  EXPECT_TRUE(spiked_model(HermitianMatrix::zero(2), a) == a);
  const HermitianMatrix xi = sample_wigner(6, {}, 1);
  EXPECT_TRUE(spiked_model(xi, HermitianMatrix::zero(6)) == xi);
  EXPECT_THROW(spiked_model(xi, a), ArgumentError);
}

TEST(SpikedModel, SumInterlacesWithNoise) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const HermitianMatrix xi = sample_wigner(20, {}, seed);
    const Eigen::VectorXd v = preset_vector(VectorPreset::random_unit(seed + 1000), 20);
    const HermitianMatrix m = spiked_model(xi, assemble_spike(SpikeSpec{{1.5}, {v}}));
    EXPECT_TRUE(interlaces(eigvalsh(xi), eigvalsh(m)));
  }
}

TEST(RankOneUpdate, AgreesWithAssembledSpikeAndStaysHermitian) {
  const HermitianMatrix xi = sample_band({12, 2}, {EntryKind::GaussianComplex, 1.0, {}}, 8);
  const Eigen::VectorXd v = preset_vector(VectorPreset::random_unit(3), 12);
  const HermitianMatrix up = rank_one_update(xi, -2.0, v);
  const HermitianMatrix sum = spiked_model(xi, assemble_spike(SpikeSpec{{-2.0}, {v}}));
  EXPECT_TRUE(up.complex().isApprox(sum.complex(), 1e-14));
  EXPECT_NO_THROW(HermitianMatrix{up.complex()});
}

TEST(Sampling, EveryMatrixExactlyHermitian) {
  std::mt19937_64 gen(99);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 1 + static_cast<int>(gen() % 25);
    const int b = static_cast<int>(gen() % (n + 1));
    const auto kind = static_cast<EntryKind>(gen() % 3);
    const HermitianMatrix h = sample_band({n, b}, {kind, 1.0, {}}, gen());
    const Eigen::MatrixXcd c = h.to_complex();
    ASSERT_TRUE(c == c.adjoint());
  }
}

TEST(BandSchedule, Evaluate) {
  EXPECT_EQ((BandSchedule{BandSchedule::Kind::Fixed, 60, 1.0, 0.5}).evaluate(1000), 60);
  EXPECT_EQ((BandSchedule{BandSchedule::Kind::Power, 0, 2.0, 0.5}).evaluate(100), 20);
  EXPECT_EQ((BandSchedule{BandSchedule::Kind::Log, 0, 1.0, 0.0}).evaluate(4), 1);
  EXPECT_EQ((BandSchedule{BandSchedule::Kind::Power, 0, 0.01, 0.1}).evaluate(10), 1);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(derive_seed(17, t));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(17, 3), derive_seed(17, 3));
  EXPECT_NE(derive_seed(17, 3), derive_seed(18, 3));
}
