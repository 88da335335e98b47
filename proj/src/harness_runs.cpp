#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <random>
#include <sstream>

#include "bandspike/errors.hpp"
#include "bandspike/graph_moments.hpp"
#include "bandspike/harness.hpp"

namespace bandspike {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

ExperimentReport start_report(const ExperimentConfig& config) {
  ExperimentReport r;
  r.config = config;
  r.config_hash = config_hash(config);
  r.timestamp = utc_timestamp();
  return r;
}

void finish_report(ExperimentReport& r, std::vector<TrialRecord> trials) {
  r.trials = std::move(trials);
  r.aggregates = aggregate_trials(r.trials);
}

Verdict abs_diff(std::string name, double observed, double expected, double tol) {
  return {std::move(name), "abs_diff", observed, expected, tol,
          std::isfinite(observed) && std::abs(observed - expected) <= tol};
}

Verdict at_most(std::string name, double observed, double bound) {
  return {std::move(name), "at_most", observed, bound, 0.0, std::isfinite(observed) && observed <= bound};
}

Verdict at_least(std::string name, double observed, double bound) {
  return {std::move(name), "at_least", observed, bound, 0.0, observed >= bound};
}

Verdict equal(std::string name, double observed, double expected) {
  return {std::move(name), "equal", observed, expected, 0.0, observed == expected};
}

double max_over_trials(const std::vector<TrialRecord>& trials, const std::string& key) {
  double m = 0.0;
  for (const auto& t : trials) {
    auto it = t.values.find(key);
    if (it != t.values.end()) m = std::max(m, it->second);
  }
  return m;
}

double sum_over_trials(const std::vector<TrialRecord>& trials, const std::string& key) {
  double s = 0.0;
  for (const auto& t : trials) {
    auto it = t.values.find(key);
    if (it != t.values.end()) s += it->second;
  }
  return s;
}

std::string rung_key(int b, int m) { return "b" + std::to_string(b) + "_m" + std::to_string(m); }

// y^T Xi^m x for m = 0..max_power (real part for complex noise).
std::vector<double> power_traces(const HermitianMatrix& h, int max_power, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) {
  return h.visit([&](const auto& m) {
    using Matrix = std::decay_t<decltype(m)>;
    using Scalar = typename Matrix::Scalar;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Vector yy = y.cast<Scalar>();
    Vector v = x.cast<Scalar>();
    std::vector<double> out;
    out.push_back(std::real(yy.dot(v)));
    for (int p = 1; p <= max_power; ++p) {
      v = (m * v).eval();
      out.push_back(std::real(yy.dot(v)));
    }
    return out;
  });
}

}  // namespace

HermitianMatrix sample_noise(const ExperimentConfig& config, int band_width, std::uint64_t seed) {
  if (config.mask.kind == MaskConfig::Kind::Regular) {
    return sample_sparse(config.n, regular_mask(config.n, config.mask.degree), config.mask.degree,
                         config.distribution, seed);
  }
  return sample_band(BandSpec{config.n, band_width}, config.distribution, seed);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> correlated_pair(const Eigen::VectorXd& x, double c) {
  if (x.size() < 2) throw ArgumentError("correlated pair needs dimension >= 2");
  if (std::abs(x.norm() - 1.0) > 1e-10) throw ArgumentError("x must be a unit vector");
  if (c < -1.0 || c > 1.0) throw ArgumentError("inner product must lie in [-1, 1]");
  Eigen::Index j = 0;
  x.cwiseAbs().minCoeff(&j);
  Eigen::VectorXd perp = -x(j) * x;
  perp(j) += 1.0;
  perp -= x.dot(perp) * x;  // second pass against cancellation
  perp.normalize();
  Eigen::VectorXd y = c * x + std::sqrt(1.0 - c * c) * perp;
  return {x, y};
}

// ---------------------------------------------------------------------------

ExperimentReport run_bbp(const ExperimentConfig& config) {
  validate(config);
  if (config.spikes.empty()) throw ConfigError("config field 'spikes': bbp needs at least one spike");
  const int n = config.n;
  const double sigma = config.sigma();
  const int b = config.band.evaluate(n);
  const auto& tol = config.tolerances;

  SpikeSpec spec;
  {
    std::vector<Eigen::VectorXd> raw;
    for (const auto& s : config.spikes) {
      spec.thetas.push_back(s.theta);
      raw.push_back(preset_vector(s.vector, n));
    }
    spec.vectors = orthonormalize(std::move(raw));
    spec = spec.sorted();
  }
  const int r = spec.rank();
  const BBPPrediction pred = predict_bbp(spec.thetas, sigma);
  const int lower = pred.counts.below;
  const int upper = pred.counts.above;

  // Spikes sharing a theta form one group; overlaps are eigenspace projections.
  std::vector<int> group_of(r);
  std::vector<double> group_theta;
  for (int s = 0; s < r; ++s) {
    if (s == 0 || spec.thetas[s] != spec.thetas[s - 1]) group_theta.push_back(spec.thetas[s]);
    group_of[s] = static_cast<int>(group_theta.size()) - 1;
  }
  const int groups = static_cast<int>(group_theta.size());
  const double count_threshold = 2.0 * sigma + 3.0 * sigma / std::sqrt(static_cast<double>(n));

  auto job = [&](int t) {
    TrialRecord rec;
    rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    HermitianMatrix h = sample_noise(config, b, rec.seed);
    Eigen::VectorXd prev = eigvalsh(h);
    int violations = 0;
    SpectralDecomposition d;
    for (int s = 0; s < r; ++s) {
      h = rank_one_update(h, spec.thetas[s], spec.vectors[s]);
      Eigen::VectorXd cur;
      if (s + 1 == r) {
        d = eigh(h);
        cur = d.eigenvalues;
      } else {
        cur = eigvalsh(h);
      }
      violations += spec.thetas[s] > 0 ? interlacing_violations(prev, cur, tol.interlacing_slack)
                                       : interlacing_violations(cur, prev, tol.interlacing_slack);
      prev = std::move(cur);
    }
    const Eigen::VectorXd& lambda = d.eigenvalues;

    std::vector<Eigen::VectorXd> overlaps;
    double parseval = 0.0;
    for (int s = 0; s < r; ++s) {
      overlaps.push_back(d.overlaps_squared(spec.vectors[s]));
      parseval = std::max(parseval, std::abs(overlaps.back().sum() - 1.0));
    }
    auto record_eigen = [&](const std::string& prefix, int k, int index) {
      rec.values["lambda_" + prefix + std::to_string(k)] = lambda(index);
      for (int g = 0; g < groups; ++g) {
        double proj = 0.0;
        for (int s = 0; s < r; ++s) {
          if (group_of[s] == g) proj += overlaps[s](index);
        }
        rec.values["proj_" + prefix + std::to_string(k) + "_g" + std::to_string(g)] = proj;
      }
    };
    for (int k = 1; k <= std::min(lower + 1, n); ++k) record_eigen("bottom_", k, k - 1);
    for (int k = 1; k <= std::min(upper + 1, n); ++k) record_eigen("top_", k, n - k);

    rec.values["parseval_error"] = parseval;
    rec.values["interlacing_violations"] = violations;
    rec.values["count_above"] = static_cast<double>((lambda.array() > count_threshold).count());
    rec.values["count_below"] = static_cast<double>((lambda.array() < -count_threshold).count());
    return rec;
  };

  ExperimentReport report = start_report(config);
  finish_report(report, run_trials(config.trials, config.threads, job));

  const double loc_tol = tol.location_for(n);
  const double ov_tol = tol.overlap_for(n);
  const double edge_tol = tol.edge_for(n);
  report.tolerances = {{"location", loc_tol},      {"overlap", ov_tol},
                       {"edge", edge_tol},         {"parseval", tol.parseval},
                       {"interlacing_slack", tol.interlacing_slack},
                       {"count_threshold", count_threshold}};

  auto check_outlier = [&](const std::string& prefix, int k, int s) {
    const std::string tag = prefix + std::to_string(k);
    const int g = group_of[s];
    report.verdicts.push_back(
        abs_diff("location_" + tag, report.mean("lambda_" + tag), *pred.spikes[s].outlier, loc_tol));
    report.verdicts.push_back(abs_diff("alignment_" + tag,
                                       report.mean("proj_" + tag + "_g" + std::to_string(g)),
                                       pred.spikes[s].alignment, ov_tol));
    for (int h = 0; h < groups; ++h) {
      if (h == g) continue;
      const std::string key = "proj_" + tag + "_g" + std::to_string(h);
      report.verdicts.push_back(at_most("cross_" + tag + "_g" + std::to_string(h), report.mean(key), ov_tol));
    }
  };
  for (int k = 1; k <= lower; ++k) check_outlier("bottom_", k, k - 1);
  for (int k = 1; k <= upper; ++k) check_outlier("top_", k, r - k);

  auto check_edge = [&](const std::string& prefix, int k, double edge) {
    if (k > n) return;
    const std::string tag = prefix + std::to_string(k);
    report.verdicts.push_back(abs_diff("edge_" + tag, report.mean("lambda_" + tag), edge, edge_tol));
    for (int g = 0; g < groups; ++g) {
      const std::string key = "proj_" + tag + "_g" + std::to_string(g);
      report.verdicts.push_back(at_most("edge_overlap_" + tag + "_g" + std::to_string(g), report.mean(key), ov_tol));
    }
  };
  check_edge("bottom_", lower + 1, -2.0 * sigma);
  check_edge("top_", upper + 1, 2.0 * sigma);

  report.verdicts.push_back(equal("count_above", std::round(report.mean("count_above")), upper));
  report.verdicts.push_back(equal("count_below", std::round(report.mean("count_below")), lower));
  report.verdicts.push_back(
      at_most("parseval", max_over_trials(report.trials, "parseval_error"), tol.parseval));
  report.verdicts.push_back(
      equal("interlacing", sum_over_trials(report.trials, "interlacing_violations"), 0.0));

  json spikes = json::array();
  for (int s = 0; s < r; ++s) {
    const auto& p = pred.spikes[s];
    const char* side = p.side == BBPPrediction::Spike::Side::Top      ? "top"
                       : p.side == BBPPrediction::Spike::Side::Bottom ? "bottom"
                                                                      : "none";
    spikes.push_back({{"theta", p.theta},
                      {"group", group_of[s]},
                      {"outlier", p.outlier ? json(*p.outlier) : json(nullptr)},
                      {"alignment", p.alignment},
                      {"side", side}});
  }
  report.predictions = {{"spikes", spikes},
                        {"lower_edge", pred.lower_edge},
                        {"upper_edge", pred.upper_edge},
                        {"outliers_below", lower},
                        {"outliers_above", upper}};
  report.derived = {{"band_width", b}, {"xi", BandSpec{n, b}.xi()}};
  return report;
}

ExperimentReport run_isotropic(const ExperimentConfig& config) {
  validate(config);
  const int n = config.n;
  const double sigma2 = config.distribution.off_diag_variance;
  const double c = config.inner_product;
  const std::vector<int> ladder = config.ladder();
  const int max_power = *std::max_element(config.powers.begin(), config.powers.end());
  const auto [x, y] = correlated_pair(preset_vector(config.x_preset(), n), c);

  auto job = [&](int t) {
    TrialRecord rec;
    rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      const HermitianMatrix h = sample_noise(config, ladder[i], derive_seed(rec.seed, i));
      const std::vector<double> traces = power_traces(h, max_power, x, y);
      for (int m : config.powers) rec.values[rung_key(ladder[i], m)] = traces[m];
    }
    return rec;
  };

  ExperimentReport report = start_report(config);
  finish_report(report, run_trials(config.trials, config.threads, job));
  const auto& tol = config.tolerances;
  report.tolerances = {{"isotropic", tol.isotropic}};

  json expected = json::object();
  for (int m : config.powers) {
    const double target = c * tau(Word::power(0, m), {{0, sigma2}});
    expected["m" + std::to_string(m)] = target;
    for (int b : ladder) {
      const std::string key = rung_key(b, m);
      report.verdicts.push_back(abs_diff("isotropic_" + key, report.mean(key), target, tol.isotropic));
    }
  }
  report.predictions = {{"expected", expected}, {"inner_product", c}};

  json errors = json::object();
  for (int m : config.powers) {
    const double target = expected["m" + std::to_string(m)].get<double>();
    for (int b : ladder) {
      errors[rung_key(b, m)] = std::abs(report.mean(rung_key(b, m)) - target);
    }
  }
  report.derived = {{"abs_errors", errors}, {"x_dot_y", x.dot(y)}};

  // Error at m = 2 should shrink as the band widens, up to Monte Carlo noise:
  // each wider rung may exceed a narrower one by at most two combined
  // standard errors, and two thirds of the pairs must comply.
  const bool has_m2 = std::find(config.powers.begin(), config.powers.end(), 2) != config.powers.end();
  if (has_m2 && ladder.size() >= 2) {
    std::vector<std::size_t> order(ladder.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ladder[a] < ladder[b]; });
    const double target = expected["m2"].get<double>();
    int pairs = 0, complying = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const Aggregate& narrow = report.aggregate(rung_key(ladder[order[i]], 2));
        const Aggregate& wide = report.aggregate(rung_key(ladder[order[j]], 2));
        const double noise = 2.0 * std::hypot(narrow.standard_error, wide.standard_error);
        ++pairs;
        if (std::abs(wide.mean - target) <= std::abs(narrow.mean - target) + noise) ++complying;
      }
    }
    const double needed = std::ceil(2.0 * pairs / 3.0);
    report.derived["monotone_pairs"] = pairs;
    report.derived["monotone_complying"] = complying;
    report.verdicts.push_back(at_least("isotropic_m2_monotone", complying, needed));
  }
  return report;
}

ExperimentReport run_variance_scaling(const ExperimentConfig& config) {
  validate(config);
  const int n = config.n;
  const std::vector<int> ladder = config.ladder();
  const int power = config.powers.empty() ? 2 : config.powers.front();
  const auto [x, y] = correlated_pair(preset_vector(config.x_preset(), n), config.inner_product);

  auto job = [&](int t) {
    TrialRecord rec;
    rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      const HermitianMatrix h = sample_noise(config, ladder[i], derive_seed(rec.seed, i));
      rec.values[rung_key(ladder[i], power)] = power_traces(h, power, x, y)[power];
    }
    return rec;
  };

  ExperimentReport report = start_report(config);
  finish_report(report, run_trials(config.trials, config.threads, job));
  const auto& tol = config.tolerances;
  report.tolerances = {{"slope", tol.slope}, {"slope_target", tol.slope_target}, {"ratio_factor", 2.0}};

  struct Rung {
    int b;
    int xi;
    double variance;
  };
  std::vector<Rung> rungs;
  for (int b : ladder) {
    const double sd = report.aggregate(rung_key(b, power)).std_dev;
    rungs.push_back({b, BandSpec{n, b}.xi(), sd * sd});
  }
  std::sort(rungs.begin(), rungs.end(), [](const Rung& a, const Rung& b) { return a.xi < b.xi; });

  json table = json::array();
  bool degenerate = false;
  for (const auto& rung : rungs) {
    table.push_back({{"b", rung.b}, {"xi", rung.xi}, {"variance", rung.variance}});
    if (!(rung.variance > 0.0)) degenerate = true;
  }
  report.derived = {{"power", power}, {"rungs", table}, {"degenerate", degenerate}};
  if (degenerate) return report;

  double mx = 0.0, my = 0.0;
  for (const auto& rung : rungs) {
    mx += std::log(rung.xi);
    my += std::log(rung.variance);
  }
  mx /= rungs.size();
  my /= rungs.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& rung : rungs) {
    const double dx = std::log(rung.xi) - mx;
    sxy += dx * (std::log(rung.variance) - my);
    sxx += dx * dx;
  }
  if (sxx > 0.0) {
    const double slope = sxy / sxx;
    report.derived["slope"] = slope;
    report.verdicts.push_back(abs_diff("variance_slope", slope, tol.slope_target, tol.slope));
  }
  // Variance ratio between neighbouring rungs against the 1/xi prediction.
  for (std::size_t i = 0; i + 1 < rungs.size(); ++i) {
    const double predicted = static_cast<double>(rungs[i].xi) / rungs[i + 1].xi;
    const double observed = rungs[i + 1].variance / rungs[i].variance;
    const double factor = observed / predicted;
    Verdict v{"variance_ratio_b" + std::to_string(rungs[i].b) + "_b" + std::to_string(rungs[i + 1].b),
              "ratio_within", observed, predicted, 2.0, factor >= 0.5 && factor <= 2.0};
    report.verdicts.push_back(v);
  }
  return report;
}

ExperimentReport run_semicircle(const ExperimentConfig& config) {
  validate(config);
  const int n = config.n;
  const double sigma = config.sigma();
  const int b = config.band.evaluate(n);
  const DensityModel model = DensityModel::semicircle(sigma);

  auto job = [&](int t) {
    TrialRecord rec;
    rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    const Eigen::VectorXd lambda = eigvalsh(sample_noise(config, b, rec.seed));
    rec.values["ks"] = ks_distance(esd(lambda), model);
    rec.values["lambda_min"] = lambda.minCoeff();
    rec.values["lambda_max"] = lambda.maxCoeff();
    const Eigen::ArrayXd sq = lambda.array().square();
    Eigen::ArrayXd p = Eigen::ArrayXd::Ones(n);
    for (int k = 1; k <= 3; ++k) {
      p *= sq;
      rec.values["moment_" + std::to_string(2 * k)] = p.mean();
    }
    return rec;
  };

  ExperimentReport report = start_report(config);
  finish_report(report, run_trials(config.trials, config.threads, job));
  const auto& tol = config.tolerances;
  const double edge_tol = tol.edge_for(n);
  report.tolerances = {{"ks", tol.ks}, {"edge", edge_tol}, {"moment_relative", tol.moment_relative}};

  report.verdicts.push_back(at_most("ks", report.mean("ks"), tol.ks));
  report.verdicts.push_back(abs_diff("edge_min", report.mean("lambda_min"), -2.0 * sigma, edge_tol));
  report.verdicts.push_back(abs_diff("edge_max", report.mean("lambda_max"), 2.0 * sigma, edge_tol));
  json moments = json::object();
  for (int k = 1; k <= 3; ++k) {
    const double target = static_cast<double>(catalan(k)) * std::pow(sigma, 2 * k);
    const std::string key = "moment_" + std::to_string(2 * k);
    moments[key] = target;
    report.verdicts.push_back(abs_diff(key, report.mean(key), target, tol.moment_relative * target));
  }
  report.predictions = {{"lower_edge", -2.0 * sigma}, {"upper_edge", 2.0 * sigma}, {"moments", moments}};
  report.derived = {{"band_width", b}, {"xi", BandSpec{n, b}.xi()}};
  return report;
}

// ---------------------------------------------------------------------------
// Oracle suite

namespace {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

// All words of the given degree over {0, ..., letters - 1}.
std::vector<Word> all_words(int degree, int letters) {
  std::vector<Word> out;
  std::vector<Label> w(static_cast<std::size_t>(degree), 0);
  while (true) {
    out.emplace_back(w);
    int i = degree - 1;
    while (i >= 0 && w[i] == letters - 1) w[i--] = 0;
    if (i < 0) break;
    ++w[i];
  }
  return out;
}

std::string matrix_text(const IntMatrix& m) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
  }
  os << "]";
  return os.str();
}

std::string family_text(const MatrixFamily<long long>& mats) {
  std::string s;
  for (const auto& [l, m] : mats) s += " " + Word({l}).to_string() + "=" + matrix_text(m);
  return s;
}

[[noreturn]] void oracle_fail(const std::string& what) { throw OracleFailure(what); }

}  // namespace

ExperimentReport run_oracle(const ExperimentConfig& config) {
  validate(config);
  const OracleConfig& o = config.oracle;
  std::mt19937_64 gen(config.seed);
  std::uniform_int_distribution<int> entry(-o.entry_range, o.entry_range);
  auto random_matrix = [&](int n) {
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = entry(gen);
    }
    return m;
  };
  auto random_vector = [&](int n) {
    IntVector v(n);
    for (int i = 0; i < n; ++i) v(i) = entry(gen);
    return v;
  };

  std::map<std::string, double> counts;
  auto& moebius_checks = counts["moebius_checks"];
  auto& path_checks = counts["path_checks"];
  auto& identity_checks = counts["identity_checks"];
  auto& tau_checks = counts["tau_checks"];
  auto& nc2_checks = counts["nc2_checks"];
  auto& endpoint_checks = counts["endpoint_checks"];

  for (int n = 1; n <= o.max_dimension; ++n) {
    for (int d = 1; d <= o.moebius_degree; ++d) {
      for (int letters = 1; letters <= o.moebius_letters; ++letters) {
        for (const Word& w : all_words(d, letters)) {
          MatrixFamily<long long> mats;
          for (int l = 0; l < letters; ++l) mats[l] = random_matrix(n);
          IntMatrix product = IntMatrix::Identity(n, n);
          for (Label l : w.letters) product = (product * mats[l]).eval();
          const long long trace = product.trace();
          const TestGraph cycle = cycle_graph(w);
          const long long direct = chi(cycle, mats);
          const long long summed = moebius_sum(cycle, mats);
          if (direct != trace || summed != trace) {
            oracle_fail("trace identity failed for word " + w.to_string() + " N=" + std::to_string(n) +
                        ": Tr=" + std::to_string(trace) + " chi=" + std::to_string(direct) +
                        " moebius=" + std::to_string(summed) + family_text(mats));
          }
          ++moebius_checks;

          // Weighted path: y^T p(M) x.
          const IntVector x = random_vector(n), y = random_vector(n);
          const TestGraph path = path_graph(w);
          VertexWeights<long long> weights{{d, x}, {0, y}};
          const long long via_graph = chi(path, mats, weights);
          const long long via_products = weighted_trace(w, mats, x, y);
          if (via_graph != via_products) {
            oracle_fail("path identity failed for word " + w.to_string() + " N=" + std::to_string(n) +
                        family_text(mats) + " x=" + matrix_text(x.transpose()) +
                        " y=" + matrix_text(y.transpose()));
          }
          if (n <= 3 && d <= 4) {
            const long long summed_path = moebius_sum(path, mats, weights);
            if (summed_path != via_products) {
              oracle_fail("weighted Moebius identity failed for word " + w.to_string() +
                          " N=" + std::to_string(n) + family_text(mats));
            }
          }
          ++path_checks;

          MatrixFamily<long long> identities;
          for (int l = 0; l < letters; ++l) identities[l] = IntMatrix::Identity(n, n);
          if (chi(cycle, identities) != n) {
            oracle_fail("chi(C_p, I) != N for word " + w.to_string() + " N=" + std::to_string(n));
          }
          ++identity_checks;
        }
      }
    }
  }

  const Variances variances{{0, 1.0}, {1, 2.0}, {2, 3.0}};
  for (int d = 1; d <= o.tau_degree; ++d) {
    for (const Word& w : all_words(d, std::min(o.tau_letters, 3))) {
      const double t = tau(w, variances);
      const DoubleTreeSum dt = double_tree_quotient_weight(w, variances);
      if (t != dt.weight) {
        std::ostringstream os;
        os << "tau(" << w.to_string() << ") = " << t << " but double-tree weight = " << dt.weight;
        oracle_fail(os.str());
      }
      ++tau_checks;
    }
  }

  for (int d = 1; d <= std::max(2 * 3, o.tau_degree); ++d) {
    const std::size_t count = nc2(d).size();
    const std::size_t expected = d % 2 ? 0 : catalan(d / 2);
    if (count != expected) {
      oracle_fail("|NC2(" + std::to_string(d) + ")| = " + std::to_string(count) + ", expected " +
                  std::to_string(expected));
    }
    ++nc2_checks;
  }
  std::vector<double> double_tree_counts;
  for (int k = 1; k <= 3; ++k) {
    const DoubleTreeSum dt = double_tree_quotient_weight(Word::power(0, 2 * k), {{0, 1.0}});
    double_tree_counts.push_back(static_cast<double>(dt.qualifying_partitions));
    if (dt.qualifying_partitions != catalan(k)) {
      oracle_fail("double-tree quotients of z^" + std::to_string(2 * k) + ": " +
                  std::to_string(dt.qualifying_partitions) + ", expected " + std::to_string(catalan(k)));
    }
  }

  for (int d = 1; d <= std::min(o.moebius_degree, 5); ++d) {
    for (const Word& w : all_words(d, std::min(o.moebius_letters, 2))) {
      const TestGraph path = path_graph(w);
      for (const auto& pi : partitions(path.num_vertices())) {
        if (!is_colored_double_tree(quotient(path, pi))) continue;
        if (pi.block_of(0) != pi.block_of(d)) {
          std::ostringstream os;
          os << "double-tree path quotient of " << w.to_string() << " separates the endpoints, rgs =";
          for (int v : pi.rgs()) os << ' ' << v;
          oracle_fail(os.str());
        }
        ++endpoint_checks;
      }
    }
  }

  ExperimentReport report = start_report(config);
  TrialRecord rec;
  rec.seed = config.seed;
  rec.values = counts;
  finish_report(report, {rec});
  report.verdicts.push_back(at_least("moebius_trace_identity", moebius_checks, 1));
  report.verdicts.push_back(at_least("weighted_path_identity", path_checks, 1));
  report.verdicts.push_back(at_least("identity_cycle", identity_checks, 1));
  report.verdicts.push_back(at_least("tau_double_tree", tau_checks, 1));
  report.verdicts.push_back(at_least("nc2_catalan", nc2_checks, 1));
  report.verdicts.push_back(equal("double_tree_counts_z2", double_tree_counts[0], 1));
  report.verdicts.push_back(equal("double_tree_counts_z4", double_tree_counts[1], 2));
  report.verdicts.push_back(equal("double_tree_counts_z6", double_tree_counts[2], 5));
  report.derived = {{"double_tree_counts", double_tree_counts}};
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Bbp:
      return run_bbp(config);
    case ExperimentKind::Isotropic:
      return run_isotropic(config);
    case ExperimentKind::Variance:
      return run_variance_scaling(config);
    case ExperimentKind::Semicircle:
      return run_semicircle(config);
    case ExperimentKind::Oracle:
      return run_oracle(config);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace bandspike
