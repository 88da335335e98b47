#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <thread>

#include "bandspike/errors.hpp"
#include "bandspike/harness.hpp"

namespace bandspike {

using nlohmann::json;

BBPPrediction predict_bbp(std::vector<double> thetas, double sigma) {
  std::sort(thetas.begin(), thetas.end());
  BBPPrediction p;
  p.lower_edge = -2.0 * sigma;
  p.upper_edge = 2.0 * sigma;
  p.counts = outlier_counts(thetas, sigma);
  for (double t : thetas) {
    BBPPrediction::Spike s;
    s.theta = t;
    s.outlier = predicted_outlier(t, sigma);
    s.alignment = predicted_alignment(t, sigma);
    if (s.outlier) s.side = t < 0 ? BBPPrediction::Spike::Side::Bottom : BBPPrediction::Spike::Side::Top;
    p.spikes.push_back(s);
  }
  return p;
}

bool ExperimentReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const Aggregate& ExperimentReport::aggregate(const std::string& name) const {
  for (const auto& a : aggregates) {
    if (a.name == name) return a;
  }
  throw ArgumentError("report has no metric '" + name + "'");
}

const Verdict* ExperimentReport::verdict(const std::string& name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::vector<Aggregate> aggregate_trials(const std::vector<TrialRecord>& trials) {
  std::set<std::string> names;
  for (const auto& t : trials) {
    for (const auto& [k, v] : t.values) names.insert(k);
  }
  std::vector<Aggregate> out;
  for (const auto& name : names) {
    Aggregate a;
    a.name = name;
    double sum = 0.0;
    for (const auto& t : trials) {
      auto it = t.values.find(name);
      if (it == t.values.end()) continue;
      sum += it->second;
      ++a.count;
    }
    a.mean = a.count ? sum / static_cast<double>(a.count) : 0.0;
    double ss = 0.0;
    for (const auto& t : trials) {
      auto it = t.values.find(name);
      if (it != t.values.end()) ss += (it->second - a.mean) * (it->second - a.mean);
    }
    a.std_dev = a.count > 1 ? std::sqrt(ss / static_cast<double>(a.count - 1)) : 0.0;
    a.standard_error = a.count ? a.std_dev / std::sqrt(static_cast<double>(a.count)) : 0.0;
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<TrialRecord> run_trials(int count, int threads,
                                    const std::function<TrialRecord(int)>& job) {
  std::vector<TrialRecord> results(static_cast<std::size_t>(std::max(count, 0)));
  std::vector<std::exception_ptr> errors(results.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < count; t = next++) {
      try {
        results[t] = job(t);
        results[t].index = t;
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

namespace {

json verdict_json(const Verdict& v) {
  return {{"name", v.name},          {"rule", v.rule},           {"observed", v.observed},
          {"expected", v.expected}, {"tolerance", v.tolerance}, {"pass", v.pass}};
}

// JSON has no NaN; non-finite values are stored as null.
json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json report_body(const ExperimentReport& r) {
  json j;
  j["experiment"] = to_string(r.config.kind);
  j["config"] = canonical_config_json(r.config);
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << r.config_hash;
  j["config_hash"] = hash.str();
  j["seed"] = r.config.seed;
  json trials = json::array();
  for (const auto& t : r.trials) {
    json values = json::object();
    for (const auto& [k, v] : t.values) values[k] = number_or_null(v);
    trials.push_back({{"trial", t.index}, {"seed", t.seed}, {"values", values}});
  }
  j["trials"] = trials;
  json aggregates = json::object();
  for (const auto& a : r.aggregates) {
    aggregates[a.name] = {{"count", a.count},
                          {"mean", number_or_null(a.mean)},
                          {"std", number_or_null(a.std_dev)},
                          {"stderr", number_or_null(a.standard_error)}};
  }
  j["aggregates"] = aggregates;
  j["predictions"] = r.predictions;
  j["derived"] = r.derived;
  j["tolerances"] = r.tolerances;
  json verdicts = json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(verdict_json(v));
  j["verdicts"] = verdicts;
  j["all_pass"] = r.all_pass();
  return j;
}

json report_to_json(const ExperimentReport& r) {
  json j = report_body(r);
  j["timestamp"] = r.timestamp;
  return j;
}

void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
    out << report_to_json(r).dump(2) << '\n';
  }
  std::set<std::string> names;
  for (const auto& t : r.trials) {
    for (const auto& [k, v] : t.values) names.insert(k);
  }
  {
    std::ofstream out(dir / "trials.csv");
    out << std::setprecision(12);
    out << "trial,seed";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (const auto& t : r.trials) {
      out << t.index << ',' << t.seed;
      for (const auto& n : names) {
        out << ',';
        auto it = t.values.find(n);
        if (it != t.values.end()) out << it->second;
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "summary.csv");
    out << std::setprecision(12);
    out << "metric,count,mean,std,stderr\n";
    for (const auto& a : r.aggregates) {
      out << a.name << ',' << a.count << ',' << a.mean << ',' << a.std_dev << ',' << a.standard_error
          << '\n';
    }
    out << "\nverdict,rule,observed,expected,tolerance,pass\n";
    for (const auto& v : r.verdicts) {
      out << v.name << ',' << v.rule << ',' << v.observed << ',' << v.expected << ','
          << v.tolerance << ',' << (v.pass ? "pass" : "fail") << '\n';
    }
  }
}

}  // namespace bandspike
