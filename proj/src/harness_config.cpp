#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bandspike/errors.hpp"
#include "bandspike/harness.hpp"

namespace bandspike {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>* warnings)
      : j_(j), path_(std::move(path)), warnings_(warnings) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  ~Reader() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError("config field '" + (key.empty() ? (path_.empty() ? "<root>" : path_) : field(key)) +
                      "': " + message);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    fail(key, "expected a nonnegative integer");
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<int> integers(const std::string& key) {
    std::vector<int> out;
    if (!has(key)) return out;
    const auto& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of integers");
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  Reader child(const std::string& key) { return Reader(at(key), field(key), warnings_); }

  // Reports keys that were never looked up.
  void finish() const {
    if (!warnings_) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) warnings_->push_back("unknown config field '" + field(key) + "' ignored");
    }
  }

  std::vector<std::string>* warnings() const { return warnings_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>* warnings_;
  std::set<std::string> seen_;
};

VectorPreset read_vector(Reader r) {
  VectorPreset p;
  const std::string kind = r.string("kind", "uniform");
  if (kind == "uniform") {
    p = VectorPreset::uniform();
  } else if (kind == "basis") {
    p = VectorPreset::basis(r.integer("index", 0));
  } else if (kind == "random") {
    p = VectorPreset::random_unit(r.unsigned64("seed", 0));
  } else {
    r.fail("kind", "unknown vector preset '" + kind + "' (uniform, basis, random)");
  }
  r.finish();
  return p;
}

json vector_json(const VectorPreset& p) {
  switch (p.kind) {
    case VectorPreset::Kind::Uniform:
      return {{"kind", "uniform"}};
    case VectorPreset::Kind::Basis:
      return {{"kind", "basis"}, {"index", p.index}};
    case VectorPreset::Kind::RandomUnit:
      return {{"kind", "random"}, {"seed", p.seed}};
  }
  return {};
}

const char* entry_kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::GaussianReal:
      return "gaussian-real";
    case EntryKind::GaussianComplex:
      return "gaussian-complex";
    case EntryKind::Rademacher:
      return "rademacher";
  }
  return "gaussian-real";
}

std::size_t line_of(const std::string& text, std::size_t byte, std::size_t* column) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  *column = col;
  return line;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Bbp:
      return "bbp";
    case ExperimentKind::Isotropic:
      return "isotropic";
    case ExperimentKind::Variance:
      return "variance";
    case ExperimentKind::Semicircle:
      return "semicircle";
    case ExperimentKind::Oracle:
      return "oracle";
  }
  return "bbp";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Bbp, ExperimentKind::Isotropic, ExperimentKind::Variance,
                 ExperimentKind::Semicircle, ExperimentKind::Oracle}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

double Tolerances::location_for(int n) const {
  return location.value_or(std::max(0.05, 5.0 / std::sqrt(static_cast<double>(n))));
}

double Tolerances::overlap_for(int n) const {
  return overlap.value_or(std::max(0.05, 5.0 / std::sqrt(static_cast<double>(n))));
}

double Tolerances::edge_for(int n) const {
  return edge.value_or(std::max(0.1, 5.0 / std::cbrt(static_cast<double>(n))));
}

double ExperimentConfig::sigma() const { return std::sqrt(distribution.off_diag_variance); }

std::vector<int> ExperimentConfig::ladder() const {
  if (!band_ladder.empty()) return band_ladder;
  return {band.evaluate(n)};
}

VectorPreset ExperimentConfig::x_preset() const {
  if (x_vector) return *x_vector;
  return kind == ExperimentKind::Variance ? VectorPreset::basis(0) : VectorPreset::uniform();
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError("config field '" + field + "': " + msg);
  };
  if (c.trials < 1) fail("trials", "must be >= 1");
  if (c.threads < 1) fail("threads", "must be >= 1");
  if (c.kind == ExperimentKind::Oracle) {
    const auto& o = c.oracle;
    if (o.max_dimension < 1 || o.moebius_degree < 1 || o.tau_degree < 1 || o.moebius_letters < 1 ||
        o.tau_letters < 1 || o.entry_range < 1) {
      fail("oracle", "all sizes must be >= 1");
    }
    if (o.moebius_degree > 8 || o.tau_degree > 10 || o.max_dimension > 8) {
      fail("oracle", "small-instance guard exceeded (moebius_degree <= 8, tau_degree <= 10, "
                     "max_dimension <= 8)");
    }
    return;
  }
  if (c.n < 4) fail("n", "must be >= 4");
  try {
    c.distribution.validate();
  } catch (const ArgumentError& e) {
    fail("distribution", e.what());
  }
  for (int b : c.ladder()) {
    if (b < 0) fail("band", "band widths must be nonnegative");
  }
  if (c.mask.kind == MaskConfig::Kind::Regular) {
    try {
      regular_mask(c.n, c.mask.degree);
    } catch (const ValidationError& e) {
      fail("mask", e.what());
    }
  }
  if (c.kind == ExperimentKind::Bbp && c.spikes.empty()) fail("spikes", "bbp needs at least one spike");
  if (static_cast<int>(c.spikes.size()) > c.n) fail("spikes", "rank exceeds dimension");
  std::vector<Eigen::VectorXd> vectors;
  for (std::size_t s = 0; s < c.spikes.size(); ++s) {
    const auto& sp = c.spikes[s];
    const std::string field = "spikes[" + std::to_string(s) + "]";
    if (sp.theta == 0.0 || !std::isfinite(sp.theta)) fail(field + ".theta", "must be nonzero");
    try {
      vectors.push_back(preset_vector(sp.vector, c.n));
    } catch (const ArgumentError& e) {
      fail(field + ".vector", e.what());
    }
  }
  try {
    orthonormalize(vectors);
  } catch (const ValidationError& e) {
    fail("spikes", std::string("vectors are not orthonormalizable: ") + e.what());
  }
  if (c.kind == ExperimentKind::Isotropic || c.kind == ExperimentKind::Variance) {
    if (!(c.inner_product >= -1.0 && c.inner_product <= 1.0)) fail("inner_product", "must lie in [-1, 1]");
    try {
      preset_vector(c.x_preset(), c.n);
    } catch (const ArgumentError& e) {
      fail("x_vector", e.what());
    }
    for (int m : c.powers) {
      if (m < 0) fail("powers", "must be nonnegative");
      if (m > 8) fail("powers", "degree guard exceeded (m <= 8)");
    }
  }
  if (c.kind == ExperimentKind::Isotropic && c.powers.empty()) fail("powers", "isotropic needs at least one power");
  if (c.kind == ExperimentKind::Variance) {
    if (c.ladder().size() < 2) fail("band_ladder", "variance scaling needs >= 2 band widths");
    if (c.powers.size() > 1) fail("powers", "variance scaling takes a single power");
    if (c.trials < 2) fail("trials", "variance scaling needs >= 2 trials");
  }
}

ExperimentConfig config_from_json(const json& j, std::vector<std::string>* warnings) {
  Reader r(j, "", warnings);
  ExperimentConfig c;
  if (r.has("experiment")) c.kind = parse_experiment_kind(r.string("experiment", "bbp"));
  c.n = r.integer("n", c.n);

  if (r.has("band")) {
    const auto& b = r.at("band");
    if (b.is_number_integer()) {
      c.band = BandSchedule{BandSchedule::Kind::Fixed, b.get<int>(), 1.0, 0.5};
    } else {
      Reader br = r.child("band");
      const std::string schedule = br.string("schedule", br.has("width") ? "fixed" : "power");
      if (schedule == "fixed") {
        c.band = BandSchedule{BandSchedule::Kind::Fixed, br.integer("width", 1), 1.0, 0.5};
      } else if (schedule == "power") {
        c.band = BandSchedule{BandSchedule::Kind::Power, 1, br.number("c", 1.0), br.number("alpha", 0.5)};
      } else if (schedule == "log") {
        c.band = BandSchedule{BandSchedule::Kind::Log, 1, br.number("c", 1.0), 0.5};
      } else {
        br.fail("schedule", "unknown band schedule '" + schedule + "' (fixed, power, log)");
      }
      br.finish();
    }
  }
  c.band_ladder = r.integers("band_ladder");

  if (r.has("mask")) {
    Reader mr = r.child("mask");
    const std::string kind = mr.string("kind", "band");
    if (kind == "band") {
      c.mask = MaskConfig{MaskConfig::Kind::Band, 0};
    } else if (kind == "regular") {
      c.mask = MaskConfig{MaskConfig::Kind::Regular, mr.integer("degree", 1)};
    } else {
      mr.fail("kind", "unknown mask kind '" + kind + "' (band, regular)");
    }
    mr.finish();
  }

  c.distribution.off_diag_variance = r.number("sigma2", 1.0);
  if (r.has("distribution")) {
    Reader dr = r.child("distribution");
    const std::string kind = dr.string("kind", "gaussian-real");
    if (kind == "gaussian-real") {
      c.distribution.kind = EntryKind::GaussianReal;
    } else if (kind == "gaussian-complex") {
      c.distribution.kind = EntryKind::GaussianComplex;
    } else if (kind == "rademacher") {
      c.distribution.kind = EntryKind::Rademacher;
    } else {
      dr.fail("kind", "unknown distribution '" + kind + "'");
    }
    if (dr.has("diag_variance")) c.distribution.diag_variance = dr.number("diag_variance", 0.0);
    dr.finish();
  }

  if (r.has("spikes")) {
    const auto& arr = r.at("spikes");
    if (!arr.is_array()) r.fail("spikes", "expected an array");
    for (std::size_t s = 0; s < arr.size(); ++s) {
      Reader sr(arr[s], "spikes[" + std::to_string(s) + "]", warnings);
      SpikeConfig sp;
      if (!sr.has("theta")) sr.fail("theta", "missing");
      sp.theta = sr.number("theta", 0.0);
      if (sr.has("vector")) sp.vector = read_vector(sr.child("vector"));
      sr.finish();
      c.spikes.push_back(sp);
    }
  }

  c.trials = r.integer("trials", 50);
  c.seed = r.unsigned64("seed", 0);
  c.powers = r.integers("powers");
  c.inner_product = r.number("inner_product", c.inner_product);
  if (r.has("x_vector")) c.x_vector = read_vector(r.child("x_vector"));

  if (r.has("oracle")) {
    Reader orr = r.child("oracle");
    auto& o = c.oracle;
    o.moebius_degree = orr.integer("moebius_degree", o.moebius_degree);
    o.moebius_letters = orr.integer("moebius_letters", o.moebius_letters);
    o.max_dimension = orr.integer("max_dimension", o.max_dimension);
    o.tau_degree = orr.integer("tau_degree", o.tau_degree);
    o.tau_letters = orr.integer("tau_letters", o.tau_letters);
    o.entry_range = orr.integer("entry_range", o.entry_range);
    orr.finish();
  }

  c.threads = r.integer("threads", 1);

  if (r.has("tolerances")) {
    Reader tr = r.child("tolerances");
    auto& t = c.tolerances;
    if (tr.has("location")) t.location = tr.number("location", 0.0);
    if (tr.has("overlap")) t.overlap = tr.number("overlap", 0.0);
    if (tr.has("edge")) t.edge = tr.number("edge", 0.0);
    t.ks = tr.number("ks", t.ks);
    t.moment_relative = tr.number("moment_relative", t.moment_relative);
    t.isotropic = tr.number("isotropic", t.isotropic);
    t.slope_target = tr.number("slope_target", t.slope_target);
    t.slope = tr.number("slope", t.slope);
    t.parseval = tr.number("parseval", t.parseval);
    t.interlacing_slack = tr.number("interlacing_slack", t.interlacing_slack);
    tr.finish();
  }

  c.output_dir = r.string("output_dir", "");
  r.finish();
  return c;
}

ExperimentConfig parse_config(const std::string& text, std::vector<std::string>* warnings) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t column = 0;
    const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1, &column);
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + e.what());
  }
  return config_from_json(j, warnings);
}

ExperimentConfig load_config(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), warnings);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.kind);
  j["n"] = c.n;
  switch (c.band.kind) {
    case BandSchedule::Kind::Fixed:
      j["band"] = {{"schedule", "fixed"}, {"width", c.band.width}};
      break;
    case BandSchedule::Kind::Power:
      j["band"] = {{"schedule", "power"}, {"c", c.band.c}, {"alpha", c.band.alpha}};
      break;
    case BandSchedule::Kind::Log:
      j["band"] = {{"schedule", "log"}, {"c", c.band.c}};
      break;
  }
  j["band_ladder"] = c.band_ladder;
  j["mask"] = c.mask.kind == MaskConfig::Kind::Band
                  ? json{{"kind", "band"}}
                  : json{{"kind", "regular"}, {"degree", c.mask.degree}};
  j["sigma2"] = c.distribution.off_diag_variance;
  json dist{{"kind", entry_kind_name(c.distribution.kind)}};
  if (c.distribution.diag_variance) dist["diag_variance"] = *c.distribution.diag_variance;
  j["distribution"] = dist;
  json spikes = json::array();
  for (const auto& s : c.spikes) spikes.push_back({{"theta", s.theta}, {"vector", vector_json(s.vector)}});
  j["spikes"] = spikes;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["powers"] = c.powers;
  j["inner_product"] = c.inner_product;
  if (c.x_vector) j["x_vector"] = vector_json(*c.x_vector);
  j["oracle"] = {{"moebius_degree", c.oracle.moebius_degree},
                 {"moebius_letters", c.oracle.moebius_letters},
                 {"max_dimension", c.oracle.max_dimension},
                 {"tau_degree", c.oracle.tau_degree},
                 {"tau_letters", c.oracle.tau_letters},
                 {"entry_range", c.oracle.entry_range}};
  j["threads"] = c.threads;
  json tol{{"ks", c.tolerances.ks},
           {"moment_relative", c.tolerances.moment_relative},
           {"isotropic", c.tolerances.isotropic},
           {"slope_target", c.tolerances.slope_target},
           {"slope", c.tolerances.slope},
           {"parseval", c.tolerances.parseval},
           {"interlacing_slack", c.tolerances.interlacing_slack}};
  if (c.tolerances.location) tol["location"] = *c.tolerances.location;
  if (c.tolerances.overlap) tol["overlap"] = *c.tolerances.overlap;
  if (c.tolerances.edge) tol["edge"] = *c.tolerances.edge;
  j["tolerances"] = tol;
  j["output_dir"] = c.output_dir;
  return j;
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << to_json(config).dump(2) << '\n';
}

json canonical_config_json(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("threads");
  j.erase("output_dir");
  return j;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string text = canonical_config_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace bandspike
