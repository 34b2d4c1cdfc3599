#include "ergolab/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ergolab/csv.hpp"
#include "ergolab/deviations.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/historical.hpp"
#include "ergolab/lyapunov.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/plots.hpp"
#include "ergolab/rng.hpp"
#include "ergolab/singular_flow.hpp"
#include "ergolab/stochastics.hpp"

namespace ergolab {

namespace fs = std::filesystem;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::exponents: return "exponents";
    case ExperimentKind::sigma: return "sigma";
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::deviation: return "deviation";
    case ExperimentKind::entropy: return "entropy";
    case ExperimentKind::historical: return "historical";
    case ExperimentKind::lorenz: return "lorenz";
    case ExperimentKind::calibrate: return "calibrate";
  }
  return "simulate";
}

std::vector<ExperimentKind> all_experiment_kinds() {
  return {ExperimentKind::simulate, ExperimentKind::exponents, ExperimentKind::sigma,
          ExperimentKind::clt,      ExperimentKind::deviation, ExperimentKind::entropy,
          ExperimentKind::historical, ExperimentKind::lorenz,  ExperimentKind::calibrate};
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : all_experiment_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

Json default_config(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::simulate:
      return {{"system", "default3d"}, {"seed", 1}, {"start", nullptr}, {"steps", 100000},
              {"schedule", {{"ratio", 1.3}}}, {"family", {{"max_norm", 2}}}};
    case ExperimentKind::exponents:
      return {{"system", "default3d"}, {"seed", 1}, {"seeds", 100}, {"n", 1000000},
              {"checkpoints", {10000, 100000, 1000000}}, {"spectrum", true}};
    case ExperimentKind::sigma:
      return {{"system", "default2d"}, {"seed", 1}, {"lags", 20}, {"samples", 1000000},
              {"variance", {{"n", 10000}, {"ensemble", 10000}}}};
    case ExperimentKind::clt:
      return {{"system", "default2d"}, {"seed", 1}, {"n", 10000}, {"paths", 1000}, {"grid", 100},
              {"sigma", kDefaultSigma}, {"blocks", 4}, {"generator", "system"}};
    case ExperimentKind::deviation:
      return {{"system", "default2d"},
              {"seed", 1},
              {"observable", nullptr},
              {"target", nullptr},
              {"epsilons", {0.1}},
              {"n_list", {10, 20, 30, 40, 50, 60, 70, 80, 90, 100}},
              {"ensemble",
               {{"sampling", "grid"},
                {"count", 1000000},
                {"lower", {0.0, 0.0, 0.0}},
                {"upper", {1.0, 1.0, 1.0}},
                {"anchor", {0.3183098861837907, 0.5772156649015329, 0.25}},
                {"length", 0.1}}}};
    case ExperimentKind::entropy:
      return {{"system", "default2d"},
              {"seed", 1},
              {"anchor", {0.3183098861837907, 0.5772156649015329, 0.0}},
              {"segment_length", 1e-3},
              {"rho", 0.02},
              {"n_list", {7, 8, 9, 10, 11, 12}},
              {"orbit_length", 100000},
              {"burn_in", 100},
              {"bowen", {{"n_list", {4, 5, 6, 7, 8, 9}}, {"center", 0.5}}},
              {"pesin", "unstable"}};
    case ExperimentKind::historical:
      return {{"system", "default3d"}, {"seed", 1}, {"seeds", 20}, {"n_max", 1000000},
              {"ratio", 1.3}, {"snapshots", true}, {"base_check_from", 1000000}};
    case ExperimentKind::lorenz:
      return {{"flow",
               {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}, {"h", 1e-3}, {"method", "rk4"},
                {"tolerance", 1e-10}}},
              {"seed", 1},
              {"observable", "z"},
              {"average", {{"starts", 5}, {"T", 10000.0}}},
              {"baseline", {{"T", 100000.0}, {"batches", 50}}},
              {"deviation",
               {{"count", 10000},
                {"epsilon", 2.0},
                {"T_list", {20, 40, 60, 80, 100, 120, 140, 160, 180, 200}}}},
              {"order", {{"T", 10.0}, {"h", 1e-3}, {"segments", 21}}}};
    case ExperimentKind::calibrate:
      return {{"target", "clt"},
              {"seed", 1},
              {"clt", {{"repeats", 200}, {"paths", 1000}, {"steps", 1000}, {"grid", 100}}},
              {"historical", {{"system", "default3d"}, {"seeds", 20}, {"n_max", 1000000}}}};
  }
  return Json::object();
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string type_name(const Json& j) {
  if (j.is_number()) return "number";
  if (j.is_boolean()) return "boolean";
  return j.type_name();
}

void merge_checked(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) fail(path, "expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = it.key();
    const std::string kp = path + "." + key;
    if (!base.contains(key)) fail(kp, "unknown key");
    Json& slot = base[key];
    const Json& value = it.value();
    if (slot.is_null()) {
      slot = value;  // free-form optional entry, parsed by the experiment
    } else if (key == "system" && (value.is_string() || value.is_object())) {
      slot = value;
    } else if (slot.is_object()) {
      merge_checked(slot, value, kp);
    } else if (type_name(slot) != type_name(value)) {
      fail(kp, "expected " + type_name(slot) + ", got " + type_name(value));
    } else {
      slot = value;
    }
  }
}

}  // namespace

Json resolve_config(ExperimentKind kind, const Json& user) {
  Json config = default_config(kind);
  if (!user.is_null()) merge_checked(config, user, "$");
  if (config.contains("system")) system_from_json(config["system"], "$.system");
  if (kind == ExperimentKind::calibrate) system_from_json(config["historical"]["system"], "$.historical.system");
  return config;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail("--set " + assignment, "expected dotted.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (!config.is_object()) config = Json::object();
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) fail("--set " + assignment, "empty path component");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    Json& child = (*node)[key];
    if (!child.is_object()) child = Json::object();
    node = &child;
    start = dot + 1;
  }
}

Json load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream text;
  std::string line;
  while (std::getline(in, line)) {
    const auto trimmed = line.find_first_not_of(" \t");
    if (trimmed != std::string::npos && line.compare(trimmed, 2, "//") == 0) continue;
    text << line << '\n';
  }
  Json j = Json::parse(text.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  return j;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return hex.str();
}

namespace {

std::int64_t get_int(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (std::floor(v) != v || std::abs(v) > 9e15) fail(path, "expected an integer");
  return static_cast<std::int64_t>(v);
}

double get_double(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::vector<std::int64_t> get_int_list(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> get_double_list(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_double(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::uint64_t get_seed(const Json& config) {
  const auto s = get_int(config["seed"], "$.seed");
  if (s < 0) fail("$.seed", "must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::int64_t positive(std::int64_t v, const std::string& path) {
  if (v < 1) fail(path, "must be >= 1");
  return v;
}

TorusPoint3 get_point(const Json& j, const std::string& path) {
  const auto v = get_double_list(j, path);
  if (v.size() < 2 || v.size() > 3) fail(path, "expected [x1, x2] or [x1, x2, t]");
  return TorusPoint3::wrapped(v[0], v[1], v.size() == 3 ? v[2] : 0.0);
}

/// Output sink of one run: creates files inside the bundle directory.
class Bundle {
 public:
  explicit Bundle(fs::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return out;
  }
  void write_json(const std::string& name, const Json& j) { open(name) << j.dump(2) << '\n'; }
  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }
  void add(const std::string& name) { files_.push_back(name); }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

Json fit_json(const RateFit& f) {
  return {{"slope", f.slope},
          {"log_prefactor", f.log_prefactor},
          {"r_squared", f.r_squared},
          {"slope_stderr", f.slope_stderr},
          {"log_prefactor_stderr", f.log_prefactor_stderr},
          {"covariance", f.covariance},
          {"points", f.points}};
}

// ------------------------------------------------------------------ runners

void run_simulate(const Json& c, Json& manifest, Bundle& out) {
  const SystemSpec spec = system_from_json(c["system"], "$.system");
  const std::uint64_t seed = get_seed(c);
  const std::int64_t steps = get_int(c["steps"], "$.steps");
  if (steps < 1) fail("$.steps", "schedule is empty (steps must be >= 1)");
  const double ratio = get_double(c["schedule"]["ratio"], "$.schedule.ratio");
  const auto max_norm = get_int(c["family"]["max_norm"], "$.family.max_norm");
  if (max_norm < 1 || max_norm > 16) fail("$.family.max_norm", "must be in [1, 16]");
  TorusPoint3 start;
  if (c["start"].is_null()) {
    StreamRng rng(seed, 0, "simulate-start");
    start = {{rng.uniform(), rng.uniform()}, spec.dimension() == 3 ? rng.uniform() : 0.0};
  } else {
    start = get_point(c["start"], "$.start");
  }
  const auto schedule = geometric_schedule(steps, ratio);
  const FamilyPtr family = TestFamily::get(spec.dimension(), static_cast<int>(max_norm));
  manifest["system"] = to_json(spec);
  manifest["family"] = to_json(*family);
  manifest["schedule"] = schedule;
  manifest["start"] = {start.base.x1, start.base.x2, start.t};

  auto emp = out.open("empirical.csv");
  auto orb = out.open("orbit.csv");
  CsvWriter ew(emp), ow(orb);
  ew.cell("n").cell("family");
  for (std::size_t i = 0; i < family->size(); ++i) ew.cell("f" + std::to_string(i));
  ew.end_row();
  ow.cell("n").cell("x1").cell("x2").cell("t").end_row();
  SystemOrbit orbit(spec, start);
  EmpiricalAccumulator acc(family);
  std::size_t next = 0;
  for (std::int64_t n = 1; next < schedule.size(); ++n) {
    if (spec.dimension() == 3) {
      acc.add(TorusPoint3{orbit.base(), orbit.fiber()});
    } else {
      acc.add(orbit.base());
    }
    orbit.step();
    if (n != schedule[next]) continue;
    ++next;
    const auto mu = acc.finalize();
    ew.cell(n).cell(family->id());
    for (double v : mu.integrals()) ew.cell(v);
    ew.end_row();
    const double t = spec.variant == Variant::skew_unbounded ? orbit.skew_fiber() : orbit.fiber();
    ow.cell(n).cell(orbit.base().x1).cell(orbit.base().x2).cell(t).end_row();
  }
}

void run_exponents(const Json& c, Json& manifest, Bundle& out) {
  const SystemSpec spec = system_from_json(c["system"], "$.system");
  if (spec.variant != Variant::compactified3d && spec.variant != Variant::morse_smale_control) {
    fail("$.system", "exponents needs compactified3d or morse_smale_control");
  }
  const std::uint64_t seed = get_seed(c);
  const std::int64_t members = positive(get_int(c["seeds"], "$.seeds"), "$.seeds");
  const std::int64_t n = positive(get_int(c["n"], "$.n"), "$.n");
  auto checkpoints = get_int_list(c["checkpoints"], "$.checkpoints");
  std::erase_if(checkpoints, [n](std::int64_t v) { return v < 1 || v > n; });
  checkpoints.push_back(n);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  manifest["system"] = to_json(spec);
  manifest["ensemble"] = {{"members", members}, {"rng_label", "exponent-start"}};
  manifest["schedule"] = checkpoints;

  std::vector<ExponentTrace> traces(static_cast<std::size_t>(members));
  for_each_member(Exec::parallel, members, [&](std::int64_t i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), "exponent-start");
    const TorusPoint3 start{{rng.uniform(), rng.uniform()}, rng.uniform()};
    traces[static_cast<std::size_t>(i)] = center_exponent_trace(spec, start, n, checkpoints);
  });
  auto f = out.open("exponents.csv");
  CsvWriter w(f);
  w.cell("member").cell("n").cell("lambda_c").end_row();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (const auto& cp : traces[i].checkpoints) w.cell(i).cell(cp.n).cell(cp.lambda_c).end_row();
  }
  auto fin = out.open("final.csv");
  CsvWriter fw(fin);
  fw.cell("member").cell("n").cell("lambda_c").end_row();
  for (std::size_t i = 0; i < traces.size(); ++i) fw.cell(i).cell(n).cell(traces[i].checkpoints.back().lambda_c).end_row();
  auto s = out.open("summary.csv");
  CsvWriter sw(s);
  sw.cell("n").cell("median_abs").cell("max_abs").end_row();
  Json summary = Json::array();
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    std::vector<double> abs_values;
    for (const auto& t : traces) abs_values.push_back(std::abs(t.checkpoints[k].lambda_c));
    std::sort(abs_values.begin(), abs_values.end());
    const std::size_t m = abs_values.size();
    const double median = m % 2 ? abs_values[m / 2] : 0.5 * (abs_values[m / 2 - 1] + abs_values[m / 2]);
    sw.cell(checkpoints[k]).cell(median).cell(abs_values.back()).end_row();
    summary.push_back({{"n", checkpoints[k]}, {"median_abs", median}, {"max_abs", abs_values.back()}});
  }
  Json report{{"checkpoints", summary}};
  if (spec.variant == Variant::morse_smale_control) report["log_r_prime_0"] = spec.control_log_derivative();
  out.write_json("report.json", report);
  if (c["spectrum"].get<bool>()) {
    auto sp = out.open("spectrum.csv");
    CsvWriter spw(sp);
    spw.cell("n").cell("l1").cell("l2").cell("l3").end_row();
    StreamRng rng(seed, 0, "exponent-start");
    const TorusPoint3 start{{rng.uniform(), rng.uniform()}, rng.uniform()};
    for (std::int64_t cp : checkpoints) {
      if (cp < 100) continue;
      const auto rates = spectrum_trace(spec, start, cp);
      spw.cell(cp);
      for (double r : rates) spw.cell(r);
      spw.end_row();
    }
  }
}

void run_sigma(const Json& c, Json& manifest, Bundle& out) {
  const SystemSpec spec = system_from_json(c["system"], "$.system");
  const std::uint64_t seed = get_seed(c);
  const auto lags = get_int(c["lags"], "$.lags");
  if (lags < 1) fail("$.lags", "lag_max must be >= 1");
  const auto samples = get_int(c["samples"], "$.samples");
  if (samples < 2) fail("$.samples", "must be >= 2");
  const auto var_n = get_int(c["variance"]["n"], "$.variance.n");
  const auto var_ensemble = get_int(c["variance"]["ensemble"], "$.variance.ensemble");
  if (var_ensemble > 0 && var_n < 1000) fail("$.variance.n", "must be >= 1000");
  manifest["system"] = to_json(spec);
  manifest["ensemble"] = {{"samples", samples}, {"rng_label", "green-kubo"}};

  const auto gk = estimate_sigma_green_kubo(spec, static_cast<int>(lags), samples, seed);
  auto f = out.open("green_kubo.csv");
  CsvWriter w(f);
  w.cell("lag").cell("correlation").cell("partial_sum").cell("partial_stderr").end_row();
  for (std::size_t k = 0; k < gk.partial_sums.size(); ++k) {
    w.cell(k).cell(gk.correlations[k]).cell(gk.partial_sums[k]).cell(gk.partial_stderr[k]).end_row();
  }
  Json report{{"green_kubo",
               {{"lag_max", lags}, {"samples", samples}, {"value", gk.value}, {"standard_error", gk.standard_error}}}};
  if (var_ensemble > 0) {
    const auto ve = estimate_sigma_variance(spec, var_n, var_ensemble, seed);
    auto v = out.open("variance.csv");
    CsvWriter vw(v);
    vw.cell("member").cell("scaled_sum").end_row();
    for (std::size_t i = 0; i < ve.scaled_sums.size(); ++i) vw.cell(i).cell(ve.scaled_sums[i]).end_row();
    const double combined = std::hypot(gk.standard_error, ve.standard_error);
    report["variance"] = {{"n", var_n}, {"ensemble", var_ensemble}, {"value", ve.value},
                          {"standard_error", ve.standard_error}};
    report["agreement"] = {{"difference", gk.value - ve.value}, {"combined_stderr", combined},
                           {"within_3_stderr", std::abs(gk.value - ve.value) <= 3.0 * combined}};
  }
  out.write_json("report.json", report);
}

Json wiener_json(const WienerReport& r) {
  return {{"paths", r.paths},
          {"ks_statistic", r.ks.statistic},
          {"ks_p_value", r.ks.p_value},
          {"variance_slope", r.variance_slope},
          {"variance_intercept", r.variance_intercept},
          {"variance_r_squared", r.variance_r_squared},
          {"half_increment_correlation", r.half_increment_correlation},
          {"increment_correlation", r.increment_correlation},
          {"max_offdiagonal_correlation", r.max_offdiagonal_correlation}};
}

void run_clt(const Json& c, Json& manifest, Bundle& out) {
  const SystemSpec spec = system_from_json(c["system"], "$.system");
  const std::uint64_t seed = get_seed(c);
  const auto n = positive(get_int(c["n"], "$.n"), "$.n");
  const auto count = positive(get_int(c["paths"], "$.paths"), "$.paths");
  const auto grid = positive(get_int(c["grid"], "$.grid"), "$.grid");
  const auto blocks = get_int(c["blocks"], "$.blocks");
  const double sigma = get_double(c["sigma"], "$.sigma");
  if (!(sigma > 0.0)) fail("$.sigma", "sigma must be positive");
  const std::string generator = c["generator"].get<std::string>();
  if (generator != "system" && generator != "gaussian") fail("$.generator", "expected 'system' or 'gaussian'");
  manifest["system"] = to_json(spec);
  manifest["ensemble"] = {{"paths", count}, {"rng_label", generator == "system" ? "clt-start" : "gaussian-walk"}};

  const auto paths = generator == "system" ? sample_clt_paths(spec, n, static_cast<int>(grid), sigma, count, seed)
                                           : gaussian_walk_paths(count, n, static_cast<int>(grid), seed);
  auto f = out.open("paths.csv");
  CsvWriter w(f);
  w.cell("member").cell("t").cell("value").end_row();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t g = 0; g < paths[i].t.size(); ++g) w.cell(i).cell(paths[i].t[g]).cell(paths[i].values[g]).end_row();
  }
  auto p = out.open("variance_profile.csv");
  CsvWriter pw(p);
  pw.cell("t").cell("variance").end_row();
  std::vector<double> column(paths.size());
  for (std::size_t g = 0; g < paths.front().t.size(); ++g) {
    for (std::size_t i = 0; i < paths.size(); ++i) column[i] = paths[i].values[g];
    pw.cell(paths.front().t[g]).cell(paths.size() > 1 ? variance(column) : 0.0).end_row();
  }
  Json report = Json::object();
  if (count >= 500) {
    report = wiener_json(wiener_tests(paths, static_cast<int>(blocks)));
  } else {
    report["note"] = "fewer than 500 paths: Wiener tests skipped";
  }
  out.write_json("report.json", report);
}

EnsembleSpec ensemble_from_json(const Json& j, std::uint64_t seed) {
  EnsembleSpec e;
  e.sampling = sampling_from_string(j["sampling"].get<std::string>());
  e.count = get_int(j["count"], "$.ensemble.count");
  const auto lo = get_double_list(j["lower"], "$.ensemble.lower");
  const auto hi = get_double_list(j["upper"], "$.ensemble.upper");
  if (lo.size() != 3 || hi.size() != 3) fail("$.ensemble", "lower and upper need three entries");
  std::copy(lo.begin(), lo.end(), e.lower.begin());
  std::copy(hi.begin(), hi.end(), e.upper.begin());
  e.anchor = get_point(j["anchor"], "$.ensemble.anchor");
  e.length = get_double(j["length"], "$.ensemble.length");
  e.seed = seed;
  return e;
}

void run_deviation(const Json& c, Json& manifest, Bundle& out) {
  const SystemSpec spec = system_from_json(c["system"], "$.system");
  const std::uint64_t seed = get_seed(c);
  const EnsembleSpec ensemble = ensemble_from_json(c["ensemble"], seed);
  ensemble.validate(spec.dimension());
  const Observable psi = c["observable"].is_null() ? spec.phi : observable_from_json(c["observable"], "$.observable");
  Interval target;
  if (c["target"].is_null()) {
    try {
      target = target_interval(spec, psi);
    } catch (const ConfigError& e) {
      fail("$.target", e.what());
    }
  } else {
    const auto t = get_double_list(c["target"], "$.target");
    if (t.size() != 2 || t[0] > t[1]) fail("$.target", "expected [lower, upper]");
    target = {t[0], t[1]};
  }
  const auto epsilons = get_double_list(c["epsilons"], "$.epsilons");
  if (epsilons.empty()) fail("$.epsilons", "at least one epsilon is required");
  const auto n_list = get_int_list(c["n_list"], "$.n_list");
  manifest["system"] = to_json(spec);
  manifest["observable"] = to_json(psi);
  manifest["target_interval"] = {target.lower, target.upper};
  manifest["ensemble"] = c["ensemble"];
  manifest["schedule"] = n_list;

  const auto curves = deviant_fractions(spec, ensemble, psi, target, epsilons, n_list);
  auto f = out.open("deviation.csv");
  CsvWriter w(f);
  w.cell("epsilon").cell("n").cell("deviant_count").cell("total").cell("fraction").end_row();
  Json fits = Json::array();
  for (const auto& curve : curves) {
    for (std::size_t j = 0; j < curve.n.size(); ++j) {
      w.cell(curve.epsilon).cell(curve.n[j]).cell(curve.deviant[j]).cell(curve.total).cell(curve.fraction[j]).end_row();
    }
    Json entry{{"epsilon", curve.epsilon}};
    if (curve.fit) {
      entry["fit"] = fit_json(*curve.fit);
    } else {
      entry["fit"] = nullptr;
      entry["status"] = "below resolution";
    }
    fits.push_back(entry);
  }
  out.write_json("fit.json", {{"target_interval", {target.lower, target.upper}}, {"curves", fits}});
}

void run_entropy(const Json& c, Json& manifest, Bundle& out) {
  const SystemSpec spec = system_from_json(c["system"], "$.system");
  EntropySettings s;
  s.anchor = get_point(c["anchor"], "$.anchor");
  s.segment_length = get_double(c["segment_length"], "$.segment_length");
  if (!(s.segment_length > 0.0) || s.segment_length > 0.1) fail("$.segment_length", "must be in (0, 0.1]");
  s.rho = get_double(c["rho"], "$.rho");
  if (!(s.rho > 0.0)) fail("$.rho", "must be positive");
  s.n_list.clear();
  for (auto v : get_int_list(c["n_list"], "$.n_list")) s.n_list.push_back(static_cast<int>(v));
  if (s.n_list.size() < 4) fail("$.n_list", "needs at least four entries");
  s.orbit_length = positive(get_int(c["orbit_length"], "$.orbit_length"), "$.orbit_length");
  s.burn_in = get_int(c["burn_in"], "$.burn_in");
  const auto bowen_n = get_int_list(c["bowen"]["n_list"], "$.bowen.n_list");
  const double center = get_double(c["bowen"]["center"], "$.bowen.center");
  if (center < 0.0 || center > 1.0) fail("$.bowen.center", "must be a fraction of the segment in [0, 1]");
  const PesinSubspace subspace = [&] {
    try {
      return pesin_subspace_from_string(c["pesin"].get<std::string>());
    } catch (const ConfigError& e) {
      fail("$.pesin", e.what());
    }
  }();
  manifest["system"] = to_json(spec);
  manifest["segment"] = {{"anchor", c["anchor"]}, {"length", s.segment_length}, {"direction", "unstable"}};

  const Disc disc = unstable_segment(spec, s.anchor, s.segment_length);
  const GibbsResidual gibbs = gibbs_residual(spec, s);
  auto f = out.open("separated.csv");
  CsvWriter w(f);
  w.cell("n").cell("rho").cell("cardinality").cell("log_cardinality").end_row();
  for (std::size_t i = 0; i < gibbs.entropy.n.size(); ++i) {
    w.cell(gibbs.entropy.n[i]).cell(s.rho).cell(gibbs.entropy.cardinality[i])
        .cell(std::log(static_cast<double>(gibbs.entropy.cardinality[i]))).end_row();
  }
  auto b = out.open("bowen.csv");
  CsvWriter bw(b);
  bw.cell("n").cell("rho").cell("length").end_row();
  Json bowen = Json::array();
  for (auto n : bowen_n) {
    const double len = bowen_ball_volume(disc, center * s.segment_length, static_cast<int>(n), s.rho);
    bw.cell(n).cell(s.rho).cell(len).end_row();
    bowen.push_back({{"n", n}, {"length", len}});
  }
  const PesinReport pesin = pesin_check(spec, subspace, s);
  out.write_json("report.json",
                 {{"entropy",
                   {{"slope", gibbs.entropy.value},
                    {"intercept", gibbs.entropy.fit.intercept},
                    {"r_squared", gibbs.entropy.fit.r_squared},
                    {"slope_stderr", gibbs.entropy.fit.slope_stderr}}},
                  {"gibbs", {{"jacobian_integral", gibbs.jacobian_integral}, {"residual", gibbs.residual}}},
                  {"bowen", bowen},
                  {"pesin",
                   {{"subspace", to_string(pesin.subspace)},
                    {"entropy", pesin.entropy},
                    {"jacobian_integral", pesin.jacobian_integral},
                    {"margin", pesin.margin}}}});
}

void run_historical(const Json& c, Json& manifest, Bundle& out) {
  const SystemSpec spec = system_from_json(c["system"], "$.system");
  if (spec.variant != Variant::compactified3d && spec.variant != Variant::morse_smale_control) {
    fail("$.system", "historical needs compactified3d or morse_smale_control");
  }
  const std::uint64_t seed = get_seed(c);
  const auto members = positive(get_int(c["seeds"], "$.seeds"), "$.seeds");
  const auto n_max = positive(get_int(c["n_max"], "$.n_max"), "$.n_max");
  const double ratio = get_double(c["ratio"], "$.ratio");
  const bool snapshots = c["snapshots"].get<bool>();
  const auto base_from = get_int(c["base_check_from"], "$.base_check_from");
  const auto schedule = geometric_schedule(n_max, ratio);
  const FamilyPtr family = TestFamily::get(3, 2);
  manifest["system"] = to_json(spec);
  manifest["family"] = to_json(*family);
  manifest["schedule"] = schedule;
  manifest["ensemble"] = {{"members", members}, {"rng_label", "historical-start"}};

  std::vector<OscillationLog> logs(static_cast<std::size_t>(members));
  for_each_member(Exec::parallel, members, [&](std::int64_t i) {
    logs[static_cast<std::size_t>(i)] = scan_orbit(spec, historical_start(seed, i), n_max, schedule, family, snapshots);
  });
  auto sf = out.open("summary.csv");
  CsvWriter sw(sf);
  sw.cell("member").cell("min_d1").cell("min_d2").cell("final_dseg").cell("score").cell("max_base_to_volume").end_row();
  Json members_json = Json::array();
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& log = logs[i];
    auto f = out.open("orbit_" + std::to_string(i) + ".csv");
    CsvWriter w(f);
    w.cell("n").cell("d1").cell("d2").cell("dseg").cell("min_d1").cell("min_d2").cell("base_to_volume")
        .cell("weight_nu1").end_row();
    double base_max = 0.0;
    bool base_checked = false;
    for (const auto& r : log.rows) {
      w.cell(r.n).cell(r.d1).cell(r.d2).cell(r.dseg).cell(r.min_d1).cell(r.min_d2).cell(r.base_to_volume)
          .cell(r.weight_nu1).end_row();
      if (r.n >= base_from) {
        base_max = std::max(base_max, r.base_to_volume);
        base_checked = true;
      }
    }
    const double score = log.rows.size() >= 10 ? nonconvergence_score(log) : NAN;
    const auto& last = log.rows.back();
    sw.cell(i).cell(last.min_d1).cell(last.min_d2).cell(last.dseg).cell(score)
        .cell(base_checked ? base_max : NAN).end_row();
    members_json.push_back({{"member", i},
                            {"start", {log.start.base.x1, log.start.base.x2, log.start.t}},
                            {"min_d1", last.min_d1},
                            {"min_d2", last.min_d2},
                            {"final_dseg", last.dseg},
                            {"score", std::isnan(score) ? Json(nullptr) : Json(score)},
                            {"max_base_to_volume", base_checked ? Json(base_max) : Json(nullptr)}});
  }
  if (snapshots) {
    auto f = out.open("snapshots.csv");
    CsvWriter w(f);
    w.cell("member").cell("n").cell("family");
    for (std::size_t k = 0; k < family->size(); ++k) w.cell("f" + std::to_string(k));
    w.end_row();
    for (std::size_t i = 0; i < logs.size(); ++i) {
      for (std::size_t r = 0; r < logs[i].snapshots.size(); ++r) {
        w.cell(i).cell(logs[i].rows[r].n).cell(family->id());
        for (double v : logs[i].snapshots[r].integrals()) w.cell(v);
        w.end_row();
      }
    }
  }
  out.write_json("summary.json", {{"reference_gap", logs.front().reference_gap}, {"members", members_json}});
}

FlowSpec flow_from_json(const Json& j) {
  FlowSpec f;
  f.sigma = get_double(j["sigma"], "$.flow.sigma");
  f.rho = get_double(j["rho"], "$.flow.rho");
  f.beta = get_double(j["beta"], "$.flow.beta");
  f.h = get_double(j["h"], "$.flow.h");
  f.tolerance = get_double(j["tolerance"], "$.flow.tolerance");
  try {
    f.method = flow_method_from_string(j["method"].get<std::string>());
    f.validate();
  } catch (const ConfigError& e) {
    fail("$.flow", e.what());
  }
  return f;
}

void run_lorenz(const Json& c, Json& manifest, Bundle& out) {
  const FlowSpec flow = flow_from_json(c["flow"]);
  const std::uint64_t seed = get_seed(c);
  const FlowObservable psi = [&] {
    try {
      return flow_observable_from_string(c["observable"].get<std::string>());
    } catch (const ConfigError& e) {
      fail("$.observable", e.what());
    }
  }();
  const auto starts = get_int(c["average"]["starts"], "$.average.starts");
  const double T = get_double(c["average"]["T"], "$.average.T");
  const double baseline_T = get_double(c["baseline"]["T"], "$.baseline.T");
  const auto batches = get_int(c["baseline"]["batches"], "$.baseline.batches");
  const auto dev_count = get_int(c["deviation"]["count"], "$.deviation.count");
  const double epsilon = get_double(c["deviation"]["epsilon"], "$.deviation.epsilon");
  const auto T_list = get_double_list(c["deviation"]["T_list"], "$.deviation.T_list");
  const double order_T = get_double(c["order"]["T"], "$.order.T");
  const double order_h = get_double(c["order"]["h"], "$.order.h");
  const auto segments = get_int(c["order"]["segments"], "$.order.segments");
  if (!(T > 0.0)) fail("$.average.T", "must be positive");
  manifest["flow"] = {{"sigma", flow.sigma}, {"rho", flow.rho}, {"beta", flow.beta}, {"h", flow.h},
                      {"method", to_string(flow.method)}, {"tolerance", flow.tolerance}};

  FlowEnsemble box;
  box.seed = seed;
  Json report = Json::object();
  // Time averages from independent starts.
  std::vector<double> checkpoints;
  for (double t = 10.0; t < T; t *= 10.0) checkpoints.push_back(t);
  std::vector<FlowAverage> averages(static_cast<std::size_t>(std::max<std::int64_t>(starts, 0)));
  for_each_member(Exec::parallel, starts, [&](std::int64_t i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), "lorenz-average-start");
    FlowState x{rng.uniform(box.lower[0], box.upper[0]), rng.uniform(box.lower[1], box.upper[1]),
                rng.uniform(box.lower[2], box.upper[2])};
    averages[static_cast<std::size_t>(i)] = flow_average(flow, x, psi, T, checkpoints);
  });
  auto af = out.open("averages.csv");
  CsvWriter aw(af);
  aw.cell("start").cell("T").cell("value").end_row();
  Json values = Json::array();
  double worst = 0.0;
  for (std::size_t i = 0; i < averages.size(); ++i) {
    for (std::size_t k = 0; k < averages[i].checkpoint_t.size(); ++k) {
      aw.cell(i).cell(averages[i].checkpoint_t[k]).cell(averages[i].checkpoint_value[k]).end_row();
    }
    values.push_back(averages[i].value);
    for (std::size_t j = 0; j < i; ++j) {
      const double scale = std::max(std::abs(averages[i].value), std::abs(averages[j].value));
      if (scale > 0.0) worst = std::max(worst, std::abs(averages[i].value - averages[j].value) / scale);
    }
  }
  report["averages"] = {{"T", T}, {"values", values}, {"max_pairwise_relative_difference", worst}};

  // Integrator order.
  if (segments > 0) {
    const auto survey = rk4_order_survey(flow, {1.0, 1.0, 20.0}, static_cast<int>(segments), order_T, order_h);
    auto of = out.open("order.csv");
    CsvWriter ow(of);
    ow.cell("segment").cell("ratio").end_row();
    for (std::size_t i = 0; i < survey.ratios.size(); ++i) ow.cell(i).cell(survey.ratios[i]).end_row();
    report["order"] = {{"T", order_T}, {"h", order_h}, {"median_ratio", survey.median}};
  }

  // Deviations against the self-referential baseline.
  auto df = out.open("deviation.csv");
  CsvWriter dw(df);
  dw.cell("epsilon").cell("T").cell("deviant_count").cell("total").cell("fraction").end_row();
  Json fits = Json::array();
  if (dev_count > 0) {
    const FlowBaseline baseline = flow_baseline(flow, {1.0, 1.0, 20.0}, psi, baseline_T, static_cast<int>(batches));
    box.count = dev_count;
    const auto curve = flow_deviation(flow, box, psi, epsilon, T_list, baseline);
    for (std::size_t j = 0; j < curve.T.size(); ++j) {
      dw.cell(curve.epsilon).cell(curve.T[j]).cell(curve.deviant[j]).cell(curve.total).cell(curve.fraction[j]).end_row();
    }
    Json entry{{"epsilon", epsilon}, {"fit", curve.fit ? fit_json(*curve.fit) : Json(nullptr)}};
    if (!curve.fit) entry["status"] = "below resolution";
    fits.push_back(entry);
    report["baseline"] = {{"T", baseline.T}, {"value", baseline.value}, {"standard_error", baseline.standard_error},
                          {"flagged", curve.baseline_flag}};
  }
  out.write_json("fit.json", {{"curves", fits}});
  out.write_json("report.json", report);
}

void run_calibrate(const Json& c, Json& manifest, Bundle& out) {
  const std::uint64_t seed = get_seed(c);
  const std::string target = c["target"].get<std::string>();
  if (target == "clt") {
    const auto& j = c["clt"];
    const auto repeats = positive(get_int(j["repeats"], "$.clt.repeats"), "$.clt.repeats");
    const auto paths = get_int(j["paths"], "$.clt.paths");
    const auto steps = positive(get_int(j["steps"], "$.clt.steps"), "$.clt.steps");
    const auto grid = positive(get_int(j["grid"], "$.clt.grid"), "$.clt.grid");
    if (paths < 500) fail("$.clt.paths", "must be >= 500");
    manifest["reference"] = "gaussian random walk";
    std::vector<WienerReport> reports(static_cast<std::size_t>(repeats));
    for_each_member(Exec::parallel, repeats, [&](std::int64_t r) {
      const auto p = gaussian_walk_paths(paths, steps, static_cast<int>(grid),
                                         splitmix64(seed + static_cast<std::uint64_t>(r)));
      reports[static_cast<std::size_t>(r)] = wiener_tests(p);
    });
    auto f = out.open("calibration.csv");
    CsvWriter w(f);
    w.cell("repeat").cell("ks_p_value").cell("abs_half_increment_correlation").cell("variance_slope").end_row();
    std::int64_t ks_pass = 0, rho_pass = 0, slope_pass = 0;
    for (std::size_t r = 0; r < reports.size(); ++r) {
      const auto& rep = reports[r];
      w.cell(r).cell(rep.ks.p_value).cell(std::abs(rep.half_increment_correlation)).cell(rep.variance_slope).end_row();
      ks_pass += rep.ks.p_value > 0.01;
      rho_pass += std::abs(rep.half_increment_correlation) < 0.05;
      slope_pass += std::abs(rep.variance_slope - 1.0) < 0.1;
    }
    const auto n = static_cast<double>(repeats);
    out.write_json("summary.json", {{"target", "clt"},
                                    {"repeats", repeats},
                                    {"paths", paths},
                                    {"pass_rate_ks_p_gt_0.01", ks_pass / n},
                                    {"pass_rate_abs_rho_lt_0.05", rho_pass / n},
                                    {"pass_rate_slope_within_0.1", slope_pass / n}});
    return;
  }
  if (target == "historical") {
    const auto& j = c["historical"];
    const SystemSpec spec = system_from_json(j["system"], "$.historical.system");
    const auto members = positive(get_int(j["seeds"], "$.historical.seeds"), "$.historical.seeds");
    const auto n_max = positive(get_int(j["n_max"], "$.historical.n_max"), "$.historical.n_max");
    manifest["system"] = to_json(spec);
    const auto logs = scan_ensemble(spec, members, seed, n_max, false);
    auto f = out.open("calibration.csv");
    CsvWriter w(f);
    w.cell("member").cell("min_d1_over_gap").cell("min_d2_over_gap").cell("final_dseg").cell("score").end_row();
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const auto& last = logs[i].rows.back();
      const double gap = logs[i].reference_gap;
      w.cell(i).cell(last.min_d1 / gap).cell(last.min_d2 / gap).cell(last.dseg)
          .cell(logs[i].rows.size() >= 10 ? nonconvergence_score(logs[i]) : NAN).end_row();
    }
    out.write_json("summary.json", {{"target", "historical"}, {"seeds", members}, {"n_max", n_max}});
    return;
  }
  fail("$.target", "expected 'clt' or 'historical'");
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

fs::path fresh_directory(const fs::path& root, const std::string& stem) {
  fs::path dir = root / stem;
  for (int i = 1; fs::exists(dir); ++i) dir = root / (stem + "-" + std::to_string(i));
  return dir;
}

}  // namespace

ResultBundle run_experiment(ExperimentKind kind, const Json& config, const RunOptions& options) {
  const Json resolved = resolve_config(kind, config);
  const std::uint64_t seed = get_seed(resolved);
  const std::string stamp = timestamp_now();

  ResultBundle bundle;
  bundle.directory = options.directory ? *options.directory
                                       : fresh_directory(options.runs_root,
                                                         stamp + "-" + to_string(kind) + "-" + std::to_string(seed));
  fs::create_directories(bundle.directory);
  Json manifest{{"kind", to_string(kind)},
                {"tool_version", kToolVersion},
                {"timestamp", stamp},
                {"master_seed", seed},
                {"config", resolved}};
  Bundle out(bundle.directory);
  auto write_status = [&](const std::string& state, const std::string& error) {
    std::ofstream s(bundle.directory / "status.json");
    s << Json{{"state", state}, {"complete", state == "complete"}, {"error", error}, {"workers", worker_count()}}.dump(2)
      << '\n';
  };
  auto write_manifest = [&] {
    std::ofstream m(bundle.directory / "manifest.json");
    m << manifest.dump(2) << '\n';
  };
  auto write_digests = [&] {
    Json digests = Json::object();
    std::vector<std::string> names = out.files();
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    bundle.outputs.clear();
    for (const auto& name : names) {
      const fs::path p = bundle.directory / name;
      if (!fs::exists(p)) continue;
      OutputFile f{name, sha256_file(p), fs::file_size(p)};
      digests[name] = f.sha256;
      bundle.outputs.push_back(f);
    }
    std::ofstream d(bundle.directory / "digests.json");
    d << digests.dump(2) << '\n';
  };

  write_manifest();
  write_status("running", "");
  try {
    switch (kind) {
      case ExperimentKind::simulate: run_simulate(resolved, manifest, out); break;
      case ExperimentKind::exponents: run_exponents(resolved, manifest, out); break;
      case ExperimentKind::sigma: run_sigma(resolved, manifest, out); break;
      case ExperimentKind::clt: run_clt(resolved, manifest, out); break;
      case ExperimentKind::deviation: run_deviation(resolved, manifest, out); break;
      case ExperimentKind::entropy: run_entropy(resolved, manifest, out); break;
      case ExperimentKind::historical: run_historical(resolved, manifest, out); break;
      case ExperimentKind::lorenz: run_lorenz(resolved, manifest, out); break;
      case ExperimentKind::calibrate: run_calibrate(resolved, manifest, out); break;
    }
  } catch (const std::exception& e) {
    write_manifest();
    write_digests();
    write_status("incomplete", e.what());
    bundle.manifest = manifest;
    bundle.error = e.what();
    throw;
  }
  write_manifest();
  if (options.plots) {
    for (const auto& p : emit_plots(bundle.directory)) out.add(p.filename().string());
  }
  write_digests();
  write_status("complete", "");
  bundle.manifest = manifest;
  bundle.complete = true;
  return bundle;
}

ResultBundle rerun_manifest(const fs::path& run_dir, const RunOptions& options) {
  std::ifstream in(run_dir / "manifest.json");
  if (!in) throw ConfigError((run_dir / "manifest.json").string() + ": cannot open manifest");
  const Json manifest = Json::parse(in, nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("kind") || !manifest.contains("config")) {
    throw ConfigError((run_dir / "manifest.json").string() + ": not a run manifest");
  }
  return run_experiment(experiment_kind_from_string(manifest["kind"].get<std::string>()), manifest["config"], options);
}

Json read_digests(const fs::path& run_dir) {
  std::ifstream in(run_dir / "digests.json");
  if (!in) return Json::object();
  Json j = Json::parse(in, nullptr, false);
  return j.is_discarded() ? Json::object() : j;
}

DigestCheck verify_bundle(const fs::path& run_dir) {
  DigestCheck check;
  const Json digests = read_digests(run_dir);
  for (auto it = digests.begin(); it != digests.end(); ++it) {
    const fs::path p = run_dir / it.key();
    if (!fs::exists(p) || sha256_file(p) != it.value().get<std::string>()) {
      check.ok = false;
      check.mismatched.push_back(it.key());
    }
  }
  return check;
}

}  // namespace ergolab
