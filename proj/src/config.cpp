#include "symq/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace symq::cli {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("field '" + where + "': " + what);
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(join(where, k), "unknown field");
  }
}

double number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(join(where, key), "required");
  const auto& v = j.at(key);
  if (!v.is_number()) fail(join(where, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(join(where, key), "must be finite");
  return x;
}

std::optional<double> opt_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return number(j, key, where);
}

double positive(const json& j, const std::string& key, const std::string& where) {
  const double x = number(j, key, where);
  if (!(x > 0.0)) fail(join(where, key), "must be positive");
  return x;
}

std::size_t count(const json& j, const std::string& key, const std::string& where,
                  std::size_t fallback, std::size_t min = 1) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(join(where, key), "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < static_cast<std::int64_t>(min)) {
    fail(join(where, key), "must be >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(x);
}

std::vector<double> number_list(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty()) fail(join(where, key), "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(join(where, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

ExperimentKind parse_kind(const std::string& s) {
  static const std::pair<const char*, ExperimentKind> table[] = {
      {"stationary", ExperimentKind::stationary},
      {"insensitivity", ExperimentKind::insensitivity},
      {"transient-marginal", ExperimentKind::transient_marginal},
      {"diffusion-scale", ExperimentKind::diffusion_scale},
      {"heavy-tail-scale", ExperimentKind::heavy_tail_scale},
      {"collapse", ExperimentKind::collapse},
      {"rbm-compare", ExperimentKind::rbm_compare},
      {"cycle-tails", ExperimentKind::cycle_tails},
      {"rbm-selftest", ExperimentKind::rbm_selftest},
  };
  for (const auto& [name, kind] : table) {
    if (s == name) return kind;
  }
  fail("experiment", "unknown experiment '" + s + "'");
}

std::string kind_field(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  if (!j.contains("kind") || !j.at("kind").is_string()) fail(join(where, "kind"), "required string");
  return j.at("kind").get<std::string>();
}

template <class T>
std::vector<std::string> unique_labels(const json& list, const std::vector<T>& items,
                                       const std::vector<std::string>& defaults) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::string base = defaults[i];
    if (list[i].contains("label") && list[i].at("label").is_string()) {
      base = list[i].at("label").template get<std::string>();
    }
    std::string label = base;
    for (int n = 2; std::find(labels.begin(), labels.end(), label) != labels.end(); ++n) {
      label = base + "#" + std::to_string(n);
    }
    labels.push_back(label);
  }
  return labels;
}

json as_list(const json& j, const char* single, const char* plural) {
  if (j.contains(single) && j.contains(plural)) {
    fail(plural, std::string("give either '") + single + "' or '" + plural + "', not both");
  }
  if (j.contains(plural)) {
    if (!j.at(plural).is_array() || j.at(plural).empty()) fail(plural, "expected a non-empty array");
    return j.at(plural);
  }
  if (j.contains(single)) return json::array({j.at(single)});
  return json::array();
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::stationary: return "stationary";
    case ExperimentKind::insensitivity: return "insensitivity";
    case ExperimentKind::transient_marginal: return "transient-marginal";
    case ExperimentKind::diffusion_scale: return "diffusion-scale";
    case ExperimentKind::heavy_tail_scale: return "heavy-tail-scale";
    case ExperimentKind::collapse: return "collapse";
    case ExperimentKind::rbm_compare: return "rbm-compare";
    case ExperimentKind::cycle_tails: return "cycle-tails";
    case ExperimentKind::rbm_selftest: return "rbm-selftest";
  }
  return "unknown";
}

Discipline parse_discipline(const json& j, const std::string& where) {
  const std::string kind = kind_field(j, where);
  if (kind == "ps" || kind == "lcfs") {
    allow_keys(j, where, {"kind", "label"});
    return kind == "ps" ? Discipline::ps() : Discipline::lcfs();
  }
  if (kind == "fcfs") {
    fail(join(where, "kind"), "fcfs is not a symmetric discipline (insertion law differs from service law)");
  }
  if (kind != "table") fail(join(where, "kind"), "unknown discipline '" + kind + "'");

  allow_keys(j, where, {"kind", "label", "rows", "extension", "normalize"});
  if (!j.contains("rows") || !j.at("rows").is_array() || j.at("rows").empty()) {
    fail(join(where, "rows"), "expected a non-empty array of rows");
  }
  std::vector<std::vector<double>> rows;
  const auto& jr = j.at("rows");
  for (std::size_t n = 0; n < jr.size(); ++n) {
    const std::string rw = join(where, "rows") + "[" + std::to_string(n) + "]";
    if (!jr[n].is_array()) fail(rw, "expected an array");
    std::vector<double> row;
    for (const auto& g : jr[n]) {
      if (!g.is_number()) fail(rw, "weights must be numbers");
      row.push_back(g.get<double>());
    }
    rows.push_back(std::move(row));
  }
  ExtensionRule ext = ExtensionRule::repeat_last_row;
  if (j.contains("extension")) {
    const auto e = j.at("extension").is_string() ? j.at("extension").get<std::string>() : "";
    if (e == "repeat") {
      ext = ExtensionRule::repeat_last_row;
    } else if (e == "uniform") {
      ext = ExtensionRule::uniform;
    } else {
      fail(join(where, "extension"), "expected \"repeat\" or \"uniform\"");
    }
  }
  bool normalize = true;
  if (j.contains("normalize")) {
    if (!j.at("normalize").is_boolean()) fail(join(where, "normalize"), "expected a boolean");
    normalize = j.at("normalize").get<bool>();
  }
  try {
    return Discipline::table(std::move(rows), ext, normalize);
  } catch (const InvalidDiscipline& e) {
    fail(join(where, "rows"), e.what());
  }
}

ServiceDistribution parse_service(const json& j, const std::string& where) {
  const std::string kind = kind_field(j, where);
  try {
    if (kind == "exponential") {
      allow_keys(j, where, {"kind", "label", "mean", "rate"});
      if (j.contains("rate")) return ServiceDistribution::exponential(1.0 / positive(j, "rate", where));
      return ServiceDistribution::exponential(positive(j, "mean", where));
    }
    if (kind == "deterministic") {
      allow_keys(j, where, {"kind", "label", "value", "mean"});
      return ServiceDistribution::deterministic(
          positive(j, j.contains("value") ? "value" : "mean", where));
    }
    if (kind == "hyperexp") {
      allow_keys(j, where, {"kind", "label", "probs", "means", "mean"});
      if (!j.contains("probs")) fail(join(where, "probs"), "required");
      if (!j.contains("means")) fail(join(where, "means"), "required");
      auto sd = ServiceDistribution::hyperexp(number_list(j, "probs", where),
                                              number_list(j, "means", where));
      if (auto m = opt_number(j, "mean", where)) return sd.with_mean(*m);
      return sd;
    }
    if (kind == "erlang") {
      allow_keys(j, where, {"kind", "label", "k", "mean", "rate"});
      const auto k = static_cast<int>(count(j, "k", where, 0));
      if (k < 1) fail(join(where, "k"), "required, >= 1");
      if (j.contains("rate")) return ServiceDistribution::erlang(k, k / positive(j, "rate", where));
      return ServiceDistribution::erlang(k, positive(j, "mean", where));
    }
    if (kind == "pareto" || kind == "paretolog") {
      allow_keys(j, where, {"kind", "label", "alpha", "xmin", "mean"});
      const double alpha = number(j, "alpha", where);
      if (!(alpha > 1.0)) fail(join(where, "alpha"), "must exceed 1 for a finite mean");
      const bool log_kind = kind == "paretolog";
      auto make = [&](double x_min) {
        return log_kind ? ServiceDistribution::pareto_log(alpha, x_min)
                        : ServiceDistribution::pareto(alpha, x_min);
      };
      if (j.contains("xmin")) {
        auto sd = make(positive(j, "xmin", where));
        if (auto m = opt_number(j, "mean", where)) return sd.with_mean(*m);
        return sd;
      }
      return make(1.0).with_mean(positive(j, "mean", where));
    }
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(join(where, "kind"), "unknown service distribution '" + kind + "'");
}

ExperimentConfig parse_config(const json& j, std::optional<std::uint64_t> seed_override) {
  allow_keys(j, "",
             {"experiment", "discipline", "disciplines", "service", "services", "lambda", "scaling",
              "rbm", "timescale", "t", "times", "grid", "replications", "path_replications",
              "cycles", "samples", "k_max", "substeps", "reflection", "x_grid", "control",
              "event_log", "seed", "output", "description"});
  ExperimentConfig c;
  c.raw = j;
  if (!j.contains("experiment") || !j.at("experiment").is_string()) fail("experiment", "required string");
  c.experiment = parse_kind(j.at("experiment").get<std::string>());
  const auto ex = c.experiment;

  if (seed_override) {
    c.seed = *seed_override;
  } else if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      fail("seed", "expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  } else {
    throw ConfigError("seed required");
  }
  c.raw["seed"] = c.seed;

  if (j.contains("output")) {
    if (!j.at("output").is_string()) fail("output", "expected a string");
    c.output = j.at("output").get<std::string>();
  }

  // Disciplines.
  const json dl = as_list(j, "discipline", "disciplines");
  std::vector<std::string> dnames;
  for (std::size_t i = 0; i < dl.size(); ++i) {
    const std::string where = j.contains("disciplines") ? "disciplines[" + std::to_string(i) + "]" : "discipline";
    c.disciplines.push_back(parse_discipline(dl[i], where));
    dnames.push_back(c.disciplines.back().name());
  }
  c.discipline_labels = unique_labels(dl, c.disciplines, dnames);

  // Services.
  const json sl = as_list(j, "service", "services");
  std::vector<std::string> snames;
  for (std::size_t i = 0; i < sl.size(); ++i) {
    const std::string where = j.contains("services") ? "services[" + std::to_string(i) + "]" : "service";
    c.services.push_back(parse_service(sl[i], where));
    snames.push_back(c.services.back().name());
  }
  c.service_labels = unique_labels(sl, c.services, snames);

  // Load: exactly one of lambda and scaling for queue experiments.
  if (j.contains("lambda")) c.lambda = positive(j, "lambda", "");
  if (j.contains("scaling")) {
    const auto& s = j.at("scaling");
    allow_keys(s, "scaling", {"r", "r_list", "beta"});
    ScalingSpec spec;
    if (s.contains("r") == s.contains("r_list")) fail("scaling", "give exactly one of 'r' and 'r_list'");
    spec.r_list = s.contains("r") ? std::vector<double>{number(s, "r", "scaling")}
                                  : number_list(s, "r_list", "scaling");
    for (double r : spec.r_list) {
      if (!(r >= 1.0)) fail("scaling.r", "r must be >= 1");
    }
    spec.beta = number(s, "beta", "scaling");
    for (double r : spec.r_list) {
      if (spec.beta > r) fail("scaling.beta", "beta must not exceed r");
    }
    c.scaling = spec;
  }
  if (j.contains("rbm")) {
    const auto& r = j.at("rbm");
    allow_keys(r, "rbm", {"mu", "sigma2"});
    c.rbm = rbm::RbmParams{number(r, "mu", "rbm"), positive(r, "sigma2", "rbm")};
  }

  if (j.contains("timescale")) {
    c.timescale = j.at("timescale").is_string() ? j.at("timescale").get<std::string>() : "";
    if (c.timescale != "diffusion" && c.timescale != "heavy-tail") {
      fail("timescale", "expected \"diffusion\" or \"heavy-tail\"");
    }
  }
  if (j.contains("t")) c.t = positive(j, "t", "");
  if (j.contains("times")) {
    c.times = number_list(j, "times", "");
    if (c.times.size() != 2 || !(c.times[0] > 0.0 && c.times[1] > c.times[0])) {
      fail("times", "expected [t1, t2] with 0 < t1 < t2");
    }
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    allow_keys(g, "grid", {"T", "step"});
    if (g.contains("T")) c.horizon = positive(g, "T", "grid");
    if (g.contains("step")) c.step = positive(g, "step", "grid");
  }
  c.replications = count(j, "replications", "", c.replications);
  c.path_replications = count(j, "path_replications", "", c.path_replications, 0);
  c.cycles = count(j, "cycles", "", c.cycles);
  c.samples = count(j, "samples", "", c.samples);
  c.k_max = count(j, "k_max", "", c.k_max);
  c.substeps = static_cast<int>(count(j, "substeps", "", static_cast<std::size_t>(c.substeps)));
  if (j.contains("reflection")) {
    c.reflection = j.at("reflection").is_string() ? j.at("reflection").get<std::string>() : "";
    if (c.reflection != "bridge" && c.reflection != "euler") {
      fail("reflection", "expected \"bridge\" or \"euler\"");
    }
  }
  if (j.contains("x_grid")) c.x_grid = number_list(j, "x_grid", "");
  if (j.contains("control")) {
    if (!j.at("control").is_boolean()) fail("control", "expected a boolean");
    c.control = j.at("control").get<bool>();
  }
  if (j.contains("event_log")) {
    if (!j.at("event_log").is_boolean()) fail("event_log", "expected a boolean");
    c.event_log = j.at("event_log").get<bool>();
  }

  // Experiment-specific requirements.
  const bool queue_experiment = ex != ExperimentKind::rbm_selftest;
  if (queue_experiment) {
    if (c.disciplines.empty()) fail("discipline", "required");
    if (c.services.empty()) fail("service", "required");
    if (c.lambda.has_value() == c.scaling.has_value()) {
      fail("scaling", "give exactly one of 'scaling' and 'lambda'");
    }
  }
  if (ex != ExperimentKind::insensitivity && c.services.size() > 1) {
    fail("services", "only the insensitivity experiment takes several services");
  }
  if (ex == ExperimentKind::stationary && c.cycles < 30) {
    fail("cycles", "the regenerative interval needs at least 30 cycles");
  }
  if (ex == ExperimentKind::insensitivity) {
    if (c.disciplines.size() != 1) fail("disciplines", "insensitivity takes one discipline");
    const double m0 = c.services.front().mean();
    for (std::size_t i = 1; i < c.services.size(); ++i) {
      if (std::abs(c.services[i].mean() - m0) > 1e-9 * m0) {
        fail("services[" + std::to_string(i) + "]", "insensitivity needs equal means");
      }
    }
  }
  const bool needs_scaling = ex == ExperimentKind::transient_marginal ||
                             ex == ExperimentKind::diffusion_scale ||
                             ex == ExperimentKind::heavy_tail_scale ||
                             ex == ExperimentKind::collapse || ex == ExperimentKind::rbm_compare;
  if (needs_scaling && !c.scaling) fail("scaling", "required for " + to_string(ex));
  if ((ex == ExperimentKind::stationary || ex == ExperimentKind::insensitivity ||
       ex == ExperimentKind::cycle_tails) && c.scaling && c.scaling->beta <= 0.0) {
    fail("scaling.beta", "stationary quantities need beta > 0");
  }
  if (c.lambda) {
    for (std::size_t i = 0; i < c.services.size(); ++i) {
      const double rho = *c.lambda * c.services[i].mean();
      if (!(rho < 1.0)) {
        fail("lambda", "unstable configuration: rho = " + std::to_string(rho) + " (need rho < 1)");
      }
    }
  }
  if (ex == ExperimentKind::heavy_tail_scale || (ex == ExperimentKind::transient_marginal &&
                                                 c.timescale == "heavy-tail")) {
    const auto& sd = c.services.front();
    if (!sd.heavy_tailed() || !(sd.alpha() > 1.0 && sd.alpha() < 2.0)) {
      fail("service.alpha", "requires alpha in (1,2)");
    }
    if (ex == ExperimentKind::heavy_tail_scale && c.times.empty()) c.times = {0.5, 1.0};
  }
  if (ex == ExperimentKind::collapse || ex == ExperimentKind::rbm_compare) {
    if (!c.services.front().moments().second.is_finite()) {
      fail("service", "requires a finite second moment");
    }
    if (c.scaling->beta <= 0.0) fail("scaling.beta", "must be positive");
  }
  if (ex == ExperimentKind::rbm_selftest) {
    if (c.lambda) fail("lambda", "not used by rbm-selftest");
    if (!c.rbm) {
      if (c.services.empty() || !c.scaling) {
        fail("rbm", "give 'rbm' {mu, sigma2} or a service with scaling.beta");
      }
      try {
        c.rbm = rbm::params_from_queue(c.services.front(), c.scaling->beta);
      } catch (const std::exception& e) {
        fail("service", e.what());
      }
    }
  }
  for (std::size_t i = 0; i < c.disciplines.size(); ++i) {
    const auto report = c.disciplines[i].validate(200);
    if (!report.ok()) {
      const auto& v = report.violations.front();
      throw ConfigError("discipline '" + c.discipline_labels[i] + "': " + v.message + " at (n=" +
                        std::to_string(v.n) + ", i=" + std::to_string(v.i) + ")");
    }
  }
  return c;
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override) {
  return parse_config(read_json(path), seed_override);
}

ConfigReport validate_config(const std::filesystem::path& path) {
  ConfigReport report;
  try {
    // A missing seed is reported, but should not mask other problems.
    const json j = read_json(path);
    if (!j.contains("seed")) report.problems.push_back("seed required");
    parse_config(j, j.contains("seed") ? std::nullopt : std::optional<std::uint64_t>(0));
  } catch (const ConfigError& e) {
    report.problems.push_back(e.what());
  }
  return report;
}

}  // namespace symq::cli
