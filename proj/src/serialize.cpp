#include "ergolab/serialize.hpp"

namespace ergolab {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::int64_t require_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

double require_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

}  // namespace

Json to_json(const Observable& obs) {
  Json terms = Json::array();
  for (const auto& t : obs.terms()) {
    Json term;
    term["k"] = t.k;
    term["kind"] = t.kind == TrigKind::cos ? "cos" : "sin";
    term["coeff"] = t.coeff;
    if (t.exact) {
      term["exact"] = {{"a", {t.exact->a_num, t.exact->a_den}},
                       {"b_sqrt2", {t.exact->b_num, t.exact->b_den}}};
    }
    terms.push_back(term);
  }
  if (obs.constant() == 0.0) return terms;
  return Json{{"constant", obs.constant()}, {"terms", terms}};
}

Observable observable_from_json(const Json& j, const std::string& path) {
  const Json* terms = &j;
  double constant = 0.0;
  if (j.is_object()) {
    if (j.contains("constant")) constant = require_number(j["constant"], path + ".constant");
    if (!j.contains("terms")) fail(path, "missing 'terms'");
    terms = &j["terms"];
  }
  if (!terms->is_array()) fail(path, "expected an array of terms");
  std::vector<ObservableTerm> out;
  for (std::size_t i = 0; i < terms->size(); ++i) {
    const auto& t = (*terms)[i];
    const std::string tp = path + "[" + std::to_string(i) + "]";
    if (!t.is_object()) fail(tp, "expected an object");
    ObservableTerm term;
    if (!t.contains("k") || !t["k"].is_array() || t["k"].size() < 2 || t["k"].size() > 3) {
      fail(tp + ".k", "expected 2 or 3 integer frequencies");
    }
    for (std::size_t c = 0; c < t["k"].size(); ++c) {
      term.k[c] = static_cast<int>(require_int(t["k"][c], tp + ".k[" + std::to_string(c) + "]"));
    }
    const std::string kind = t.value("kind", "cos");
    if (kind != "cos" && kind != "sin") fail(tp + ".kind", "expected 'cos' or 'sin'");
    term.kind = kind == "cos" ? TrigKind::cos : TrigKind::sin;
    if (t.contains("exact")) {
      const auto& e = t["exact"];
      SurdCoefficient s;
      auto pair = [&](const char* key, std::int64_t& num, std::int64_t& den) {
        if (!e.contains(key)) return;
        const auto& v = e[key];
        if (!v.is_array() || v.size() != 2) fail(tp + ".exact." + key, "expected [num, den]");
        num = require_int(v[0], tp + ".exact." + key + "[0]");
        den = require_int(v[1], tp + ".exact." + key + "[1]");
        if (den == 0) fail(tp + ".exact." + key, "zero denominator");
      };
      pair("a", s.a_num, s.a_den);
      pair("b_sqrt2", s.b_num, s.b_den);
      term.exact = s;
      term.coeff = s.value();
    } else {
      if (!t.contains("coeff")) fail(tp, "missing 'coeff'");
      term.coeff = require_number(t["coeff"], tp + ".coeff");
    }
    out.push_back(term);
  }
  return Observable(std::move(out), constant);
}

Json to_json(const SystemSpec& spec) {
  const auto& m = spec.matrix;
  Json j;
  j["variant"] = to_string(spec.variant);
  j["matrix"] = {{m.a(), m.b()}, {m.c(), m.d()}};
  j["phi"] = to_json(spec.phi);
  j["field"] = {{"amplitude", spec.field.amplitude}};
  j["control_rate"] = spec.control_rate;
  return j;
}

SystemSpec system_from_json(const Json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return SystemSpec::preset(j.get<std::string>());
    } catch (const ConfigError& e) {
      fail(path, e.what());
    }
  }
  if (!j.is_object()) fail(path, "expected a preset name or an object");
  SystemSpec spec;
  if (j.contains("preset")) spec = system_from_json(j["preset"], path + ".preset");
  if (j.contains("variant")) {
    if (!j["variant"].is_string()) fail(path + ".variant", "expected a string");
    try {
      spec.variant = variant_from_string(j["variant"].get<std::string>());
    } catch (const ConfigError& e) {
      fail(path + ".variant", e.what());
    }
  }
  if (j.contains("matrix")) {
    const auto& mj = j["matrix"];
    const std::string mp = path + ".matrix";
    if (!mj.is_array() || mj.size() != 2 || !mj[0].is_array() || !mj[1].is_array() ||
        mj[0].size() != 2 || mj[1].size() != 2) {
      fail(mp, "expected [[a,b],[c,d]]");
    }
    try {
      spec.matrix = AnosovMatrix(require_int(mj[0][0], mp + "[0][0]"), require_int(mj[0][1], mp + "[0][1]"),
                                 require_int(mj[1][0], mp + "[1][0]"), require_int(mj[1][1], mp + "[1][1]"));
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind(mp, 0) == 0) throw;
      fail(mp, e.what());
    }
  }
  if (j.contains("phi")) spec.phi = observable_from_json(j["phi"], path + ".phi");
  if (j.contains("field")) {
    const auto& f = j["field"];
    if (!f.is_object() || !f.contains("amplitude")) fail(path + ".field", "expected {\"amplitude\": c}");
    spec.field.amplitude = require_number(f["amplitude"], path + ".field.amplitude");
  }
  if (j.contains("control_rate")) {
    spec.control_rate = require_number(j["control_rate"], path + ".control_rate");
  }
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return spec;
}

Json to_json(const TestFamily& family) {
  Json fns = Json::array();
  for (const auto& f : family.functions()) {
    Json k = Json::array();
    for (int c = 0; c < family.dimension(); ++c) k.push_back(f.k[static_cast<std::size_t>(c)]);
    fns.push_back({{"k", k}, {"kind", f.kind == TrigKind::cos ? "cos" : "sin"}});
  }
  return {{"id", family.id()},
          {"dimension", family.dimension()},
          {"max_norm", family.max_norm()},
          {"weights", "2^-n"},
          {"functions", fns}};
}

Json to_json(const MeasureVector& mu) {
  return {{"family", mu.family().id()},
          {"integrals", std::vector<double>(mu.integrals().begin(), mu.integrals().end())}};
}

}  // namespace ergolab
