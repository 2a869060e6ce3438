#include "sysrisk/instance.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sysrisk {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ValidationError("field '" + field + "': " + what);
}

const json& require(const json& j, const char* key, const std::string& field) {
  if (!j.is_object() || !j.contains(key)) field_error(field + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(field, "must be finite");
  return v;
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) field_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

std::string text(const json& j, const std::string& field) {
  if (!j.is_string()) field_error(field, "expected a string");
  return j.get<std::string>();
}

std::size_t count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 1) field_error(field, "expected a positive integer");
  return j.get<std::size_t>();
}

// Rewraps constructor failures with the field they came from.
template <class F>
auto at_field(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DimensionError& e) {
    throw DimensionError("field '" + field + "': " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("field '" + field + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError("field '" + field + "': " + e.what());
  }
}

AggregationSpec aggregation_from_json(const json& j, std::size_t d) {
  const std::string f = "aggregation";
  const std::string kind = text(require(j, "kind", f), f + ".kind");
  if (j.contains("dimension") && count(j["dimension"], f + ".dimension") != d)
    throw DimensionError("field 'aggregation.dimension': does not match the number of position rows");
  return at_field(f, [&] {
    if (kind == "sum") return AggregationSpec::sum(d);
    if (kind == "sum_of_losses") return AggregationSpec::sum_of_losses(d);
    if (kind == "utility_of_sum")
      return AggregationSpec::utility_of_sum(d, utility_from_json(require(j, "utility", f), f + ".utility"));
    if (kind == "componentwise_utility") {
      const json& us = require(j, "utilities", f);
      if (!us.is_array()) field_error(f + ".utilities", "expected an array");
      if (us.size() != d) throw DimensionError("field 'aggregation.utilities': need one utility per institution");
      std::vector<UtilityFn> parts;
      for (std::size_t i = 0; i < us.size(); ++i)
        parts.push_back(utility_from_json(us[i], f + ".utilities[" + std::to_string(i) + "]"));
      return AggregationSpec::componentwise_utility(std::move(parts));
    }
    field_error(f + ".kind", "unknown aggregation '" + kind + "'");
  });
}

json aggregation_to_json(const AggregationSpec& agg) {
  json j{{"kind", agg.kind_name()}, {"dimension", agg.dimension()}};
  switch (agg.kind()) {
    case AggregationSpec::Kind::utility_of_sum: j["utility"] = utility_to_json(agg.parts()[0]); break;
    case AggregationSpec::Kind::componentwise_utility: {
      j["utilities"] = json::array();
      for (const auto& u : agg.parts()) j["utilities"].push_back(utility_to_json(u));
      break;
    }
    default: break;
  }
  return j;
}

AcceptanceSpec acceptance_from_json(const json& j, const ScenarioSpace& space) {
  const std::string f = "acceptance";
  const std::string kind = text(require(j, "kind", f), f + ".kind");
  AcceptanceSpec acc = at_field(f, [&] {
    if (kind == "nonnegative") return AcceptanceSpec::nonnegative();
    if (kind == "expectation_floor") return AcceptanceSpec::expectation_floor(number(require(j, "u0", f), f + ".u0"));
    if (kind == "expected_shortfall")
      return AcceptanceSpec::expected_shortfall(number(require(j, "level", f), f + ".level"));
    if (kind == "polyhedral") {
      const json& ds = require(j, "densities", f);
      if (!ds.is_array()) field_error(f + ".densities", "expected an array of arrays");
      std::vector<RandomVariable> dens;
      for (std::size_t k = 0; k < ds.size(); ++k) {
        const std::string fk = f + ".densities[" + std::to_string(k) + "]";
        std::vector<double> v = numbers(ds[k], fk);
        if (v.size() != space.size()) throw DimensionError("field '" + fk + "': length must equal the scenario count");
        dens.emplace_back(std::move(v));
      }
      return AcceptanceSpec::polyhedral(std::move(dens), numbers(require(j, "bounds", f), f + ".bounds"));
    }
    field_error(f + ".kind", "unknown acceptance set '" + kind + "'");
  });
  at_field(f, [&] { acc.check_against(space); return 0; });
  return acc;
}

json acceptance_to_json(const AcceptanceSpec& acc) {
  json j{{"kind", acc.kind_name()}};
  switch (acc.kind()) {
    case AcceptanceSpec::Kind::expectation_floor: j["u0"] = acc.floor(); break;
    case AcceptanceSpec::Kind::expected_shortfall: j["level"] = acc.level(); break;
    case AcceptanceSpec::Kind::polyhedral: {
      j["densities"] = json::array();
      for (const auto& W : acc.densities())
        j["densities"].push_back(std::vector<double>(W.values().begin(), W.values().end()));
      j["bounds"] = acc.bounds();
      break;
    }
    default: break;
  }
  return j;
}

DualMode mode_from_string(const std::string& s) {
  if (s == "rho") return DualMode::rho;
  if (s == "rho_tilde") return DualMode::rho_tilde;
  if (s == "shortfall") return DualMode::shortfall;
  field_error("mode", "expected rho, rho_tilde or shortfall");
}

}  // namespace

json utility_to_json(const UtilityFn& u) {
  switch (u.kind()) {
    case UtilityFn::Kind::linear: return {{"kind", "linear"}};
    case UtilityFn::Kind::exponential: return {{"kind", "exponential"}, {"gamma", u.parameter()}};
    case UtilityFn::Kind::power: return {{"kind", "power"}, {"eta", u.parameter()}};
    case UtilityFn::Kind::linear_capped: return {{"kind", "linear_capped"}, {"cap", u.parameter()}};
  }
  return {};
}

UtilityFn utility_from_json(const json& j, const std::string& field) {
  const std::string kind = text(require(j, "kind", field), field + ".kind");
  return at_field(field, [&] {
    if (kind == "linear") return UtilityFn::linear();
    if (kind == "exponential") return UtilityFn::exponential(number(require(j, "gamma", field), field + ".gamma"));
    if (kind == "power") return UtilityFn::power(number(require(j, "eta", field), field + ".eta"));
    if (kind == "linear_capped") return UtilityFn::linear_capped(number(require(j, "cap", field), field + ".cap"));
    field_error(field + ".kind", "unknown utility '" + kind + "'");
  });
}

Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("instance must be a JSON object");
  ScenarioSpace space = at_field("probabilities", [&] {
    return ScenarioSpace(numbers(require(j, "probabilities", "instance"), "probabilities"));
  });
  const json& pos = require(j, "positions", "instance");
  if (!pos.is_array() || pos.empty()) field_error("positions", "expected a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const std::string fi = "positions[" + std::to_string(i) + "]";
    rows.push_back(numbers(pos[i], fi));
    if (rows.back().size() != space.size())
      throw DimensionError("field '" + fi + "': length must equal the scenario count");
  }
  const std::size_t d = rows.size();
  if (j.contains("institutions") && count(j["institutions"], "institutions") != d)
    throw DimensionError("field 'positions': row count does not match 'institutions'");
  RandomVector X = at_field("positions", [&] { return RandomVector::from_rows(rows); });

  Instance inst{std::move(space), std::move(X), DualMode::rho, {}, {}, {}, {}};
  if (j.contains("mode")) inst.mode = mode_from_string(text(j["mode"], "mode"));
  if (j.contains("aggregation")) inst.aggregation = aggregation_from_json(j["aggregation"], d);
  if (j.contains("acceptance")) inst.acceptance = acceptance_from_json(j["acceptance"], inst.space);
  if (j.contains("shortfall")) {
    const json& s = j["shortfall"];
    UtilityFn u = utility_from_json(require(s, "utility", "shortfall"), "shortfall.utility");
    const double u0 = number(require(s, "u0", "shortfall"), "shortfall.u0");
    inst.shortfall = at_field("shortfall", [&] { return ShortfallSpec(u, u0); });
  }
  if (inst.mode == DualMode::shortfall) {
    if (!inst.shortfall) field_error("shortfall", "required in shortfall mode");
    if (d != 1) throw DimensionError("field 'positions': shortfall mode needs exactly one row");
  } else {
    if (!inst.aggregation) field_error("aggregation", "required in " + to_string(inst.mode) + " mode");
    if (!inst.acceptance) field_error("acceptance", "required in " + to_string(inst.mode) + " mode");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (!s.is_object()) field_error("solver", "expected an object");
    if (s.contains("tol")) {
      inst.solver.tol = number(s["tol"], "solver.tol");
      if (inst.solver.tol <= 0.0) field_error("solver.tol", "must be positive");
    }
    if (s.contains("max_iter")) inst.solver.max_iter = count(s["max_iter"], "solver.max_iter");
    if (s.contains("restarts")) inst.solver.restarts = count(s["restarts"], "solver.restarts");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) field_error("solver.seed", "expected a nonnegative integer");
      inst.solver.seed = s["seed"].get<std::uint64_t>();
    }
  }
  return inst;
}

json instance_to_json(const Instance& inst) {
  json j;
  j["probabilities"] = std::vector<double>(inst.space.probs().begin(), inst.space.probs().end());
  j["positions"] = json::array();
  for (std::size_t i = 0; i < inst.X.rows(); ++i) {
    auto r = inst.X.row(i);
    j["positions"].push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["mode"] = to_string(inst.mode);
  if (inst.aggregation) j["aggregation"] = aggregation_to_json(*inst.aggregation);
  if (inst.acceptance) j["acceptance"] = acceptance_to_json(*inst.acceptance);
  if (inst.shortfall)
    j["shortfall"] = {{"utility", utility_to_json(inst.shortfall->utility())}, {"u0", inst.shortfall->u0()}};
  j["solver"] = {{"tol", inst.solver.tol},
                 {"max_iter", inst.solver.max_iter},
                 {"restarts", inst.solver.restarts},
                 {"seed", inst.solver.seed}};
  return j;
}

Instance parse_instance(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    // Report line and column instead of a raw byte offset.
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < body.size(); ++k) {
      if (body[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                     ": " + e.what());
  }
  return instance_from_json(j);
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open instance file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

json extended(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

double extended_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "+inf" || s == "inf") return kInf;
    if (s == "-inf") return kNegInf;
    if (s == "nan") return std::nan("");
    throw ValidationError("not an extended real: '" + s + "'");
  }
  return j.get<double>();
}

std::uint64_t instance_hash(const Instance& inst) {
  const std::string s = instance_to_json(inst).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace sysrisk
