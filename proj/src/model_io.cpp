#include "ecd/model_io.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "ecd/error.hpp"

namespace ecd {

namespace {

constexpr std::array<double, 4> kTierBounds{0.0, 25.0, 50.0, 100.0};

DeliveryOption standard_option(std::string id, Speed speed, std::array<double, 4> fees) {
  DeliveryOption o;
  o.id = std::move(id);
  o.speed = speed;
  o.slot = Slot::None;
  o.time = TimeOfDay::Daytime;
  o.date = DateSpan::AllDays;
  o.fees = FeeSchedule::tiers(kTierBounds, fees);
  return o;
}

Scenario make_scenario(std::string name, std::array<double, 4> standard,
                       std::array<double, 4> one_day, std::array<double, 4> same_day) {
  Scenario s;
  s.name = std::move(name);
  s.options = {standard_option("1", Speed::Days2To5, standard),
               standard_option("2", Speed::OneDay, one_day),
               standard_option("3", Speed::SameDay, same_day)};
  return s;
}

double require_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + " must be finite");
  return v;
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

IntGrid grid_from_json(const json& j, const std::string& where, IntGrid fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_object()) throw ConfigError(where + " must be an object with min and max");
  IntGrid g = fallback;
  if (j.contains("min")) g.min = static_cast<int>(require_number(j.at("min"), where + ".min"));
  if (j.contains("max")) g.max = static_cast<int>(require_number(j.at("max"), where + ".max"));
  return g;
}

}  // namespace

json to_json(const ChoiceModelParams& params) {
  json j = json::object();
  const auto& names = ChoiceModelParams::names();
  for (std::size_t i = 0; i < names.size(); ++i) j[std::string(names[i])] = params.at(i);
  return j;
}

ParamOverrides overrides_from_json(const json& j) {
  if (j.is_null()) return {};
  if (!j.is_object()) throw ConfigError("parameters must be a JSON object");
  ParamOverrides out;
  ChoiceModelParams probe;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "_meta") continue;
    const double v = require_number(it.value(), "parameter '" + it.key() + "'");
    try {
      probe.set(it.key(), v);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
    out.emplace_back(it.key(), v);
  }
  return out;
}

json overrides_to_json(const ParamOverrides& overrides) {
  json j = json::object();
  for (const auto& [k, v] : overrides) j[k] = v;
  return j;
}

ChoiceModelParams params_from_json(const json& j, ChoiceModelParams base) {
  return apply_overrides(base, overrides_from_json(j));
}

json to_json(const Scenario& s) {
  json opts = json::array();
  for (const auto& o : s.options) {
    json fees = json::array();
    for (const auto& b : o.fees.brackets()) {
      json jb = {{"lower", b.lower}, {"fee", b.fee}};
      jb["upper"] = std::isinf(b.upper) ? json(nullptr) : json(b.upper);
      fees.push_back(jb);
    }
    opts.push_back({{"id", o.id},
                    {"speed", std::string(to_string(o.speed))},
                    {"slot", std::string(to_string(o.slot))},
                    {"time", std::string(to_string(o.time))},
                    {"date", std::string(to_string(o.date))},
                    {"fees", fees}});
  }
  return {{"name", s.name},
          {"options", opts},
          {"params", overrides_to_json(s.overrides)},
          {"ov_grid", {{"min", s.ov_grid.min}, {"max", s.ov_grid.max}}},
          {"tv_grid", {{"min", s.tv_grid.min}, {"max", s.tv_grid.max}}}};
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  Scenario s;
  const auto& name = require(j, "name", "scenario");
  if (!name.is_string()) throw ConfigError("scenario.name must be a string");
  s.name = name.get<std::string>();
  const auto& opts = require(j, "options", "scenario");
  if (!opts.is_array()) throw ConfigError("scenario.options must be an array");
  for (std::size_t i = 0; i < opts.size(); ++i) {
    const std::string where = "scenario.options[" + std::to_string(i) + "]";
    const auto& jo = opts[i];
    DeliveryOption o;
    const auto& id = require(jo, "id", where);
    o.id = id.is_string() ? id.get<std::string>() : id.dump();
    try {
      o.speed = parse_speed(require(jo, "speed", where).get<std::string>());
      o.slot = parse_slot(jo.value("slot", std::string("none")));
      o.time = parse_time(jo.value("time", std::string("daytime")));
      o.date = parse_date(jo.value("date", std::string("all-days")));
    } catch (const json::exception&) {
      throw ConfigError(where + ": attribute fields must be strings");
    } catch (const InvalidInput& e) {
      throw ConfigError(where + ": " + e.what());
    }
    const auto& fees = require(jo, "fees", where);
    if (!fees.is_array() || fees.empty()) throw ConfigError(where + ".fees must be a non-empty array");
    std::vector<FeeBracket> brackets;
    for (std::size_t b = 0; b < fees.size(); ++b) {
      const std::string bw = where + ".fees[" + std::to_string(b) + "]";
      FeeBracket fb;
      fb.lower = require_number(require(fees[b], "lower", bw), bw + ".lower");
      const auto& up = fees[b].contains("upper") ? fees[b].at("upper") : json(nullptr);
      fb.upper = up.is_null() ? kOpenUpper : require_number(up, bw + ".upper");
      fb.fee = require_number(require(fees[b], "fee", bw), bw + ".fee");
      brackets.push_back(fb);
    }
    try {
      o.fees = FeeSchedule(std::move(brackets));
    } catch (const ScenarioError& e) {
      throw ConfigError(where + ".fees: " + e.what());
    }
    s.options.push_back(std::move(o));
  }
  if (j.contains("params")) s.overrides = overrides_from_json(j.at("params"));
  s.ov_grid = grid_from_json(j.value("ov_grid", json(nullptr)), "scenario.ov_grid", s.ov_grid);
  s.tv_grid = grid_from_json(j.value("tv_grid", json(nullptr)), "scenario.tv_grid", s.tv_grid);
  try {
    s.validate();
  } catch (const ScenarioError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names{"S1", "S2", "S3", "S4", "T3"};
  return names;
}

Scenario builtin_scenario(std::string_view name) {
  constexpr std::array<double, 4> one_day{12, 15, 17, 20};
  constexpr std::array<double, 4> same_day{18, 20, 22, 27};
  constexpr std::array<double, 4> one_day_70{8.4, 10.5, 11.9, 14};
  constexpr std::array<double, 4> same_day_70{12.6, 14.0, 15.4, 18.9};
  constexpr std::array<double, 4> free_shipping{6, 0, 0, 0};
  constexpr std::array<double, 4> paid_shipping{6, 7, 8, 10};
  if (name == "S1") return make_scenario("S1", free_shipping, one_day, same_day);
  if (name == "S2") return make_scenario("S2", paid_shipping, one_day, same_day);
  if (name == "S3") return make_scenario("S3", free_shipping, one_day_70, same_day_70);
  if (name == "S4") return make_scenario("S4", paid_shipping, one_day_70, same_day_70);
  if (name == "T3") return make_scenario("T3", {6, 3, 3, 3}, one_day, same_day);
  throw ConfigError("unknown built-in scenario '" + std::string(name) + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw LoadError("failed writing '" + path + "'");
}

}  // namespace ecd
