// ecd: command-line front end over the ecomdemand C library.
//
// Options may also come from a JSON file (--config). Keys are option names
// without dashes; a nested object keyed by the subcommand name overrides the
// flat keys. Flags given on the command line win over both.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecomdemand/ecomdemand.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

// Bad user input: exit 2 with the message.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LibraryError : std::runtime_error {
  ecd_status status;
  LibraryError(ecd_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(ecd_status s, const std::string& context) {
  if (s == ECD_OK) return;
  const std::string msg = context.empty() ? ecd_last_error() : context + ": " + ecd_last_error();
  throw LibraryError(s, msg);
}

template <class T>
using Owned = std::unique_ptr<T, void (*)(T*)>;

template <class T>
Owned<T> own(T* p, void (*f)(T*)) {
  return Owned<T>(p, f);
}

// Option values shared by all subcommands; each subcommand binds the subset it uses.
struct Options {
  std::string config;
  std::string population;
  std::vector<std::string> scenarios;
  std::string params;
  std::string mode = "expectation";
  std::uint64_t seed = 0;
  std::uint64_t replications = 100;
  unsigned workers = 0;
  std::string out;
  std::uint64_t weeks = 4;
  std::string targets;
  std::string categories;
  std::vector<std::string> free;
  std::vector<std::string> only_categories;
  double tolerance = 0.05;
  unsigned max_iterations = 500;
  std::string options_data, order_value_data, total_value_data;
  std::size_t count = 933;
  std::vector<double> sizes{0.28, 0.34, 0.16, 0.14, 0.05, 0.03};
  std::string level = "all";
  std::size_t observations = 20000;
  std::vector<double> param_values;
};

const char* param_help(const std::string& name) {
  static const std::map<std::string, const char*> help{
      {"beta_speed_2_5_days", "part-worth, 2-5 day delivery"},
      {"beta_speed_one_day", "part-worth, one-day delivery"},
      {"beta_speed_same_day", "part-worth, same-day delivery"},
      {"beta_slot_none", "part-worth, no time slot"},
      {"beta_slot_2hr", "part-worth, 2-hour slot"},
      {"beta_slot_4hr", "part-worth, 4-hour slot"},
      {"beta_time_daytime", "part-worth, daytime delivery"},
      {"beta_time_daytime_evening", "part-worth, daytime and evening delivery"},
      {"beta_date_weekday", "part-worth, weekday delivery"},
      {"beta_date_weekday_saturday", "part-worth, weekday and Saturday delivery"},
      {"beta_date_all_days", "part-worth, delivery on all days"},
      {"beta_fee", "fee coefficient, per ln(US$ + 1)"},
      {"beta_logsumdo", "delivery-option logsum coefficient"},
      {"beta_interval", "order interval coefficient, per week^2"},
      {"beta_storage", "storage cost coefficient, per US$"},
      {"beta_logsumov", "order-value logsum coefficient"},
      {"beta_hhs", "household-size coefficient, per US$^2"},
      {"alpha", "weekly US$ per household member"},
  };
  const auto it = help.find(name);
  return it == help.end() ? "" : it->second;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (size_t i = 0; i < ecd_builtin_scenario_count(); ++i) names.emplace_back(ecd_builtin_scenario_name(i));
  return names;
}

bool is_builtin(const std::string& name) {
  const auto names = builtin_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

struct Cli {
  CLI::App app{"Household e-commerce delivery demand simulator"};
  Options o;
  std::map<std::string, CLI::App*> subs;
};

const std::set<std::string> kFileOptions{"population", "params",          "targets",
                                         "categories", "options-data",    "order-value-data",
                                         "total-value-data"};

void add_common(CLI::App* s, Options& o) {
  s->add_option("--config", o.config, "JSON file with option values (flags override it)")
      ->check(CLI::ExistingFile);
  s->add_option("--out", o.out, "output directory")->default_str("$ECD_OUT_DIR or .");
}

void add_workers(CLI::App* s, Options& o) {
  s->add_option("--workers", o.workers, "worker threads (0 = all cores); outputs do not depend on it")
      ->capture_default_str();
}

void add_population(CLI::App* s, Options& o) {
  s->add_option("--population", o.population, "household CSV (household_id,size)")
      ->check(CLI::ExistingFile)
      ->default_str("synthetic: 933 households, seed 7");
}

const CLI::Validator kScenarioRef(
    [](std::string& v) -> std::string {
      if (is_builtin(v) || fs::is_regular_file(v)) return {};
      return "not a built-in scenario (" + join(builtin_names(), ", ") + ") or existing file: " + v;
    },
    "NAME|FILE");

void add_scenarios(CLI::App* s, Options& o, const std::string& def, bool many) {
  auto* opt = s->add_option("--scenario", o.scenarios,
                            many ? "scenario, built-in name or JSON file (repeatable)"
                                 : "scenario, built-in name or JSON file")
                  ->check(kScenarioRef)
                  ->default_str(def);
  if (!many) opt->expected(1);
}

void add_params(CLI::App* s, Options& o) {
  s->add_option("--params", o.params, "parameter JSON; flags below override it")
      ->check(CLI::ExistingFile)
      ->default_str("built-in defaults");
  for (size_t i = 0; i < ecd_params_count(); ++i) {
    const std::string name = ecd_params_name(i);
    s->add_option("--" + name, o.param_values[i], param_help(name))
        ->capture_default_str()
        ->group("Model parameters");
  }
}

void build(Cli& cli) {
  auto& app = cli.app;
  auto& o = cli.o;
  {
    ecd_params* p = nullptr;
    check(ecd_params_default(&p), "defaults");
    auto owned = own(p, ecd_params_free);
    o.param_values.resize(ecd_params_count());
    for (size_t i = 0; i < ecd_params_count(); ++i)
      check(ecd_params_get(p, ecd_params_name(i), &o.param_values[i]), "defaults");
  }
  app.name("ecd");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ecd_version()));
  app.footer("Built-in scenarios: " + join(builtin_names(), ", ") +
             ". Environment: ECD_OUT_DIR sets the default output directory.");

  auto mode = [&](CLI::App* s) {
    s->add_option("--mode", o.mode, "evaluation mode")
        ->check(CLI::IsMember({"expectation", "sample"}))
        ->capture_default_str();
    s->add_option("--seed", o.seed, "master seed (required with --mode sample)")->capture_default_str();
    s->add_option("--replications", o.replications, "sampled weeks per household (sample mode)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "evaluate one scenario over a population");
  add_common(run, o);
  add_population(run, o);
  add_scenarios(run, o, "S1", false);
  mode(run);
  add_workers(run, o);
  add_params(run, o);
  cli.subs["run"] = run;

  auto* cmp = app.add_subcommand("compare", "evaluate several scenarios and their differences");
  add_common(cmp, o);
  add_population(cmp, o);
  add_scenarios(cmp, o, "S1 S2 S3 S4", true);
  mode(cmp);
  add_workers(cmp, o);
  add_params(cmp, o);
  cli.subs["compare"] = cmp;

  auto* cal = app.add_subcommand("calibrate", "fit free parameters to monthly category targets");
  add_common(cal, o);
  add_population(cal, o);
  add_scenarios(cal, o, "S1", false);
  cal->add_option("--targets", o.targets, "targets JSON")
      ->check(CLI::ExistingFile)
      ->default_str("built-in targets");
  cal->add_option("--categories", o.categories, "category JSON (adult share, overrides)")
      ->check(CLI::ExistingFile)
      ->default_str("built-in categories");
  cal->add_option("--category", o.only_categories, "calibrate only these categories (repeatable)")
      ->default_str("all targets");
  cal->add_option("--free", o.free, "free parameter NAME:LOWER:UPPER (repeatable)")
      ->default_str("alpha:1:100 beta_interval:-5:0 beta_storage:-5:0");
  cal->add_option("--tolerance", o.tolerance, "relative residual tolerance, overrides the targets file")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cal->add_option("--max-iterations", o.max_iterations, "Nelder-Mead iteration limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_workers(cal, o);
  add_params(cal, o);
  cli.subs["calibrate"] = cal;

  auto* fit = app.add_subcommand("fit", "sequential maximum likelihood on long-format choice data");
  add_common(fit, o);
  fit->add_option("--options-data", o.options_data, "delivery option choices CSV")
      ->check(CLI::ExistingFile);
  fit->add_option("--order-value-data", o.order_value_data, "order value choices CSV (tv, ov)")
      ->check(CLI::ExistingFile);
  fit->add_option("--total-value-data", o.total_value_data, "total value choices CSV (hhs, tv)")
      ->check(CLI::ExistingFile);
  add_scenarios(fit, o, "T3", false);
  add_workers(fit, o);
  add_params(fit, o);
  cli.subs["fit"] = fit;

  auto* syn = app.add_subcommand("synthesize", "adopters, weekly orders and the package stream");
  add_common(syn, o);
  add_population(syn, o);
  add_scenarios(syn, o, "S1", false);
  syn->add_option("--categories", o.categories, "category JSON")
      ->check(CLI::ExistingFile)
      ->default_str("built-in categories");
  syn->add_option("--weeks", o.weeks, "simulated weeks")->check(CLI::PositiveNumber)->capture_default_str();
  syn->add_option("--seed", o.seed, "master seed (required)");
  add_workers(syn, o);
  add_params(syn, o);
  cli.subs["synthesize"] = syn;

  auto* gp = app.add_subcommand("gen-population", "write a synthetic household CSV");
  add_common(gp, o);
  gp->add_option("--count", o.count, "households")->check(CLI::PositiveNumber)->capture_default_str();
  gp->add_option("--sizes", o.sizes, "probability of household size 1, 2, ...")->capture_default_str();
  gp->add_option("--seed", o.seed, "seed")->default_str("7");
  cli.subs["gen-population"] = gp;

  auto* gs = app.add_subcommand("gen-scenario", "write built-in scenarios as editable JSON");
  add_common(gs, o);
  gs->add_option("--scenario", o.scenarios, "built-in scenario (repeatable)")
      ->check(CLI::IsMember(builtin_names()))
      ->default_str(join(builtin_names(), " "));
  cli.subs["gen-scenario"] = gs;

  auto* gpar = app.add_subcommand("gen-params", "write a parameter JSON");
  add_common(gpar, o);
  add_params(gpar, o);
  cli.subs["gen-params"] = gpar;

  auto* gt = app.add_subcommand("gen-targets", "write the built-in calibration targets");
  add_common(gt, o);
  gt->add_option("--tolerance", o.tolerance, "relative residual tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cli.subs["gen-targets"] = gt;

  auto* gc = app.add_subcommand("gen-categories", "write the built-in item categories");
  add_common(gc, o);
  cli.subs["gen-categories"] = gc;

  auto* gd = app.add_subcommand("gen-dataset", "simulate long-format choice data from the model");
  add_common(gd, o);
  gd->add_option("--level", o.level, "which level to simulate")
      ->check(CLI::IsMember({"options", "order-value", "total-value", "all"}))
      ->capture_default_str();
  gd->add_option("--observations", o.observations, "choices per level")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gd->add_option("--seed", o.seed, "seed")->default_str("1");
  add_scenarios(gd, o, "T3", false);
  add_params(gd, o);
  cli.subs["gen-dataset"] = gd;
}

CLI::App* selected(Cli& cli) {
  for (auto& [name, s] : cli.subs)
    if (s->parsed()) return s;
  return nullptr;
}

// ---- JSON config merging

std::vector<std::string> config_values(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (v.is_number()) return {v.dump()};
  if (v.is_boolean()) return {v.get<bool>() ? "true" : "false"};
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (e.is_array() || e.is_object()) throw UsageError("--config: field '" + key + "' has a nested value");
      auto one = config_values(e, key);
      out.insert(out.end(), one.begin(), one.end());
    }
    return out;
  }
  throw UsageError("--config: field '" + key + "' must be a string, number, boolean or array");
}

std::vector<std::string> config_arguments(Cli& cli, CLI::App* sub, const std::string& path) {
  nlohmann::json j;
  {
    std::ifstream in(path);
    if (!in) throw UsageError("--config: cannot read " + path);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("--config: " + path + ": " + e.what());
    }
  }
  if (!j.is_object()) throw UsageError("--config: top level must be an object");
  std::map<std::string, nlohmann::json> fields;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (cli.subs.count(it.key())) continue;  // section for some subcommand
    fields[it.key()] = it.value();
  }
  if (j.contains(sub->get_name())) {
    const auto& section = j[sub->get_name()];
    if (!section.is_object()) throw UsageError("--config: field '" + sub->get_name() + "' must be an object");
    for (auto it = section.begin(); it != section.end(); ++it) fields[it.key()] = it.value();
  }
  std::vector<std::string> args;
  for (const auto& [key, value] : fields) {
    if (key == "config") throw UsageError("--config: field 'config' cannot be nested");
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("--config: unknown field '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;  // given on the command line
    for (const auto& v : config_values(value, key)) args.push_back("--" + key + "=" + v);
  }
  return args;
}

// ---- provenance

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hash_string(const std::string& s, std::uint64_t basis = 0xcbf29ce484222325ULL) {
  return ecd_hash_bytes(s.data(), s.size(), basis);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return "file:" + hex64(hash_string(ss.str()));
}

// Hash of every effective option value except worker count and output
// directory. Input files enter through their contents, not their paths.
std::uint64_t config_hash(CLI::App* sub) {
  std::vector<std::string> lines{std::string("ecd ") + ecd_version(), "command=" + sub->get_name()};
  for (const CLI::Option* opt : sub->get_options()) {
    std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "workers" || name == "out") continue;
    std::vector<std::string> vals = opt->results();
    if (vals.empty()) vals = {opt->get_default_str()};
    for (auto& v : vals) {
      const bool file = kFileOptions.count(name) > 0 || (name == "scenario" && !is_builtin(v));
      if (file && !v.empty() && fs::is_regular_file(v)) v = file_digest(v);
    }
    lines.push_back(name + "=" + join(vals, "\x1f"));
  }
  std::sort(lines.begin() + 2, lines.end());
  return hash_string(join(lines, "\n"));
}

struct Context {
  Cli& cli;
  CLI::App* sub;
  Options& o;
  std::string header;
  fs::path out_dir;
  unsigned workers;

  bool given(const std::string& flag) const {
    const CLI::Option* opt = sub->get_option_no_throw("--" + flag);
    return opt != nullptr && opt->count() > 0;
  }
  std::string out(const std::string& file) const { return (out_dir / file).string(); }
};

// ---- loading inputs

Owned<ecd_population> load_population(const Context& c) {
  ecd_population* p = nullptr;
  if (c.o.population.empty())
    check(ecd_population_default(&p), "--population");
  else
    check(ecd_population_load(c.o.population.c_str(), &p), "--population " + c.o.population);
  return own(p, ecd_population_free);
}

Owned<ecd_scenario> load_scenario(const std::string& ref) {
  ecd_scenario* s = nullptr;
  if (is_builtin(ref))
    check(ecd_scenario_builtin(ref.c_str(), &s), "--scenario " + ref);
  else
    check(ecd_scenario_load(ref.c_str(), &s), "--scenario " + ref);
  return own(s, ecd_scenario_free);
}

Owned<ecd_params> load_params(const Context& c) {
  ecd_params* p = nullptr;
  if (c.o.params.empty())
    check(ecd_params_default(&p), "--params");
  else
    check(ecd_params_load(c.o.params.c_str(), &p), "--params " + c.o.params);
  auto owned = own(p, ecd_params_free);
  for (size_t i = 0; i < ecd_params_count(); ++i) {
    const std::string name = ecd_params_name(i);
    if (c.given(name)) check(ecd_params_set(p, name.c_str(), c.o.param_values[i]), "--" + name);
  }
  return owned;
}

std::vector<std::string> scenario_refs(const Context& c, std::vector<std::string> fallback) {
  return c.o.scenarios.empty() ? fallback : c.o.scenarios;
}

Owned<ecd_categories> load_categories(const Context& c) {
  ecd_categories* cats = nullptr;
  if (c.o.categories.empty())
    check(ecd_categories_default(&cats), "--categories");
  else
    check(ecd_categories_load(c.o.categories.c_str(), &cats), "--categories " + c.o.categories);
  return own(cats, ecd_categories_free);
}

void wrote(const std::string& path) { std::cout << "wrote " << path << "\n"; }

// ---- commands

void print_summary(const ecd_analysis* a) {
  std::printf("%-12s %22s %24s %11s %10s %11s\n", "scenario", "total value (US$/week)",
              "frequency (orders/week)", "2-5 days %", "one day %", "same day %");
  for (size_t i = 0; i < ecd_analysis_scenario_count(a); ++i) {
    ecd_summary s{};
    check(ecd_analysis_summary(a, i, &s), "summary");
    std::printf("%-12s %22.2f %24.3f %11.1f %10.1f %11.1f\n", s.scenario, s.mean_total_value,
                s.mean_frequency, s.share_2_5_days_pct, s.share_one_day_pct, s.share_same_day_pct);
    if (s.size_capped > 0)
      std::printf("  note: %zu households above size 20 evaluated at 20\n", s.size_capped);
    if (s.grid_saturated > 0)
      std::printf("  warning: %zu households put mass on the top of the total value grid\n",
                  s.grid_saturated);
  }
}

int cmd_analyze(Context& c, bool compare) {
  const auto refs = scenario_refs(c, compare ? builtin_names() : std::vector<std::string>{"S1"});
  std::vector<std::string> use = refs;
  if (compare && c.o.scenarios.empty()) use.assign(refs.begin(), refs.begin() + 4);
  if (!compare && use.size() != 1) throw UsageError("--scenario: run takes exactly one scenario");
  if (compare && use.size() < 2) throw UsageError("--scenario: compare needs at least two scenarios");
  if (c.o.mode == "sample" && !c.given("seed")) throw UsageError("--seed: required with --mode sample");

  auto pop = load_population(c);
  auto params = load_params(c);
  std::vector<Owned<ecd_scenario>> owned;
  std::vector<const ecd_scenario*> list;
  for (const auto& r : use) {
    owned.push_back(load_scenario(r));
    list.push_back(owned.back().get());
  }
  ecd_run_options ro;
  ecd_run_options_init(&ro);
  ro.mode = c.o.mode == "sample" ? ECD_MODE_SAMPLED : ECD_MODE_EXPECTATION;
  ro.seed = c.o.seed;
  ro.replications = c.o.replications;
  ro.workers = c.workers;
  ecd_analysis* a = nullptr;
  check(ecd_analyze(pop.get(), list.data(), list.size(), params.get(), &ro, &a), "analysis");
  auto analysis = own(a, ecd_analysis_free);

  const char* h = c.header.c_str();
  std::vector<std::pair<ecd_output, std::string>> files{
      {ECD_OUTPUT_SUMMARY, "summary.csv"},
      {ECD_OUTPUT_CDF_TOTAL_VALUE, "cdf_total_value.csv"},
      {ECD_OUTPUT_CDF_FREQUENCY, "cdf_frequency.csv"}};
  if (compare) files.emplace_back(ECD_OUTPUT_DELTAS, "deltas.csv");
  for (const auto& [kind, name] : files) {
    check(ecd_analysis_write(a, kind, c.out(name).c_str(), h), name);
    wrote(c.out(name));
  }
  if (!compare) {
    check(ecd_analysis_write_households(a, 0, c.out("households.csv").c_str(), h), "households.csv");
    wrote(c.out("households.csv"));
  }

  std::printf("%s, %zu households, mode %s\n", c.header.c_str(), ecd_population_size(pop.get()),
              c.o.mode.c_str());
  print_summary(a);
  if (compare) {
    for (size_t j = 1; j < list.size(); ++j) {
      double tv = 0, fq = 0;
      check(ecd_analysis_delta(a, 0, j, &tv, &fq), "delta");
      std::printf("%s -> %s: total value %+.1f%%, frequency %+.1f%%\n", ecd_scenario_name(list[0]),
                  ecd_scenario_name(list[j]), tv, fq);
    }
  }
  return 0;
}

std::vector<ecd_free_parameter> parse_free(const std::vector<std::string>& specs,
                                           std::vector<std::string>& names) {
  std::vector<ecd_free_parameter> out;
  names.clear();
  names.reserve(specs.size());
  for (const auto& spec : specs) {
    const auto a = spec.find(':');
    const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
    if (b == std::string::npos) throw UsageError("--free: expected NAME:LOWER:UPPER, got '" + spec + "'");
    names.push_back(spec.substr(0, a));
    ecd_free_parameter f{nullptr, 0, 0};
    try {
      f.lower = std::stod(spec.substr(a + 1, b - a - 1));
      f.upper = std::stod(spec.substr(b + 1));
    } catch (const std::exception&) {
      throw UsageError("--free: bounds of '" + spec + "' are not numbers");
    }
    out.push_back(f);
  }
  for (size_t i = 0; i < out.size(); ++i) out[i].name = names[i].c_str();
  return out;
}

int cmd_calibrate(Context& c) {
  auto pop = load_population(c);
  auto params = load_params(c);
  auto scen = load_scenario(scenario_refs(c, {"S1"}).front());
  auto cats = load_categories(c);
  ecd_targets* t = nullptr;
  if (c.o.targets.empty())
    check(ecd_targets_default(&t), "--targets");
  else
    check(ecd_targets_load(c.o.targets.c_str(), &t), "--targets " + c.o.targets);
  auto targets = own(t, ecd_targets_free);
  if (c.given("tolerance")) check(ecd_targets_set_tolerance(t, c.o.tolerance), "--tolerance");

  std::vector<std::string> names;
  std::vector<ecd_free_parameter> free;
  if (!c.o.free.empty()) free = parse_free(c.o.free, names);

  std::set<std::string> wanted(c.o.only_categories.begin(), c.o.only_categories.end());
  std::vector<Owned<ecd_calibration>> reports;
  for (size_t i = 0; i < ecd_targets_count(t); ++i) {
    const char* cat = nullptr;
    check(ecd_targets_get(t, i, &cat, nullptr, nullptr, nullptr), "--targets");
    if (!wanted.empty() && !wanted.erase(cat)) continue;
    ecd_calibration* r = nullptr;
    check(ecd_calibrate(t, i, cats.get(), free.empty() ? nullptr : free.data(), free.size(), pop.get(),
                        scen.get(), params.get(), c.o.max_iterations, c.workers, &r),
          std::string("calibrate ") + cat);
    reports.push_back(own(r, ecd_calibration_free));
  }
  if (!wanted.empty()) throw UsageError("--category: no target for '" + *wanted.begin() + "'");

  std::vector<const ecd_calibration*> list;
  for (const auto& r : reports) list.push_back(r.get());
  check(ecd_calibration_write(list.data(), list.size(), c.out("calibration.json").c_str(),
                              c.header.c_str()),
        "calibration.json");
  wrote(c.out("calibration.json"));

  std::printf("%s\n", c.header.c_str());
  std::printf("%-30s %12s %12s %10s %10s %6s  %s\n", "category", "deliveries", "value",
              "res. del.", "res. val.", "iter", "status");
  for (const auto* r : list) {
    ecd_calibration_summary s{};
    check(ecd_calibration_summary_get(r, &s), "calibration");
    std::printf("%-30s %12.4f %12.3f %+10.4f %+10.4f %6u  %s\n", s.category,
                s.deliveries_per_person_month, s.purchase_value_per_household_month,
                s.residual_deliveries, s.residual_value, s.iterations, s.status);
    ecd_params* p = nullptr;
    check(ecd_calibration_params(r, &p), "calibration");
    auto fitted = own(p, ecd_params_free);
    const std::string file = std::string("params_") + s.category + ".json";
    check(ecd_params_write(p, c.out(file).c_str(), c.header.c_str()), file);
    wrote(c.out(file));
  }
  return 0;
}

int cmd_fit(Context& c) {
  const std::pair<const char*, const std::string*> required[] = {
      {"--options-data", &c.o.options_data},
      {"--order-value-data", &c.o.order_value_data},
      {"--total-value-data", &c.o.total_value_data}};
  for (const auto& [flag, value] : required)
    if (value->empty()) throw UsageError(std::string(flag) + ": required");
  auto scen = load_scenario(scenario_refs(c, {"T3"}).front());
  auto start = load_params(c);
  auto load = [](const std::string& path, const char* flag) {
    ecd_dataset* d = nullptr;
    check(ecd_dataset_load(path.c_str(), &d), std::string(flag) + " " + path);
    return own(d, ecd_dataset_free);
  };
  auto d1 = load(c.o.options_data, "--options-data");
  auto d2 = load(c.o.order_value_data, "--order-value-data");
  auto d3 = load(c.o.total_value_data, "--total-value-data");
  ecd_fit* f = nullptr;
  check(ecd_fit_sequential(d1.get(), d2.get(), d3.get(), scen.get(), start.get(), c.workers, &f), "fit");
  auto fit = own(f, ecd_fit_free);
  check(ecd_fit_write(f, c.out("fit.json").c_str(), c.header.c_str()), "fit.json");
  wrote(c.out("fit.json"));
  ecd_params* p = nullptr;
  check(ecd_fit_params(f, &p), "fit");
  auto fitted = own(p, ecd_params_free);
  check(ecd_params_write(p, c.out("params_fitted.json").c_str(), c.header.c_str()), "params_fitted.json");
  wrote(c.out("params_fitted.json"));

  std::printf("%s\n", c.header.c_str());
  std::printf("%-28s %12s %12s\n", "coefficient", "estimate", "std. error");
  for (size_t i = 0; i < ecd_fit_coefficient_count(f); ++i) {
    ecd_coefficient k{};
    check(ecd_fit_coefficient(f, i, &k), "fit");
    if (k.fixed)
      std::printf("%-28s %12.6g %12s\n", k.name, k.estimate, "(fixed)");
    else
      std::printf("%-28s %12.6g %12.4g\n", k.name, k.estimate, k.std_error);
  }
  std::printf("converged: %s\n", ecd_fit_converged(f) ? "yes" : "no");
  return 0;
}

int cmd_synthesize(Context& c) {
  if (!c.given("seed")) throw UsageError("--seed: required");
  auto pop = load_population(c);
  auto params = load_params(c);
  auto scen = load_scenario(scenario_refs(c, {"S1"}).front());
  auto cats = load_categories(c);
  ecd_synthesis* s = nullptr;
  check(ecd_synthesize(pop.get(), scen.get(), params.get(), cats.get(), c.o.weeks, c.o.seed, c.workers, &s),
        "synthesize");
  auto syn = own(s, ecd_synthesis_free);
  check(ecd_synthesis_write(s, c.out("packages.csv").c_str(), c.out("synthesis_summary.csv").c_str(),
                            c.header.c_str()),
        "packages.csv");
  wrote(c.out("packages.csv"));
  wrote(c.out("synthesis_summary.csv"));
  std::printf("%s, %llu weeks\n", c.header.c_str(), static_cast<unsigned long long>(c.o.weeks));
  std::printf("%-30s %9s %9s %9s\n", "category", "adopters", "orders", "records");
  for (size_t i = 0; i < ecd_synthesis_category_count(s); ++i) {
    const char* name = nullptr;
    size_t adopters = 0, orders = 0, records = 0;
    check(ecd_synthesis_category(s, i, &name, &adopters, &orders, &records), "synthesize");
    std::printf("%-30s %9zu %9zu %9zu\n", name, adopters, orders, records);
  }
  return 0;
}

int cmd_gen_population(Context& c) {
  ecd_population* p = nullptr;
  check(ecd_population_synthetic(c.o.count, c.o.sizes.data(), c.o.sizes.size(), c.o.seed, &p), "--sizes");
  auto pop = own(p, ecd_population_free);
  check(ecd_population_write(p, c.out("population.csv").c_str(), c.header.c_str()), "population.csv");
  wrote(c.out("population.csv"));
  return 0;
}

int cmd_gen_scenario(Context& c) {
  for (const auto& name : scenario_refs(c, builtin_names())) {
    auto s = load_scenario(name);
    const std::string file = "scenario_" + name + ".json";
    check(ecd_scenario_write(s.get(), c.out(file).c_str(), c.header.c_str()), file);
    wrote(c.out(file));
  }
  return 0;
}

int cmd_gen_params(Context& c) {
  auto p = load_params(c);
  check(ecd_params_write(p.get(), c.out("params.json").c_str(), c.header.c_str()), "params.json");
  wrote(c.out("params.json"));
  return 0;
}

int cmd_gen_targets(Context& c) {
  ecd_targets* t = nullptr;
  check(ecd_targets_default(&t), "targets");
  auto targets = own(t, ecd_targets_free);
  check(ecd_targets_set_tolerance(t, c.o.tolerance), "--tolerance");
  check(ecd_targets_write(t, c.out("targets.json").c_str(), c.header.c_str()), "targets.json");
  wrote(c.out("targets.json"));
  return 0;
}

int cmd_gen_categories(Context& c) {
  auto cats = load_categories(c);
  check(ecd_categories_write(cats.get(), c.out("categories.json").c_str(), c.header.c_str()),
        "categories.json");
  wrote(c.out("categories.json"));
  return 0;
}

int cmd_gen_dataset(Context& c) {
  auto scen = load_scenario(scenario_refs(c, {"T3"}).front());
  auto params = load_params(c);
  const std::pair<ecd_level, const char*> levels[] = {
      {ECD_LEVEL_DELIVERY_OPTION, "options"},
      {ECD_LEVEL_ORDER_VALUE, "order-value"},
      {ECD_LEVEL_TOTAL_VALUE, "total-value"}};
  for (const auto& [level, name] : levels) {
    if (c.o.level != "all" && c.o.level != name) continue;
    ecd_dataset* d = nullptr;
    // Each level gets its own seed so the three files are independent.
    const std::uint64_t seed = hash_string(name, c.o.seed);
    check(ecd_dataset_simulate(level, c.o.observations, scen.get(), params.get(), seed, &d), name);
    auto data = own(d, ecd_dataset_free);
    const std::string file = std::string("choices_") + name + ".csv";
    check(ecd_dataset_write(d, c.out(file).c_str(), c.header.c_str()), file);
    wrote(c.out(file));
  }
  return 0;
}

int dispatch(Cli& cli, CLI::App* sub) {
  Options& o = cli.o;
  Context c{cli, sub, o, {}, {}, 0};
  std::string dir = o.out;
  if (dir.empty()) {
    const char* env = std::getenv("ECD_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("--out: cannot create directory " + dir);
  c.out_dir = dir;
  // Seeded generators keep their own default seed.
  if (!c.given("seed")) {
    if (sub->get_name() == "gen-population") o.seed = 7;
    if (sub->get_name() == "gen-dataset") o.seed = 1;
  }
  c.workers = o.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.workers;
  c.header = "ecd " + sub->get_name() + " config_hash=" + hex64(config_hash(sub)) +
             " seed=" + std::to_string(o.seed);

  const std::string& cmd = sub->get_name();
  if (cmd == "run") return cmd_analyze(c, false);
  if (cmd == "compare") return cmd_analyze(c, true);
  if (cmd == "calibrate") return cmd_calibrate(c);
  if (cmd == "fit") return cmd_fit(c);
  if (cmd == "synthesize") return cmd_synthesize(c);
  if (cmd == "gen-population") return cmd_gen_population(c);
  if (cmd == "gen-scenario") return cmd_gen_scenario(c);
  if (cmd == "gen-params") return cmd_gen_params(c);
  if (cmd == "gen-targets") return cmd_gen_targets(c);
  if (cmd == "gen-categories") return cmd_gen_categories(c);
  if (cmd == "gen-dataset") return cmd_gen_dataset(c);
  throw UsageError("unknown command " + cmd);
}

// Parses args into cli; returns an exit code when parsing already decided the outcome.
std::optional<int> parse(Cli& cli, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
  try {
    cli.app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return cli.app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    auto first = std::make_unique<Cli>();
    build(*first);
    if (auto code = parse(*first, args)) return *code;
    CLI::App* sub = selected(*first);
    if (sub == nullptr) {
      std::cerr << first->app.help();
      return kExitUsage;
    }
    if (first->o.config.empty()) return dispatch(*first, sub);

    // Second pass: config values for options the command line left unset.
    const auto extra = config_arguments(*first, sub, first->o.config);
    std::vector<std::string> merged = args;
    const auto pos = std::find(merged.begin(), merged.end(), sub->get_name());
    merged.insert(pos + 1, extra.begin(), extra.end());
    auto second = std::make_unique<Cli>();
    build(*second);
    if (auto code = parse(*second, merged)) return *code;
    return dispatch(*second, selected(*second));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LibraryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.status == ECD_ERR_INTERNAL ? kExitFailure : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
