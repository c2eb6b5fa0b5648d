#include "ecd/estimation.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <string_view>

#include "ecd/choice.hpp"
#include "ecd/csv.hpp"
#include "ecd/error.hpp"
#include "ecd/parallel.hpp"
#include "ecd/rng.hpp"

namespace ecd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t hash_matrix(const Eigen::MatrixXd& m) {
  const std::string_view bytes(reinterpret_cast<const char*>(m.data()),
                               static_cast<std::size_t>(m.size()) * sizeof(double));
  return fnv1a64(bytes, fnv1a64(std::to_string(m.rows()) + "x" + std::to_string(m.cols())));
}

// Chosen-alternative counts per set.
struct Tally {
  std::vector<std::vector<double>> counts;
  std::vector<double> totals;
};

Tally tally(const ChoiceDataset& d) {
  Tally t;
  t.counts.resize(d.sets.size());
  t.totals.assign(d.sets.size(), 0.0);
  for (std::size_t s = 0; s < d.sets.size(); ++s)
    t.counts[s].assign(static_cast<std::size_t>(d.sets[s].rows()), 0.0);
  for (const auto& o : d.observations) {
    t.counts[o.set][o.chosen] += 1.0;
    t.totals[o.set] += 1.0;
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dataset

std::size_t ChoiceDataset::intern_set(Eigen::MatrixXd set) {
  const auto h = hash_matrix(set);
  auto [lo, hi] = index_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    const auto& other = sets[it->second];
    if (other.rows() == set.rows() && other.cols() == set.cols() && other == set) return it->second;
  }
  sets.push_back(std::move(set));
  index_.emplace(h, sets.size() - 1);
  return sets.size() - 1;
}

void ChoiceDataset::validate() const {
  const auto k = static_cast<Eigen::Index>(covariate_names.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (sets[s].cols() != k)
      throw InvalidInput("choice set " + std::to_string(s) + " has the wrong covariate count");
    if (sets[s].rows() < 2)
      throw InvalidInput("choice set " + std::to_string(s) + " has fewer than 2 alternatives");
    if (!sets[s].allFinite())
      throw InvalidInput("choice set " + std::to_string(s) + " has non-finite covariates");
  }
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    if (o.set >= sets.size() || o.chosen >= static_cast<std::size_t>(sets[o.set].rows()))
      throw InvalidInput("observation " + std::to_string(i) + " refers outside its choice set");
  }
}

// ---------------------------------------------------------------------------
// Likelihood

LogLikelihood mnl_loglik(const ChoiceDataset& data, const Eigen::VectorXd& beta, bool with_hessian,
                         unsigned workers) {
  data.validate();
  const auto k = static_cast<Eigen::Index>(data.covariate_count());
  if (beta.size() != k) throw InvalidInput("coefficient vector length does not match covariates");
  if (!beta.allFinite()) throw InvalidInput("coefficients must be finite");
  const Tally t = tally(data);

  const std::size_t n_sets = data.sets.size();
  std::vector<double> values(n_sets, 0.0);
  std::vector<Eigen::VectorXd> grads(n_sets);
  std::vector<Eigen::MatrixXd> hessians(with_hessian ? n_sets : 0);
  parallel_for(n_sets, workers, [&](std::size_t s) {
    if (t.totals[s] == 0.0) {
      grads[s] = Eigen::VectorXd::Zero(k);
      if (with_hessian) hessians[s] = Eigen::MatrixXd::Zero(k, k);
      return;
    }
    const Eigen::MatrixXd& x = data.sets[s];
    const Eigen::VectorXd v = x * beta;
    Eigen::VectorXd p(v.size());
    const double ls = probabilities_into({v.data(), static_cast<std::size_t>(v.size())},
                                         {p.data(), static_cast<std::size_t>(p.size())});
    const Eigen::Map<const Eigen::VectorXd> c(t.counts[s].data(),
                                              static_cast<Eigen::Index>(t.counts[s].size()));
    const double n = t.totals[s];
    values[s] = c.dot(v) - n * ls;
    const Eigen::VectorXd mean = x.transpose() * p;
    grads[s] = x.transpose() * c - n * mean;
    if (with_hessian) {
      const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
      hessians[s] = -n * (centered.transpose() * p.asDiagonal() * centered);
    }
  });

  LogLikelihood out;
  out.gradient = Eigen::VectorXd::Zero(k);
  if (with_hessian) out.hessian = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t s = 0; s < n_sets; ++s) {
    out.value += values[s];
    out.gradient += grads[s];
    if (with_hessian) out.hessian += hessians[s];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

Eigen::VectorXd restrict(const Eigen::VectorXd& full, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[idx[i]];
  return out;
}

Eigen::MatrixXd restrict(const Eigen::MatrixXd& full, const std::vector<Eigen::Index>& idx) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = full(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

// Solves info * d = g with Jacobi scaling; false when info is not positive definite.
bool newton_direction(const Eigen::MatrixXd& info, const Eigen::VectorXd& g, Eigen::VectorXd& d) {
  const Eigen::VectorXd diag = info.diagonal();
  if ((diag.array() <= 0.0).any()) return false;
  const Eigen::VectorXd scale = diag.array().rsqrt();
  const Eigen::MatrixXd scaled = scale.asDiagonal() * info * scale.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success) return false;
  d = scale.asDiagonal() * llt.solve(scale.asDiagonal() * g);
  return d.allFinite() && g.dot(d) > 0.0;
}

}  // namespace

MnlFit fit_mnl(const ChoiceDataset& data, Eigen::VectorXd theta, std::vector<bool> free,
               const FitOptions& options) {
  const auto k = static_cast<Eigen::Index>(data.covariate_count());
  if (theta.size() != k) throw InvalidInput("start vector length does not match covariates");
  if (free.empty()) free.assign(static_cast<std::size_t>(k), true);
  if (free.size() != static_cast<std::size_t>(k)) throw InvalidInput("free mask length mismatch");
  if (data.observations.empty()) throw InvalidInput("dataset has no observations");
  const double n_obs = static_cast<double>(data.observations.size());

  MnlFit fit;
  fit.names = data.covariate_names;
  fit.free = free;

  // Identifiability: null directions of the information matrix at the start.
  std::vector<Eigen::Index> active;
  {
    std::vector<Eigen::Index> cand;
    for (Eigen::Index i = 0; i < k; ++i)
      if (free[static_cast<std::size_t>(i)]) cand.push_back(i);
    const auto ll0 = mnl_loglik(data, theta, true, options.workers);
    const Eigen::MatrixXd info = -restrict(ll0.hessian, cand);
    std::vector<bool> flagged(cand.size(), false);
    if (!cand.empty()) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
      const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
      for (Eigen::Index e = 0; e < es.eigenvalues().size(); ++e) {
        if (es.eigenvalues()[e] > options.singular_tolerance * top) continue;
        for (std::size_t c = 0; c < cand.size(); ++c)
          if (std::abs(es.eigenvectors()(static_cast<Eigen::Index>(c), e)) > 0.1) flagged[c] = true;
      }
    }
    for (std::size_t c = 0; c < cand.size(); ++c) {
      if (flagged[c])
        fit.unidentified.push_back(fit.names[static_cast<std::size_t>(cand[c])]);
      else
        active.push_back(cand[c]);
    }
  }

  auto ll = mnl_loglik(data, theta, true, options.workers);
  fit.loglik_trace.push_back(ll.value);
  fit.status = "iteration limit reached";
  for (;;) {
    const Eigen::VectorXd g = restrict(ll.gradient, active);
    fit.gradient_norm = active.empty() ? 0.0 : g.norm() / n_obs;
    if (fit.gradient_norm < options.gradient_tolerance) {
      fit.converged = true;
      fit.status = "gradient norm below tolerance";
      break;
    }
    if (fit.iterations >= options.max_iterations) break;
    ++fit.iterations;

    Eigen::VectorXd d;
    if (!newton_direction(-restrict(ll.hessian, active), g, d)) d = g;
    const double slope = g.dot(d);
    double step = 1.0;
    bool accepted = false;
    LogLikelihood trial;
    Eigen::VectorXd candidate = theta;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      candidate = theta;
      for (std::size_t i = 0; i < active.size(); ++i)
        candidate[active[i]] += step * d[static_cast<Eigen::Index>(i)];
      if (!candidate.allFinite()) continue;
      trial = mnl_loglik(data, candidate, true, options.workers);
      if (std::isfinite(trial.value) && trial.value >= ll.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fit.status = "line search could not increase the log-likelihood";
      break;
    }
    theta = candidate;
    ll = std::move(trial);
    fit.loglik_trace.push_back(ll.value);
  }

  fit.estimate = theta;
  fit.loglik = ll.value;
  fit.std_error = Eigen::VectorXd::Constant(k, kNaN);
  fit.covariance = Eigen::MatrixXd::Zero(k, k);
  if (!active.empty()) {
    const Eigen::MatrixXd info = -restrict(ll.hessian, active);
    const Eigen::MatrixXd cov = info.ldlt().solve(
        Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = 0; j < active.size(); ++j)
        fit.covariance(active[i], active[j]) = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      fit.std_error[active[i]] = std::sqrt(cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    }
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Level designs

const std::vector<std::string>& option_covariates() {
  static const std::vector<std::string> names{
      "speed_2_5_days", "speed_one_day",       "speed_same_day",
      "slot_none",      "slot_2hr",            "slot_4hr",
      "time_daytime",   "time_daytime_evening", "date_weekday",
      "date_weekday_saturday", "date_all_days", "ln_fee_plus_1"};
  return names;
}

namespace {

// Parameter names matching option_covariates() one to one.
std::string option_param_name(const std::string& covariate) {
  return covariate == "ln_fee_plus_1" ? "beta_fee" : "beta_" + covariate;
}

void require_columns(const ChoiceDataset& raw, const std::vector<std::string>& expected,
                     std::string_view level) {
  if (raw.covariate_names != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw InvalidInput(std::string(level) + " data must have covariate columns " + want);
  }
}

ChoiceDataset map_sets(const ChoiceDataset& raw, std::vector<std::string> names,
                       const std::function<void(const Eigen::MatrixXd&, Eigen::MatrixXd&)>& fn) {
  ChoiceDataset out;
  out.covariate_names = std::move(names);
  out.sets.reserve(raw.sets.size());
  for (const auto& s : raw.sets) {
    Eigen::MatrixXd m(s.rows(), static_cast<Eigen::Index>(out.covariate_names.size()));
    fn(s, m);
    out.sets.push_back(std::move(m));
  }
  out.observations = raw.observations;
  return out;
}

}  // namespace

ChoiceDataset order_value_design(const ChoiceDataset& raw, const Scenario& scenario,
                                 const ChoiceModelParams& params) {
  require_columns(raw, kOrderValueRaw, "order-value");
  std::map<double, double> option_logsum;
  return map_sets(raw, {"logsum_do_x_frequency", "interval_sq", "ov"},
                  [&](const Eigen::MatrixXd& s, Eigen::MatrixXd& m) {
                    for (Eigen::Index a = 0; a < s.rows(); ++a) {
                      const double tv = s(a, 0), ov = s(a, 1);
                      if (!(tv > 0.0) || !(ov > 0.0))
                        throw InvalidInput("order-value data needs positive tv and ov");
                      auto it = option_logsum.find(ov);
                      if (it == option_logsum.end())
                        it = option_logsum.emplace(ov, option_choice(scenario, ov, params).logsum).first;
                      m(a, 0) = (tv / ov) * it->second;
                      m(a, 1) = (ov / tv) * (ov / tv);
                      m(a, 2) = ov;
                    }
                  });
}

ChoiceDataset total_value_design(const ChoiceDataset& raw, const Scenario& scenario,
                                 const ChoiceModelParams& params) {
  require_columns(raw, kTotalValueRaw, "total-value");
  const DemandTables tables(scenario, params);
  std::map<double, double> ov_logsum;
  return map_sets(raw, {"logsum_ov", "tv_sq", "hhs_x_tv"},
                  [&](const Eigen::MatrixXd& s, Eigen::MatrixXd& m) {
                    for (Eigen::Index a = 0; a < s.rows(); ++a) {
                      const double hhs = std::min<double>(s(a, 0), kMaxHouseholdSize), tv = s(a, 1);
                      if (!(tv > 0.0) || !(hhs >= 1.0))
                        throw InvalidInput("total-value data needs positive tv and hhs >= 1");
                      auto it = ov_logsum.find(tv);
                      if (it == ov_logsum.end()) {
                        const double idx = tv - scenario.tv_grid.min;
                        const bool on_grid = idx >= 0 && idx < static_cast<double>(tables.tv_count()) &&
                                             idx == std::floor(idx);
                        const double ls = on_grid ? tables.ov_logsum(static_cast<std::size_t>(idx))
                                                  : order_value_logsum(tv, scenario, params);
                        it = ov_logsum.emplace(tv, ls).first;
                      }
                      m(a, 0) = it->second;
                      m(a, 1) = tv * tv;
                      m(a, 2) = hhs * tv;
                    }
                  });
}

SequentialFit fit_sequential(const ChoiceDataset& option_data, const ChoiceDataset& order_value_raw,
                             const ChoiceDataset& total_value_raw, const Scenario& scenario,
                             const ChoiceModelParams& start, const FitOptions& options) {
  scenario.validate();
  start.validate();
  require_columns(option_data, option_covariates(), "delivery-option");
  SequentialFit out;
  ChoiceModelParams p = start;

  // Level 1: one reference level per attribute stays at its start value.
  {
    const auto& cov = option_covariates();
    Eigen::VectorXd th(static_cast<Eigen::Index>(cov.size()));
    std::vector<bool> free(cov.size(), true);
    for (std::size_t i = 0; i < cov.size(); ++i) {
      th[static_cast<Eigen::Index>(i)] = p.get(option_param_name(cov[i]));
      if (cov[i] == "speed_2_5_days" || cov[i] == "slot_none" || cov[i] == "time_daytime" ||
          cov[i] == "date_weekday")
        free[i] = false;
    }
    out.options = fit_mnl(option_data, th, free, options);
    for (std::size_t i = 0; i < cov.size(); ++i)
      p.set(option_param_name(cov[i]), out.options.estimate[static_cast<Eigen::Index>(i)]);
  }
  // Level 2 with level-1 logsums frozen.
  {
    const auto design = order_value_design(order_value_raw, scenario, p);
    Eigen::VectorXd th(3);
    th << p.beta_logsumdo, p.beta_interval, p.beta_storage;
    out.order_value = fit_mnl(design, th, {}, options);
    p.beta_logsumdo = out.order_value.estimate[0];
    p.beta_interval = out.order_value.estimate[1];
    p.beta_storage = out.order_value.estimate[2];
  }
  // Level 3: beta_hhs (alpha h - tv)^2 expands to beta_hhs tv^2 + gamma h tv plus a
  // constant within each choice set, with gamma = -2 beta_hhs alpha.
  {
    const auto design = total_value_design(total_value_raw, scenario, p);
    Eigen::VectorXd th(3);
    th << p.beta_logsumov, p.beta_hhs, -2.0 * p.beta_hhs * p.alpha;
    out.total_value = fit_mnl(design, th, {}, options);
    const auto& e = out.total_value.estimate;
    p.beta_logsumov = e[0];
    p.beta_hhs = e[1];
    p.alpha = -e[2] / (2.0 * e[1]);
    Eigen::Vector2d grad(e[2] / (2.0 * e[1] * e[1]), -1.0 / (2.0 * e[1]));
    const Eigen::Matrix2d cov = out.total_value.covariance.bottomRightCorner<2, 2>();
    out.alpha_std_error = std::sqrt(grad.dot(cov * grad));
  }
  out.params = p;
  out.converged = out.options.converged && out.order_value.converged && out.total_value.converged;
  return out;
}

std::vector<CoefficientEstimate> coefficient_table(const SequentialFit& fit) {
  std::vector<CoefficientEstimate> rows;
  const auto& cov = option_covariates();
  for (std::size_t i = 0; i < cov.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    rows.push_back({option_param_name(cov[i]), fit.options.estimate[idx],
                    fit.options.std_error[idx], !fit.options.free[i]});
  }
  const char* upper[] = {"beta_logsumdo", "beta_interval", "beta_storage"};
  for (Eigen::Index i = 0; i < 3; ++i)
    rows.push_back({upper[i], fit.order_value.estimate[i], fit.order_value.std_error[i], false});
  rows.push_back({"beta_logsumov", fit.total_value.estimate[0], fit.total_value.std_error[0], false});
  rows.push_back({"beta_hhs", fit.total_value.estimate[1], fit.total_value.std_error[1], false});
  rows.push_back({"alpha", fit.params.alpha, fit.alpha_std_error, false});
  return rows;
}

namespace {

nlohmann::json level_json(const MnlFit& f) {
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const double se = f.std_error[idx];
    coefs.push_back({{"covariate", f.names[i]},
                     {"estimate", f.estimate[idx]},
                     {"std_error", std::isfinite(se) ? nlohmann::json(se) : nlohmann::json(nullptr)},
                     {"free", static_cast<bool>(f.free[i])}});
  }
  return {{"coefficients", coefs},
          {"loglik", f.loglik},
          {"gradient_norm", f.gradient_norm},
          {"iterations", f.iterations},
          {"converged", f.converged},
          {"status", f.status},
          {"unidentified", f.unidentified},
          {"loglik_trace", f.loglik_trace}};
}

}  // namespace

nlohmann::json to_json(const SequentialFit& fit) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& row : coefficient_table(fit))
    params[row.name] = {{"estimate", row.estimate},
                        {"std_error", std::isfinite(row.std_error) ? nlohmann::json(row.std_error)
                                                                   : nlohmann::json(nullptr)},
                        {"fixed", row.fixed}};
  return {{"levels",
           {{"delivery_option", level_json(fit.options)},
            {"order_value", level_json(fit.order_value)},
            {"total_value", level_json(fit.total_value)}}},
          {"coefficients", params},
          {"converged", fit.converged}};
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

constexpr double kFeeLevels[] = {0, 3, 6, 7, 8, 10, 12, 15, 17, 18, 20, 22, 27};

RngStream dataset_stream(std::uint64_t seed, std::uint64_t level, std::uint64_t i) {
  return RngStream(derive_seed(seed, {static_cast<std::uint64_t>(StreamPurpose::Dataset), level, i}));
}

std::size_t draw_size(const SizeDistribution& sizes, RngStream& rng) {
  return choose_by_draw(sizes.masses, rng.uniform()) + 1;
}

}  // namespace

ChoiceDataset simulate_option_choices(std::size_t n, const ChoiceModelParams& params,
                                      std::uint64_t seed) {
  ChoiceDataset d;
  d.covariate_names = option_covariates();
  constexpr Eigen::Index kAlternatives = 3;
  Eigen::VectorXd beta(static_cast<Eigen::Index>(d.covariate_names.size()));
  for (std::size_t i = 0; i < d.covariate_names.size(); ++i)
    beta[static_cast<Eigen::Index>(i)] = params.get(option_param_name(d.covariate_names[i]));
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = dataset_stream(seed, 1, i);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(kAlternatives, beta.size());
    for (Eigen::Index a = 0; a < kAlternatives; ++a) {
      x(a, static_cast<Eigen::Index>(rng.uniform_index(3))) = 1.0;
      x(a, 3 + static_cast<Eigen::Index>(rng.uniform_index(3))) = 1.0;
      x(a, 6 + static_cast<Eigen::Index>(rng.uniform_index(2))) = 1.0;
      x(a, 8 + static_cast<Eigen::Index>(rng.uniform_index(3))) = 1.0;
      x(a, 11) = std::log(kFeeLevels[rng.uniform_index(std::size(kFeeLevels))] + 1.0);
    }
    const Eigen::VectorXd v = x * beta;
    const auto chosen = sample_choice({v.data(), static_cast<std::size_t>(v.size())}, rng);
    d.observations.push_back({d.intern_set(std::move(x)), chosen});
  }
  return d;
}

ChoiceDataset simulate_order_values(std::size_t n, const Scenario& scenario,
                                    const ChoiceModelParams& params, const SizeDistribution& sizes,
                                    std::uint64_t seed) {
  sizes.validate();
  const DemandTables tables(scenario, params);
  std::vector<ChoiceDistribution> ptv(sizes.masses.size());
  for (std::size_t s = 0; s < ptv.size(); ++s)
    ptv[s] = probabilities(tv_utilities({"", static_cast<int>(s + 1)}, tables));
  ChoiceDataset d;
  d.covariate_names = kOrderValueRaw;
  std::map<std::size_t, std::size_t> set_of_tv;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = dataset_stream(seed, 2, i);
    const auto h = draw_size(sizes, rng);
    const auto t = choose_by_draw(ptv[h - 1], rng.uniform());
    const auto o = choose_by_draw(tables.ov_given_tv(t), rng.uniform());
    auto it = set_of_tv.find(t);
    if (it == set_of_tv.end()) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(tables.ov_count()), 2);
      for (std::size_t a = 0; a < tables.ov_count(); ++a) {
        x(static_cast<Eigen::Index>(a), 0) = scenario.tv_grid.value(t);
        x(static_cast<Eigen::Index>(a), 1) = scenario.ov_grid.value(a);
      }
      it = set_of_tv.emplace(t, d.intern_set(std::move(x))).first;
    }
    d.observations.push_back({it->second, o});
  }
  return d;
}

ChoiceDataset simulate_total_values(std::size_t n, const Scenario& scenario,
                                    const ChoiceModelParams& params, const SizeDistribution& sizes,
                                    std::uint64_t seed) {
  sizes.validate();
  const DemandTables tables(scenario, params);
  ChoiceDataset d;
  d.covariate_names = kTotalValueRaw;
  std::vector<ChoiceDistribution> ptv(sizes.masses.size());
  std::vector<std::size_t> set_of_size(sizes.masses.size());
  for (std::size_t s = 0; s < ptv.size(); ++s) {
    ptv[s] = probabilities(tv_utilities({"", static_cast<int>(s + 1)}, tables));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(tables.tv_count()), 2);
    for (std::size_t a = 0; a < tables.tv_count(); ++a) {
      x(static_cast<Eigen::Index>(a), 0) = static_cast<double>(s + 1);
      x(static_cast<Eigen::Index>(a), 1) = scenario.tv_grid.value(a);
    }
    set_of_size[s] = d.intern_set(std::move(x));
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = dataset_stream(seed, 3, i);
    const auto h = draw_size(sizes, rng);
    d.observations.push_back({set_of_size[h - 1], choose_by_draw(ptv[h - 1], rng.uniform())});
  }
  // Sizes that were never drawn leave unused sets; harmless for the likelihood.
  return d;
}

// ---------------------------------------------------------------------------
// CSV

void write_choice_csv(std::ostream& out, const ChoiceDataset& data, const std::string& header) {
  data.validate();
  csv::write_header_comment(out, header);
  out << "obs_id,alt_id,chosen";
  for (const auto& c : data.covariate_names) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    const auto& o = data.observations[i];
    const auto& x = data.sets[o.set];
    for (Eigen::Index a = 0; a < x.rows(); ++a) {
      out << i + 1 << ',' << a + 1 << ',' << (static_cast<std::size_t>(a) == o.chosen ? 1 : 0);
      for (Eigen::Index c = 0; c < x.cols(); ++c) out << ',' << csv::num(x(a, c));
      out << '\n';
    }
  }
}

ChoiceDataset read_choice_csv(std::istream& in) {
  ChoiceDataset d;
  bool header = false;
  std::string current;
  long current_line = 0;
  std::vector<std::vector<double>> rows;
  long chosen = -1;
  auto flush = [&] {
    if (current.empty()) return;
    if (rows.size() < 2)
      throw LoadError("observation '" + current + "' has fewer than 2 alternatives", current_line);
    if (chosen < 0) throw LoadError("observation '" + current + "' has no chosen alternative", current_line);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(d.covariate_names.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t c = 0; c < rows[a].size(); ++c)
        x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = rows[a][c];
    d.observations.push_back({d.intern_set(std::move(x)), static_cast<std::size_t>(chosen)});
    rows.clear();
    chosen = -1;
  };
  std::map<std::string, bool> finished;
  csv::for_each_row(in, [&](long line, const std::vector<std::string>& f) {
    if (!header) {
      if (f.size() < 4 || f[0] != "obs_id" || f[1] != "alt_id" || f[2] != "chosen")
        throw LoadError("expected header 'obs_id,alt_id,chosen,<covariates...>'", line);
      d.covariate_names.assign(f.begin() + 3, f.end());
      header = true;
      return;
    }
    if (f.size() != d.covariate_names.size() + 3)
      throw LoadError("expected " + std::to_string(d.covariate_names.size() + 3) + " fields", line);
    if (f[0] != current) {
      flush();
      if (finished.count(f[0])) throw LoadError("rows of observation '" + f[0] + "' are not contiguous", line);
      finished[f[0]] = true;
      current = f[0];
      current_line = line;
    }
    const auto c = csv::parse_int(f[2], line, "chosen");
    if (c != 0 && c != 1) throw LoadError("chosen must be 0 or 1", line);
    if (c == 1) {
      if (chosen >= 0) throw LoadError("observation '" + current + "' has two chosen alternatives", line);
      chosen = static_cast<long>(rows.size());
    }
    std::vector<double> row;
    for (std::size_t k = 0; k < d.covariate_names.size(); ++k)
      row.push_back(csv::parse_double(f[k + 3], line, d.covariate_names[k]));
    rows.push_back(std::move(row));
  });
  flush();
  if (!header) throw LoadError("choice data is empty");
  if (d.observations.empty()) throw LoadError("choice data has no observations");
  return d;
}

ChoiceDataset read_choice_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open choice data '" + path + "'");
  return read_choice_csv(in);
}

}  // namespace ecd
