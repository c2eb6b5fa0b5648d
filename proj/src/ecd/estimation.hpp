#pragma once

// Multinomial-logit maximum likelihood and the bottom-up fit of the three
// demand levels, each level using logsums computed from the coefficients
// already fitted below it.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ecd/model.hpp"
#include "ecd/population.hpp"

namespace ecd {

struct ChoiceObservation {
  std::size_t set = 0;  // index into ChoiceDataset::sets
  std::size_t chosen = 0;  // row of the chosen alternative
};

// Observations point at shared alternative sets (rows = alternatives,
// columns = covariates), so identical choice situations are stored once.
struct ChoiceDataset {
  std::vector<std::string> covariate_names;
  std::vector<Eigen::MatrixXd> sets;
  std::vector<ChoiceObservation> observations;

  std::size_t covariate_count() const { return covariate_names.size(); }
  // Returns the index of an identical existing set, or appends it.
  std::size_t intern_set(Eigen::MatrixXd set);
  void validate() const;

 private:
  std::unordered_multimap<std::uint64_t, std::size_t> index_;  // content hash -> set
};

struct LogLikelihood {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // empty unless requested
};

LogLikelihood mnl_loglik(const ChoiceDataset& data, const Eigen::VectorXd& coefficients,
                         bool with_hessian = false, unsigned workers = 1);

inline std::pair<double, Eigen::VectorXd> mnl_loglik_and_gradient(
    const ChoiceDataset& data, const Eigen::VectorXd& coefficients, unsigned workers = 1) {
  auto ll = mnl_loglik(data, coefficients, false, workers);
  return {ll.value, std::move(ll.gradient)};
}

struct FitOptions {
  unsigned max_iterations = 1000;
  // On the gradient averaged per observation.
  double gradient_tolerance = 1e-6;
  // Eigenvalues of the information matrix below this fraction of the largest
  // one mark the direction as unidentified.
  double singular_tolerance = 1e-10;
  unsigned workers = 1;
};

struct MnlFit {
  std::vector<std::string> names;
  Eigen::VectorXd estimate;
  Eigen::VectorXd std_error;  // NaN for fixed or unidentified coefficients
  Eigen::MatrixXd covariance;  // over all coefficients, zero rows for fixed ones
  std::vector<bool> free;
  std::vector<std::string> unidentified;
  double loglik = 0.0;
  double gradient_norm = 0.0;
  unsigned iterations = 0;
  bool converged = false;
  std::string status;
  std::vector<double> loglik_trace;  // value before the first step and after every step
};

// Newton-direction ascent with Armijo backtracking; falls back to the plain
// gradient when the information matrix is not positive definite. Coefficients
// with free[i] == false stay at their start value.
MnlFit fit_mnl(const ChoiceDataset& data, Eigen::VectorXd start, std::vector<bool> free,
               const FitOptions& options = {});

// Column layouts of the three levels.
const std::vector<std::string>& option_covariates();  // 11 attribute dummies + ln(fee+1)
inline const std::vector<std::string> kOrderValueRaw{"tv", "ov"};
inline const std::vector<std::string> kTotalValueRaw{"hhs", "tv"};

// Builds the model covariates of the upper levels from raw (tv, ov) and
// (hhs, tv) alternative rows.
ChoiceDataset order_value_design(const ChoiceDataset& raw, const Scenario& scenario,
                                 const ChoiceModelParams& params);
ChoiceDataset total_value_design(const ChoiceDataset& raw, const Scenario& scenario,
                                 const ChoiceModelParams& params);

struct SequentialFit {
  MnlFit options;
  MnlFit order_value;
  MnlFit total_value;
  ChoiceModelParams params;
  double alpha_std_error = 0.0;
  bool converged = false;
};

SequentialFit fit_sequential(const ChoiceDataset& option_data, const ChoiceDataset& order_value_raw,
                             const ChoiceDataset& total_value_raw, const Scenario& scenario,
                             const ChoiceModelParams& start, const FitOptions& options = {});

// Named estimates with standard errors for every fitted model coefficient,
// alpha included (delta method).
struct CoefficientEstimate {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  bool fixed = false;
};
std::vector<CoefficientEstimate> coefficient_table(const SequentialFit& fit);

nlohmann::json to_json(const SequentialFit& fit);

// Synthetic choice data drawn from the model itself.
ChoiceDataset simulate_option_choices(std::size_t n, const ChoiceModelParams& params,
                                      std::uint64_t seed);
ChoiceDataset simulate_order_values(std::size_t n, const Scenario& scenario,
                                    const ChoiceModelParams& params, const SizeDistribution& sizes,
                                    std::uint64_t seed);
ChoiceDataset simulate_total_values(std::size_t n, const Scenario& scenario,
                                    const ChoiceModelParams& params, const SizeDistribution& sizes,
                                    std::uint64_t seed);

// Long format: obs_id,alt_id,chosen,<covariates...>; observation rows are contiguous.
void write_choice_csv(std::ostream& out, const ChoiceDataset& data, const std::string& header = {});
ChoiceDataset read_choice_csv(std::istream& in);
ChoiceDataset read_choice_csv_file(const std::string& path);

}  // namespace ecd
