#include "ppiw/simulate.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "ppiw/estimators.hpp"
#include "ppiw/propensity.hpp"
#include "ppiw/report.hpp"
#include "ppiw/rng.hpp"

namespace ppiw {

namespace {

struct UnitDraws {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd yhat;
};

UnitDraws draw_units(int n_units, std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  UnitDraws d;
  d.x.resize(n_units, 1);
  d.y.resize(n_units);
  d.yhat.resize(n_units);
  for (int i = 0; i < n_units; ++i) {
    const double x = normal(engine);
    d.x(i, 0) = x;
    d.y[i] = unif(engine) < sigmoid(x) ? 1.0 : 0.0;
    d.yhat[i] = sigmoid(x + 0.5 * normal(engine));
  }
  return d;
}

Eigen::VectorXi draw_labels(const Eigen::VectorXd& xi, std::mt19937_64& engine) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXi r(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) r[i] = unif(engine) < xi[i] ? 1 : 0;
  return r;
}

// Intercept a with mean_i sigmoid(a + slope * x_i) = target, by bisection.
double solve_intercept(const Eigen::VectorXd& x, double slope, double target) {
  auto mean_xi = [&](double a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += sigmoid(a + slope * x[i]);
    return s / static_cast<double>(x.size());
  };
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_xi(mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::pair<FinitePopulation, LabelingDesign> dgp_binary_logit(int n_units, std::uint64_t seed) {
  std::mt19937_64 engine(rng::derive(seed, 0xb17u));
  UnitDraws d = draw_units(n_units, engine);
  Eigen::VectorXd xi(n_units);
  for (int i = 0; i < n_units; ++i) xi[i] = sigmoid(0.5 * d.x(i, 0));
  Eigen::VectorXi r = draw_labels(xi, engine);
  return {build_population(d.x, d.y, d.yhat), build_design(xi, r)};
}

std::pair<FinitePopulation, LabelingDesign> dgp_facet(int n_units, double p_lab,
                                                      std::uint64_t seed) {
  if (!(p_lab > 0.0 && p_lab <= 1.0)) {
    throw InvalidProportion("labeled proportion must lie in (0,1]");
  }
  std::mt19937_64 engine(rng::derive(seed, 0xfaceu));
  UnitDraws d = draw_units(n_units, engine);
  Eigen::VectorXd xi(n_units);
  Eigen::VectorXi r(n_units);
  if (p_lab == 1.0) {
    xi.setOnes();
    r.setOnes();
  } else {
    const double intercept = solve_intercept(d.x.col(0), 0.5, p_lab);
    for (int i = 0; i < n_units; ++i) xi[i] = sigmoid(intercept + 0.5 * d.x(i, 0));
    r = draw_labels(xi, engine);
  }
  return {build_population(d.x, d.y, d.yhat), build_design(xi, r)};
}

namespace {

EstimateWithCI compute_estimator(EstimatorTag tag, const FinitePopulation& pop,
                                 const LabelingDesign& design,
                                 const SimulationConfig& config,
                                 std::uint64_t replicate_seed) {
  switch (tag) {
    case EstimatorTag::Classic:
      return classic_mean(pop, design, config.ci_level);
    case EstimatorTag::HT:
      return horvitz_thompson(pop, design, config.ci_level);
    case EstimatorTag::Hajek:
      return hajek(pop, design, config.ci_level);
    case EstimatorTag::GREG:
      return greg(pop, design, config.ci_level);
    case EstimatorTag::BinSmooth: {
      const int bins = config.n_bins > 0
                           ? config.n_bins
                           : static_cast<int>(std::ceil(std::sqrt(
                                 static_cast<double>(design.n_lab))));
      return bin_smooth(pop, design,
                        make_bins(design.inclusion_probs, bins, BinStrategy::EqualWidth),
                        config.ci_level);
    }
    case EstimatorTag::PPI:
      return ppi_estimate(pop, design, RectifierForm::Unweighted, config.ci_level);
    case EstimatorTag::PPI_HT:
      return ppi_estimate(pop, design, RectifierForm::HT, config.ci_level);
    case EstimatorTag::PPI_Hajek:
      return ppi_estimate(pop, design, RectifierForm::Hajek, config.ci_level);
    case EstimatorTag::CrossPPI:
      return cross_ppi(pop, design, config.cross_folds, logistic_trainer(),
                       RectifierForm::Hajek, replicate_seed, config.ci_level);
  }
  throw Error("unknown estimator tag");
}

ReplicateRecord run_one_replicate(const SimulationConfig& config, int replicate) {
  ReplicateRecord record;
  const int max_attempts = 100;
  for (int attempt = 0;; ++attempt) {
    if (attempt == max_attempts) {
      throw Error("replicate " + std::to_string(replicate) +
                  " failed to produce a usable dataset");
    }
    record.attempts = attempt + 1;
    const std::uint64_t replicate_seed =
        rng::derive(config.seed, static_cast<std::uint64_t>(replicate),
                    static_cast<std::uint64_t>(attempt));
    try {
      auto [pop, design] = config.dgp == Dgp::BinaryLogit
                               ? dgp_binary_logit(config.n_units, replicate_seed)
                               : dgp_facet(config.n_units,
                                           config.p_lab.value_or(0.01), replicate_seed);
      if (design.n_lab < 2) throw NoLabeledUnits("replicate drew fewer than two labels");

      LabelingDesign used = design;
      if (config.xi_model == XiModel::EstimatedXi && design.n_lab < design.n_units()) {
        const LogisticModel propensity = fit_logistic(pop.covariates, design.indicators);
        used = build_design(predict_xi(propensity, pop.covariates), design.indicators);
      }

      record.truth = pop.outcomes.mean();
      record.n_lab = design.n_lab;
      record.estimates.clear();
      record.estimator_errors.clear();
      for (EstimatorTag tag : config.estimators) {
        try {
          record.estimates.push_back(
              compute_estimator(tag, pop, used, config, replicate_seed));
          record.estimator_errors.emplace_back();
        } catch (const Error& e) {
          record.estimates.push_back(std::nullopt);
          record.estimator_errors.emplace_back(e.what());
        }
      }
      return record;
    } catch (const Error&) {
      continue;  // regenerate with the next sub-seed
    }
  }
}

}  // namespace

std::vector<ReplicateRecord> run_replicates(const SimulationConfig& config, int count) {
  if (count < 0 || count > config.n_replicates) throw Error("replicate count out of range");
  std::vector<ReplicateRecord> records(static_cast<size_t>(count));
  int n_threads = config.threads > 0
                      ? config.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, count > 0 ? count : 1));

  if (n_threads == 1) {
    for (int r = 0; r < count; ++r) records[static_cast<size_t>(r)] = run_one_replicate(config, r);
    return records;
  }

  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  std::atomic<bool> failed{false};
  workers.reserve(static_cast<size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= count || failed.load()) return;
        try {
          records[static_cast<size_t>(r)] = run_one_replicate(config, r);
        } catch (...) {
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failed.load()) throw Error("a simulation replicate failed unrecoverably");
  return records;
}

SimulationReport run_simulation(const SimulationConfig& config) {
  if (config.n_replicates < 1) throw Error("need at least one replicate");
  const auto records = run_replicates(config, config.n_replicates);

  SimulationReport report;
  report.config = config;
  double truth_sum = 0.0;
  for (const auto& record : records) {
    truth_sum += record.truth;
    report.n_regenerated += record.attempts - 1;
  }
  report.truth = truth_sum / static_cast<double>(records.size());

  for (size_t e = 0; e < config.estimators.size(); ++e) {
    EstimatorSummary row;
    row.tag = config.estimators[e];
    double est_sum = 0.0, width_sum = 0.0, nlab_sum = 0.0;
    int covered = 0, ok = 0;
    for (const auto& record : records) {
      const auto& est = record.estimates[e];
      if (!est) {
        ++row.n_failed;
        continue;
      }
      ++ok;
      est_sum += est->estimate;
      width_sum += est->width();
      nlab_sum += record.n_lab;
      if (est->covers(record.truth)) ++covered;
    }
    if (ok > 0) {
      row.mean_estimate = est_sum / ok;
      row.bias = row.mean_estimate - report.truth;
      row.mean_width = width_sum / ok;
      row.coverage = static_cast<double>(covered) / ok;
      row.avg_n_lab = nlab_sum / ok;
    }
    report.rows.push_back(row);
  }
  return report;
}

std::vector<IntervalRow> first_k_intervals(const SimulationConfig& config, int k) {
  if (k > config.n_replicates) throw Error("k exceeds the replicate count");
  const auto records = run_replicates(config, k);
  std::vector<IntervalRow> rows;
  for (int r = 0; r < k; ++r) {
    const auto& record = records[static_cast<size_t>(r)];
    for (size_t e = 0; e < config.estimators.size(); ++e) {
      const auto& est = record.estimates[e];
      if (!est) continue;
      rows.push_back(IntervalRow{r, config.estimators[e], est->ci_lower, est->ci_upper,
                                 est->covers(record.truth)});
    }
  }
  return rows;
}

std::string simulation_report_csv(const SimulationReport& report) {
  std::string out = "estimator,mean_estimate,bias,mean_width,coverage,avg_n_lab\n";
  for (const auto& row : report.rows) {
    out += to_string(row.tag) + "," + format_sig6(row.mean_estimate) + "," +
           format_sig6(row.bias) + "," + format_sig6(row.mean_width) + "," +
           format_sig6(row.coverage) + "," + format_sig6(row.avg_n_lab) + "\n";
  }
  return out;
}

std::string simulation_report_table(const SimulationReport& report) {
  std::string out = "replicates: " + std::to_string(report.config.n_replicates) +
                    "  N: " + std::to_string(report.config.n_units) +
                    "  mean truth: " + format_sig6(report.truth);
  if (report.n_regenerated > 0) {
    out += "  regenerated datasets: " + std::to_string(report.n_regenerated);
  }
  out += "\n";
  TableWriter table({"estimator", "mean_estimate", "bias", "mean_width", "coverage",
                     "avg_n_lab", "failed"});
  for (const auto& row : report.rows) {
    table.add_row({to_string(row.tag), format_sig6(row.mean_estimate),
                   format_sig6(row.bias), format_sig6(row.mean_width),
                   format_sig6(row.coverage), format_sig6(row.avg_n_lab),
                   std::to_string(row.n_failed)});
  }
  return out + table.str();
}

std::string intervals_csv(const std::vector<IntervalRow>& rows) {
  std::string out = "replicate,estimator,lower,upper,covered\n";
  for (const auto& row : rows) {
    out += std::to_string(row.replicate) + "," + to_string(row.tag) + "," +
           format_sig6(row.lower) + "," + format_sig6(row.upper) + "," +
           (row.covered ? "1" : "0") + "\n";
  }
  return out;
}

std::string intervals_table(const std::vector<IntervalRow>& rows) {
  TableWriter table({"replicate", "estimator", "lower", "upper", "covered"});
  for (const auto& row : rows) {
    table.add_row({std::to_string(row.replicate), to_string(row.tag),
                   format_sig6(row.lower), format_sig6(row.upper),
                   row.covered ? "1" : "0"});
  }
  return table.str();
}

}  // namespace ppiw
