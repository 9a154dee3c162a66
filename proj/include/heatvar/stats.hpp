#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heatvar/sampler.hpp"
#include "heatvar/variant.hpp"

namespace heatvar::stats {

struct TolerancePolicy {
  double z_threshold = 3.0;
  double ks_alpha = 0.01;
  double independence_cap = 0.1;
};

/// One Monte Carlo experiment request. Studies read the fields they need.
struct ExperimentSpec {
  std::vector<Variant> variants;
  std::vector<std::int64_t> n_list;
  double horizon = 1.0;
  std::vector<std::pair<double, double>> time_pairs;  ///< (s, t) for moment studies
  std::vector<double> gaps;                           ///< fourth-moment scaling
  std::vector<double> probe_times;                    ///< independence probe
  double eval_time = 1.0;                             ///< functional query time
  std::int64_t replications = 0;
  std::uint64_t master_seed = 0;
  TolerancePolicy tolerance;
  int threads = 1;
};

struct ReportRow {
  std::string study;
  std::string variant;
  std::int64_t n = 0;
  double s = 0.0;
  double t = 0.0;
  double estimate = 0.0;
  double stderr_val = 0.0;
  double target = 0.0;
  double z = 0.0;
  bool pass = true;
  std::vector<std::pair<std::string, double>> extra;
};

struct StudyReport {
  std::string name;
  std::string type;
  std::vector<ReportRow> rows;
  bool pass = true;
  double wall_ms = 0.0;
};

/// Shares one Cholesky factor per (n, horizon) across studies; the O(N^3)
/// factorization dominates everything else at experiment scale.
class SamplerCache {
 public:
  std::shared_ptr<const sampler::Factor> get(std::int64_t n, double horizon);

  struct FactorInfo {
    std::int64_t n;
    double horizon;
    std::int64_t size;
    bool jitter_applied;
    double jitter_delta;
  };
  std::vector<FactorInfo> factorizations() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::int64_t, double>, std::shared_ptr<const sampler::Factor>> cache_;
};

// --- deterministic sample statistics (index-ordered compensated reductions) ---

double mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);        ///< divisor M-1
double skewness(std::span<const double> xs);         ///< population moments
double excess_kurtosis(std::span<const double> xs);  ///< population moments
double correlation(std::span<const double> a, std::span<const double> b);

// --- statistical tests ---

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  bool pass = false;
};

/// Two-sided Kolmogorov-Smirnov test of the samples against N(0, target_variance).
KsResult normality_test(std::span<const double> samples, double target_variance, double alpha);

/// Survival function of the Kolmogorov distribution at lambda.
double kolmogorov_q(double lambda);

/// One replication's inputs for the linear-correlation independence probe.
struct ProbeSample {
  std::vector<double> f;  ///< F at the probe times, one entry per probe
  double b = 0.0;         ///< the functional value
};

struct IndependenceResult {
  std::vector<double> correlations;  ///< one per probe time
  double threshold = 0.0;            ///< max(cap, 4/sqrt(M))
  bool pass = false;
};

/// Sample correlation between the functional and F at each probe time.
/// Detects linear dependence only.
IndependenceResult independence_probe(std::span<const ProbeSample> pairs, double cap);

// --- Monte Carlo studies ---

StudyReport second_moment_study(const ExperimentSpec& spec, SamplerCache& cache);
StudyReport fourth_moment_scaling(const ExperimentSpec& spec, SamplerCache& cache);
StudyReport normality_study(const ExperimentSpec& spec, SamplerCache& cache);
StudyReport independence_study(const ExperimentSpec& spec, SamplerCache& cache);
StudyReport cubic_decay_study(const ExperimentSpec& spec, SamplerCache& cache);
StudyReport quartic_convergence_study(const ExperimentSpec& spec, SamplerCache& cache);
StudyReport sampler_law_study(const ExperimentSpec& spec, SamplerCache& cache);

}  // namespace heatvar::stats
