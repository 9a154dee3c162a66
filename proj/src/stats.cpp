#include "heatvar/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heatvar/kernel.hpp"
#include "heatvar/parallel.hpp"
#include "heatvar/partition.hpp"
#include "heatvar/summation.hpp"
#include "heatvar/variations.hpp"

namespace heatvar::stats {

namespace {

constexpr double kPi = std::numbers::pi;

class StudyTimer {
 public:
  StudyTimer() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(now - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void validate_common(const ExperimentSpec& spec, std::int64_t min_reps) {
  require(!spec.n_list.empty(), "spec: n_list must not be empty");
  for (auto n : spec.n_list) require(n >= 2, "spec: every n must be >= 2");
  require(spec.horizon > 0.0, "spec: horizon must be > 0");
  require(spec.replications >= min_reps,
          "spec: replications must be >= " + std::to_string(min_reps));
  require(spec.threads >= 1, "spec: threads must be >= 1");
  for (const auto& [s, t] : spec.time_pairs) {
    require(s >= 0.0 && s <= t && t <= spec.horizon,
            "spec: time pairs must satisfy 0 <= s <= t <= horizon");
  }
}

double kappa_sq_target(Variant v) { return kernel::kappa_sq(v, 1e-12).kappa_sq; }

// Runs fn(r, path) for every replication, path r drawn from its own stream.
template <typename Fn>
void for_each_path(const sampler::Factor& factor, const SeedSpec& seeds, std::int64_t reps,
                   int threads, Fn&& fn) {
  parallel_for_index(reps, threads, [&](std::int64_t r) {
    auto stream = seeds.stream(StreamKind::Path, static_cast<std::uint64_t>(r));
    const auto path = sampler::sample_path(factor, stream);
    fn(r, path);
  });
}

variations::HFamily family_for(Variant v, const SeedSpec& seeds, std::int64_t replication,
                               std::int64_t segments) {
  if (v == Variant::RademacherSquares)
    return variations::HFamily::rademacher(static_cast<std::size_t>(segments), seeds,
                                           static_cast<std::uint64_t>(replication));
  return variations::HFamily::of(v);
}

ReportRow z_row(std::string study, std::string variant, std::int64_t n, double s, double t,
                double estimate, double stderr_val, double target, double z_threshold) {
  ReportRow row;
  row.study = std::move(study);
  row.variant = std::move(variant);
  row.n = n;
  row.s = s;
  row.t = t;
  row.estimate = estimate;
  row.stderr_val = stderr_val;
  row.target = target;
  if (stderr_val > 0.0) {
    row.z = (estimate - target) / stderr_val;
    row.pass = std::abs(row.z) <= z_threshold;
  } else {
    row.z = 0.0;
    row.pass = estimate == target;
  }
  return row;
}

struct SlopeFit {
  double slope = 0.0;
  double stderr_val = 0.0;
};

// OLS slope of y on x with per-point standard errors propagated into the
// slope uncertainty.
SlopeFit fit_slope(std::span<const double> x, std::span<const double> y,
                   std::span<const double> y_se) {
  const double xbar = mean(x);
  double sxx = 0.0;
  for (double xi : x) sxx += (xi - xbar) * (xi - xbar);
  SlopeFit fit;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = (x[i] - xbar) / sxx;
    fit.slope += c * y[i];
    var += c * c * y_se[i] * y_se[i];
  }
  fit.stderr_val = std::sqrt(var);
  return fit;
}

}  // namespace

std::shared_ptr<const sampler::Factor> SamplerCache::get(std::int64_t n, double horizon) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_pair(n, horizon);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    const auto cov = sampler::build_increment_covariance(n, horizon);
    auto factor = std::make_shared<sampler::Factor>(sampler::factorize(cov));
    it = cache_.emplace(key, std::move(factor)).first;
  }
  return it->second;
}

std::vector<SamplerCache::FactorInfo> SamplerCache::factorizations() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<FactorInfo> out;
  out.reserve(cache_.size());
  for (const auto& [key, factor] : cache_) {
    out.push_back({key.first, key.second, factor->size(), factor->jitter_applied,
                   factor->jitter_delta});
  }
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  return compensated_total(xs) / static_cast<double>(xs.size());
}

namespace {

double central_moment(std::span<const double> xs, double mu, int order) {
  CompensatedSum acc;
  for (double x : xs) {
    double d = x - mu, p = d;
    for (int k = 1; k < order; ++k) p *= d;
    acc.add(p);
  }
  return acc.value() / static_cast<double>(xs.size());
}

}  // namespace

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_sd: need at least 2 samples");
  const double mu = mean(xs);
  CompensatedSum acc;
  for (double x : xs) acc.add((x - mu) * (x - mu));
  return std::sqrt(acc.value() / static_cast<double>(xs.size() - 1));
}

double skewness(std::span<const double> xs) {
  const double mu = mean(xs);
  const double m2 = central_moment(xs, mu, 2);
  return central_moment(xs, mu, 3) / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> xs) {
  const double mu = mean(xs);
  const double m2 = central_moment(xs, mu, 2);
  return central_moment(xs, mu, 4) / (m2 * m2) - 3.0;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("correlation: mismatched or too-short samples");
  const double ma = mean(a), mb = mean(b);
  CompensatedSum sab, saa, sbb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab.add(da * db);
    saa.add(da * da);
    sbb.add(db * db);
  }
  return sab.value() / std::sqrt(saa.value() * sbb.value());
}

double kolmogorov_q(double lambda) {
  if (lambda <= 1e-10) return 1.0;
  CompensatedSum sum;
  for (int k = 1; k <= 101; ++k) {
    const double kd = static_cast<double>(k);
    const double term = 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * kd * kd * lambda * lambda);
    sum.add(term);
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(sum.value(), 0.0, 1.0);
}

KsResult normality_test(std::span<const double> samples, double target_variance, double alpha) {
  if (samples.size() < 200) throw std::invalid_argument("normality_test: need >= 200 samples");
  if (!(target_variance > 0.0))
    throw std::invalid_argument("normality_test: target variance must be > 0");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(target_variance);
  const double count = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sorted[i] / (sd * std::numbers::sqrt2));
    const double lo = static_cast<double>(i) / count;
    const double hi = static_cast<double>(i + 1) / count;
    d = std::max({d, cdf - lo, hi - cdf});
  }
  const double root = std::sqrt(count);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  KsResult result;
  result.statistic = d;
  result.p_value = kolmogorov_q(lambda);
  result.pass = result.p_value >= alpha;
  return result;
}

IndependenceResult independence_probe(std::span<const ProbeSample> pairs, double cap) {
  if (pairs.size() < 500) throw std::invalid_argument("independence_probe: need >= 500 pairs");
  const std::size_t probes = pairs.front().f.size();
  for (const auto& p : pairs)
    if (p.f.size() != probes)
      throw std::invalid_argument("independence_probe: mismatched F-value lengths");
  if (probes == 0) throw std::invalid_argument("independence_probe: no probe values");

  std::vector<double> b(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) b[i] = pairs[i].b;

  IndependenceResult result;
  result.threshold = std::max(cap, 4.0 / std::sqrt(static_cast<double>(pairs.size())));
  result.pass = true;
  std::vector<double> f(pairs.size());
  for (std::size_t k = 0; k < probes; ++k) {
    for (std::size_t i = 0; i < pairs.size(); ++i) f[i] = pairs[i].f[k];
    const double corr = correlation(f, b);
    result.correlations.push_back(corr);
    result.pass = result.pass && std::abs(corr) <= result.threshold;
  }
  return result;
}

StudyReport second_moment_study(const ExperimentSpec& spec, SamplerCache& cache) {
  StudyTimer timer;
  validate_common(spec, 30);
  require(!spec.variants.empty(), "spec: variants must not be empty");
  require(!spec.time_pairs.empty(), "spec: time pairs must not be empty");

  StudyReport report;
  report.type = "second_moment";
  const SeedSpec seeds{spec.master_seed};
  const auto m = static_cast<std::size_t>(spec.replications);

  for (auto n : spec.n_list) {
    const auto factor = cache.get(n, spec.horizon);
    // d_sq[variant][pair][r]
    std::vector<std::vector<std::vector<double>>> d_sq(
        spec.variants.size(),
        std::vector<std::vector<double>>(spec.time_pairs.size(), std::vector<double>(m)));

    for_each_path(*factor, seeds, spec.replications, spec.threads,
                  [&](std::int64_t r, const sampler::PathSample& path) {
                    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
                      const auto family =
                          family_for(spec.variants[v], seeds, r, path.segments());
                      const auto series = variations::b_n(path, family);
                      for (std::size_t p = 0; p < spec.time_pairs.size(); ++p) {
                        const auto& [s, t] = spec.time_pairs[p];
                        const double d = series.value(t) - series.value(s);
                        d_sq[v][p][static_cast<std::size_t>(r)] = d * d;
                      }
                    }
                  });

    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
      const double ks = kappa_sq_target(spec.variants[v]);
      for (std::size_t p = 0; p < spec.time_pairs.size(); ++p) {
        const auto& [s, t] = spec.time_pairs[p];
        const auto& samples = d_sq[v][p];
        const double est = mean(samples);
        const double se = samples.size() > 1
                              ? sample_sd(samples) / std::sqrt(static_cast<double>(samples.size()))
                              : 0.0;
        report.rows.push_back(z_row("second_moment", to_string(spec.variants[v]), n, s, t, est,
                                    se, ks * (t - s), spec.tolerance.z_threshold));
      }
    }
  }
  report.pass = std::all_of(report.rows.begin(), report.rows.end(),
                            [](const ReportRow& r) { return r.pass; });
  report.wall_ms = timer.elapsed_ms();
  return report;
}

StudyReport fourth_moment_scaling(const ExperimentSpec& spec, SamplerCache& cache) {
  StudyTimer timer;
  validate_common(spec, 30);
  require(!spec.variants.empty(), "spec: variants must not be empty");
  std::vector<double> gaps = spec.gaps;
  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
  require(gaps.size() >= 3, "spec: fourth-moment scaling needs >= 3 distinct gaps");
  for (double g : gaps) require(g > 0.0 && g <= spec.horizon, "spec: gaps must lie in (0, horizon]");

  StudyReport report;
  report.type = "fourth_moment_scaling";
  const SeedSpec seeds{spec.master_seed};
  const Variant variant = spec.variants.front();
  const std::int64_t n = spec.n_list.front();
  const auto factor = cache.get(n, spec.horizon);
  const auto m = static_cast<std::size_t>(spec.replications);

  std::vector<std::vector<double>> d4(gaps.size(), std::vector<double>(m));
  for_each_path(*factor, seeds, spec.replications, spec.threads,
                [&](std::int64_t r, const sampler::PathSample& path) {
                  const auto family = family_for(variant, seeds, r, path.segments());
                  const auto series = variations::b_n(path, family);
                  for (std::size_t g = 0; g < gaps.size(); ++g) {
                    const double d = series.value(gaps[g]);
                    d4[g][static_cast<std::size_t>(r)] = d * d * d * d;
                  }
                });

  std::vector<double> log_gap(gaps.size()), log_est(gaps.size()), log_se(gaps.size());
  for (std::size_t g = 0; g < gaps.size(); ++g) {
    const double est = mean(d4[g]);
    const double se = sample_sd(d4[g]) / std::sqrt(static_cast<double>(m));
    ReportRow row;
    row.study = "fourth_moment_scaling";
    row.variant = to_string(variant);
    row.n = n;
    row.s = 0.0;
    row.t = gaps[g];
    row.estimate = est;
    row.stderr_val = se;
    row.target = 0.0;
    row.z = 0.0;
    row.pass = true;
    report.rows.push_back(row);
    log_gap[g] = std::log(gaps[g]);
    log_est[g] = std::log(est);
    log_se[g] = se / est;
  }

  const SlopeFit fit = fit_slope(log_gap, log_est, log_se);
  ReportRow slope_row;
  slope_row.study = "fourth_moment_scaling";
  slope_row.variant = to_string(variant);
  slope_row.n = n;
  slope_row.estimate = fit.slope;
  slope_row.stderr_val = fit.stderr_val;
  slope_row.target = 2.0;
  slope_row.z = fit.stderr_val > 0.0 ? (fit.slope - 2.0) / fit.stderr_val : 0.0;
  slope_row.pass = fit.slope >= 1.7 && fit.slope <= 2.3;
  slope_row.extra.emplace_back("slope", fit.slope);
  report.rows.push_back(slope_row);

  report.pass = std::all_of(report.rows.begin(), report.rows.end(),
                            [](const ReportRow& r) { return r.pass; });
  report.wall_ms = timer.elapsed_ms();
  return report;
}

StudyReport normality_study(const ExperimentSpec& spec, SamplerCache& cache) {
  StudyTimer timer;
  validate_common(spec, 200);
  require(!spec.variants.empty(), "spec: variants must not be empty");
  require(spec.eval_time > 0.0 && spec.eval_time <= spec.horizon,
          "spec: eval time must lie in (0, horizon]");

  StudyReport report;
  report.type = "normality";
  const SeedSpec seeds{spec.master_seed};
  const auto m = static_cast<std::size_t>(spec.replications);

  for (auto n : spec.n_list) {
    const auto factor = cache.get(n, spec.horizon);
    std::vector<std::vector<double>> samples(spec.variants.size(), std::vector<double>(m));
    for_each_path(*factor, seeds, spec.replications, spec.threads,
                  [&](std::int64_t r, const sampler::PathSample& path) {
                    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
                      const auto family =
                          family_for(spec.variants[v], seeds, r, path.segments());
                      const auto series = variations::b_n(path, family);
                      samples[v][static_cast<std::size_t>(r)] = series.value(spec.eval_time);
                    }
                  });
    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
      const double target_var = kappa_sq_target(spec.variants[v]) * spec.eval_time;
      const KsResult ks = normality_test(samples[v], target_var, spec.tolerance.ks_alpha);
      ReportRow row;
      row.study = "normality";
      row.variant = to_string(spec.variants[v]);
      row.n = n;
      row.t = spec.eval_time;
      row.estimate = ks.statistic;
      row.target = target_var;
      row.pass = ks.pass;
      row.extra.emplace_back("p_value", ks.p_value);
      row.extra.emplace_back("alpha", spec.tolerance.ks_alpha);
      report.rows.push_back(row);
    }
  }
  report.pass = std::all_of(report.rows.begin(), report.rows.end(),
                            [](const ReportRow& r) { return r.pass; });
  report.wall_ms = timer.elapsed_ms();
  return report;
}

StudyReport independence_study(const ExperimentSpec& spec, SamplerCache& cache) {
  StudyTimer timer;
  validate_common(spec, 500);
  require(!spec.variants.empty(), "spec: variants must not be empty");
  require(!spec.probe_times.empty(), "spec: probe times must not be empty");
  for (double r : spec.probe_times)
    require(r > 0.0 && r <= spec.horizon, "spec: probe times must lie in (0, horizon]");

  StudyReport report;
  report.type = "independence";
  const SeedSpec seeds{spec.master_seed};
  const auto m = static_cast<std::size_t>(spec.replications);

  for (auto n : spec.n_list) {
    const auto factor = cache.get(n, spec.horizon);
    std::vector<std::vector<ProbeSample>> probes(spec.variants.size(),
                                                 std::vector<ProbeSample>(m));
    for_each_path(*factor, seeds, spec.replications, spec.threads,
                  [&](std::int64_t r, const sampler::PathSample& path) {
                    std::vector<double> f_values(spec.probe_times.size());
                    for (std::size_t k = 0; k < spec.probe_times.size(); ++k) {
                      const auto idx = grid_index(n, spec.probe_times[k]);
                      f_values[k] = path.cumulative[static_cast<std::size_t>(idx)];
                    }
                    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
                      const auto family =
                          family_for(spec.variants[v], seeds, r, path.segments());
                      const auto series = variations::b_n(path, family);
                      auto& slot = probes[v][static_cast<std::size_t>(r)];
                      slot.f = f_values;
                      slot.b = series.value(spec.eval_time);
                    }
                  });
    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
      const auto result = independence_probe(probes[v], spec.tolerance.independence_cap);
      for (std::size_t k = 0; k < spec.probe_times.size(); ++k) {
        ReportRow row;
        row.study = "independence";
        row.variant = to_string(spec.variants[v]);
        row.n = n;
        row.s = spec.probe_times[k];
        row.t = spec.eval_time;
        row.estimate = result.correlations[k];
        row.stderr_val = 1.0 / std::sqrt(static_cast<double>(m));
        row.target = 0.0;
        row.z = result.correlations[k] * std::sqrt(static_cast<double>(m));
        row.pass = std::abs(result.correlations[k]) <= result.threshold;
        row.extra.emplace_back("threshold", result.threshold);
        report.rows.push_back(row);
      }
    }
  }
  report.pass = std::all_of(report.rows.begin(), report.rows.end(),
                            [](const ReportRow& r) { return r.pass; });
  report.wall_ms = timer.elapsed_ms();
  return report;
}

StudyReport cubic_decay_study(const ExperimentSpec& spec, SamplerCache& cache) {
  StudyTimer timer;
  validate_common(spec, 30);
  require(spec.n_list.size() >= 3, "spec: cubic decay needs >= 3 grid rates");
  const auto [min_it, max_it] = std::minmax_element(spec.n_list.begin(), spec.n_list.end());
  require(*max_it >= 16 * *min_it, "spec: cubic decay needs n values spanning >= 16x");
  require(spec.eval_time > 0.0 && spec.eval_time <= spec.horizon,
          "spec: eval time must lie in (0, horizon]");

  StudyReport report;
  report.type = "cubic_decay";
  const SeedSpec seeds{spec.master_seed};
  const auto m = static_cast<std::size_t>(spec.replications);

  std::vector<double> log_n, log_est, log_se;
  for (auto n : spec.n_list) {
    const auto factor = cache.get(n, spec.horizon);
    std::vector<double> z_values(m);
    for_each_path(*factor, seeds, spec.replications, spec.threads,
                  [&](std::int64_t r, const sampler::PathSample& path) {
                    const auto series = variations::signed_cubic(path);
                    z_values[static_cast<std::size_t>(r)] = series.value(spec.eval_time);
                  });
    std::vector<double> z_sq(m);
    for (std::size_t i = 0; i < m; ++i) z_sq[i] = z_values[i] * z_values[i];

    const double est = mean(z_sq);
    const double se = sample_sd(z_sq) / std::sqrt(static_cast<double>(m));
    ReportRow row;
    row.study = "cubic_decay";
    row.n = n;
    row.t = spec.eval_time;
    row.estimate = est;
    row.stderr_val = se;
    report.rows.push_back(row);
    log_n.push_back(std::log(static_cast<double>(n)));
    log_est.push_back(std::log(est));
    log_se.push_back(se / est);

    const double mean_z = mean(z_values);
    const double se_mean = sample_sd(z_values) / std::sqrt(static_cast<double>(m));
    ReportRow mean_row = z_row("cubic_decay_mean", "", n, 0.0, spec.eval_time, mean_z, se_mean,
                               0.0, 4.0);
    report.rows.push_back(mean_row);
  }

  const SlopeFit fit = fit_slope(log_n, log_est, log_se);
  ReportRow slope_row;
  slope_row.study = "cubic_decay";
  slope_row.estimate = fit.slope;
  slope_row.stderr_val = fit.stderr_val;
  slope_row.target = -0.5;
  slope_row.z = fit.stderr_val > 0.0 ? (fit.slope + 0.5) / fit.stderr_val : 0.0;
  slope_row.pass = fit.slope >= -0.65 && fit.slope <= -0.35;
  slope_row.extra.emplace_back("slope", fit.slope);
  report.rows.push_back(slope_row);

  report.pass = std::all_of(report.rows.begin(), report.rows.end(),
                            [](const ReportRow& r) { return r.pass; });
  report.wall_ms = timer.elapsed_ms();
  return report;
}

StudyReport quartic_convergence_study(const ExperimentSpec& spec, SamplerCache& cache) {
  StudyTimer timer;
  validate_common(spec, 30);
  require(spec.n_list.size() >= 3, "spec: quartic convergence needs >= 3 grid rates");

  StudyReport report;
  report.type = "quartic_convergence";
  const SeedSpec seeds{spec.master_seed};
  const auto m = static_cast<std::size_t>(spec.replications);
  const double target = 6.0 / kPi;

  std::vector<double> sup_est, sup_se;
  std::vector<double> v1_at_max_n;
  const std::int64_t max_n = *std::max_element(spec.n_list.begin(), spec.n_list.end());

  for (auto n : spec.n_list) {
    const auto factor = cache.get(n, spec.horizon);
    const auto partition = Partition::uniform(n, spec.horizon);
    std::vector<double> sup_sq(m);
    std::vector<double> v_end(m);
    for_each_path(*factor, seeds, spec.replications, spec.threads,
                  [&](std::int64_t r, const sampler::PathSample& path) {
                    const auto series = variations::quartic_variation(path, partition);
                    double sup = 0.0;
                    for (std::size_t k = 0; k < series.knots.size(); ++k)
                      sup = std::max(sup,
                                     std::abs(series.values[k] - target * series.knots[k]));
                    sup_sq[static_cast<std::size_t>(r)] = sup * sup;
                    v_end[static_cast<std::size_t>(r)] = series.value(spec.eval_time);
                  });
    const double est = mean(sup_sq);
    const double se = sample_sd(sup_sq) / std::sqrt(static_cast<double>(m));
    ReportRow row;
    row.study = "quartic_convergence";
    row.n = n;
    row.t = spec.horizon;
    row.estimate = est;
    row.stderr_val = se;
    report.rows.push_back(row);
    sup_est.push_back(est);
    sup_se.push_back(se);
    if (n == max_n) v1_at_max_n = v_end;
  }

  // Strictly decreasing sup-discrepancy, allowing one inversion within 1
  // combined stderr.
  int inversions = 0;
  bool decreasing_ok = true;
  for (std::size_t i = 1; i < sup_est.size(); ++i) {
    if (sup_est[i] < sup_est[i - 1]) continue;
    ++inversions;
    const double slack = std::hypot(sup_se[i], sup_se[i - 1]);
    if (inversions > 1 || sup_est[i] - sup_est[i - 1] > slack) decreasing_ok = false;
  }
  ReportRow trend_row;
  trend_row.study = "quartic_convergence_trend";
  trend_row.estimate = static_cast<double>(inversions);
  trend_row.pass = decreasing_ok;
  report.rows.push_back(trend_row);

  const double v_mean = mean(v1_at_max_n);
  const double v_se = sample_sd(v1_at_max_n) / std::sqrt(static_cast<double>(m));
  report.rows.push_back(z_row("quartic_mean", "", max_n, 0.0, spec.eval_time, v_mean, v_se,
                              target * spec.eval_time, spec.tolerance.z_threshold));

  report.pass = std::all_of(report.rows.begin(), report.rows.end(),
                            [](const ReportRow& r) { return r.pass; });
  report.wall_ms = timer.elapsed_ms();
  return report;
}

StudyReport sampler_law_study(const ExperimentSpec& spec, SamplerCache& cache) {
  StudyTimer timer;
  validate_common(spec, 1000);

  StudyReport report;
  report.type = "sampler_law";
  const SeedSpec seeds{spec.master_seed};
  const std::int64_t n = spec.n_list.front();
  const auto factor = cache.get(n, spec.horizon);
  const auto segments = static_cast<std::size_t>(factor->size());
  const auto m = static_cast<std::size_t>(spec.replications);
  const double dt = factor->dt;

  // Store every replication's path so all reductions run serially afterwards.
  std::vector<std::vector<double>> f_values(m), incr(m);
  for_each_path(*factor, seeds, spec.replications, spec.threads,
                [&](std::int64_t r, const sampler::PathSample& path) {
                  f_values[static_cast<std::size_t>(r)] =
                      std::vector<double>(path.cumulative.begin() + 1, path.cumulative.end());
                  incr[static_cast<std::size_t>(r)] = path.increments;
                });

  std::vector<double> products(m);
  const auto product_row = [&](const char* study, std::size_t i, std::size_t j, double target,
                               const std::vector<std::vector<double>>& source) {
    for (std::size_t r = 0; r < m; ++r) products[r] = source[r][i] * source[r][j];
    const double est = mean(products);
    const double se = sample_sd(products) / std::sqrt(static_cast<double>(m));
    return z_row(study, "", n, static_cast<double>(i + 1) * dt, static_cast<double>(j + 1) * dt,
                 est, se, target, 4.0);
  };

  for (std::size_t i = 0; i < segments; ++i) {
    const double ti = static_cast<double>(i + 1) * dt;
    for (std::size_t j = i; j < segments; ++j) {
      const double tj = static_cast<double>(j + 1) * dt;
      report.rows.push_back(product_row("path_cov", i, j, kernel::cov_f(ti, tj), f_values));
      report.rows.push_back(product_row(
          "increment_cov", i, j,
          kernel::uniform_increment_cov(static_cast<std::int64_t>(i) + 1,
                                        static_cast<std::int64_t>(j) + 1, dt),
          incr));
    }
  }

  // Standardized increments: skewness/kurtosis gates per grid cell.
  std::vector<double> standardized(m);
  for (std::size_t j = 0; j < segments; ++j) {
    const double sigma = (*factor->sigma)(static_cast<Eigen::Index>(j));
    for (std::size_t r = 0; r < m; ++r) standardized[r] = incr[r][j] / sigma;
    const double skew = skewness(standardized);
    const double kurt = excess_kurtosis(standardized);
    ReportRow srow;
    srow.study = "standardized_skewness";
    srow.n = n;
    srow.t = static_cast<double>(j + 1) * dt;
    srow.estimate = skew;
    srow.pass = std::abs(skew) < 0.05;
    report.rows.push_back(srow);
    ReportRow krow;
    krow.study = "standardized_excess_kurtosis";
    krow.n = n;
    krow.t = static_cast<double>(j + 1) * dt;
    krow.estimate = kurt;
    krow.pass = std::abs(kurt) < 0.1;
    report.rows.push_back(krow);
  }

  report.pass = std::all_of(report.rows.begin(), report.rows.end(),
                            [](const ReportRow& r) { return r.pass; });
  report.wall_ms = timer.elapsed_ms();
  return report;
}

}  // namespace heatvar::stats
