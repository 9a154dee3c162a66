#include "heatvar/experiment.hpp"

#include <chrono>
#include <functional>
#include <map>

#include "heatvar/io.hpp"

namespace heatvar::experiment {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double number_at(const json& node, const std::string& path) {
  if (!node.is_number()) throw SpecError(path, "expected a number");
  return node.get<double>();
}

std::int64_t integer_at(const json& node, const std::string& path) {
  if (!node.is_number_integer()) throw SpecError(path, "expected an integer");
  return node.get<std::int64_t>();
}

stats::TolerancePolicy parse_tolerance(const json& spec) {
  stats::TolerancePolicy tol;
  if (!spec.contains("tolerance")) return tol;
  const auto& node = spec.at("tolerance");
  if (!node.is_object()) throw SpecError("tolerance", "expected an object");
  if (node.contains("z_threshold")) tol.z_threshold = number_at(node["z_threshold"], "tolerance.z_threshold");
  if (node.contains("ks_alpha")) tol.ks_alpha = number_at(node["ks_alpha"], "tolerance.ks_alpha");
  if (node.contains("independence_cap"))
    tol.independence_cap = number_at(node["independence_cap"], "tolerance.independence_cap");
  if (!(tol.z_threshold > 0.0)) throw SpecError("tolerance.z_threshold", "must be > 0");
  if (!(tol.ks_alpha > 0.0 && tol.ks_alpha < 1.0)) throw SpecError("tolerance.ks_alpha", "must be in (0, 1)");
  if (!(tol.independence_cap > 0.0)) throw SpecError("tolerance.independence_cap", "must be > 0");
  return tol;
}

std::vector<Variant> parse_variants(const json& study, const std::string& path) {
  std::vector<Variant> variants;
  if (study.contains("variants")) {
    const auto& node = study.at("variants");
    if (!node.is_array() || node.empty()) throw SpecError(path + ".variants", "expected a non-empty array");
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (!node[i].is_string()) throw SpecError(path + ".variants[" + std::to_string(i) + "]", "expected a string");
      try {
        variants.push_back(variant_from_string(node[i].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw SpecError(path + ".variants[" + std::to_string(i) + "]", e.what());
      }
    }
  } else if (study.contains("variant")) {
    if (!study["variant"].is_string()) throw SpecError(path + ".variant", "expected a string");
    try {
      variants.push_back(variant_from_string(study["variant"].get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw SpecError(path + ".variant", e.what());
    }
  }
  return variants;
}

std::vector<std::int64_t> parse_n_list(const json& study, const std::string& path) {
  std::vector<std::int64_t> n_list;
  if (study.contains("n_list")) {
    const auto& node = study.at("n_list");
    if (!node.is_array() || node.empty()) throw SpecError(path + ".n_list", "expected a non-empty array");
    for (std::size_t i = 0; i < node.size(); ++i)
      n_list.push_back(integer_at(node[i], path + ".n_list[" + std::to_string(i) + "]"));
  } else if (study.contains("n")) {
    n_list.push_back(integer_at(study["n"], path + ".n"));
  } else {
    throw SpecError(path, "missing grid rate: provide \"n\" or \"n_list\"");
  }
  return n_list;
}

stats::ExperimentSpec parse_study(const json& study, const std::string& path, double horizon,
                                  std::uint64_t master_seed, const stats::TolerancePolicy& tol,
                                  int threads) {
  stats::ExperimentSpec spec;
  spec.horizon = horizon;
  spec.master_seed = master_seed;
  spec.tolerance = tol;
  spec.threads = threads;
  spec.variants = parse_variants(study, path);
  spec.n_list = parse_n_list(study, path);

  if (!study.contains("replications")) throw SpecError(path + ".replications", "required");
  spec.replications = integer_at(study["replications"], path + ".replications");

  if (study.contains("time")) spec.eval_time = number_at(study["time"], path + ".time");

  if (study.contains("pairs")) {
    const auto& node = study.at("pairs");
    if (!node.is_array() || node.empty()) throw SpecError(path + ".pairs", "expected a non-empty array");
    for (std::size_t i = 0; i < node.size(); ++i) {
      const std::string ppath = path + ".pairs[" + std::to_string(i) + "]";
      if (!node[i].is_array() || node[i].size() != 2) throw SpecError(ppath, "expected [s, t]");
      spec.time_pairs.emplace_back(number_at(node[i][0], ppath + "[0]"),
                                   number_at(node[i][1], ppath + "[1]"));
    }
  }
  if (study.contains("gaps")) {
    const auto& node = study.at("gaps");
    if (!node.is_array() || node.empty()) throw SpecError(path + ".gaps", "expected a non-empty array");
    for (std::size_t i = 0; i < node.size(); ++i)
      spec.gaps.push_back(number_at(node[i], path + ".gaps[" + std::to_string(i) + "]"));
  }
  if (study.contains("probe_times")) {
    const auto& node = study.at("probe_times");
    if (!node.is_array() || node.empty())
      throw SpecError(path + ".probe_times", "expected a non-empty array");
    for (std::size_t i = 0; i < node.size(); ++i)
      spec.probe_times.push_back(number_at(node[i], path + ".probe_times[" + std::to_string(i) + "]"));
  } else {
    spec.probe_times = {0.25, 0.5, 1.0};
  }
  return spec;
}

ordered_json row_to_json(const stats::ReportRow& row) {
  ordered_json out;
  out["study"] = row.study;
  if (!row.variant.empty()) out["variant"] = row.variant;
  if (row.n > 0) out["n"] = row.n;
  out["s"] = row.s;
  out["t"] = row.t;
  out["estimate"] = row.estimate;
  out["stderr"] = row.stderr_val;
  out["target"] = row.target;
  out["z"] = row.z;
  out["pass"] = row.pass;
  for (const auto& [key, value] : row.extra) out[key] = value;
  return out;
}

}  // namespace

RunResult run_experiment(const json& spec_json, int threads_override,
                         stats::SamplerCache* shared_cache) {
  if (!spec_json.is_object()) throw SpecError("(root)", "spec must be a JSON object");
  if (spec_json.contains("schema_version") &&
      integer_at(spec_json["schema_version"], "schema_version") != 1)
    throw SpecError("schema_version", "unsupported schema version (expected 1)");
  if (!spec_json.contains("master_seed"))
    throw SpecError("master_seed", "required (stochastic runs take no silent entropy)");
  const auto master_seed =
      static_cast<std::uint64_t>(integer_at(spec_json["master_seed"], "master_seed"));

  double horizon = 1.0;
  if (spec_json.contains("horizon")) horizon = number_at(spec_json["horizon"], "horizon");
  if (!(horizon > 0.0)) throw SpecError("horizon", "must be > 0");

  int threads = 1;
  if (spec_json.contains("threads"))
    threads = static_cast<int>(integer_at(spec_json["threads"], "threads"));
  if (threads_override > 0) threads = threads_override;
  if (threads < 1) throw SpecError("threads", "must be >= 1");

  const stats::TolerancePolicy tol = parse_tolerance(spec_json);

  if (!spec_json.contains("studies") || !spec_json["studies"].is_array() ||
      spec_json["studies"].empty())
    throw SpecError("studies", "expected a non-empty array");

  stats::SamplerCache local_cache;
  stats::SamplerCache& cache = shared_cache ? *shared_cache : local_cache;

  using StudyFn = std::function<stats::StudyReport(const stats::ExperimentSpec&, stats::SamplerCache&)>;
  static const std::map<std::string, StudyFn> kStudies = {
      {"second_moment", stats::second_moment_study},
      {"fourth_moment_scaling", stats::fourth_moment_scaling},
      {"normality", stats::normality_study},
      {"independence", stats::independence_study},
      {"cubic_decay", stats::cubic_decay_study},
      {"quartic_convergence", stats::quartic_convergence_study},
      {"sampler_law", stats::sampler_law_study},
  };

  const auto start = std::chrono::steady_clock::now();
  std::vector<stats::StudyReport> reports;
  const auto& studies = spec_json["studies"];
  for (std::size_t i = 0; i < studies.size(); ++i) {
    const std::string path = "studies[" + std::to_string(i) + "]";
    const auto& study = studies[i];
    if (!study.is_object()) throw SpecError(path, "expected an object");
    if (!study.contains("type") || !study["type"].is_string())
      throw SpecError(path + ".type", "required string");
    const std::string type = study["type"].get<std::string>();
    const auto it = kStudies.find(type);
    if (it == kStudies.end()) throw SpecError(path + ".type", "unknown study type '" + type + "'");

    const auto spec = parse_study(study, path, horizon, master_seed, tol, threads);
    stats::StudyReport report;
    try {
      report = it->second(spec, cache);
    } catch (const std::invalid_argument& e) {
      throw SpecError(path, e.what());
    }
    report.type = type;
    report.name = study.contains("name") && study["name"].is_string()
                      ? study["name"].get<std::string>()
                      : type + "#" + std::to_string(i);
    reports.push_back(std::move(report));
  }
  const double total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  RunResult result;
  result.all_pass = true;
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["generator"] = {{"name", "heatvar"}, {"version", "0.1.0"}};
  doc["master_seed"] = master_seed;
  doc["horizon"] = horizon;
  ordered_json study_docs = ordered_json::array();
  ordered_json timing;
  for (const auto& report : reports) {
    ordered_json sdoc;
    sdoc["name"] = report.name;
    sdoc["type"] = report.type;
    sdoc["pass"] = report.pass;
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) rows.push_back(row_to_json(row));
    sdoc["rows"] = std::move(rows);
    study_docs.push_back(std::move(sdoc));
    timing[report.name] = report.wall_ms;
    result.all_pass = result.all_pass && report.pass;
  }
  doc["all_pass"] = result.all_pass;
  doc["studies"] = std::move(study_docs);

  ordered_json factorizations = ordered_json::array();
  for (const auto& info : cache.factorizations()) {
    ordered_json f;
    f["n"] = info.n;
    f["horizon"] = info.horizon;
    f["size"] = info.size;
    f["jitter_applied"] = info.jitter_applied;
    f["jitter_delta"] = info.jitter_delta;
    factorizations.push_back(std::move(f));
  }
  doc["factorizations"] = std::move(factorizations);

  // execution telemetry lives in one subtree so determinism comparisons can
  // drop it wholesale; thread count never changes the numbers
  timing["threads"] = threads;
  timing["total_ms"] = total_ms;
  doc["timing"] = std::move(timing);
  result.report = std::move(doc);
  return result;
}

ordered_json strip_timing(const ordered_json& report) {
  ordered_json out = report;
  out.erase("timing");
  return out;
}

std::string report_to_csv(const ordered_json& report) {
  std::string csv = "study,variant,n,s,t,estimate,stderr,target,z,pass\n";
  for (const auto& study : report.at("studies")) {
    for (const auto& row : study.at("rows")) {
      csv += row.at("study").get<std::string>();
      csv += ',';
      csv += row.contains("variant") ? row.at("variant").get<std::string>() : "";
      csv += ',';
      csv += row.contains("n") ? std::to_string(row.at("n").get<std::int64_t>()) : "";
      csv += ',';
      csv += format_g17(row.at("s").get<double>());
      csv += ',';
      csv += format_g17(row.at("t").get<double>());
      csv += ',';
      csv += format_g17(row.at("estimate").get<double>());
      csv += ',';
      csv += format_g17(row.at("stderr").get<double>());
      csv += ',';
      csv += format_g17(row.at("target").get<double>());
      csv += ',';
      csv += format_g17(row.at("z").get<double>());
      csv += ',';
      csv += row.at("pass").get<bool>() ? "1" : "0";
      csv += '\n';
    }
  }
  return csv;
}

}  // namespace heatvar::experiment
