#include "sepcov/power_study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sepcov/separability_test.hpp"

namespace sepcov {

namespace {

using nlohmann::json;

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

std::string family_name(ModelFamily f) {
  return f == ModelFamily::Gneiting ? "gneiting" : "cressie_huang";
}

void StudyConfig::validate() const {
  if (params.empty()) throw InputError("config: params must be non-empty");
  if (sample_sizes.empty()) throw InputError("config: sample_sizes must be non-empty");
  if (kernels.empty()) throw InputError("config: kernels must be non-empty");
  if (!(alpha > 0 && alpha < 1)) throw InputError("config: alpha must lie in (0, 1)");
  if (replications < 1) throw InputError("config: replications must be at least 1");
  for (auto n : sample_sizes)
    if (n < 3) throw InputError("config: every sample size must be at least 3");
  for (double v : params) sepcov::validate(model_for(v));
  (void)grid();
}

CovModel StudyConfig::model_for(double param) const {
  if (family == ModelFamily::Gneiting) {
    Gneiting g = gneiting;
    g.beta = param;
    return g;
  }
  CressieHuang ch = cressie_huang;
  ch.c0 = param;
  return ch;
}

Grid<double> StudyConfig::grid() const {
  return Grid<double>(unit_time_points<double>(time_points), unit_lattice<double>(space_lattice));
}

StudyConfig parse_study_config(const std::string& json_text) {
  StudyConfig cfg;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: invalid JSON: ") + e.what());
  }
  static const char* known[] = {"family", "params", "sample_sizes", "kernels", "alpha", "replications",
                                "seed", "grid", "model"};
  try {
    if (!j.is_object()) throw InputError("config: top level must be an object");
    for (const auto& [key, _] : j.items()) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) throw InputError("config: unknown key '" + key + "'");
    }
    const auto family = j.at("family").get<std::string>();
    if (family == "gneiting")
      cfg.family = ModelFamily::Gneiting;
    else if (family == "cressie_huang" || family == "ch")
      cfg.family = ModelFamily::CressieHuang;
    else
      throw InputError("config: unknown family '" + family + "'");
    cfg.params = j.at("params").get<std::vector<double>>();
    cfg.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
    cfg.kernels.clear();
    for (const auto& name : get_or<std::vector<std::string>>(j, "kernels", {"const"})) {
      const auto kind = parse_kernel(name);
      if (!kind) throw InputError("config: unknown kernel '" + name + "'");
      cfg.kernels.push_back(*kind);
    }
    cfg.alpha = get_or(j, "alpha", 0.05);
    cfg.replications = j.at("replications").get<std::size_t>();
    cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      cfg.time_points = get_or<Eigen::Index>(g, "time_points", 20);
      cfg.space_lattice = get_or<std::vector<int>>(g, "space_lattice", {3, 3});
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      auto& g = cfg.gneiting;
      auto& ch = cfg.cressie_huang;
      if (cfg.family == ModelFamily::Gneiting) {
        g.sigma2 = get_or(m, "sigma2", g.sigma2);
        g.a = get_or(m, "a", g.a);
        g.c = get_or(m, "c", g.c);
        g.alpha = get_or(m, "alpha", g.alpha);
        g.gamma = get_or(m, "gamma", g.gamma);
        g.tau = get_or(m, "tau", g.tau);
        g.d = get_or(m, "d", g.d);
      } else {
        ch.sigma2 = get_or(m, "sigma2", ch.sigma2);
        ch.a0 = get_or(m, "a0", ch.a0);
        ch.b0 = get_or(m, "b0", ch.b0);
        ch.d = get_or(m, "d", ch.d);
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: schema violation: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

StudyResult run_power_study(const StudyConfig& cfg, unsigned workers, bool collect_z) {
  cfg.validate();
  const Grid<double> grid = cfg.grid();

  std::vector<GaussianSampler> samplers;
  samplers.reserve(cfg.params.size());
  for (double v : cfg.params) samplers.emplace_back(cfg.model_for(v), grid);
  std::vector<DeltaKernel<double>> deltas;
  for (auto k : cfg.kernels) deltas.push_back(delta_matrix(k, grid));

  const std::size_t per_param = cfg.sample_sizes.size() * cfg.kernels.size();
  return detail::run_cells(cfg, workers, collect_z, [&](std::size_t cell_id, std::uint64_t seed) {
    const std::size_t param_idx = cell_id / per_param;
    const std::size_t n = cfg.sample_sizes[(cell_id % per_param) / cfg.kernels.size()];
    const std::size_t kernel_idx = cell_id % cfg.kernels.size();
    const auto sample = samplers[param_idx].sample(n, seed);
    const auto r = separability_test(center(sample), deltas[kernel_idx], cfg.alpha);
    return detail::Outcome{r.reject, false, r.z};
  });
}

StudyResult detail::run_cells(const StudyConfig& cfg, unsigned workers, bool collect_z,
                              const Replication& replicate) {
  cfg.validate();
  struct Cell {
    std::size_t param_idx, n, kernel_idx;
  };
  std::vector<Cell> cells;
  for (std::size_t pi = 0; pi < cfg.params.size(); ++pi)
    for (auto n : cfg.sample_sizes)
      for (std::size_t ki = 0; ki < cfg.kernels.size(); ++ki) cells.push_back({pi, n, ki});

  const std::size_t reps = cfg.replications;
  const std::size_t total = cells.size() * reps;
  std::vector<Outcome> outcomes(total);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const std::size_t cell_id = task / reps;
      const std::size_t rep = task % reps;
      try {
        outcomes[task] = replicate(cell_id, derive_seed(cfg.seed, cell_id, rep));
      } catch (const DegenerateError&) {
        outcomes[task] = Outcome{false, true, std::numeric_limits<double>::quiet_NaN()};
      }
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  StudyResult result;
  std::ostringstream aborted;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    StudyRow row;
    row.family = family_name(cfg.family);
    row.param = cfg.params[cells[c].param_idx];
    row.n = cells[c].n;
    row.kernel = cfg.kernels[cells[c].kernel_idx];
    row.alpha = cfg.alpha;
    row.replications = reps;
    std::vector<double> zs;
    for (std::size_t r = 0; r < reps; ++r) {
      const Outcome& o = outcomes[c * reps + r];
      row.failures += o.failed ? 1 : 0;
      row.rejections += o.reject ? 1 : 0;
      if (collect_z) zs.push_back(o.z);
    }
    const std::size_t done = reps - row.failures;
    row.rate = done > 0 ? static_cast<double>(row.rejections) / static_cast<double>(done) : 0.0;
    row.mc_se = done > 0 ? std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(done)) : 0.0;
    if (row.failures * 100 > reps)
      aborted << "cell " << c << " (" << row.family << " param=" << row.param << " N=" << row.n
              << " kernel=" << kernel_name(row.kernel) << "): " << row.failures << "/" << reps
              << " replications failed\n";
    result.rows.push_back(row);
    if (collect_z) result.z_values.push_back(std::move(zs));
  }
  if (!aborted.str().empty()) throw StudyAborted(aborted.str());
  return result;
}

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
  os << "family,param,N,kernel,alpha,replications,rejections,rate,mc_se,failures\n";
  for (const auto& r : rows) {
    os << r.family << ',' << format_double("%.10g", r.param) << ',' << r.n << ',' << kernel_name(r.kernel)
       << ',' << format_double("%.10g", r.alpha) << ',' << r.replications << ',' << r.rejections << ','
       << format_double("%.6f", r.rate) << ',' << format_double("%.6f", r.mc_se) << ',' << r.failures
       << '\n';
  }
}

std::vector<StudyRow> read_study_csv(std::istream& is) {
  std::vector<StudyRow> rows;
  std::string line;
  if (!std::getline(is, line)) throw InputError("study csv: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw InputError("study csv: expected 10 fields in '" + line + "'");
    StudyRow r;
    r.family = f[0];
    r.param = std::stod(f[1]);
    r.n = std::stoul(f[2]);
    const auto kind = parse_kernel(f[3]);
    if (!kind) throw InputError("study csv: unknown kernel '" + f[3] + "'");
    r.kernel = *kind;
    r.alpha = std::stod(f[4]);
    r.replications = std::stoul(f[5]);
    r.rejections = std::stoul(f[6]);
    r.rate = std::stod(f[7]);
    r.mc_se = std::stod(f[8]);
    r.failures = std::stoul(f[9]);
    rows.push_back(r);
  }
  return rows;
}

void write_study_table(std::ostream& os, const std::vector<StudyRow>& rows) {
  std::vector<KernelKind> kernels;
  std::vector<std::pair<double, std::size_t>> keys;
  std::map<std::pair<double, std::size_t>, std::map<int, double>> rate;
  for (const auto& r : rows) {
    if (std::find(kernels.begin(), kernels.end(), r.kernel) == kernels.end()) kernels.push_back(r.kernel);
    const auto key = std::make_pair(r.param, r.n);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    rate[key][static_cast<int>(r.kernel)] = r.rate;
  }
  const std::string pname = !rows.empty() && rows.front().family == "gneiting" ? "beta" : "c0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%8s %6s", pname.c_str(), "N");
  os << buf;
  for (auto k : kernels) {
    std::snprintf(buf, sizeof buf, " %9s", std::string(kernel_name(k)).c_str());
    os << buf;
  }
  os << '\n';
  for (const auto& key : keys) {
    std::snprintf(buf, sizeof buf, "%8g %6zu", key.first, key.second);
    os << buf;
    for (auto k : kernels) {
      std::snprintf(buf, sizeof buf, " %8.1f%%", 100.0 * rate[key][static_cast<int>(k)]);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace sepcov
