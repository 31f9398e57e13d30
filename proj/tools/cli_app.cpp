#include "cli_app.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepcov/covariance_models.hpp"
#include "sepcov/data_io.hpp"
#include "sepcov/equivalence.hpp"
#include "sepcov/power_study.hpp"
#include "sepcov/separability_test.hpp"

namespace sepcov::cli {

namespace {

std::vector<int> parse_lattice(const std::string& spec) {
  std::vector<int> counts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, 'x');) {
    try {
      std::size_t used = 0;
      counts.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InputError("bad --space-lattice '" + spec + "' (expected e.g. 3x3)");
    }
  }
  return counts;
}

std::vector<InstanceSize> parse_sizes(const std::string& spec) {
  std::vector<InstanceSize> sizes;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ';');) {
    if (item.empty()) continue;
    InstanceSize s{};
    char c1 = 0, c2 = 0;
    std::stringstream is(item);
    long n = 0;
    if (!(is >> n >> c1 >> s.p >> c2 >> s.q) || c1 != ',' || c2 != ',' || n < 0 || !(is >> std::ws).eof())
      throw InputError("bad --sizes entry '" + item + "' (expected N,p,q)");
    s.n = static_cast<std::size_t>(n);
    sizes.push_back(s);
  }
  if (sizes.empty()) throw InputError("--sizes is empty");
  return sizes;
}

struct TestArgs {
  std::string input;
  std::string layout = "long";
  std::string sidecar;
  std::string kernel = "const";
  double alpha = 0.05;
  bool deseasonalize = false;
  bool json = false;
};

int cmd_test(const TestArgs& a, std::ostream& out) {
  DatasetDescriptor desc;
  desc.path = a.input;
  desc.layout = a.layout == "wide" ? Layout::Wide : Layout::Long;
  if (!a.sidecar.empty()) desc.sidecar = a.sidecar;
  const auto kind = parse_kernel(a.kernel);
  if (!kind) throw InputError("unknown kernel '" + a.kernel + "'");
  SampleSet<double> samples = load_samples(desc);
  if (a.deseasonalize) samples = deseasonalize(samples);
  const auto r = separability_test(samples, delta_matrix(*kind, samples.grid), a.alpha);
  if (a.json) {
    nlohmann::ordered_json j;
    j["d_hat"] = r.d_hat;
    j["nu_hat_sq"] = r.nu_hat_sq;
    j["z"] = r.z;
    j["p_value"] = r.p_value;
    j["alpha"] = r.alpha;
    j["reject"] = r.reject;
    j["n"] = r.n;
    j["kernel"] = std::string(kernel_name(r.kernel_kind));
    out << j.dump() << '\n';
  } else {
    out << std::setprecision(10);
    out << "d_hat      " << r.d_hat << '\n'
        << "nu_hat_sq  " << r.nu_hat_sq << '\n'
        << "z          " << r.z << '\n'
        << "p_value    " << r.p_value << '\n'
        << "alpha      " << r.alpha << '\n'
        << "reject     " << (r.reject ? "true" : "false") << '\n'
        << "n          " << r.n << '\n'
        << "kernel     " << kernel_name(r.kernel_kind) << '\n';
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string model = "gneiting";
  Gneiting gneiting;
  CressieHuang ch;
  double kron_space_range = 1.0;
  double kron_time_range = 1.0;
  std::size_t n = 100;
  Eigen::Index q = 20;
  std::string lattice = "3x3";
  std::uint64_t seed = 1;
  std::string out;
  std::size_t groups = 0;
  Eigen::Index cap = kDefaultSamplingCap;
};

int cmd_simulate(SimulateArgs a, std::ostream& out) {
  const Grid<double> grid(unit_time_points<double>(a.q), unit_lattice<double>(parse_lattice(a.lattice)));
  CovModel model;
  if (a.model == "gneiting") {
    model = a.gneiting;
  } else if (a.model == "ch") {
    a.ch.d = a.gneiting.d;
    model = a.ch;
  } else if (a.model == "kron") {
    if (!(a.kron_space_range > 0) || !(a.kron_time_range > 0))
      throw InputError("kron ranges must be positive");
    KroneckerProduct kp{Eigen::MatrixXd(grid.p(), grid.p()), Eigen::MatrixXd(grid.q(), grid.q())};
    for (Eigen::Index k = 0; k < grid.p(); ++k)
      for (Eigen::Index k2 = 0; k2 < grid.p(); ++k2)
        kp.space(k, k2) =
            std::exp(-(grid.space_points().col(k) - grid.space_points().col(k2)).norm() / a.kron_space_range);
    for (Eigen::Index l = 0; l < grid.q(); ++l)
      for (Eigen::Index l2 = 0; l2 < grid.q(); ++l2)
        kp.time(l, l2) = std::exp(-std::abs(grid.time_points()[l] - grid.time_points()[l2]) / a.kron_time_range);
    model = kp;
  } else {
    throw InputError("unknown model '" + a.model + "'");
  }
  validate(model);
  SampleSet<double> s = a.n == 0 ? SampleSet<double>(grid, {}) : GaussianSampler(model, grid, a.cap).sample(a.n, a.seed);
  if (a.groups > 0) {
    s.labels.clear();
    for (std::size_t i = 0; i < s.size(); ++i) s.labels.push_back("g" + std::to_string(i % a.groups));
  }
  save_samples(s, a.out);
  out << "wrote " << s.size() << " surfaces (" << grid.p() << " x " << grid.q() << ") to " << a.out << '\n';
  return kExitOk;
}

struct PowerArgs {
  std::string config;
  std::string out;
  std::string table;
  unsigned workers = 1;
};

int cmd_power(const PowerArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.config);
  if (!in) throw InputError("cannot open config '" + a.config + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const StudyConfig cfg = parse_study_config(buf.str());
  StudyResult result;
  try {
    result = run_power_study(cfg, a.workers);
  } catch (const StudyAborted& e) {
    err << "power study aborted:\n" << e.what();
    return kExitAborted;
  }
  if (a.out.empty() || a.out == "-") {
    write_study_csv(out, result.rows);
  } else {
    std::ofstream f(a.out);
    if (!f) throw InputError("cannot write '" + a.out + "'");
    write_study_csv(f, result.rows);
  }
  if (!a.table.empty()) {
    if (a.table == "-") {
      write_study_table(out, result.rows);
    } else {
      std::ofstream f(a.table);
      if (!f) throw InputError("cannot write '" + a.table + "'");
      write_study_table(f, result.rows);
    }
  }
  return kExitOk;
}

struct OracleArgs {
  std::uint64_t seed = 20240601;
  std::string sizes;
  double tolerance = 1e-9;
  Eigen::Index cap = 64;
  bool verbose = false;
};

int cmd_oracle_check(const OracleArgs& a, std::ostream& out) {
  const auto sizes = a.sizes.empty() ? default_instance_sizes(a.seed) : parse_sizes(a.sizes);
  std::ostringstream log;
  const auto report = run_equivalence_suite(sizes, a.seed, a.tolerance, a.cap, log);
  if (a.verbose) {
    out << log.str();
  } else {
    std::istringstream lines(log.str());
    for (std::string line; std::getline(lines, line);)
      if (line.rfind("ok", 0) != 0) out << line << '\n';
  }
  return report.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum-distance separability test for covariance operators of random surfaces", "sepcov"};
  app.require_subcommand(1);

  TestArgs test;
  auto* t = app.add_subcommand("test", "run the separability test on a data file");
  t->add_option("--input", test.input, "CSV file")->required();
  t->add_option("--layout", test.layout, "long or wide")->check(CLI::IsMember({"long", "wide"}));
  t->add_option("--sidecar", test.sidecar, "grid sidecar for the wide layout");
  t->add_option("--kernel", test.kernel, "temporal kernel psi")
      ->check(CLI::IsMember({"const", "absdiff", "min", "gauss"}));
  t->add_option("--alpha", test.alpha, "significance level");
  t->add_flag("--deseasonalize", test.deseasonalize, "subtract group means first");
  t->add_flag("--json", test.json, "machine-readable output");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "draw Gaussian surfaces from a space-time covariance model");
  s->add_option("--model", sim.model, "gneiting, ch or kron")->check(CLI::IsMember({"gneiting", "ch", "kron"}));
  s->add_option("--sigma2", sim.gneiting.sigma2, "point-wise variance (gneiting)");
  s->add_option("--a", sim.gneiting.a, "time scale (gneiting)");
  s->add_option("--c", sim.gneiting.c, "space scale (gneiting)");
  s->add_option("--alpha", sim.gneiting.alpha, "time smoothness (gneiting)");
  s->add_option("--gamma", sim.gneiting.gamma, "space smoothness (gneiting)");
  s->add_option("--beta", sim.gneiting.beta, "separability parameter (gneiting)");
  s->add_option("--tau", sim.gneiting.tau, "decay exponent (gneiting)");
  s->add_option("--d", sim.gneiting.d, "spatial dimension in the model formulas");
  s->add_option("--ch-sigma2", sim.ch.sigma2, "point-wise variance (ch)");
  s->add_option("--a0", sim.ch.a0, "time scale (ch)");
  s->add_option("--b0", sim.ch.b0, "space scale (ch)");
  s->add_option("--c0", sim.ch.c0, "separability parameter (ch)");
  s->add_option("--kron-space-range", sim.kron_space_range, "exponential range of the spatial factor (kron)");
  s->add_option("--kron-time-range", sim.kron_time_range, "exponential range of the temporal factor (kron)");
  s->add_option("--n", sim.n, "number of surfaces");
  s->add_option("--q", sim.q, "number of time points");
  s->add_option("--space-lattice", sim.lattice, "spatial lattice, e.g. 3x3");
  s->add_option("--seed", sim.seed, "random seed");
  s->add_option("--groups", sim.groups, "label surfaces cyclically with this many groups");
  s->add_option("--cap", sim.cap, "maximum number of grid cells");
  s->add_option("--out", sim.out, "output CSV (a .grid.json sidecar is written alongside)")->required();

  PowerArgs power;
  auto* pw = app.add_subcommand("power", "Monte Carlo level/power study");
  pw->add_option("--config", power.config, "JSON study config")->required();
  pw->add_option("--out", power.out, "output CSV (default stdout)");
  pw->add_option("--table", power.table, "also write an aligned rate table ('-' for stdout)");
  pw->add_option("--workers", power.workers, "worker threads")->check(CLI::PositiveNumber);

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle-check", "compare fast estimators against the dense oracle");
  o->add_option("--seed", orc.seed, "fixture seed");
  o->add_option("--sizes", orc.sizes, "instances as N,p,q;N,p,q;... (default: 50 random)");
  o->add_option("--tolerance", orc.tolerance, "relative tolerance");
  o->add_option("--cap", orc.cap, "maximum p*q for the dense oracle");
  o->add_flag("--verbose", orc.verbose, "print every comparison");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (t->parsed()) return cmd_test(test, out);
    if (s->parsed()) return cmd_simulate(sim, out);
    if (pw->parsed()) return cmd_power(power, out, err);
    if (o->parsed()) return cmd_oracle_check(orc, out);
  } catch (const DegenerateError& e) {
    err << "numerical degeneracy: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace sepcov::cli
