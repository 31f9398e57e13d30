#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sepcov/covariance_models.hpp"
#include "sepcov/delta_kernel.hpp"

namespace sepcov {

enum class ModelFamily { Gneiting, CressieHuang };

/// Monte Carlo design: the cross product params x sample_sizes x kernels,
/// each cell run for `replications` independent draws.
struct StudyConfig {
  ModelFamily family = ModelFamily::Gneiting;
  /// beta for Gneiting, c0 for Cressie-Huang.
  std::vector<double> params;
  std::vector<std::size_t> sample_sizes;
  std::vector<KernelKind> kernels;
  double alpha = 0.05;
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  Eigen::Index time_points = 20;
  std::vector<int> space_lattice{3, 3};
  /// Fixed parameters; the swept one is overwritten per cell.
  Gneiting gneiting{};
  CressieHuang cressie_huang{};

  void validate() const;
  CovModel model_for(double param) const;
  Grid<double> grid() const;
};

/// Parses the JSON config document (see README for the schema).
StudyConfig parse_study_config(const std::string& json_text);

struct StudyRow {
  std::string family;
  double param = 0;
  std::size_t n = 0;
  KernelKind kernel = KernelKind::Const;
  double alpha = 0;
  std::size_t replications = 0;
  std::size_t rejections = 0;
  double rate = 0;
  double mc_se = 0;
  std::size_t failures = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  /// Per-row studentized statistics, NaN where a replication failed.
  /// Filled only when requested.
  std::vector<std::vector<double>> z_values;
};

/// Thrown when a cell exceeds the 1% failure budget.
class StudyAborted : public std::runtime_error {
 public:
  explicit StudyAborted(const std::string& what) : std::runtime_error(what) {}
};

/// Runs every cell. Output depends only on cfg: replication r of cell c is
/// seeded with derive_seed(cfg.seed, c, r) regardless of `workers`.
StudyResult run_power_study(const StudyConfig& cfg, unsigned workers = 1, bool collect_z = false);

namespace detail {
struct Outcome {
  bool reject = false;
  bool failed = false;
  double z = 0.0;
};
/// One replication: (cell index, derived seed) -> outcome. Throwing
/// DegenerateError marks the replication as failed.
using Replication = std::function<Outcome(std::size_t cell_id, std::uint64_t seed)>;
/// The study loop with the sample-and-test step supplied by the caller.
StudyResult run_cells(const StudyConfig& cfg, unsigned workers, bool collect_z, const Replication& replicate);
}  // namespace detail

std::string family_name(ModelFamily f);

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows);
std::vector<StudyRow> read_study_csv(std::istream& is);

/// Table with one line per (param, N) and one rejection-rate column per kernel.
void write_study_table(std::ostream& os, const std::vector<StudyRow>& rows);

}  // namespace sepcov
