#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sepcov/grid.hpp"

namespace sepcov {

enum class Layout { Long, Wide };

/// How to read a CSV file of surfaces.
///
/// Long layout: one row per observed value with columns
///   replicate,group,station_id,s1[,s2[,s3]],t,value
/// (group is optional). Wide layout: one row per replicate,
///   replicate,group,s0_t0,s0_t1,...
/// with the cells in space-major order, plus a JSON sidecar giving the grid
/// (time_points, space_points, optional w_t / w_s).
struct DatasetDescriptor {
  std::string path;
  Layout layout = Layout::Long;

  std::string replicate_col = "replicate";
  std::string group_col = "group";
  std::string station_col = "station_id";
  std::vector<std::string> coord_cols{"s1", "s2", "s3"};
  std::string time_col = "t";
  std::string value_col = "value";

  /// Affine map of coordinates onto [0,1]. Defaults: on for long files,
  /// off for wide files (sidecars are written in unit coordinates).
  std::optional<bool> normalize_time;
  std::optional<bool> normalize_space;

  /// Wide layout only; defaults to path + ".grid.json".
  std::optional<std::string> sidecar;
};

SampleSet<double> load_samples(const DatasetDescriptor& desc);

std::string default_sidecar(const std::string& csv_path);

/// Writes the wide layout and its grid sidecar. Values use the shortest
/// round-trip decimal representation, so load_samples reproduces them exactly.
void save_samples(const SampleSet<double>& s, const std::string& path,
                  const std::optional<std::string>& sidecar = std::nullopt);

/// Writes the long layout (stations named st0, st1, ...).
void save_samples_long(const SampleSet<double>& s, const std::string& path);

/// Subtracts from every surface the cell-wise mean of its label group.
SampleSet<double> deseasonalize(const SampleSet<double>& s);

}  // namespace sepcov
