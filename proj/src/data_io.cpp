#include "sepcov/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace sepcov {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& s, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty() || !std::isfinite(v)) {
    std::ostringstream os;
    os << "row " << row << ": column '" << column << "' is not a finite number: '" << s << "'";
    throw InputError(os.str());
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

void normalize_axis(std::vector<double>& v) {
  if (v.empty()) return;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double a = *lo;
  const double span = *hi - *lo;
  for (auto& x : v) x = span > 0 ? (x - a) / span : 0.5;
}

// Same scale on every axis so distances keep their proportions.
void normalize_space(Eigen::MatrixXd& pts) {
  const Eigen::VectorXd lo = pts.rowwise().minCoeff();
  const Eigen::VectorXd hi = pts.rowwise().maxCoeff();
  const double span = (hi - lo).maxCoeff();
  for (Eigen::Index j = 0; j < pts.rows(); ++j)
    for (Eigen::Index k = 0; k < pts.cols(); ++k)
      pts(j, k) = span > 0 ? (pts(j, k) - lo[j]) / span : 0.5;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name, bool required) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    if (required) throw InputError("missing column '" + name + "'");
    return static_cast<std::size_t>(-1);
  }
  return static_cast<std::size_t>(it - header.begin());
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

SampleSet<double> load_long(const DatasetDescriptor& desc) {
  auto in = open_in(desc.path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("'" + desc.path + "' is empty");
  const auto header = split_line(line);
  const std::size_t c_rep = column_index(header, desc.replicate_col, true);
  const std::size_t c_group = column_index(header, desc.group_col, false);
  const std::size_t c_station = column_index(header, desc.station_col, true);
  const std::size_t c_time = column_index(header, desc.time_col, true);
  const std::size_t c_value = column_index(header, desc.value_col, true);
  std::vector<std::size_t> c_coords;
  for (const auto& name : desc.coord_cols) {
    const std::size_t idx = column_index(header, name, false);
    if (idx == kNone) break;
    c_coords.push_back(idx);
  }
  if (c_coords.empty()) throw InputError("missing spatial coordinate column '" + desc.coord_cols.front() + "'");

  struct Entry {
    std::size_t rep, station;
    double t, value;
    std::size_t row;
  };
  std::vector<std::string> reps, stations, groups;
  std::unordered_map<std::string, std::size_t> rep_index, station_index;
  std::vector<std::vector<double>> station_coords;
  std::vector<Entry> entries;

  for (std::size_t row = 2; std::getline(in, line); ++row) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_line(line);
    if (f.size() != header.size()) {
      std::ostringstream os;
      os << "row " << row << ": expected " << header.size() << " fields, found " << f.size();
      throw InputError(os.str());
    }
    const std::string group = c_group == kNone ? std::string() : f[c_group];
    auto [rit, rnew] = rep_index.emplace(f[c_rep], reps.size());
    if (rnew) {
      reps.push_back(f[c_rep]);
      groups.push_back(group);
    } else if (groups[rit->second] != group) {
      std::ostringstream os;
      os << "row " << row << ": replicate '" << f[c_rep] << "' has conflicting groups '"
         << groups[rit->second] << "' and '" << group << "'";
      throw InputError(os.str());
    }
    std::vector<double> coords;
    for (auto ci : c_coords) coords.push_back(parse_number(f[ci], row, header[ci]));
    auto [sit, snew] = station_index.emplace(f[c_station], stations.size());
    if (snew) {
      stations.push_back(f[c_station]);
      station_coords.push_back(coords);
    } else if (station_coords[sit->second] != coords) {
      std::ostringstream os;
      os << "row " << row << ": station '" << f[c_station] << "' has inconsistent coordinates";
      throw InputError(os.str());
    }
    entries.push_back({rit->second, sit->second, parse_number(f[c_time], row, header[c_time]),
                       parse_number(f[c_value], row, header[c_value]), row});
  }
  if (entries.empty()) throw InputError("'" + desc.path + "' has no data rows");

  std::vector<double> times;
  for (const auto& e : entries) times.push_back(e.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::map<double, std::size_t> time_index;
  for (std::size_t l = 0; l < times.size(); ++l) time_index[times[l]] = l;

  const std::size_t n = reps.size(), p = stations.size(), q = times.size();
  std::vector<Eigen::MatrixXd> data(n, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                             static_cast<Eigen::Index>(q)));
  std::vector<char> seen(n * p * q, 0);
  for (const auto& e : entries) {
    const std::size_t l = time_index[e.t];
    const std::size_t slot = (e.rep * p + e.station) * q + l;
    if (seen[slot]) {
      std::ostringstream os;
      os << "row " << e.row << ": duplicate cell (replicate=" << reps[e.rep]
         << ", station=" << stations[e.station] << ", t=" << fmt(e.t) << ")";
      throw InputError(os.str());
    }
    seen[slot] = 1;
    data[e.rep](static_cast<Eigen::Index>(e.station), static_cast<Eigen::Index>(l)) = e.value;
  }
  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t l = 0; l < q; ++l)
        if (!seen[(i * p + k) * q + l]) {
          if (missing.size() < 10)
            missing.push_back("(replicate=" + reps[i] + ", station=" + stations[k] + ", t=" + fmt(times[l]) + ")");
          ++missing_count;
        }
  if (missing_count > 0) {
    std::ostringstream os;
    os << missing_count << " missing cell(s); first: ";
    for (std::size_t j = 0; j < missing.size(); ++j) os << (j ? ", " : "") << missing[j];
    throw InputError(os.str());
  }

  Eigen::MatrixXd space(static_cast<Eigen::Index>(c_coords.size()), static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < p; ++k)
    for (std::size_t j = 0; j < c_coords.size(); ++j)
      space(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = station_coords[k][j];
  if (desc.normalize_time.value_or(true)) normalize_axis(times);
  if (desc.normalize_space.value_or(true)) normalize_space(space);
  Eigen::VectorXd tv = Eigen::Map<const Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(q));

  const bool labelled = std::any_of(groups.begin(), groups.end(), [](const auto& g) { return !g.empty(); });
  return SampleSet<double>(Grid<double>(tv, space), std::move(data),
                           labelled ? std::move(groups) : std::vector<std::string>{});
}

Grid<double> read_sidecar(const std::string& path, bool norm_time, bool norm_space) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
    auto times = j.at("time_points").get<std::vector<double>>();
    const auto pts = j.at("space_points").get<std::vector<std::vector<double>>>();
    if (pts.empty()) throw InputError("sidecar '" + path + "': no space points");
    const std::size_t d = pts.front().size();
    Eigen::MatrixXd space(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (pts[k].size() != d) throw InputError("sidecar '" + path + "': ragged space points");
      for (std::size_t r = 0; r < d; ++r)
        space(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = pts[k][r];
    }
    if (norm_time) normalize_axis(times);
    if (norm_space) normalize_space(space);
    Eigen::VectorXd tv = Eigen::Map<const Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
    if (j.contains("w_t") || j.contains("w_s")) {
      const double wt = j.value("w_t", 1.0 / static_cast<double>(times.size()));
      const double ws = j.value("w_s", 1.0 / static_cast<double>(pts.size()));
      return Grid<double>(tv, space, wt, ws);
    }
    return Grid<double>(tv, space);
  } catch (const json::exception& e) {
    throw InputError("sidecar '" + path + "': " + e.what());
  }
}

SampleSet<double> load_wide(const DatasetDescriptor& desc) {
  const Grid<double> grid = read_sidecar(desc.sidecar.value_or(default_sidecar(desc.path)),
                                         desc.normalize_time.value_or(false),
                                         desc.normalize_space.value_or(false));
  for (double t : grid.time_points())
    if (t < 0.0 || t > 1.0)
      throw InputError("sidecar time points lie outside [0,1]; enable normalization");
  if ((grid.space_points().array() < 0.0).any() || (grid.space_points().array() > 1.0).any())
    throw InputError("sidecar space points lie outside [0,1]^d; enable normalization");

  auto in = open_in(desc.path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("'" + desc.path + "' is empty");
  const auto header = split_line(line);
  const std::size_t c_rep = column_index(header, desc.replicate_col, true);
  const std::size_t c_group = column_index(header, desc.group_col, false);
  const Eigen::Index p = grid.p(), q = grid.q();
  std::vector<std::size_t> cell_cols;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != c_rep && c != c_group) cell_cols.push_back(c);
  if (static_cast<Eigen::Index>(cell_cols.size()) != p * q) {
    std::ostringstream os;
    os << "'" << desc.path << "' has " << cell_cols.size() << " cell columns, grid expects " << p * q;
    throw InputError(os.str());
  }
  std::vector<Eigen::MatrixXd> data;
  std::vector<std::string> groups;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t row = 2; std::getline(in, line); ++row) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_line(line);
    if (f.size() != header.size()) {
      std::ostringstream os;
      os << "row " << row << ": expected " << header.size() << " fields, found " << f.size();
      throw InputError(os.str());
    }
    if (!seen.emplace(f[c_rep], row).second)
      throw InputError("row " + std::to_string(row) + ": duplicate replicate '" + f[c_rep] + "'");
    Eigen::MatrixXd x(p, q);
    for (Eigen::Index k = 0; k < p; ++k)
      for (Eigen::Index l = 0; l < q; ++l) {
        const std::size_t col = cell_cols[static_cast<std::size_t>(k * q + l)];
        x(k, l) = parse_number(f[col], row, header[col]);
      }
    data.push_back(std::move(x));
    groups.push_back(c_group == kNone ? std::string() : f[c_group]);
  }
  const bool labelled = std::any_of(groups.begin(), groups.end(), [](const auto& g) { return !g.empty(); });
  return SampleSet<double>(grid, std::move(data), labelled ? std::move(groups) : std::vector<std::string>{});
}

}  // namespace

std::string default_sidecar(const std::string& csv_path) { return csv_path + ".grid.json"; }

SampleSet<double> load_samples(const DatasetDescriptor& desc) {
  return desc.layout == Layout::Long ? load_long(desc) : load_wide(desc);
}

void save_samples(const SampleSet<double>& s, const std::string& path, const std::optional<std::string>& sidecar) {
  const Eigen::Index p = s.grid.p(), q = s.grid.q();
  {
    auto out = open_out(path);
    out << "replicate,group";
    for (Eigen::Index k = 0; k < p; ++k)
      for (Eigen::Index l = 0; l < q; ++l) out << ",s" << k << "_t" << l;
    out << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << i << ',' << (s.labels.empty() ? std::string() : s.labels[i]);
      for (Eigen::Index k = 0; k < p; ++k)
        for (Eigen::Index l = 0; l < q; ++l) out << ',' << fmt(s.data[i](k, l));
      out << '\n';
    }
  }
  // Raw numbers are spliced in to keep the shortest round-trip spelling.
  std::ostringstream js;
  js << "{\n  \"time_points\": [";
  for (Eigen::Index l = 0; l < q; ++l) js << (l ? ", " : "") << fmt(s.grid.time_points()[l]);
  js << "],\n  \"space_points\": [";
  for (Eigen::Index k = 0; k < p; ++k) {
    js << (k ? ", " : "") << '[';
    for (Eigen::Index r = 0; r < s.grid.dim(); ++r) js << (r ? ", " : "") << fmt(s.grid.space_points()(r, k));
    js << ']';
  }
  js << "],\n  \"w_t\": " << fmt(s.grid.w_t()) << ",\n  \"w_s\": " << fmt(s.grid.w_s()) << "\n}\n";
  auto out = open_out(sidecar.value_or(default_sidecar(path)));
  out << js.str();
}

void save_samples_long(const SampleSet<double>& s, const std::string& path) {
  auto out = open_out(path);
  out << "replicate,group,station_id";
  for (Eigen::Index r = 0; r < s.grid.dim(); ++r) out << ",s" << r + 1;
  out << ",t,value\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    for (Eigen::Index k = 0; k < s.grid.p(); ++k)
      for (Eigen::Index l = 0; l < s.grid.q(); ++l) {
        out << i << ',' << (s.labels.empty() ? std::string() : s.labels[i]) << ",st" << k;
        for (Eigen::Index r = 0; r < s.grid.dim(); ++r) out << ',' << fmt(s.grid.space_points()(r, k));
        out << ',' << fmt(s.grid.time_points()[l]) << ',' << fmt(s.data[i](k, l)) << '\n';
      }
}

SampleSet<double> deseasonalize(const SampleSet<double>& s) {
  if (s.labels.size() != s.size() ||
      std::any_of(s.labels.begin(), s.labels.end(), [](const auto& g) { return g.empty(); }))
    throw InputError("deseasonalize needs a group label on every sample");
  std::map<std::string, std::pair<Eigen::MatrixXd, std::size_t>> means;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto [it, fresh] = means.try_emplace(s.labels[i], Eigen::MatrixXd::Zero(s.grid.p(), s.grid.q()), 0);
    it->second.first += s.data[i];
    it->second.second += 1;
  }
  for (auto& [_, m] : means) m.first /= static_cast<double>(m.second);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(s.data[i] - means.at(s.labels[i]).first);
  return SampleSet<double>(s.grid, std::move(out), s.labels);
}

}  // namespace sepcov
