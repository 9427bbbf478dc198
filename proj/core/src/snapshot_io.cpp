#include "sensorplace/snapshot_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string_view>

#include "sensorplace/errors.hpp"

namespace sensorplace {
namespace {

constexpr std::array<char, 8> kMagic{'S', 'P', 'S', 'N', 'A', 'P', '0', '1'};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view text, std::size_t row, std::size_t column) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ParseError("cannot parse number '" + std::string(text) + "'", row, column);
  if (!std::isfinite(value))
    throw ParseError("non-finite value '" + std::string(text) + "'", row, column);
  return value;
}

std::size_t parse_count(std::string_view text, std::size_t row) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError("cannot parse count '" + std::string(text) + "'", row);
  return value;
}

struct CsvMetadata {
  std::optional<std::size_t> n_nodes;
  std::optional<std::size_t> n_cases;
  std::optional<std::size_t> steps_per_case;
};

void parse_metadata(std::string_view line, std::size_t row, CsvMetadata& meta) {
  line.remove_prefix(1);
  std::istringstream in{std::string(line)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const auto key = std::string_view(token).substr(0, eq);
    const auto value = std::string_view(token).substr(eq + 1);
    if (key == "n_nodes") meta.n_nodes = parse_count(value, row);
    else if (key == "n_cases") meta.n_cases = parse_count(value, row);
    else if (key == "steps_per_case") meta.steps_per_case = parse_count(value, row);
  }
}

std::size_t count_coord_columns(const std::vector<std::string_view>& header) {
  static constexpr std::array<std::string_view, 3> kAxes{"x", "y", "z"};
  std::size_t dim = 0;
  while (dim < kAxes.size() && dim + 1 < header.size() && header[dim + 1] == kAxes[dim]) ++dim;
  return dim;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& out, double d) { write_u64(out, std::bit_cast<std::uint64_t>(d)); }

std::uint64_t read_u64(std::istream& in, const char* what) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw ParseError(std::string("truncated binary file while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  return v;
}

double read_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(read_u64(in, what));
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void finish_loaded(SnapshotMatrix& m, const std::filesystem::path& path) {
  if (!m.has_coords()) {
    const auto sidecar = coords_sidecar_path(path);
    if (std::filesystem::exists(sidecar)) load_coords_csv(m, sidecar);
  }
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

SnapshotFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? SnapshotFormat::csv : SnapshotFormat::packed_binary;
}

std::filesystem::path coords_sidecar_path(const std::filesystem::path& path) {
  auto out = path;
  out.replace_extension(".coords.csv");
  return out;
}

SnapshotMatrix load_snapshots(const std::filesystem::path& path, SnapshotFormat format) {
  return format == SnapshotFormat::csv ? load_snapshots_csv(path) : load_snapshots_binary(path);
}

void save_snapshots_csv(const SnapshotMatrix& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "# n_nodes=" << m.nodes() << " n_cases=" << m.n_cases
      << " steps_per_case=" << m.steps_per_case << '\n';
  out << "node_id";
  static constexpr std::array<const char*, 3> kAxes{"x", "y", "z"};
  for (Index d = 0; d < m.coords.cols(); ++d) out << ',' << kAxes[static_cast<std::size_t>(d)];
  for (Index j = 0; j < m.snapshots(); ++j) out << ",snap_" << j;
  out << '\n';
  for (Index i = 0; i < m.nodes(); ++i) {
    out << (m.node_ids.empty() ? std::to_string(i) : m.node_ids[static_cast<std::size_t>(i)]);
    for (Index d = 0; d < m.coords.cols(); ++d) out << ',' << format_double(m.coords(i, d));
    for (Index j = 0; j < m.snapshots(); ++j) out << ',' << format_double(m.values(i, j));
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

SnapshotMatrix load_snapshots_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  CsvMetadata meta;
  std::vector<std::string> header_storage;
  std::vector<std::string_view> header;
  std::size_t coord_dim = 0;
  std::size_t n_snap = 0;
  std::vector<std::string> ids;
  std::vector<double> coord_data;
  std::vector<double> data;  // row-major while reading

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_metadata(line, row, meta);
      continue;
    }
    const auto fields = split_fields(line);
    if (header.empty()) {
      header_storage.assign(fields.begin(), fields.end());
      header.assign(header_storage.begin(), header_storage.end());
      if (header.empty() || header[0] != "node_id")
        throw ParseError("header must start with node_id", row, 1);
      coord_dim = count_coord_columns(header);
      if (header.size() <= 1 + coord_dim) throw ParseError("header lists no snapshots", row);
      n_snap = header.size() - 1 - coord_dim;
      continue;
    }
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       row);
    ids.emplace_back(fields[0]);
    for (std::size_t c = 1; c <= coord_dim; ++c) coord_data.push_back(parse_double(fields[c], row, c + 1));
    for (std::size_t c = 1 + coord_dim; c < fields.size(); ++c)
      data.push_back(parse_double(fields[c], row, c + 1));
  }
  if (header.empty()) throw ParseError(path.string() + ": missing header");
  const std::size_t n = ids.size();
  if (n == 0) throw ParseError(path.string() + ": no data rows");
  if (meta.n_nodes && *meta.n_nodes != n)
    throw ParseError(path.string() + ": dimension mismatch, declared n_nodes=" +
                     std::to_string(*meta.n_nodes) + " but found " + std::to_string(n) +
                     " data rows");

  SnapshotMatrix m;
  m.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), static_cast<Index>(n), static_cast<Index>(n_snap));
  if (coord_dim > 0)
    m.coords = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        coord_data.data(), static_cast<Index>(n), static_cast<Index>(coord_dim));
  m.node_ids = std::move(ids);
  m.steps_per_case = meta.steps_per_case.value_or(1);
  m.n_cases = meta.n_cases.value_or(m.steps_per_case > 0 ? n_snap / m.steps_per_case : 0);
  finish_loaded(m, path);
  return m;
}

void save_snapshots_binary(const SnapshotMatrix& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  write_u64(out, static_cast<std::uint64_t>(m.nodes()));
  write_u64(out, static_cast<std::uint64_t>(m.snapshots()));
  write_u64(out, m.n_cases);
  write_u64(out, m.steps_per_case);
  write_u64(out, static_cast<std::uint64_t>(m.coords.cols()));
  for (Index j = 0; j < m.snapshots(); ++j)
    for (Index i = 0; i < m.nodes(); ++i) write_f64(out, m.values(i, j));
  for (Index i = 0; i < m.coords.rows(); ++i)
    for (Index d = 0; d < m.coords.cols(); ++d) write_f64(out, m.coords(i, d));
  if (!out) throw Error("failed writing " + path.string());
}

SnapshotMatrix load_snapshots_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw ParseError(path.string() + ": bad magic, not a packed snapshot file");

  const auto n = read_u64(in, "n");
  const auto m_cols = read_u64(in, "m");
  const auto n_cases = read_u64(in, "n_cases");
  const auto steps = read_u64(in, "steps_per_case");
  const auto coord_dim = read_u64(in, "coord_dim");
  if (n == 0 || m_cols == 0) throw ParseError(path.string() + ": empty dimensions");
  if (coord_dim > 3) throw ParseError(path.string() + ": coordinate dimension above 3");

  const auto expected_bytes = 8 + 5 * 8 + 8 * (n * m_cols + n * coord_dim);
  const auto actual_bytes = std::filesystem::file_size(path);
  if (actual_bytes != expected_bytes)
    throw ParseError(path.string() + ": dimension mismatch, header implies " +
                     std::to_string(expected_bytes) + " bytes but file has " +
                     std::to_string(actual_bytes));

  SnapshotMatrix m;
  m.n_cases = n_cases;
  m.steps_per_case = steps;
  m.values.resize(static_cast<Index>(n), static_cast<Index>(m_cols));
  for (Index j = 0; j < m.values.cols(); ++j)
    for (Index i = 0; i < m.values.rows(); ++i) {
      m.values(i, j) = read_f64(in, "values");
      if (!std::isfinite(m.values(i, j)))
        throw ParseError(path.string() + ": non-finite value", static_cast<std::size_t>(i) + 1,
                         static_cast<std::size_t>(j) + 1);
    }
  if (coord_dim > 0) {
    m.coords.resize(static_cast<Index>(n), static_cast<Index>(coord_dim));
    for (Index i = 0; i < m.coords.rows(); ++i)
      for (Index d = 0; d < m.coords.cols(); ++d) m.coords(i, d) = read_f64(in, "coords");
  }
  finish_loaded(m, path);
  return m;
}

void save_coords_csv(const SnapshotMatrix& m, const std::filesystem::path& path) {
  if (!m.has_coords()) throw InvalidArgument("matrix has no coordinates to save");
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  static constexpr std::array<const char*, 3> kAxes{"x", "y", "z"};
  out << "node_id";
  for (Index d = 0; d < m.coords.cols(); ++d) out << ',' << kAxes[static_cast<std::size_t>(d)];
  out << '\n';
  for (Index i = 0; i < m.coords.rows(); ++i) {
    out << (m.node_ids.empty() ? std::to_string(i) : m.node_ids[static_cast<std::size_t>(i)]);
    for (Index d = 0; d < m.coords.cols(); ++d) out << ',' << format_double(m.coords(i, d));
    out << '\n';
  }
}

void load_coords_csv(SnapshotMatrix& m, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  std::size_t row = 0;
  std::size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<double> data;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.empty() || fields[0] != "node_id")
        throw ParseError(path.string() + ": header must start with node_id", row, 1);
      dim = count_coord_columns(fields);
      if (dim == 0 || fields.size() != dim + 1)
        throw ParseError(path.string() + ": header must be node_id,x[,y[,z]]", row);
      have_header = true;
      continue;
    }
    if (fields.size() != dim + 1)
      throw ParseError(path.string() + ": wrong field count", row);
    ids.emplace_back(fields[0]);
    for (std::size_t c = 1; c <= dim; ++c) data.push_back(parse_double(fields[c], row, c + 1));
  }
  if (static_cast<Index>(ids.size()) != m.nodes())
    throw ParseError(path.string() + ": dimension mismatch, " + std::to_string(ids.size()) +
                     " coordinate rows for " + std::to_string(m.nodes()) + " nodes");
  m.coords = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), m.nodes(), static_cast<Index>(dim));
  if (m.node_ids.empty()) m.node_ids = std::move(ids);
}

}  // namespace sensorplace
