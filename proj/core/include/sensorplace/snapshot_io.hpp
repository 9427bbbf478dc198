#pragma once

#include <filesystem>

#include "sensorplace/snapshots.hpp"

namespace sensorplace {

enum class SnapshotFormat { csv, packed_binary };

/// Picks the format from the extension: ".csv" is CSV, anything else binary.
SnapshotFormat format_for_path(const std::filesystem::path& path);

/// Path of the coordinate sidecar for a data file: `<stem>.coords.csv`.
std::filesystem::path coords_sidecar_path(const std::filesystem::path& path);

/// Loads a snapshot matrix. Coordinates embedded in the file win; otherwise a
/// sidecar next to it is read when present.
SnapshotMatrix load_snapshots(const std::filesystem::path& path, SnapshotFormat format);

// CSV layout:
//   # n_nodes=<n> n_cases=<k> steps_per_case=<t>     (every key optional)
//   node_id[,x[,y[,z]]],snap_0,...,snap_{m-1}
//   <id>,[coords...],<values...>
void save_snapshots_csv(const SnapshotMatrix& m, const std::filesystem::path& path);
SnapshotMatrix load_snapshots_csv(const std::filesystem::path& path);

// Packed binary, little-endian:
//   8-byte magic "SPSNAP01"
//   u64 n, m, n_cases, steps_per_case, coord_dim
//   n*m f64, column-major
//   n*coord_dim f64, node-major (absent when coord_dim = 0)
void save_snapshots_binary(const SnapshotMatrix& m, const std::filesystem::path& path);
SnapshotMatrix load_snapshots_binary(const std::filesystem::path& path);

/// `node_id,x[,y[,z]]`, one row per node in matrix order.
void save_coords_csv(const SnapshotMatrix& m, const std::filesystem::path& path);
/// Fills `m.coords` (and node ids if missing) from a sidecar file.
void load_coords_csv(SnapshotMatrix& m, const std::filesystem::path& path);

}  // namespace sensorplace
