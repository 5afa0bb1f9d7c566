#pragma once

#include "bcw/grid.hpp"

#include <json.hpp>
#include <optional>
#include <string>

namespace bcw {

// Binary matrix container: magic "BCTM", version u32, rows u64, cols u64,
// all little-endian, followed by the row-major IEEE-754 float64 payload.
// A JSON sidecar at <path>.json carries grid parameters, space tags and
// provenance so files remain self-describing.

inline constexpr std::uint32_t kContainerVersion = 1;

void save_matrix(const std::string& path, const MatrixXd& m,
                 const nlohmann::json& sidecar = nlohmann::json::object());
MatrixXd load_matrix(const std::string& path);
std::optional<nlohmann::json> load_sidecar(const std::string& path);

void save_vector(const std::string& path, const VectorXd& v,
                 const nlohmann::json& sidecar = nlohmann::json::object());
VectorXd load_vector(const std::string& path);

/// Row-major CSV with 17 significant digits.
void save_csv(const std::string& path, const MatrixXd& m);
MatrixXd load_csv(const std::string& path);

/// 8-bit grayscale PGM (P5), min-max normalized; returns {min,max} used.
std::pair<double, double> save_pgm(const std::string& path, const MatrixXd& m);

nlohmann::json grid_sidecar(const Grid& g);
nlohmann::json trace_sidecar(const BoundaryTrace& t);
nlohmann::json operator_sidecar(const OperatorMatrix& om);

/// FNV-1a 64-bit digest, used for config digests and file manifests.
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

}  // namespace bcw
