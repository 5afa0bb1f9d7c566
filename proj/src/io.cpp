#include "bcw/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bcw {

static_assert(std::endian::native == std::endian::little,
              "container format is little-endian");

namespace {

void write_exact(std::ofstream& f, const void* p, std::size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!f) throw std::runtime_error("write failed");
}

void read_exact(std::ifstream& f, void* p, std::size_t n) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (f.gcount() != static_cast<std::streamsize>(n))
        throw std::runtime_error("read failed (truncated container?)");
}

}  // namespace

void save_matrix(const std::string& path, const MatrixXd& m, const nlohmann::json& sidecar) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    const char magic[4] = {'B', 'C', 'T', 'M'};
    const std::uint32_t version = kContainerVersion;
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    write_exact(f, magic, 4);
    write_exact(f, &version, 4);
    write_exact(f, &rows, 8);
    write_exact(f, &cols, 8);
    std::vector<double> row(m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
        write_exact(f, row.data(), row.size() * sizeof(double));
    }
    f.close();
    if (!sidecar.is_null()) {
        std::ofstream s(path + ".json", std::ios::trunc);
        s << sidecar.dump(2) << "\n";
    }
}

MatrixXd load_matrix(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    std::uint32_t version;
    std::uint64_t rows, cols;
    read_exact(f, magic, 4);
    if (std::memcmp(magic, "BCTM", 4) != 0)
        throw std::runtime_error("bad magic in " + path);
    read_exact(f, &version, 4);
    if (version != kContainerVersion)
        throw std::runtime_error("unsupported container version in " + path);
    read_exact(f, &rows, 8);
    read_exact(f, &cols, 8);
    MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<double> row(cols);
    for (std::uint64_t i = 0; i < rows; ++i) {
        read_exact(f, row.data(), row.size() * sizeof(double));
        for (std::uint64_t j = 0; j < cols; ++j) m(i, j) = row[j];
    }
    return m;
}

std::optional<nlohmann::json> load_sidecar(const std::string& path) {
    std::ifstream s(path + ".json");
    if (!s) return std::nullopt;
    nlohmann::json j;
    s >> j;
    return j;
}

void save_vector(const std::string& path, const VectorXd& v, const nlohmann::json& sidecar) {
    save_matrix(path, v, sidecar);
}

VectorXd load_vector(const std::string& path) {
    MatrixXd m = load_matrix(path);
    if (m.cols() != 1) throw std::runtime_error("not a vector container: " + path);
    return m.col(0);
}

void save_csv(const std::string& path, const MatrixXd& m) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    char buf[40];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            f << buf;
            if (j + 1 < m.cols()) f << ',';
        }
        f << '\n';
    }
}

MatrixXd load_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return MatrixXd(0, 0);
    MatrixXd m(rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::runtime_error("ragged CSV: " + path);
        for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::pair<double, double> save_pgm(const std::string& path, const MatrixXd& m) {
    const double lo = m.minCoeff();
    const double hi = m.maxCoeff();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "P5\n" << m.cols() << " " << m.rows() << "\n255\n";
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    std::vector<unsigned char> row(m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = (m(i, j) - lo) * scale;
            row[j] = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v + 0.5));
        }
        write_exact(f, row.data(), row.size());
    }
    return {lo, hi};
}

nlohmann::json grid_sidecar(const Grid& g) {
    return {{"I", g.I}, {"L", g.L}, {"dx", g.dx}, {"dt", g.dt}, {"T", g.T}, {"Lh", g.Lh}};
}

static const char* tag_name(SpaceTag t) {
    return t == SpaceTag::FullTime ? "full-time" : "half-time";
}

nlohmann::json trace_sidecar(const BoundaryTrace& t) {
    return {{"kind", "boundary_trace"}, {"space", tag_name(t.tag)}, {"grid", grid_sidecar(t.grid)}};
}

nlohmann::json operator_sidecar(const OperatorMatrix& om) {
    return {{"kind", "operator"},
            {"row_space", tag_name(om.row_space)},
            {"col_space", tag_name(om.col_space)},
            {"grid", grid_sidecar(om.grid)}};
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (f) {
        f.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(f.gcount()), h);
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace bcw
