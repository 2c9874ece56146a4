#include "fusedl0/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace fusedl0 {

namespace {

bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::string line_error(const std::string& path, std::size_t line,
                       const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  return os.str();
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Vector read_vector_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<double> vals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string tok;
    std::istringstream ls(line);
    while (std::getline(ls, tok, ',')) {
      // trim
      const auto b = tok.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = tok.find_last_not_of(" \t\r");
      tok = tok.substr(b, e - b + 1);
      double v;
      if (!parse_double(tok, v))
        throw ParseError(line_error(path, lineno, "bad number '" + tok + "'"));
      vals.push_back(v);
    }
  }
  Vector out(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = vals[i];
  return out;
}

void write_vector_csv(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out << format_double(v[i]) << '\n';
}

Matrix read_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::vector<double> row;
    std::string tok;
    std::istringstream ls(line);
    while (std::getline(ls, tok, ',')) {
      const auto b = tok.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = tok.find_last_not_of(" \t\r");
      tok = tok.substr(b, e - b + 1);
      double v;
      if (!parse_double(tok, v))
        throw ParseError(line_error(path, lineno, "bad number '" + tok + "'"));
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(line_error(path, lineno, "ragged row"));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": empty matrix");
  Matrix out(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

SpMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  ++lineno;
  std::istringstream hdr(line);
  std::string banner, object, fmt, field, symmetry;
  hdr >> banner >> object >> fmt >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || fmt != "coordinate")
    throw ParseError(line_error(path, lineno, "not a coordinate MatrixMarket file"));
  if (field != "real" && field != "integer")
    throw ParseError(line_error(path, lineno, "unsupported field '" + field + "'"));
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw ParseError(line_error(path, lineno, "unsupported symmetry '" + symmetry + "'"));

  Eigen::Index rows = 0, cols = 0;
  long long nnz = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    std::istringstream ls(line);
    if (!(ls >> rows >> cols >> nnz))
      throw ParseError(line_error(path, lineno, "bad size line"));
    break;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  long long seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    long long i, j;
    double v;
    if (!(ls >> i >> j >> v))
      throw ParseError(line_error(path, lineno, "bad entry"));
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw ParseError(line_error(path, lineno, "index out of range"));
    trips.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) trips.emplace_back(j - 1, i - 1, v);
    ++seen;
  }
  if (seen != nnz)
    throw ParseError(path + ": entry count does not match the size line");

  SpMatrix A(rows, cols);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

DesignMatrix read_design(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".mtx") == 0)
    return DesignMatrix(read_matrix_market(path));
  return DesignMatrix(read_dense_csv(path));
}

namespace {

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
}

}  // namespace

std::string instance_hash(const DesignMatrix& A, const Vector& b) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  if (A.is_sparse()) {
    const SpMatrix& S = A.sparse();
    for (int k = 0; k < S.outerSize(); ++k)
      for (SpMatrix::InnerIterator it(S, k); it; ++it) {
        const double v = it.value();
        const auto r = static_cast<std::int64_t>(it.row());
        const auto c = static_cast<std::int64_t>(it.col());
        fnv_bytes(h, &r, sizeof(r));
        fnv_bytes(h, &c, sizeof(c));
        fnv_bytes(h, &v, sizeof(v));
      }
  } else {
    fnv_bytes(h, A.dense().data(),
              sizeof(double) * static_cast<std::size_t>(A.dense().size()));
  }
  fnv_bytes(h, b.data(), sizeof(double) * static_cast<std::size_t>(b.size()));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fusedl0
