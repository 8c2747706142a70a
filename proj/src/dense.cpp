#include "lsqswarm/dense.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "lsqswarm/errors.hpp"
#include "lsqswarm/kernels.hpp"

namespace lsqswarm {
namespace {

void check_finite(const std::vector<double>& entries, const char* what) {
  for (double v : entries)
    if (!std::isfinite(v))
      throw InvalidInputError(std::string(what) + " contains a non-finite entry");
}

void check_same_shape(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("matrix shape mismatch");
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_)
    throw DimensionError("entry count does not match rows*cols");
  check_finite(data_, "matrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c)
          out(i * b.rows() + r, j * b.cols() + c) = aij * b(r, c);
    }
  return out;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

DenseMatrix DenseMatrix::operator+(const DenseMatrix& other) const {
  check_same_shape(*this, other);
  DenseMatrix out(rows_, cols_);
  kernels::active_kernels().add_scaled(data(), 1.0, other.data(), out.data(),
                                       data_.size());
  return out;
}

DenseMatrix DenseMatrix::operator-(const DenseMatrix& other) const {
  check_same_shape(*this, other);
  DenseMatrix out(rows_, cols_);
  kernels::active_kernels().add_scaled(data(), -1.0, other.data(), out.data(),
                                       data_.size());
  return out;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& other) const {
  if (cols_ != other.rows()) throw DimensionError("matrix product shape mismatch");
  DenseMatrix out(rows_, other.cols());
  const auto& k = kernels::active_kernels();
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = 0; p < cols_; ++p) {
      const double aip = (*this)(i, p);
      if (aip != 0.0) k.axpy(aip, other.row(p), out.row(i), other.cols());
    }
  return out;
}

DenseVector DenseMatrix::operator*(const DenseVector& x) const {
  if (cols_ != x.dim()) throw DimensionError("matvec shape mismatch");
  DenseVector out(rows_);
  kernels::active_kernels().matvec(data(), rows_, cols_, x.data(), out.data());
  return out;
}

DenseMatrix DenseMatrix::scaled(double a) const {
  DenseMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = a * data_[i];
  return out;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& sub) {
  if (r0 + sub.rows() > rows_ || c0 + sub.cols() > cols_)
    throw DimensionError("block write out of range");
  for (std::size_t r = 0; r < sub.rows(); ++r)
    for (std::size_t c = 0; c < sub.cols(); ++c) (*this)(r0 + r, c0 + c) = sub(r, c);
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t height,
                               std::size_t width) const {
  if (r0 + height > rows_ || c0 + width > cols_)
    throw DimensionError("block read out of range");
  DenseMatrix out(height, width);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
  return out;
}

double DenseMatrix::frobenius_norm() const {
  return std::sqrt(kernels::active_kernels().dot(data(), data(), data_.size()));
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

bool DenseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r + 1; c < cols_; ++c)
      if (std::fabs((*this)(r, c) - (*this)(c, r)) > tol) return false;
  return true;
}

DenseVector::DenseVector(std::size_t dim) : data_(dim, 0.0) {}

DenseVector::DenseVector(std::vector<double> entries) : data_(std::move(entries)) {
  check_finite(data_, "vector");
}

DenseVector DenseVector::operator+(const DenseVector& other) const {
  if (dim() != other.dim()) throw DimensionError("vector sum shape mismatch");
  DenseVector out(dim());
  kernels::active_kernels().add_scaled(data(), 1.0, other.data(), out.data(), dim());
  return out;
}

DenseVector DenseVector::operator-(const DenseVector& other) const {
  if (dim() != other.dim()) throw DimensionError("vector difference shape mismatch");
  DenseVector out(dim());
  kernels::active_kernels().add_scaled(data(), -1.0, other.data(), out.data(), dim());
  return out;
}

DenseVector DenseVector::scaled(double a) const {
  DenseVector out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = a * data_[i];
  return out;
}

double DenseVector::dot(const DenseVector& other) const {
  if (dim() != other.dim()) throw DimensionError("dot shape mismatch");
  return kernels::active_kernels().dot(data(), other.data(), dim());
}

double DenseVector::norm() const { return std::sqrt(dot(*this)); }

DenseVector DenseVector::segment(std::size_t offset, std::size_t len) const {
  if (offset + len > dim()) throw DimensionError("segment out of range");
  DenseVector out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = data_[offset + i];
  return out;
}

void DenseVector::set_segment(std::size_t offset, const DenseVector& sub) {
  if (offset + sub.dim() > dim()) throw DimensionError("segment write out of range");
  for (std::size_t i = 0; i < sub.dim(); ++i) data_[offset + i] = sub[i];
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b);
  double m = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      m = std::max(m, std::fabs(a(r, c) - b(r, c)));
  return m;
}

double max_abs_diff(const DenseVector& a, const DenseVector& b) {
  if (a.dim() != b.dim()) throw DimensionError("vector shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

namespace {

// Pulls the next non-blank line; returns false at EOF.
bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no,
                              std::size_t expected) {
  std::istringstream ls(line);
  std::vector<double> row;
  double v;
  while (ls >> v) {
    if (!std::isfinite(v)) throw ParseError(line_no, "non-finite entry");
    row.push_back(v);
  }
  if (!ls.eof()) {
    std::string tail;
    ls.clear();
    ls >> tail;
    throw ParseError(line_no, "unexpected token '" + tail + "'");
  }
  if (row.size() != expected)
    throw ParseError(line_no, "expected " + std::to_string(expected) +
                                  " entries, found " + std::to_string(row.size()));
  return row;
}

}  // namespace

DenseMatrix parse_matrix(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  if (!next_content_line(in, line, line_no))
    throw ParseError(line_no, "missing matrix header");
  long long rows, cols;
  {
    std::istringstream hs(line);
    std::string tail;
    if (!(hs >> rows >> cols) || (hs >> tail) || rows < 0 || cols < 0)
      throw ParseError(line_no, "matrix header must be 'rows cols'");
  }
  DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (long long r = 0; r < rows; ++r) {
    if (!next_content_line(in, line, line_no))
      throw ParseError(line_no, "matrix row " + std::to_string(r) + " missing");
    auto row = parse_row(line, line_no, static_cast<std::size_t>(cols));
    for (long long c = 0; c < cols; ++c)
      m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          row[static_cast<std::size_t>(c)];
  }
  if (next_content_line(in, line, line_no))
    throw ParseError(line_no, "trailing content after matrix rows");
  return m;
}

void format_matrix(std::ostream& out, const DenseMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[48];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

DenseMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open '" + path.string() + "'");
  try {
    return parse_matrix(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line, path.string() + ": " + e.reason);
  }
}

void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  format_matrix(out, m);
}

DenseVector parse_vector(std::istream& in) {
  DenseMatrix m = parse_matrix(in);
  if (m.cols() != 1)
    throw InvalidInputError("vector file must have a single column");
  std::vector<double> entries(m.data(), m.data() + m.rows());
  return DenseVector(std::move(entries));
}

void format_vector(std::ostream& out, const DenseVector& v) {
  DenseMatrix m(v.dim(), 1);
  for (std::size_t i = 0; i < v.dim(); ++i) m(i, 0) = v[i];
  format_matrix(out, m);
}

DenseVector read_vector_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open '" + path.string() + "'");
  try {
    return parse_vector(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line, path.string() + ": " + e.reason);
  }
}

void write_vector_file(const std::filesystem::path& path, const DenseVector& v) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  format_vector(out, v);
}

}  // namespace lsqswarm
