#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace lsqswarm {

class DenseVector;

// Row-major dense matrix of doubles. Entries are validated finite whenever a
// matrix is built from external data.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);  // zero-filled
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }

  DenseMatrix transposed() const;
  DenseMatrix operator+(const DenseMatrix& other) const;
  DenseMatrix operator-(const DenseMatrix& other) const;
  DenseMatrix operator*(const DenseMatrix& other) const;
  DenseVector operator*(const DenseVector& x) const;
  DenseMatrix scaled(double a) const;

  void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& sub);
  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t height,
                    std::size_t width) const;

  double frobenius_norm() const;
  double max_abs() const;
  bool is_symmetric(double tol) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim);  // zero-filled
  explicit DenseVector(std::vector<double> entries);

  std::size_t dim() const { return data_.size(); }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  const std::vector<double>& entries() const { return data_; }

  DenseVector operator+(const DenseVector& other) const;
  DenseVector operator-(const DenseVector& other) const;
  DenseVector scaled(double a) const;
  double dot(const DenseVector& other) const;
  double norm() const;

  DenseVector segment(std::size_t offset, std::size_t len) const;
  void set_segment(std::size_t offset, const DenseVector& sub);

 private:
  std::vector<double> data_;
};

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double max_abs_diff(const DenseVector& a, const DenseVector& b);

// Text format: header line "rows cols", then one line of entries per row,
// numbers written with 17 significant digits.
DenseMatrix parse_matrix(std::istream& in);
void format_matrix(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m);

// Vectors travel as single-column matrices.
DenseVector parse_vector(std::istream& in);
void format_vector(std::ostream& out, const DenseVector& v);
DenseVector read_vector_file(const std::filesystem::path& path);
void write_vector_file(const std::filesystem::path& path, const DenseVector& v);

}  // namespace lsqswarm
