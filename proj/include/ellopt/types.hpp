#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <utility>

namespace ellopt {

using Scalar = double;
using Index = Eigen::Index;

using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Per-node values of a P1 field (u, y, phi, lambda, v, w).
using NodalField = Vector;

/// Compressed-row sparse matrix (row_offsets = outerIndexPtr,
/// col_indices = innerIndexPtr, values = valuePtr).
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// Malformed input text; line() is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A mesh cell too degenerate to assemble.
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem data inconsistent with the requested operation
/// (e.g. an active bound at infinity).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver ran out of iterations.
class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, Scalar residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  Scalar residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  Scalar residual_;
  int iterations_;
};

/// CG met a direction of nonpositive curvature; the operator is not
/// positive definite on its domain.
class DefinitenessError : public std::runtime_error {
 public:
  DefinitenessError(const std::string& what, Vector direction)
      : std::runtime_error(what), direction_(std::move(direction)) {}
  const Vector& direction() const { return direction_; }

 private:
  Vector direction_;
};

}  // namespace ellopt
