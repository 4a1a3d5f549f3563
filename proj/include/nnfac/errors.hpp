#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace nnfac {

// Thrown when an iterative routine exhausts its iteration budget. Carries the
// last residual and, where meaningful, the last iterate so callers can inspect
// how far the computation got.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, long iterations)
      : std::runtime_error(what + " (residual " + std::to_string(residual) +
                           " after " + std::to_string(iterations) +
                           " iterations)"),
        residual_(residual),
        iterations_(iterations) {}

  ConvergenceError(const std::string& what, double residual, long iterations,
                   Eigen::MatrixXd last_iterate)
      : ConvergenceError(what, residual, iterations) {
    last_iterate_ = std::move(last_iterate);
    has_iterate_ = true;
  }

  double residual() const { return residual_; }
  long iterations() const { return iterations_; }
  bool has_last_iterate() const { return has_iterate_; }
  const Eigen::MatrixXd& last_iterate() const { return last_iterate_; }

 private:
  double residual_ = 0.0;
  long iterations_ = 0;
  bool has_iterate_ = false;
  Eigen::MatrixXd last_iterate_;
};

// Malformed input file (CSV or JSON); remembers the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, long line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  long line() const { return line_; }

 private:
  long line_ = 0;
};

}  // namespace nnfac
