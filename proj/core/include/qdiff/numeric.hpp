#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace qdiff {

inline constexpr double kPi = 3.14159265358979323846;

// sin(x)/x with the removable singularity filled in.
double sinc(double x) noexcept;

// Compensated summation (Neumaier variant of Kahan).
class NeumaierSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_factorial(int n);

// Evenly spaced points including both end points.
std::vector<double> linspace(double lo, double hi, int points);

// Composite trapezoid rule over (possibly non-uniform) abscissae.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace qdiff
