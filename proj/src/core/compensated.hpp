#pragma once

#include <Eigen/Dense>
#include <complex>

namespace spa {

// Neumaier compensated accumulation; summation order is fixed by the caller,
// which together with the compensation makes reductions bit-reproducible for
// a given configuration.
class KahanSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

class KahanComplexSum {
 public:
  void add(std::complex<double> v) {
    re_.add(v.real());
    im_.add(v.imag());
  }
  std::complex<double> value() const { return {re_.value(), im_.value()}; }

 private:
  KahanSum re_, im_;
};

// Entrywise compensated matrix accumulator.
class KahanMatrixSum {
 public:
  explicit KahanMatrixSum(Eigen::Index rows, Eigen::Index cols)
      : sum_(Eigen::MatrixXcd::Zero(rows, cols)), comp_(Eigen::MatrixXcd::Zero(rows, cols)) {}

  void add(const Eigen::MatrixXcd& v) {
    for (Eigen::Index j = 0; j < sum_.cols(); ++j)
      for (Eigen::Index i = 0; i < sum_.rows(); ++i) {
        add_scalar(sum_(i, j), comp_(i, j), v(i, j));
      }
  }

  Eigen::MatrixXcd value() const { return sum_ + comp_; }

 private:
  static void add_scalar(std::complex<double>& s, std::complex<double>& c, std::complex<double> v) {
    auto step = [](double& sc, double& cc, double vv) {
      double t = sc + vv;
      if (std::abs(sc) >= std::abs(vv))
        cc += (sc - t) + vv;
      else
        cc += (vv - t) + sc;
      sc = t;
    };
    double sr = s.real(), si = s.imag(), cr = c.real(), ci = c.imag();
    step(sr, cr, v.real());
    step(si, ci, v.imag());
    s = {sr, si};
    c = {cr, ci};
  }

  Eigen::MatrixXcd sum_, comp_;
};

}  // namespace spa
