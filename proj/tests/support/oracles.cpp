#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace oracle {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Messages gmp_init(int ns, int nu) {
  Messages msg;
  msg.xs = Matrix::Zero(ns, nu);
  msg.vs = Matrix::Constant(ns, nu, kInf);
  msg.xu = Matrix::Zero(nu, ns);
  msg.vu = Matrix::Constant(nu, ns, kInf);
  return msg;
}

void gmp_sweep(Messages& msg, const Matrix& h, const Vector& y, const Vector& xbar, const Vector& vbar,
               double noise_var) {
  const int ns = static_cast<int>(h.rows()), nu = static_cast<int>(h.cols());
  for (int m = 0; m < ns; ++m) {
    for (int k = 0; k < nu; ++k) {
      double mean = y[m];
      double var = noise_var;
      for (int i = 0; i < nu; ++i) {
        mean -= h(m, i) * msg.xu(i, m);
        var += h(m, i) * h(m, i) * msg.vu(i, m);
      }
      msg.xs(m, k) = mean;
      msg.vs(m, k) = var;
    }
  }
  for (int k = 0; k < nu; ++k) {
    for (int m = 0; m < ns; ++m) {
      double prec = 1.0 / vbar[k];
      double num = xbar[k] / vbar[k];
      for (int i = 0; i < ns; ++i) {
        if (i == m) continue;
        prec += h(i, k) * h(i, k) / msg.vs(i, k);
        num += h(i, k) * msg.xs(i, k) / msg.vs(i, k);
      }
      msg.vu(k, m) = 1.0 / prec;
      msg.xu(k, m) = msg.vu(k, m) * num;
    }
  }
}

void sagmp_sweep(Messages& msg, const Matrix& h, const Vector& y, const Vector& xbar, const Vector& vbar,
                 double noise_var, double w) {
  const int ns = static_cast<int>(h.rows()), nu = static_cast<int>(h.cols());
  const double sw = std::sqrt(w);
  Vector vbar_s(ns);
  for (int m = 0; m < ns; ++m) {
    vbar_s[m] = noise_var;
    for (int k = 0; k < nu; ++k) vbar_s[m] += h(m, k) * h(m, k) * vbar[k];
  }
  const Matrix xs_prev = msg.xs;
  for (int m = 0; m < ns; ++m) {
    for (int k = 0; k < nu; ++k) {
      double mean = sw * y[m];
      double var = noise_var;
      for (int i = 0; i < nu; ++i) {
        mean -= sw * h(m, i) * msg.xu(i, m);
        var += h(m, i) * h(m, i) * msg.vu(i, m);
      }
      msg.xs(m, k) = mean - (w - 1.0) * xs_prev(m, k);
      msg.vs(m, k) = var;
    }
  }
  for (int k = 0; k < nu; ++k) {
    for (int m = 0; m < ns; ++m) {
      double prec = 1.0 / vbar[k];
      double num = xbar[k] / vbar[k];
      for (int i = 0; i < ns; ++i) {
        if (i == m) continue;
        prec += h(i, k) * h(i, k) / msg.vs(i, k);
        num += sw * h(i, k) / vbar_s[i] * msg.xs(i, k);
      }
      msg.vu(k, m) = 1.0 / prec;
      msg.xu(k, m) = vbar[k] * num;
    }
  }
}

void posterior(const Messages& msg, const Matrix& h, const Vector& xbar, const Vector& vbar, Vector& mean,
               Vector& var) {
  const int ns = static_cast<int>(h.rows()), nu = static_cast<int>(h.cols());
  mean.resize(nu);
  var.resize(nu);
  for (int k = 0; k < nu; ++k) {
    double prec = 1.0 / vbar[k];
    double num = xbar[k] / vbar[k];
    for (int m = 0; m < ns; ++m) {
      prec += h(m, k) * h(m, k) / msg.vs(m, k);
      num += h(m, k) * msg.xs(m, k) / msg.vs(m, k);
    }
    var[k] = 1.0 / prec;
    mean[k] = num / prec;
  }
}

Vector woodbury_lmmse(const Matrix& h, const Vector& y, const Vector& xbar, const Vector& vbar, double noise_var) {
  const Matrix v = vbar.asDiagonal();
  Matrix s = h * v * h.transpose();
  s.diagonal().array() += noise_var;
  return xbar + v * h.transpose() * s.fullPivLu().solve(y - h * xbar);
}

double symmetric_radius(const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double general_radius(const Matrix& b) {
  Eigen::EigenSolver<Matrix> es(b, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace oracle
