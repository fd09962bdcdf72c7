#pragma once

// Adaptive Dormand-Prince 5(4) integrator for dy/dt = f(t, y) over dense
// Eigen states (vectors or matrices of any scalar type).
//
// The local error estimate is measured relative to the state's Frobenius
// norm: a step is accepted when ‖y5 − y4‖ ≤ tol · max(‖y‖, ‖y_new‖). For
// wave functions and propagators this is the natural "relative local error".

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "tkerr/errors.hpp"

namespace tkerr {

template <typename State, typename Rhs>
class DormandPrince {
 public:
  /// `rhs(t, y, dydt)` writes f(t, y) into dydt.
  DormandPrince(Rhs rhs, double tolerance, long max_steps = 200'000'000)
      : rhs_(std::move(rhs)), tol_(tolerance), max_steps_(max_steps) {}

  /// Advances y from t to t_end, landing exactly on t_end. The step size
  /// carries over between calls.
  void advance(double& t, State& y, double t_end) {
    if (t_end <= t) return;
    resize_like(y);
    if (h_ <= 0.0) h_ = initial_step(t, y, t_end - t);

    bool last_rejected = false;
    rhs_(t, y, k1_);
    while (t < t_end) {
      if (steps_ + rejected_ >= max_steps_) {
        throw IntegrationError("Dormand-Prince: step budget of " + std::to_string(max_steps_) +
                               " exhausted");
      }
      double h = std::min(h_, t_end - t);
      const bool final_step = h >= t_end - t;
      if (h < 1e-14 * std::max(std::abs(t), std::abs(t_end))) {
        throw IntegrationError("Dormand-Prince: step size underflow at t = " + std::to_string(t));
      }

      stage(t, y, h);
      const double scale = std::max({y.norm(), y_new_.norm(), std::numeric_limits<double>::min()});
      const double err = error_.norm() / (tol_ * scale);

      if (err <= 1.0) {
        t = final_step ? t_end : t + h;
        y.swap(y_new_);
        k1_.swap(k7_);  // FSAL
        ++steps_;
        double factor = err == 0.0 ? kMaxGrow : kSafety * std::pow(err, -0.2);
        factor = std::clamp(factor, kMinShrink, last_rejected ? 1.0 : kMaxGrow);
        if (!final_step || factor < 1.0) h_ = h * factor;
        last_rejected = false;
      } else {
        ++rejected_;
        const double factor = std::isfinite(err) ? kSafety * std::pow(err, -0.2) : kMinShrink;
        h_ = h * std::clamp(factor, kMinShrink, 1.0);
        last_rejected = true;
      }
    }
  }

  long steps() const { return steps_; }
  long rejected() const { return rejected_; }
  double step_size() const { return h_; }

 private:
  static constexpr double kSafety = 0.9;
  static constexpr double kMinShrink = 0.2;
  static constexpr double kMaxGrow = 5.0;

  void resize_like(const State& y) {
    if (k1_.rows() == y.rows() && k1_.cols() == y.cols()) return;
    for (State* s : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &y_new_, &tmp_, &error_}) {
      s->resize(y.rows(), y.cols());
    }
  }

  double initial_step(double t, const State& y, double span) {
    rhs_(t, y, k1_);
    const double d0 = y.norm();
    const double d1 = k1_.norm();
    double h0 = (d0 < 1e-300 || d1 < 1e-300) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    tmp_ = y + h0 * k1_;
    rhs_(t + h0, tmp_, k2_);
    const double d2 = (k2_ - k1_).norm() / (h0 * tol_ * d0);
    const double d1s = d1 / (tol_ * d0);
    const double dmax = std::max(d1s, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, span});
  }

  // Stages 2..7 given k1 = f(t, y); fills y_new_, k7_ and error_.
  void stage(double t, const State& y, double h) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    tmp_ = y + (h * a21) * k1_;
    rhs_(t + c2 * h, tmp_, k2_);
    tmp_ = y + h * (a31 * k1_ + a32 * k2_);
    rhs_(t + c3 * h, tmp_, k3_);
    tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs_(t + c4 * h, tmp_, k4_);
    tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs_(t + c5 * h, tmp_, k5_);
    tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs_(t + h, tmp_, k6_);
    y_new_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs_(t + h, y_new_, k7_);
    error_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
  }

  Rhs rhs_;
  double tol_;
  long max_steps_;
  double h_ = 0.0;
  long steps_ = 0;
  long rejected_ = 0;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, y_new_, tmp_, error_;
};

}  // namespace tkerr
