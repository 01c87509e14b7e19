#pragma once

#include <cmath>
#include <limits>

#include "vrec/common.hpp"

namespace vrec {

// Logistic function, evaluated without overflow for large |x|.
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// ln(1 + e^x)
inline double log1p_exp(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline Vector sigmoid(const Vector& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

// Max-subtracted softmax; output is strictly positive for finite input.
inline Vector softmax(const Vector& scores) {
  if (scores.size() == 0) return scores;
  double m = scores.maxCoeff();
  Vector e = (scores.array() - m).exp().matrix();
  return e / e.sum();
}

// log-softmax, exact for large score gaps.
inline Vector log_softmax(const Vector& scores) {
  double m = scores.maxCoeff();
  double lse = m + std::log((scores.array() - m).exp().sum());
  return (scores.array() - lse).matrix();
}

}  // namespace vrec
