#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace zrf {

// Jump-rate classes.  All satisfy g(0)=0, g(k)>0 for k>=1 and have
// uniformly bounded increments, so the process is well defined.
enum class RateId {
  kConstant,   // g(k) = 1{k>=1}
  kLinear,     // g(k) = k
  kPower,      // g(k) = k^b0, 0 < b0 < 1
  kBoundedInc  // g(k) = (k+1)/2 for k>=1; affine with increment 1/2
};

class RateFunction {
 public:
  RateFunction() : RateFunction(RateId::kLinear) {}
  explicit RateFunction(RateId id, double power_exponent = 0.5)
      : id_(id), b0_(power_exponent) {
    if (id == RateId::kPower && (b0_ <= 0.0 || b0_ >= 1.0))
      throw std::invalid_argument("power rate exponent must be in (0,1)");
  }

  double operator()(int64_t k) const {
    if (k <= 0) return 0.0;
    switch (id_) {
      case RateId::kConstant:
        return 1.0;
      case RateId::kLinear:
        return static_cast<double>(k);
      case RateId::kPower:
        return std::pow(static_cast<double>(k), b0_);
      case RateId::kBoundedInc:
        return 0.5 * static_cast<double>(k + 1);
    }
    return 0.0;
  }

  // Lipschitz constant of increments, sup_k |g(k+1)-g(k)|
  double lip_const() const {
    switch (id_) {
      case RateId::kConstant:
        return 1.0;
      case RateId::kLinear:
        return 1.0;
      case RateId::kPower:
        return 1.0;  // jump g(0)->g(1) dominates
      case RateId::kBoundedInc:
        return 1.0;
    }
    return 1.0;
  }

  // liminf_k g(k), the fugacity radius theta_*
  double theta_star() const {
    switch (id_) {
      case RateId::kConstant:
        return 1.0;
      default:
        return std::numeric_limits<double>::infinity();
    }
  }

  RateId id() const { return id_; }
  double power_exponent() const { return b0_; }

  std::string name() const {
    switch (id_) {
      case RateId::kConstant:
        return "constant";
      case RateId::kLinear:
        return "linear";
      case RateId::kPower:
        return "power(" + std::to_string(b0_) + ")";
      case RateId::kBoundedInc:
        return "bounded-increments";
    }
    return "?";
  }

 private:
  RateId id_;
  double b0_;
};

}  // namespace zrf
