#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "canal4d/errors.hpp"
#include "canal4d/spine.hpp"

namespace canal4d {

/// r and its first three derivatives at one u.
struct RadiusJet {
  double r = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
};

/// r and r' in long double.
struct RadiusJetX {
  long double r = 0.0L;
  long double r1 = 0.0L;
};

/// Radius function with exact derivatives up to third order. An optional
/// long double evaluator of (r, r') serves the difference stencils; without
/// one the double values are widened.
class RadiusProfile {
 public:
  using Fn = std::function<RadiusJet(double)>;
  using FnX = std::function<RadiusJetX(long double)>;

  RadiusProfile(Fn fn, Interval domain, std::string tag, FnX ext = {})
      : fn_(std::move(fn)), ext_(std::move(ext)), domain_(domain), tag_(std::move(tag)) {}

  RadiusJet at(double u) const {
    if (!domain_.contains(u))
      throw DomainError("radius '" + tag_ + "': u = " + std::to_string(u) + " outside its interval");
    return fn_(u);
  }
  double operator()(double u) const { return at(u).r; }

  RadiusJetX at_ext(long double u) const {
    if (!ext_) {
      const RadiusJet j = at(static_cast<double>(u));
      return {j.r, j.r1};
    }
    if (!domain_.contains(static_cast<double>(u)))
      throw DomainError("radius '" + tag_ + "': u = " + std::to_string(static_cast<double>(u)) +
                        " outside its interval");
    return ext_(u);
  }

  const Interval& domain() const { return domain_; }
  const std::string& tag() const { return tag_; }

  static RadiusProfile constant(double value) {
    return RadiusProfile([value](double) { return RadiusJet{value, 0.0, 0.0, 0.0}; }, {}, "constant",
                         [value](long double) { return RadiusJetX{value, 0.0L}; });
  }

  /// sum_j coeffs[j] u^j
  static RadiusProfile polynomial(std::vector<double> coeffs, Interval domain = {}) {
    auto ext = [c = coeffs](long double u) {
      RadiusJetX j;
      for (auto it = c.rbegin(); it != c.rend(); ++it) {
        j.r1 = j.r1 * u + j.r;
        j.r = j.r * u + *it;
      }
      return j;
    };
    auto fn = [c = std::move(coeffs)](double u) {
      RadiusJet j;
      // Horner on value and the three derivatives simultaneously.
      for (auto it = c.rbegin(); it != c.rend(); ++it) {
        j.r3 = j.r3 * u + 3.0 * j.r2;
        j.r2 = j.r2 * u + 2.0 * j.r1;
        j.r1 = j.r1 * u + j.r;
        j.r = j.r * u + *it;
      }
      return j;
    };
    return RadiusProfile(std::move(fn), domain, "polynomial", std::move(ext));
  }

 private:
  Fn fn_;
  FnX ext_;
  Interval domain_;
  std::string tag_;
};

}  // namespace canal4d
