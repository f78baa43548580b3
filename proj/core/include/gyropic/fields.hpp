// Field interface seen by the particle pushers, plus the bundled analytic
// fields. The external magnetic field is always axial with an analytic
// transverse intensity profile b(x,y); the electric field is either analytic
// (benchmark runs) or grid-based (self-consistent runs, see pic.hpp).
#pragma once

#include "gyropic/vec.hpp"

namespace gyropic {

struct Field {
  virtual ~Field() = default;

  virtual Vec3 E(double t, const Vec3& x) const = 0;
  // Intensity of the axial magnetic field B = b(x,y)/eps * e_z.
  virtual double b(const Vec2& xp) const = 0;
  virtual Vec2 grad_b(const Vec2& xp) const = 0;

  Vec2 grad_ln_b(const Vec2& xp) const { return grad_b(xp) / b(xp); }
};

// Radial potential well with an axial ripple inside a magnetic ring trap:
//   phi = 20 sqrt(x^2+y^2) + cos(2 pi z)/2,   b = 1/(100 - x^2 - y^2).
// E = -grad phi; e_scale turns the electric field off (0) or on (1).
class RadialTrapField final : public Field {
 public:
  explicit RadialTrapField(double e_scale = 1.0) : e_scale_(e_scale) {}

  Vec3 E(double t, const Vec3& x) const override {
    (void)t;
    const double r = norm(x.xy());
    Vec2 eperp{0.0, 0.0};
    if (r > 0.0) eperp = (-20.0 / r) * x.xy();
    const double ez = kPi * std::sin(2.0 * kPi * x.z);
    return e_scale_ * Vec3{eperp, ez};
  }

  double b(const Vec2& xp) const override { return 1.0 / (100.0 - norm2(xp)); }

  Vec2 grad_b(const Vec2& xp) const override {
    const double d = 100.0 - norm2(xp);
    return (2.0 / (d * d)) * xp;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  double e_scale_;
};

// Constant axial intensity (annular column runs).
class UniformBField : public Field {
 public:
  explicit UniformBField(double b0 = 1.0) : b0_(b0) {}

  Vec3 E(double, const Vec3&) const override { return {}; }
  double b(const Vec2&) const override { return b0_; }
  Vec2 grad_b(const Vec2&) const override { return {}; }

 private:
  double b0_;
};

// Tokamak-like intensity decaying away from the axis singular ring:
//   b = 20 / sqrt(400 - x^2 - y^2).
class DShapeBField : public Field {
 public:
  Vec3 E(double, const Vec3&) const override { return {}; }

  double b(const Vec2& xp) const override {
    return 20.0 / std::sqrt(400.0 - norm2(xp));
  }

  Vec2 grad_b(const Vec2& xp) const override {
    const double d = 400.0 - norm2(xp);
    return (20.0 / (d * std::sqrt(d))) * xp;
  }
};

}  // namespace gyropic
