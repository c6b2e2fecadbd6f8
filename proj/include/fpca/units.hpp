#pragma once

namespace fpca::units {

template <class Tag>
struct Quantity {
  double value = 0.0;

  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : value(v) {}

  constexpr Quantity& operator+=(Quantity o) {
    value += o.value;
    return *this;
  }
  friend constexpr Quantity operator+(Quantity a, Quantity b) { return Quantity(a.value + b.value); }
  friend constexpr Quantity operator-(Quantity a, Quantity b) { return Quantity(a.value - b.value); }
  friend constexpr Quantity operator*(double k, Quantity q) { return Quantity(k * q.value); }
  friend constexpr Quantity operator*(Quantity q, double k) { return Quantity(k * q.value); }
  friend constexpr Quantity operator/(Quantity q, double k) { return Quantity(q.value / k); }
  friend constexpr double operator/(Quantity a, Quantity b) { return a.value / b.value; }
  friend constexpr auto operator<=>(const Quantity&, const Quantity&) = default;
};

struct JoulesTag {};
struct SecondsTag {};
struct HertzTag {};
struct BitsPerSecondTag {};

using Joules = Quantity<JoulesTag>;
using Seconds = Quantity<SecondsTag>;
using Hertz = Quantity<HertzTag>;
using BitsPerSecond = Quantity<BitsPerSecondTag>;

/// Joules spent per transferred bit.
struct JoulesPerBit {
  double value = 0.0;
};

constexpr Hertz inverse(Seconds t) { return Hertz(1.0 / t.value); }
constexpr Joules operator*(double bits, JoulesPerBit e) { return Joules(bits * e.value); }
constexpr Seconds operator/(double bits, BitsPerSecond bw) { return Seconds(bits / bw.value); }

constexpr Joules picojoules(double pj) { return Joules(pj * 1e-12); }
constexpr Seconds microseconds(double us) { return Seconds(us * 1e-6); }

}  // namespace fpca::units
