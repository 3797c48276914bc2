#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dlab {

// Exact rational arithmetic for exponent bookkeeping (admissibility checks,
// predicted decay exponents). Denominator 0 with numerator 1 encodes +infinity,
// used for the Lebesgue exponent q or r = inf.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(long long num) : p_(num) {}
  Rational(long long num, long long den) : p_(num), q_(den) { normalize(); }

  static Rational infinity() {
    Rational r;
    r.p_ = 1;
    r.q_ = 0;
    return r;
  }

  bool is_inf() const { return q_ == 0; }
  long long num() const { return p_; }
  long long den() const { return q_; }

  double value() const {
    if (is_inf()) return std::numeric_limits<double>::infinity();
    return static_cast<double>(p_) / static_cast<double>(q_);
  }

  // 1/x, with 1/inf = 0 and 1/0 = inf.
  Rational inv() const {
    Rational r;
    if (p_ == 0) return infinity();
    r.p_ = p_ > 0 ? q_ : -q_;
    r.q_ = p_ > 0 ? p_ : -p_;
    return r;
  }

  Rational operator-() const {
    if (is_inf()) throw std::domain_error("Rational: negating infinity");
    return Rational(-p_, q_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    a.check_finite("operator+");
    b.check_finite("operator+");
    return Rational(a.p_ * b.q_ + b.p_ * a.q_, a.q_ * b.q_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    if (a.is_inf() || b.is_inf()) {
      const Rational& fin = a.is_inf() ? b : a;
      if (fin.p_ == 0) throw std::domain_error("Rational: 0 * infinity");
      if (fin.p_ < 0 || (a.is_inf() && b.is_inf() && (a.p_ < 0 || b.p_ < 0)))
        throw std::domain_error("Rational: signed infinity product");
      return infinity();
    }
    return Rational(a.p_ * b.p_, a.q_ * b.q_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) { return a * b.inv(); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.p_ == b.p_ && a.q_ == b.q_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    if (a.is_inf()) return false;
    if (b.is_inf()) return true;
    return a.p_ * b.q_ < b.p_ * a.q_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

  std::string str() const {
    if (is_inf()) return "inf";
    if (q_ == 1) return std::to_string(p_);
    return std::to_string(p_) + "/" + std::to_string(q_);
  }

 private:
  long long p_ = 0;
  long long q_ = 1;

  void check_finite(const char* op) const {
    if (is_inf()) throw std::domain_error(std::string("Rational: infinity in ") + op);
  }

  void normalize() {
    if (q_ == 0) {
      if (p_ == 0) throw std::domain_error("Rational: 0/0");
      p_ = p_ > 0 ? 1 : -1;
      return;
    }
    if (q_ < 0) {
      p_ = -p_;
      q_ = -q_;
    }
    long long g = std::gcd(p_ < 0 ? -p_ : p_, q_);
    if (g > 1) {
      p_ /= g;
      q_ /= g;
    }
  }
};

}  // namespace dlab
