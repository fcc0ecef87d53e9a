#pragma once

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>

namespace swarm {

// Sparse polynomial in up to three variables w_0, w_1, w_2.
class Polynomial {
 public:
  using Exponents = std::array<int, 3>;

  Polynomial() = default;
  explicit Polynomial(int dim) : dim_(dim) {}

  static Polynomial constant(int dim, double value) {
    Polynomial p(dim);
    p.add_term({0, 0, 0}, value);
    return p;
  }
  static Polynomial variable(int dim, int k) {
    Polynomial p(dim);
    Exponents e{0, 0, 0};
    e[k] = 1;
    p.add_term(e, 1.0);
    return p;
  }
  // |w|^2
  static Polynomial norm_sq(int dim) {
    Polynomial p(dim);
    for (int k = 0; k < dim; ++k) {
      Exponents e{0, 0, 0};
      e[k] = 2;
      p.add_term(e, 1.0);
    }
    return p;
  }

  int dim() const { return dim_; }
  const std::map<Exponents, double>& terms() const { return terms_; }

  void add_term(const Exponents& e, double c) {
    if (c == 0.0) return;
    auto& slot = terms_[e];
    slot += c;
    if (slot == 0.0) terms_.erase(e);
  }

  double operator()(std::span<const double> w) const {
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c;
      for (int k = 0; k < dim_; ++k)
        for (int j = 0; j < e[k]; ++j) t *= w[k];
      sum += t;
    }
    return sum;
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
    return d;
  }

  Polynomial derivative(int k) const {
    Polynomial out(dim_);
    for (const auto& [e, c] : terms_) {
      if (e[k] == 0) continue;
      Exponents f = e;
      f[k] -= 1;
      out.add_term(f, c * e[k]);
    }
    return out;
  }

  Polynomial laplacian() const {
    Polynomial out(dim_);
    for (int k = 0; k < dim_; ++k) out += derivative(k).derivative(k);
    return out;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check(o);
    if (terms_.empty() && !o.terms_.empty()) dim_ = o.dim_;
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) { return *this += o * -1.0; }
  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial out(a.dim_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_)
        out.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
    return out;
  }

 private:
  void check(const Polynomial& o) const {
    if (o.dim_ != dim_ && !o.terms_.empty() && !terms_.empty())
      throw std::invalid_argument("polynomial dimension mismatch");
  }

  int dim_ = 1;
  std::map<Exponents, double> terms_;
};

}  // namespace swarm
