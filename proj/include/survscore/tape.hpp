#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace survscore::ad {

class Tape;

// Handle into a tape; cheap to copy. A default-constructed Var is invalid.
struct Var {
  std::int32_t id = -1;
  Tape* tape = nullptr;

  bool valid() const { return tape != nullptr && id >= 0; }
};

struct NonFiniteError : std::runtime_error {
  int node_id;
  NonFiniteError(int node, const std::string& what)
      : std::runtime_error(what), node_id(node) {}
};

// Append-only reverse-mode tape over scalars. Every op eagerly checks that the
// produced value and local partials are finite and throws NonFiniteError with
// the offending node id otherwise.
class Tape {
 public:
  enum class Op : std::uint8_t {
    leaf, constant, add, sub, mul, div, neg, exp, log, tanh, logistic,
    clamp, pow, affine, custom
  };

  Var param(double value);
  Var constant(double value);

  Var add(Var a, Var b) { return push(Op::add, val(a) + val(b), a.id, 1.0, b.id, 1.0); }
  Var sub(Var a, Var b) { return push(Op::sub, val(a) - val(b), a.id, 1.0, b.id, -1.0); }
  Var mul(Var a, Var b) { return push(Op::mul, val(a) * val(b), a.id, val(b), b.id, val(a)); }
  Var div(Var a, Var b) {
    const double y = val(b);
    return push(Op::div, val(a) / y, a.id, 1.0 / y, b.id, -val(a) / (y * y));
  }
  Var neg(Var a) { return push(Op::neg, -val(a), a.id, -1.0); }
  // a*x + b with constant coefficients; the constant never hits the tape.
  Var affine(Var x, double a, double b) { return push(Op::affine, a * val(x) + b, x.id, a); }
  Var exp_op(Var a) {
    const double v = std::exp(val(a));
    return push(Op::exp, v, a.id, v);
  }
  Var log_op(Var a) { return push(Op::log, std::log(val(a)), a.id, 1.0 / val(a)); }
  Var tanh_op(Var a) {
    const double v = std::tanh(val(a));
    return push(Op::tanh, v, a.id, 1.0 - v * v);
  }
  Var logistic_op(Var a) {
    const double x = val(a);
    const double v = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return push(Op::logistic, v, a.id, v * (1.0 - v));
  }
  // Pass-through subgradient: 1 inside [lo, hi], 0 outside.
  Var clamp_op(Var a, double lo, double hi) {
    const double x = val(a);
    const bool inside = x >= lo && x <= hi;
    note_clamp(!inside);
    const double v = x < lo ? lo : (x > hi ? hi : x);
    return push(Op::clamp, v, a.id, inside ? 1.0 : 0.0);
  }
  Var pow_op(Var a, double exponent) {
    const double x = val(a);
    return push(Op::pow, std::pow(x, exponent), a.id, exponent * std::pow(x, exponent - 1.0));
  }

  // Externally computed values with known partials (used for distribution
  // quantities so erf and friends never need to be tape primitives).
  Var custom_unary(Var a, double value, double da) {
    return push(Op::custom, value, a.id, da);
  }
  Var custom_binary(Var a, Var b, double value, double da, double db) {
    return push(Op::custom, value, a.id, da, b.id, db);
  }

  double value(Var v) const { return values_[check(v)]; }
  int num_params() const { return static_cast<int>(params_.size()); }
  std::size_t size() const { return nodes_.size(); }

  bool clamp_active() const { return clamp_active_; }

  // Every clamp site reports here, saturated or not, including clamps applied
  // outside the tape (distribution probability floors). The running signature
  // identifies the saturation pattern, so a finite-difference check can tell
  // whether a perturbation crossed a kink: same op sequence, same signature
  // iff the same sites saturated.
  void note_clamp(bool saturated) {
    if (saturated) clamp_active_ = true;
    clamp_signature_ = (clamp_signature_ ^ (saturated ? 0x9e3779b9u : 0x85ebca6bu)) * 0x100000001b3ull;
  }
  std::uint64_t clamp_signature() const { return clamp_signature_; }

  // d(output)/d(param_k) for every registered parameter, registration order.
  std::vector<double> gradient(Var output) const;

  void reset();

 private:
  struct Node {
    std::int32_t a = -1;
    std::int32_t b = -1;
    double da = 0.0;
    double db = 0.0;
    Op op = Op::leaf;
  };

  std::size_t check(Var v) const {
    if (v.tape != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
      throw std::logic_error("tape: variable does not belong to this tape");
    }
    return static_cast<std::size_t>(v.id);
  }

  double val(Var v) const { return values_[check(v)]; }

  Var push(Op op, double value, std::int32_t a = -1, double da = 0.0, std::int32_t b = -1,
           double db = 0.0);

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<std::int32_t> params_;
  bool clamp_active_ = false;
  std::uint64_t clamp_signature_ = 0xcbf29ce484222325ull;
};

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }
inline Var operator+(Var a, double c) { return a.tape->affine(a, 1.0, c); }
inline Var operator+(double c, Var a) { return a.tape->affine(a, 1.0, c); }
inline Var operator-(Var a, double c) { return a.tape->affine(a, 1.0, -c); }
inline Var operator-(double c, Var a) { return a.tape->affine(a, -1.0, c); }
inline Var operator*(Var a, double c) { return a.tape->affine(a, c, 0.0); }
inline Var operator*(double c, Var a) { return a.tape->affine(a, c, 0.0); }
inline Var operator/(Var a, double c) { return a.tape->affine(a, 1.0 / c, 0.0); }

inline Var exp(Var a) { return a.tape->exp_op(a); }
inline Var log(Var a) { return a.tape->log_op(a); }
inline Var tanh(Var a) { return a.tape->tanh_op(a); }
inline Var logistic(Var a) { return a.tape->logistic_op(a); }
inline Var clamp(Var a, double lo, double hi) { return a.tape->clamp_op(a, lo, hi); }
inline Var pow(Var a, double e) { return a.tape->pow_op(a, e); }
inline Var square(Var a) { return a * a; }
inline Var relu(Var a) { return a.tape->clamp_op(a, 0.0, std::numeric_limits<double>::infinity()); }

// Double twins so templated code works for both scalar types.
inline double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }
inline double square(double x) { return x * x; }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace survscore::ad
