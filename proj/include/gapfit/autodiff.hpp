#pragma once

// Scalar reverse-mode automatic differentiation.
//
// A Tape records every primitive applied to non-constant operands while a
// function runs, so the recorded graph is exactly the path that executed:
// branches and loops are differentiated as taken. A reverse sweep over the
// tape accumulates adjoints and yields the gradient.
//
//   gapfit::GradientEvaluator eval;
//   auto r = eval([](std::span<const gapfit::DiffScalar> x) {
//     return square(x[0]) + 2.0 * x[1];
//   }, std::vector<double>{3.0, 1.0});
//   // r.value == 11, r.gradient == {6, 2}

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "gapfit/errors.hpp"

namespace gapfit {

enum class Op : std::uint8_t { input, add, sub, mul, div, neg, square, pow, exp, log };

std::string_view op_name(Op op) noexcept;

struct TapeNode {
  Op op = Op::input;
  std::uint8_t arity = 0;
  std::array<std::uint32_t, 2> parents{};
  std::array<double, 2> partials{};
  double value = 0.0;
};

class DiffScalar;

// Append-only record of one function evaluation. Parents of a node always
// precede it, so the node order is a topological order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  // Registers an independent variable.
  DiffScalar variable(double value);

  std::span<const TapeNode> nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t input_count() const noexcept { return inputs_; }
  // Number of recorded primitive applications (excludes inputs).
  std::size_t operation_count() const noexcept { return nodes_.size() - inputs_; }

  // Drops all nodes but keeps the allocation.
  void clear() noexcept {
    nodes_.clear();
    inputs_ = 0;
  }

  // One reverse pass seeded with d(output)/d(output) = 1. Writes the
  // adjoint of every node into `adjoint` (resized to size()).
  void reverse_sweep(std::uint32_t output, std::vector<double>& adjoint) const;
  std::vector<double> adjoints(std::uint32_t output) const {
    std::vector<double> adjoint;
    reverse_sweep(output, adjoint);
    return adjoint;
  }

  std::uint32_t record(Op op, double value, std::uint32_t parent, double partial) {
    nodes_.push_back({op, 1, {parent, 0}, {partial, 0.0}, value});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  std::uint32_t record(Op op, double value, std::uint32_t lhs, double lhs_partial,
                       std::uint32_t rhs, double rhs_partial) {
    nodes_.push_back({op, 2, {lhs, rhs}, {lhs_partial, rhs_partial}, value});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

 private:
  std::vector<TapeNode> nodes_;
  std::size_t inputs_ = 0;
};

// A real value plus, when it depends on a tape variable, the node that
// produced it. Values built from plain doubles are constants and carry no
// tape, so arithmetic on constants alone records nothing.
class DiffScalar {
 public:
  DiffScalar() noexcept = default;
  DiffScalar(double constant) noexcept : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const noexcept { return value_; }
  bool is_constant() const noexcept { return tape_ == nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::uint32_t node() const noexcept { return node_; }

  DiffScalar& operator+=(const DiffScalar& rhs);
  DiffScalar& operator-=(const DiffScalar& rhs);
  DiffScalar& operator*=(const DiffScalar& rhs);
  DiffScalar& operator/=(const DiffScalar& rhs);

 private:
  friend class Tape;
  friend DiffScalar record_binary(Op, const DiffScalar&, const DiffScalar&, double, double, double);
  friend DiffScalar record_unary(Op, const DiffScalar&, double, double);
  DiffScalar(double value, Tape* tape, std::uint32_t node) noexcept
      : value_(value), tape_(tape), node_(node) {}

  double value_ = 0.0;
  Tape* tape_ = nullptr;
  std::uint32_t node_ = 0;
};

namespace detail {

inline Tape* common_tape(const DiffScalar& a, const DiffScalar& b) {
  if (a.tape() && b.tape() && a.tape() != b.tape()) {
    throw UsageError("operands are bound to different tapes");
  }
  return a.tape() ? a.tape() : b.tape();
}

}  // namespace detail

// Records a binary node; constant operands are left out of the graph.
inline DiffScalar record_binary(Op op, const DiffScalar& a, const DiffScalar& b, double value,
                                double da, double db) {
  Tape* tape = detail::common_tape(a, b);
  if (!tape) return DiffScalar(value);
  std::uint32_t node;
  if (a.is_constant()) {
    node = tape->record(op, value, b.node(), db);
  } else if (b.is_constant()) {
    node = tape->record(op, value, a.node(), da);
  } else {
    node = tape->record(op, value, a.node(), da, b.node(), db);
  }
  return DiffScalar(value, tape, node);
}

inline DiffScalar record_unary(Op op, const DiffScalar& a, double value, double da) {
  if (a.is_constant()) return DiffScalar(value);
  return DiffScalar(value, a.tape(), a.tape()->record(op, value, a.node(), da));
}

inline DiffScalar operator+(const DiffScalar& a, const DiffScalar& b) {
  return record_binary(Op::add, a, b, a.value() + b.value(), 1.0, 1.0);
}

inline DiffScalar operator-(const DiffScalar& a, const DiffScalar& b) {
  return record_binary(Op::sub, a, b, a.value() - b.value(), 1.0, -1.0);
}

inline DiffScalar operator*(const DiffScalar& a, const DiffScalar& b) {
#ifdef GAPFIT_FAULT_INJECTION
  // Deliberately wrong partial, used to prove the gradient check catches it.
  return record_binary(Op::mul, a, b, a.value() * b.value(), 1.01 * b.value(), a.value());
#else
  return record_binary(Op::mul, a, b, a.value() * b.value(), b.value(), a.value());
#endif
}

// Throws DomainError when b is zero.
inline DiffScalar operator/(const DiffScalar& a, const DiffScalar& b) {
  if (b.value() == 0.0) throw DomainError("division by zero");
  const double inv = 1.0 / b.value();
  const double q = a.value() / b.value();
  return record_binary(Op::div, a, b, q, inv, -q * inv);
}

inline DiffScalar operator-(const DiffScalar& a) { return record_unary(Op::neg, a, -a.value(), -1.0); }

inline DiffScalar square(const DiffScalar& a) {
  return record_unary(Op::square, a, a.value() * a.value(), 2.0 * a.value());
}

inline DiffScalar pow(const DiffScalar& a, unsigned exponent) {
  if (exponent == 0) return DiffScalar(1.0);
  const double x = a.value();
  double lower = 1.0;  // x^(exponent - 1)
  for (unsigned i = 1; i < exponent; ++i) lower *= x;
  return record_unary(Op::pow, a, lower * x, static_cast<double>(exponent) * lower);
}

inline DiffScalar exp(const DiffScalar& a) {
  const double e = std::exp(a.value());
  return record_unary(Op::exp, a, e, e);
}

// Throws DomainError for a <= 0.
inline DiffScalar log(const DiffScalar& a) {
  if (!(a.value() > 0.0)) throw DomainError("log of a nonpositive value");
  return record_unary(Op::log, a, std::log(a.value()), 1.0 / a.value());
}

inline DiffScalar& DiffScalar::operator+=(const DiffScalar& rhs) { return *this = *this + rhs; }
inline DiffScalar& DiffScalar::operator-=(const DiffScalar& rhs) { return *this = *this - rhs; }
inline DiffScalar& DiffScalar::operator*=(const DiffScalar& rhs) { return *this = *this * rhs; }
inline DiffScalar& DiffScalar::operator/=(const DiffScalar& rhs) { return *this = *this / rhs; }

inline double square(double x) noexcept { return x * x; }

inline double value_of(double x) noexcept { return x; }
inline double value_of(const DiffScalar& x) noexcept { return x.value(); }

struct GradientResult {
  double value = 0.0;
  std::vector<double> gradient;
};

// Reuses one tape across calls. Not thread-safe; use one evaluator per
// thread.
class GradientEvaluator {
 public:
  // f must be callable as DiffScalar(std::span<const DiffScalar>).
  template <class F>
  GradientResult operator()(F&& f, std::span<const double> x) {
    tape_.clear();
    inputs_.clear();
    inputs_.reserve(x.size());
    for (double xi : x) inputs_.push_back(tape_.variable(xi));
    const DiffScalar out = std::forward<F>(f)(std::span<const DiffScalar>(inputs_));
    return finish(out, x.size());
  }

  const Tape& tape() const noexcept { return tape_; }

 private:
  GradientResult finish(const DiffScalar& out, std::size_t dimension);

  Tape tape_;
  std::vector<DiffScalar> inputs_;
  std::vector<double> adjoint_;
};

// Value and exact gradient of f at x. Throws EvaluationError carrying the
// first non-finite tape step when f(x) is not finite.
template <class F>
GradientResult gradient(F&& f, std::span<const double> x) {
  GradientEvaluator evaluator;
  return evaluator(std::forward<F>(f), x);
}

// Evaluates f on constants only (no tape).
template <class F>
double evaluate(F&& f, std::span<const double> x) {
  std::vector<DiffScalar> args(x.begin(), x.end());
  return std::forward<F>(f)(std::span<const DiffScalar>(args)).value();
}

// Max over coordinates of |g_ad - g_fd| / max(1, |g_ad|), where g_fd is the
// central difference with step h * max(1, |x_i|).
template <class F>
double check_gradient(F&& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw UsageError("check_gradient: step must be positive");
  const GradientResult ad = gradient(f, x);
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + step;
    const double up = evaluate(f, probe);
    probe[i] = x[i] - step;
    const double down = evaluate(f, probe);
    probe[i] = x[i];
    const double fd = (up - down) / (2.0 * step);
    const double g = ad.gradient[i];
    worst = std::max(worst, std::abs(g - fd) / std::max(1.0, std::abs(g)));
  }
  return worst;
}

}  // namespace gapfit
