#include "gapfit/autodiff.hpp"

#include <string>

namespace gapfit {

std::string_view op_name(Op op) noexcept {
  switch (op) {
    case Op::input: return "input";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::neg: return "neg";
    case Op::square: return "square";
    case Op::pow: return "pow";
    case Op::exp: return "exp";
    case Op::log: return "log";
  }
  return "unknown";
}

DiffScalar Tape::variable(double value) {
  nodes_.push_back({Op::input, 0, {0, 0}, {0.0, 0.0}, value});
  ++inputs_;
  return DiffScalar(value, this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::reverse_sweep(std::uint32_t output, std::vector<double>& adjoint) const {
  if (output >= nodes_.size()) throw UsageError("reverse sweep: output node out of range");
  adjoint.assign(nodes_.size(), 0.0);
  adjoint[output] = 1.0;
  for (std::size_t i = output + 1; i-- > 0;) {
    const TapeNode& n = nodes_[i];
    const double a = adjoint[i];
    for (std::uint8_t k = 0; k < n.arity; ++k) adjoint[n.parents[k]] += n.partials[k] * a;
  }
}

GradientResult GradientEvaluator::finish(const DiffScalar& out, std::size_t dimension) {
  GradientResult result;
  result.value = out.value();
  if (!std::isfinite(out.value())) {
    const auto nodes = tape_.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!std::isfinite(nodes[i].value)) {
        throw EvaluationError(i, "non-finite value at tape step " + std::to_string(i) + " (" +
                                     std::string(op_name(nodes[i].op)) + ")");
      }
    }
    throw EvaluationError(nodes.size(), "non-finite function value");
  }
  result.gradient.assign(dimension, 0.0);
  if (out.is_constant()) return result;
  if (out.tape() != &tape_) throw UsageError("result is bound to a foreign tape");
  tape_.reverse_sweep(out.node(), adjoint_);
  // Inputs occupy the first `dimension` nodes.
  for (std::size_t i = 0; i < dimension; ++i) result.gradient[i] = adjoint_[i];
  return result;
}

}  // namespace gapfit
