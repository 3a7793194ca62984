#include "survscore/tape.hpp"

namespace survscore::ad {

namespace {

const char* op_name(Tape::Op op) {
  switch (op) {
    case Tape::Op::leaf: return "leaf";
    case Tape::Op::constant: return "constant";
    case Tape::Op::add: return "add";
    case Tape::Op::sub: return "sub";
    case Tape::Op::mul: return "mul";
    case Tape::Op::div: return "div";
    case Tape::Op::neg: return "neg";
    case Tape::Op::exp: return "exp";
    case Tape::Op::log: return "log";
    case Tape::Op::tanh: return "tanh";
    case Tape::Op::logistic: return "logistic";
    case Tape::Op::clamp: return "clamp";
    case Tape::Op::pow: return "pow";
    case Tape::Op::affine: return "affine";
    case Tape::Op::custom: return "custom";
  }
  return "?";
}

}  // namespace

Var Tape::param(double value) {
  Var v = push(Op::leaf, value);
  params_.push_back(v.id);
  return v;
}

Var Tape::constant(double value) { return push(Op::constant, value); }

Var Tape::push(Op op, double value, std::int32_t a, double da, std::int32_t b, double db) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  if (!std::isfinite(value) || (a >= 0 && !std::isfinite(da)) || (b >= 0 && !std::isfinite(db))) {
    throw NonFiniteError(id, "tape: non-finite value at node " + std::to_string(id) + " (op " +
                                 op_name(op) + ")");
  }
  nodes_.push_back({a, b, da, db, op});
  values_.push_back(value);
  return Var{id, this};
}

std::vector<double> Tape::gradient(Var output) const {
  const std::size_t top = check(output);
  std::vector<double> adjoint(top + 1, 0.0);
  adjoint[top] = 1.0;
  for (std::size_t i = top + 1; i-- > 0;) {
    const double a = adjoint[i];
    if (a == 0.0) continue;
    const Node& node = nodes_[i];
    if (node.a >= 0) adjoint[static_cast<std::size_t>(node.a)] += a * node.da;
    if (node.b >= 0) adjoint[static_cast<std::size_t>(node.b)] += a * node.db;
  }
  std::vector<double> grad(params_.size(), 0.0);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto id = static_cast<std::size_t>(params_[k]);
    const double g = id <= top ? adjoint[id] : 0.0;
    if (!std::isfinite(g)) {
      throw NonFiniteError(static_cast<int>(id), "tape: non-finite gradient for parameter " +
                                                     std::to_string(k));
    }
    grad[k] = g;
  }
  return grad;
}

void Tape::reset() {
  nodes_.clear();
  values_.clear();
  params_.clear();
  clamp_active_ = false;
  clamp_signature_ = 0xcbf29ce484222325ull;
}

}  // namespace survscore::ad
