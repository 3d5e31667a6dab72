#pragma once

#include "wavestack/propagation.hpp"

namespace wavestack {

// One factor of an ordered matrix product. Either a fixed matrix (propagation,
// channel, port coupling) or a trainable unit-modulus phase diagonal
// diag(exp(j theta[offset .. offset+size))).
struct ChainFactor {
  CMatrix fixed;         // valid when phase_offset < 0
  int phase_offset = -1; // index into the flat phase vector
  int size = 0;          // diagonal dimension when trainable

  bool trainable() const { return phase_offset >= 0; }

  static ChainFactor matrix(CMatrix m) {
    ChainFactor f;
    f.fixed = std::move(m);
    return f;
  }
  static ChainFactor phases(int offset, int size) {
    ChainFactor f;
    f.phase_offset = offset;
    f.size = size;
    return f;
  }
};

// Ordered matrix product M_K ... M_2 M_1 over a flat phase vector theta.
// Factors are stored right-to-left (factor 0 applies first). forward()
// evaluates the product against a seed matrix; backward() accumulates the
// exact phase gradient by reverse accumulation: with G = A M_k B and a loss
// adjoint Ghat (dL = Re<Ghat, dG>), the adjoint of factor k is A^H Ghat B^H,
// and d theta_n picks out its n-th diagonal entry against j exp(j theta_n).
class MatrixChain {
 public:
  void push_right(ChainFactor f) { factors_.insert(factors_.begin(), std::move(f)); }
  void push_left(ChainFactor f) { factors_.push_back(std::move(f)); }

  int factor_count() const { return static_cast<int>(factors_.size()); }

  // Number of phase parameters referenced (max offset + size).
  int phase_dim() const {
    int dim = 0;
    for (const auto& f : factors_) {
      if (f.trainable()) dim = std::max(dim, f.phase_offset + f.size);
    }
    return dim;
  }

  int output_rows() const {
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
      if (!it->trainable()) return static_cast<int>(it->fixed.rows());
      return it->size;
    }
    return 0;
  }

  int input_cols() const {
    for (const auto& f : factors_) {
      if (!f.trainable()) return static_cast<int>(f.fixed.cols());
      return f.size;
    }
    return 0;
  }

  // Product applied to seed (pass the identity to materialize the operator).
  CMatrix forward(const RVector& theta, const CMatrix& seed) const {
    CMatrix y = seed;
    for (const auto& f : factors_) y = apply(f, theta, y);
    return y;
  }

  // Phase gradient of a scalar loss with adjoint ghat at output = forward(seed).
  // Convention: dL = Re(tr(ghat^H dG)). Adds into grad (size phase_dim()).
  void backward(const RVector& theta, const CMatrix& seed, const CMatrix& ghat,
                RVector& grad) const {
    const int k = factor_count();
    // Suffix products B_k = M_{k-1} ... M_1 * seed.
    std::vector<CMatrix> suffix(static_cast<size_t>(k));
    CMatrix b = seed;
    for (int i = 0; i < k; ++i) {
      suffix[static_cast<size_t>(i)] = b;
      b = apply(factors_[static_cast<size_t>(i)], theta, b);
    }
    // Prefix accumulator A_k = M_K ... M_{k+1}, built leftmost first.
    CMatrix a = CMatrix::Identity(ghat.rows(), ghat.rows());
    for (int i = k - 1; i >= 0; --i) {
      const auto& f = factors_[static_cast<size_t>(i)];
      if (f.trainable()) {
        const CMatrix u = a.adjoint() * ghat;  // size x cols
        const CMatrix& bk = suffix[static_cast<size_t>(i)];
        for (int n = 0; n < f.size; ++n) {
          const cplx m_nn = u.row(n).cwiseProduct(bk.row(n).conjugate()).sum();
          const double th = theta[f.phase_offset + n];
          grad[f.phase_offset + n] += std::real(std::conj(m_nn) * kJ * std::exp(kJ * th));
        }
        a = a * diagonal(f, theta).asDiagonal();
      } else {
        a = a * f.fixed;
      }
    }
  }

 private:
  static CVector diagonal(const ChainFactor& f, const RVector& theta) {
    CVector d(f.size);
    for (int n = 0; n < f.size; ++n) d[n] = std::exp(kJ * theta[f.phase_offset + n]);
    return d;
  }

  static CMatrix apply(const ChainFactor& f, const RVector& theta, const CMatrix& y) {
    if (f.trainable()) {
      if (y.rows() != f.size) throw dimension_error("chain factor dimension mismatch");
      return diagonal(f, theta).asDiagonal() * y;
    }
    if (y.rows() != f.fixed.cols()) throw dimension_error("chain factor dimension mismatch");
    return f.fixed * y;
  }

  std::vector<ChainFactor> factors_;
};

// A trainable wave-domain operator: the chain plus the layout of its flat
// phase vector. Stacks contribute their layers in order; phases of several
// stacks may be concatenated for joint training.
struct TrainableSystem {
  MatrixChain chain;
  int theta_dim = 0;

  CMatrix evaluate(const RVector& theta) const {
    return chain.forward(theta, CMatrix::Identity(chain.input_cols(), chain.input_cols()));
  }
};

namespace detail {

// Appends Phi^L W^L ... Phi^2 W^2 Phi^1 (or starting at layer 2 when
// skip_first_layer) to the chain; returns the phase count consumed.
inline int append_stack_layers(MatrixChain& chain, const SimStack& stack, int offset,
                               bool skip_first_layer = false) {
  const int atoms = stack.geometry().atoms_per_layer();
  const int layers = stack.geometry().num_layers;
  const int first = skip_first_layer ? 2 : 1;
  if (!skip_first_layer) {
    chain.push_left(ChainFactor::phases(offset, atoms));
  } else if (layers < 2) {
    throw dimension_error("stack needs >= 2 layers when layer 1 is the encoder");
  }
  for (int l = 2; l <= layers; ++l) {
    chain.push_left(ChainFactor::matrix(stack.interlayer(l)));
    chain.push_left(ChainFactor::phases(offset + (l - first) * atoms, atoms));
  }
  return (layers - first + 1) * atoms;
}

}  // namespace detail

// S(theta) for a single stack, theta = stack phases in layer-major order.
inline TrainableSystem system_transfer(const SimStack& stack) {
  TrainableSystem sys;
  sys.theta_dim = detail::append_stack_layers(sys.chain, stack, 0);
  return sys;
}

// Port-to-port operator G(theta) through tx stack, channel and optional rx
// stack; theta = [tx phases, rx phases].
inline TrainableSystem system_end_to_end(const SimStack& stack_tx, const CMatrix& channel,
                                         const SimStack* stack_rx = nullptr) {
  if (stack_tx.input_coupling().size() == 0) {
    throw dimension_error("transmit stack has no input ports");
  }
  TrainableSystem sys;
  sys.chain.push_left(ChainFactor::matrix(stack_tx.input_coupling()));
  int dim = detail::append_stack_layers(sys.chain, stack_tx, 0);
  sys.chain.push_left(ChainFactor::matrix(channel));
  if (stack_rx != nullptr) {
    dim += detail::append_stack_layers(sys.chain, *stack_rx, dim);
    if (stack_rx->output_coupling().size() == 0) {
      throw dimension_error("receive stack has no output ports");
    }
    sys.chain.push_left(ChainFactor::matrix(stack_rx->output_coupling()));
  }
  sys.theta_dim = dim;
  return sys;
}

// Encoder-to-receiver operator for the semantic pipeline: layer 1 carries the
// input field, layers 2..L are trainable, the output coupling closes the link.
inline TrainableSystem system_semantic(const SimStack& stack) {
  if (stack.output_coupling().size() == 0) {
    throw dimension_error("semantic stack has no output ports");
  }
  TrainableSystem sys;
  sys.theta_dim = detail::append_stack_layers(sys.chain, stack, 0, /*skip_first_layer=*/true);
  sys.chain.push_left(ChainFactor::matrix(stack.output_coupling()));
  return sys;
}

// Phase vectors move between stacks and flat theta layouts.
inline RVector stack_theta(const SimStack& stack) { return stack.phases().theta(); }

inline void assign_theta(SimStack& stack, const RVector& theta, int offset = 0) {
  const auto n = stack.phases().theta().size();
  stack.phases().set_all(theta.segment(offset, n));
}

}  // namespace wavestack
