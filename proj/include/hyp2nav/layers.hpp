#pragma once

#include <random>
#include <string>
#include <vector>

#include "hyp2nav/tensor.hpp"

// Network building blocks on top of the tape: Euclidean Linear / MLP, the
// graph attention layer, and the hyperbolic linear layer whose bias lives in
// the Poincare ball. Layers own their Params; models collect pointers for the
// optimizer and checkpointing. Names are stable ("<prefix>.W" etc.) because
// checkpoints match parameters by name.

namespace hyp2nav::nn {

using ad::Param;
using ad::Tape;
using ad::Tensor;

// Glorot uniform on [-sqrt(6/(rows+cols)), +...].
void xavier_init(Param& p, std::mt19937_64& rng);

struct Linear {
    Param W;  // (out x in)
    Param b;  // (1 x out)

    Linear(const std::string& prefix, std::size_t in, std::size_t out)
        : W(prefix + ".W", out, in), b(prefix + ".b", 1, out) {}
    void init(std::mt19937_64& rng) { xavier_init(W, rng); }
    Tensor forward(Tape& t, Tensor x) { return t.add_row_vec(t.matmul_nt(x, t.leaf(W)), t.leaf(b)); }
    void collect(std::vector<Param*>& out) {
        out.push_back(&W);
        out.push_back(&b);
    }
};

// Affine stack with ReLU between layers; the last layer stays linear.
struct Mlp {
    std::vector<Linear> layers;

    Mlp(const std::string& prefix, const std::vector<std::size_t>& dims);
    void init(std::mt19937_64& rng);
    Tensor forward(Tape& t, Tensor x);
    void collect(std::vector<Param*>& out);
};

// Mobius affine layer: x -> project(mobius_add(W (x) x, bias)), bias a ball
// point updated riemannian-style by the optimizer.
struct HLinear {
    Param W;  // (out x in), Euclidean
    Param b;  // (1 x out), manifold

    HLinear(const std::string& prefix, std::size_t in, std::size_t out)
        : W(prefix + ".W", out, in), b(prefix + ".b", 1, out, /*manifold=*/true) {}
    void init(std::mt19937_64& rng) { xavier_init(W, rng); }  // bias starts at the origin
    Tensor forward(Tape& t, Tensor x);
    void collect(std::vector<Param*>& out) {
        out.push_back(&W);
        out.push_back(&b);
    }
};

// ReLU lifted to the ball: exp_O(ReLU(log_O(x))).
Tensor hrelu(Tape& t, Tensor x);

struct GatOutput {
    Tensor out;   // (S*A x out_dim)
    Tensor attn;  // (S*A x A), rows softmax-normalized
};

// Single-head graph attention over complete graphs with self-loops. The
// input packs S graphs of A nodes each as consecutive row blocks; attention
// never crosses block boundaries. Scores follow a^T [Wh_i || Wh_j] with a
// LeakyReLU before the row softmax.
struct GatLayer {
    Param W;  // (out x in)
    Param a;  // (2 x out): row 0 scores the source node, row 1 the neighbor
    double slope;

    GatLayer(const std::string& prefix, std::size_t in, std::size_t out, double leaky_slope = 0.2)
        : W(prefix + ".W", out, in), a(prefix + ".a", 2, out), slope(leaky_slope) {}
    void init(std::mt19937_64& rng) {
        xavier_init(W, rng);
        xavier_init(a, rng);
    }
    GatOutput forward(Tape& t, Tensor h, std::size_t block);
    void collect(std::vector<Param*>& out) {
        out.push_back(&W);
        out.push_back(&a);
    }
};

// Tiles a (1 x n) bias to match a batch of rows.
Tensor tile_row(Tape& t, Tensor row, std::size_t rows);

}  // namespace hyp2nav::nn
