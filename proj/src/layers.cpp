#include "hyp2nav/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace hyp2nav::nn {

void xavier_init(Param& p, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / double(p.rows + p.cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : p.value) v = dist(rng);
}

Mlp::Mlp(const std::string& prefix, const std::vector<std::size_t>& dims) {
    if (dims.size() < 2) throw std::invalid_argument("mlp needs at least input and output dims");
    layers.reserve(dims.size() - 1);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        layers.emplace_back(prefix + ".l" + std::to_string(i), dims[i], dims[i + 1]);
    }
}

void Mlp::init(std::mt19937_64& rng) {
    for (auto& l : layers) l.init(rng);
}

Tensor Mlp::forward(Tape& t, Tensor x) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        x = layers[i].forward(t, x);
        if (i + 1 < layers.size()) x = t.relu(x);
    }
    return x;
}

void Mlp::collect(std::vector<Param*>& out) {
    for (auto& l : layers) l.collect(out);
}

Tensor tile_row(Tape& t, Tensor row, std::size_t rows) {
    if (rows == 1) return row;
    std::vector<std::int32_t> idx(rows, 0);
    return t.gather_rows(row, idx);
}

Tensor HLinear::forward(Tape& t, Tensor x) {
    Tensor y = t.mobius_matvec_rows(x, t.leaf(W));
    Tensor bias = tile_row(t, t.ball_project_rows(t.leaf(b)), y.rows());
    return t.mobius_add_rows(y, bias);
}

Tensor hrelu(Tape& t, Tensor x) { return t.exp_map_rows(t.relu(t.log_map_rows(x))); }

GatOutput GatLayer::forward(Tape& t, Tensor h, std::size_t block) {
    if (block == 0 || h.rows() == 0 || h.rows() % block != 0) {
        throw std::invalid_argument("gat: node count must be a positive multiple of the block");
    }
    Tensor wh = t.matmul_nt(h, t.leaf(W));
    Tensor av = t.leaf(a);
    Tensor s_self = t.matmul_nt(wh, t.slice_rows(av, 0, 1));
    Tensor s_peer = t.matmul_nt(wh, t.slice_rows(av, 1, 1));
    Tensor scores = t.leaky_relu(t.block_outer_add(s_self, s_peer, block), slope);
    Tensor attn = t.row_softmax(scores);
    return GatOutput{t.block_matmul(attn, wh, block), attn};
}

}  // namespace hyp2nav::nn
