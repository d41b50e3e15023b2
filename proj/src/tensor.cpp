#include "hyp2nav/tensor.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "hyp2nav/geom.hpp"
#include "hyp2nav/kernels.hpp"

namespace hyp2nav::ad {
namespace {

[[noreturn]] void shape_error(const char* who) {
    throw std::invalid_argument(std::string("tape: shape mismatch in ") + who);
}

}  // namespace

std::size_t Tensor::rows() const { return std::size_t(tape->node(idx).rows); }
std::size_t Tensor::cols() const { return std::size_t(tape->node(idx).cols); }
std::size_t Tensor::size() const { return tape->node(idx).size(); }
const double* Tensor::data() const { return tape->node(idx).val.data(); }
double* Tensor::data() { return tape->node(idx).val.data(); }
const double* Tensor::grad() const { return tape->node(idx).grad.data(); }

double Tensor::scalar() const {
    const Node& n = tape->node(idx);
    if (n.size() != 1) shape_error("scalar()");
    return n.val[0];
}

void Tape::reset() {
    n_used_ = 0;
    n_index_used_ = 0;
}

Tensor Tape::push(Op op, std::size_t rows, std::size_t cols, std::int32_t a, std::int32_t b,
                  double cval) {
    if (n_used_ == nodes_.size()) nodes_.emplace_back();
    Node& n = nodes_[n_used_];
    n.op = op;
    n.a = a;
    n.b = b;
    n.rows = std::int32_t(rows);
    n.cols = std::int32_t(cols);
    n.cval = cval;
    n.aux = -1;
    n.param = nullptr;
    n.val.resize(rows * cols);
    n.needs_grad = grad_enabled_ && ((a >= 0 && nodes_[std::size_t(a)].needs_grad) ||
                                     (b >= 0 && nodes_[std::size_t(b)].needs_grad));
    return Tensor{this, std::int32_t(n_used_++)};
}

std::int32_t Tape::store_indices(const std::vector<std::int32_t>& idx) {
    if (n_index_used_ == index_lists_.size()) index_lists_.emplace_back();
    index_lists_[n_index_used_] = idx;
    return std::int32_t(n_index_used_++);
}

Tensor Tape::input(std::size_t rows, std::size_t cols, const double* data) {
    Tensor t = push(Op::kLeaf, rows, cols);
    std::memcpy(t.data(), data, rows * cols * sizeof(double));
    return t;
}

Tensor Tape::constant(std::size_t rows, std::size_t cols, double fill) {
    Tensor t = push(Op::kLeaf, rows, cols);
    std::fill_n(t.data(), rows * cols, fill);
    return t;
}

Tensor Tape::leaf(Param& p) {
    Tensor t = push(Op::kParamLeaf, p.rows, p.cols);
    Node& n = node(t.idx);
    n.param = &p;
    n.needs_grad = grad_enabled_;
    std::memcpy(n.val.data(), p.value.data(), p.size() * sizeof(double));
    return t;
}

#define SAME_SHAPE(a, b, who)                                                            \
    if (node(a.idx).rows != node(b.idx).rows || node(a.idx).cols != node(b.idx).cols) \
    shape_error(who)

Tensor Tape::add(Tensor a, Tensor b) {
    SAME_SHAPE(a, b, "add");
    Tensor t = push(Op::kAdd, a.rows(), a.cols(), a.idx, b.idx);
    kern::ops().add(a.data(), b.data(), t.data(), t.size());
    return t;
}

Tensor Tape::sub(Tensor a, Tensor b) {
    SAME_SHAPE(a, b, "sub");
    Tensor t = push(Op::kSub, a.rows(), a.cols(), a.idx, b.idx);
    kern::ops().sub(a.data(), b.data(), t.data(), t.size());
    return t;
}

Tensor Tape::mul(Tensor a, Tensor b) {
    SAME_SHAPE(a, b, "mul");
    Tensor t = push(Op::kMul, a.rows(), a.cols(), a.idx, b.idx);
    kern::ops().mul(a.data(), b.data(), t.data(), t.size());
    return t;
}

Tensor Tape::neg(Tensor a) {
    Tensor t = push(Op::kNeg, a.rows(), a.cols(), a.idx);
    kern::ops().scale(-1.0, a.data(), t.data(), t.size());
    return t;
}

Tensor Tape::scale(Tensor a, double c) {
    Tensor t = push(Op::kScale, a.rows(), a.cols(), a.idx, -1, c);
    kern::ops().scale(c, a.data(), t.data(), t.size());
    return t;
}

Tensor Tape::add_const(Tensor a, double c) {
    Tensor t = push(Op::kAddConst, a.rows(), a.cols(), a.idx, -1, c);
    const double* x = a.data();
    double* y = t.data();
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = x[i] + c;
    return t;
}

Tensor Tape::matmul(Tensor a, Tensor b) {
    if (a.cols() != b.rows()) shape_error("matmul");
    Tensor t = push(Op::kMatmul, a.rows(), b.cols(), a.idx, b.idx);
    kern::ops().gemm_nn(a.data(), b.data(), t.data(), a.rows(), a.cols(), b.cols(), false);
    return t;
}

Tensor Tape::matmul_nt(Tensor a, Tensor b) {
    if (a.cols() != b.cols()) shape_error("matmul_nt");
    Tensor t = push(Op::kMatmulNT, a.rows(), b.rows(), a.idx, b.idx);
    kern::ops().gemm_nt(a.data(), b.data(), t.data(), a.rows(), a.cols(), b.rows(), false);
    return t;
}

Tensor Tape::add_row_vec(Tensor a, Tensor row) {
    if (node(row.idx).rows != 1 || row.cols() != a.cols()) shape_error("add_row_vec");
    Tensor t = push(Op::kAddRowVec, a.rows(), a.cols(), a.idx, row.idx);
    const double* x = a.data();
    const double* r = row.data();
    double* y = t.data();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        kern::ops().add(x + i * a.cols(), r, y + i * a.cols(), a.cols());
    }
    return t;
}

Tensor Tape::add_col_vec(Tensor a, Tensor col) {
    if (node(col.idx).cols != 1 || col.rows() != a.rows()) shape_error("add_col_vec");
    Tensor t = push(Op::kAddColVec, a.rows(), a.cols(), a.idx, col.idx);
    const double* x = a.data();
    const double* c = col.data();
    double* y = t.data();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i * a.cols() + j] = x[i * a.cols() + j] + c[i];
    return t;
}

Tensor Tape::mul_col_vec(Tensor a, Tensor col) {
    if (node(col.idx).cols != 1 || col.rows() != a.rows()) shape_error("mul_col_vec");
    Tensor t = push(Op::kMulColVec, a.rows(), a.cols(), a.idx, col.idx);
    const double* x = a.data();
    const double* c = col.data();
    double* y = t.data();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        kern::ops().scale(c[i], x + i * a.cols(), y + i * a.cols(), a.cols());
    }
    return t;
}

Tensor Tape::div_col_vec(Tensor a, Tensor col) {
    if (node(col.idx).cols != 1 || col.rows() != a.rows()) shape_error("div_col_vec");
    Tensor t = push(Op::kDivColVec, a.rows(), a.cols(), a.idx, col.idx);
    const double* x = a.data();
    const double* c = col.data();
    double* y = t.data();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        kern::ops().scale(1.0 / c[i], x + i * a.cols(), y + i * a.cols(), a.cols());
    }
    return t;
}

Tensor Tape::relu(Tensor a) {
    Tensor t = push(Op::kRelu, a.rows(), a.cols(), a.idx);
    kern::ops().relu(a.data(), t.data(), t.size());
    return t;
}

Tensor Tape::leaky_relu(Tensor a, double slope) {
    Tensor t = push(Op::kLeakyRelu, a.rows(), a.cols(), a.idx, -1, slope);
    kern::ops().leaky_relu(slope, a.data(), t.data(), t.size());
    return t;
}

Tensor Tape::row_softmax(Tensor a) {
    Tensor t = push(Op::kRowSoftmax, a.rows(), a.cols(), a.idx);
    const std::size_t n = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* x = a.data() + i * n;
        double* y = t.data() + i * n;
        double m = x[0];
        for (std::size_t j = 1; j < n; ++j) m = std::max(m, x[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            y[j] = std::exp(x[j] - m);
            s += y[j];
        }
        const double inv = 1.0 / s;
        for (std::size_t j = 0; j < n; ++j) y[j] *= inv;
    }
    return t;
}

Tensor Tape::row_sum(Tensor a, double c) {
    Tensor t = push(Op::kRowSum, a.rows(), 1, a.idx, -1, c);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        t.data()[i] = c * kern::ops().sum(a.data() + i * a.cols(), a.cols());
    }
    return t;
}

Tensor Tape::row_sum_sq(Tensor a) {
    Tensor t = push(Op::kRowSumSq, a.rows(), 1, a.idx);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        t.data()[i] = kern::ops().sum_sq(a.data() + i * a.cols(), a.cols());
    }
    return t;
}

Tensor Tape::row_dot(Tensor a, Tensor b) {
    SAME_SHAPE(a, b, "row_dot");
    Tensor t = push(Op::kRowDot, a.rows(), 1, a.idx, b.idx);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        t.data()[i] = kern::ops().dot(a.data() + i * a.cols(), b.data() + i * a.cols(), a.cols());
    }
    return t;
}

Tensor Tape::sum_all(Tensor a) {
    Tensor t = push(Op::kSumAll, 1, 1, a.idx);
    t.data()[0] = kern::ops().sum(a.data(), a.size());
    return t;
}

Tensor Tape::mean_all(Tensor a) {
    Tensor t = push(Op::kMeanAll, 1, 1, a.idx);
    t.data()[0] = kern::ops().sum(a.data(), a.size()) / double(a.size());
    return t;
}

Tensor Tape::tanh_ratio(Tensor a) {
    Tensor t = push(Op::kTanhRatio, a.rows(), a.cols(), a.idx);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = geom::tanh_ratio(a.data()[i]);
    return t;
}

Tensor Tape::atanh_ratio(Tensor a) {
    Tensor t = push(Op::kAtanhRatio, a.rows(), a.cols(), a.idx);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = geom::atanh_ratio(a.data()[i]);
    return t;
}

Tensor Tape::acosh1p_sq(Tensor a) {
    Tensor t = push(Op::kAcosh1pSq, a.rows(), a.cols(), a.idx);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = geom::acosh1p_sq(a.data()[i]);
    return t;
}

Tensor Tape::concat_cols(Tensor a, Tensor b) {
    if (a.rows() != b.rows()) shape_error("concat_cols");
    Tensor t = push(Op::kConcatCols, a.rows(), a.cols() + b.cols(), a.idx, b.idx);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::memcpy(t.data() + i * t.cols(), a.data() + i * a.cols(), a.cols() * sizeof(double));
        std::memcpy(t.data() + i * t.cols() + a.cols(), b.data() + i * b.cols(),
                    b.cols() * sizeof(double));
    }
    return t;
}

Tensor Tape::concat_rows(Tensor a, Tensor b) {
    if (a.cols() != b.cols()) shape_error("concat_rows");
    Tensor t = push(Op::kConcatRows, a.rows() + b.rows(), a.cols(), a.idx, b.idx);
    std::memcpy(t.data(), a.data(), a.size() * sizeof(double));
    std::memcpy(t.data() + a.size(), b.data(), b.size() * sizeof(double));
    return t;
}

Tensor Tape::slice_rows(Tensor a, std::size_t first, std::size_t count) {
    if (first + count > a.rows()) shape_error("slice_rows");
    Tensor t = push(Op::kSliceRows, count, a.cols(), a.idx);
    node(t.idx).aux = std::int32_t(first);
    std::memcpy(t.data(), a.data() + first * a.cols(), count * a.cols() * sizeof(double));
    return t;
}

Tensor Tape::gather_rows(Tensor a, const std::vector<std::int32_t>& rows) {
    Tensor t = push(Op::kGatherRows, rows.size(), a.cols(), a.idx);
    node(t.idx).aux = store_indices(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || std::size_t(rows[i]) >= a.rows()) shape_error("gather_rows");
        std::memcpy(t.data() + i * a.cols(), a.data() + std::size_t(rows[i]) * a.cols(),
                    a.cols() * sizeof(double));
    }
    return t;
}

Tensor Tape::gather_cols1(Tensor a, const std::vector<std::int32_t>& col_per_row) {
    if (col_per_row.size() != a.rows()) shape_error("gather_cols1");
    Tensor t = push(Op::kGatherCols1, a.rows(), 1, a.idx);
    node(t.idx).aux = store_indices(col_per_row);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (col_per_row[i] < 0 || std::size_t(col_per_row[i]) >= a.cols())
            shape_error("gather_cols1");
        t.data()[i] = a.data()[i * a.cols() + std::size_t(col_per_row[i])];
    }
    return t;
}

Tensor Tape::cross_entropy_rows(Tensor logits, const std::vector<std::int32_t>& targets) {
    if (targets.size() != logits.rows()) shape_error("cross_entropy_rows");
    Tensor t = push(Op::kCrossEntropy, logits.rows(), 1, logits.idx);
    node(t.idx).aux = store_indices(targets);
    const std::size_t n = logits.cols();
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        if (targets[i] < 0 || std::size_t(targets[i]) >= n) shape_error("cross_entropy_rows");
        const double* x = logits.data() + i * n;
        double m = x[0];
        for (std::size_t j = 1; j < n; ++j) m = std::max(m, x[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::exp(x[j] - m);
        t.data()[i] = m + std::log(s) - x[std::size_t(targets[i])];
    }
    return t;
}

Tensor Tape::block_outer_add(Tensor a, Tensor b, std::size_t block) {
    SAME_SHAPE(a, b, "block_outer_add");
    if (node(a.idx).cols != 1 || a.rows() % block != 0) shape_error("block_outer_add");
    Tensor t = push(Op::kBlockOuterAdd, a.rows(), block, a.idx, b.idx);
    node(t.idx).aux = std::int32_t(block);
    const std::size_t nblocks = a.rows() / block;
    for (std::size_t s = 0; s < nblocks; ++s) {
        const double* pa = a.data() + s * block;
        const double* pb = b.data() + s * block;
        double* y = t.data() + s * block * block;
        for (std::size_t i = 0; i < block; ++i)
            for (std::size_t j = 0; j < block; ++j) y[i * block + j] = pa[i] + pb[j];
    }
    return t;
}

Tensor Tape::block_matmul(Tensor scores, Tensor feats, std::size_t block) {
    if (scores.cols() != block || scores.rows() != feats.rows() ||
        scores.rows() % block != 0) {
        shape_error("block_matmul");
    }
    Tensor t = push(Op::kBlockMatmul, feats.rows(), feats.cols(), scores.idx, feats.idx);
    node(t.idx).aux = std::int32_t(block);
    const std::size_t nblocks = scores.rows() / block;
    const std::size_t f = feats.cols();
    for (std::size_t s = 0; s < nblocks; ++s) {
        kern::ops().gemm_nn(scores.data() + s * block * block, feats.data() + s * block * f,
                            t.data() + s * block * f, block, block, f, false);
    }
    return t;
}

Tensor Tape::huber(Tensor a, Tensor b) {
    SAME_SHAPE(a, b, "huber");
    Tensor t = push(Op::kHuber, a.rows(), a.cols(), a.idx, b.idx);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        t.data()[i] = std::abs(d) <= 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
    }
    return t;
}

Tensor Tape::ball_project_rows(Tensor v) {
    Tensor t = push(Op::kBallProject, v.rows(), v.cols(), v.idx);
    const std::size_t n = v.cols();
    for (std::size_t i = 0; i < v.rows(); ++i) {
        const double* x = v.data() + i * n;
        double* y = t.data() + i * n;
        const double norm = std::sqrt(kern::ops().sum_sq(x, n));
        const double f = norm > geom::kMaxNorm ? geom::kMaxNorm / norm : 1.0;
        kern::ops().scale(f, x, y, n);
    }
    return t;
}

Tensor Tape::detach(Tensor a) {
    Tensor t = push(Op::kDetach, a.rows(), a.cols(), a.idx);
    node(t.idx).needs_grad = false;
    std::memcpy(t.data(), a.data(), a.size() * sizeof(double));
    return t;
}

Tensor Tape::exp_map_rows(Tensor u) {
    Tensor s = tanh_ratio(row_sum_sq(u));
    return ball_project_rows(mul_col_vec(u, s));
}

Tensor Tape::log_map_rows(Tensor v) {
    Tensor r = atanh_ratio(row_sum_sq(v));
    return mul_col_vec(v, r);
}

Tensor Tape::mobius_matvec_rows(Tensor x, Tensor W) {
    Tensor y = matmul_nt(x, W);
    Tensor q = atanh_ratio(row_sum_sq(x));
    Tensor arg = mul(mul(q, q), row_sum_sq(y));
    Tensor s = mul(q, tanh_ratio(arg));
    return ball_project_rows(mul_col_vec(y, s));
}

Tensor Tape::mobius_add_rows(Tensor x, Tensor y) {
    Tensor xy2 = scale(row_dot(x, y), 2.0);
    Tensor x2 = row_sum_sq(x);
    Tensor y2 = row_sum_sq(y);
    Tensor den = add_const(add(xy2, mul(x2, y2)), 1.0);
    Tensor cx = div_col_vec(add_const(add(xy2, y2), 1.0), den);
    Tensor cy = div_col_vec(add_const(neg(x2), 1.0), den);
    return ball_project_rows(add(mul_col_vec(x, cx), mul_col_vec(y, cy)));
}

Tensor Tape::dist_sq_rows(Tensor x, Tensor y) {
    Tensor n2 = row_sum_sq(sub(x, y));
    Tensor dx = add_const(neg(row_sum_sq(x)), 1.0);
    Tensor dy = add_const(neg(row_sum_sq(y)), 1.0);
    return acosh1p_sq(div_col_vec(n2, mul(dx, dy)));
}

void Tape::backward(Tensor loss) {
    Node& ln = node(loss.idx);
    if (ln.size() != 1) throw std::invalid_argument("tape: backward needs a 1x1 loss");
    if (!ln.needs_grad) {
        throw std::invalid_argument("tape: loss does not depend on any parameter");
    }
    for (std::int32_t i = 0; i <= loss.idx; ++i) {
        Node& n = node(i);
        if (n.needs_grad) {
            n.grad.assign(n.size(), 0.0);
        }
    }
    ln.grad[0] = 1.0;
    for (std::int32_t i = loss.idx; i >= 0; --i) {
        if (node(i).needs_grad) backward_node(i);
    }
}

void Tape::backward_node(std::int32_t i) {
    Node& n = node(i);
    const double* g = n.grad.data();
    const auto& K = kern::ops();
    auto A = [&]() -> Node& { return node(n.a); };
    auto B = [&]() -> Node& { return node(n.b); };
    auto ga = [&]() -> double* { return node(n.a).grad.data(); };
    auto gb = [&]() -> double* { return node(n.b).grad.data(); };
    const bool wa = n.a >= 0 && node(n.a).needs_grad;
    const bool wb = n.b >= 0 && node(n.b).needs_grad;
    const std::size_t sz = n.size();

    switch (n.op) {
        case Op::kLeaf:
            break;
        case Op::kParamLeaf: {
            Param& p = *n.param;
            K.axpy(1.0, g, p.grad.data(), sz);
            for (std::size_t j = 0; j < sz; ++j) {
                if (!std::isfinite(p.grad[j])) {
                    throw std::runtime_error("non-finite gradient for parameter '" + p.name +
                                             "'");
                }
            }
            break;
        }
        case Op::kAdd:
            if (wa) K.axpy(1.0, g, ga(), sz);
            if (wb) K.axpy(1.0, g, gb(), sz);
            break;
        case Op::kSub:
            if (wa) K.axpy(1.0, g, ga(), sz);
            if (wb) K.axpy(-1.0, g, gb(), sz);
            break;
        case Op::kMul:
            if (wa)
                for (std::size_t j = 0; j < sz; ++j) ga()[j] += g[j] * B().val[j];
            if (wb)
                for (std::size_t j = 0; j < sz; ++j) gb()[j] += g[j] * A().val[j];
            break;
        case Op::kNeg:
            if (wa) K.axpy(-1.0, g, ga(), sz);
            break;
        case Op::kScale:
            if (wa) K.axpy(n.cval, g, ga(), sz);
            break;
        case Op::kAddConst:
            if (wa) K.axpy(1.0, g, ga(), sz);
            break;
        case Op::kMatmul:
            if (wa) K.gemm_nt(g, B().val.data(), ga(), A().rows, n.cols, A().cols, true);
            if (wb) K.gemm_tn(A().val.data(), g, gb(), B().rows, A().rows, n.cols, true);
            break;
        case Op::kMatmulNT:
            if (wa) K.gemm_nn(g, B().val.data(), ga(), A().rows, n.cols, A().cols, true);
            if (wb) K.gemm_tn(g, A().val.data(), gb(), B().rows, A().rows, B().cols, true);
            break;
        case Op::kAddRowVec:
            if (wa) K.axpy(1.0, g, ga(), sz);
            if (wb) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    K.axpy(1.0, g + r * n.cols, gb(), n.cols);
            }
            break;
        case Op::kAddColVec:
            if (wa) K.axpy(1.0, g, ga(), sz);
            if (wb) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    gb()[r] += K.sum(g + r * n.cols, n.cols);
            }
            break;
        case Op::kMulColVec:
            if (wa) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    K.axpy(B().val[r], g + r * n.cols, ga() + r * n.cols, n.cols);
            }
            if (wb) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    gb()[r] += K.dot(g + r * n.cols, A().val.data() + r * n.cols, n.cols);
            }
            break;
        case Op::kDivColVec:
            if (wa) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    K.axpy(1.0 / B().val[r], g + r * n.cols, ga() + r * n.cols, n.cols);
            }
            if (wb) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    gb()[r] -= K.dot(g + r * n.cols, n.val.data() + r * n.cols, n.cols) /
                               B().val[r];
            }
            break;
        case Op::kRelu:
            if (wa) {
                for (std::size_t j = 0; j < sz; ++j)
                    if (A().val[j] > 0.0) ga()[j] += g[j];
            }
            break;
        case Op::kLeakyRelu:
            if (wa) {
                for (std::size_t j = 0; j < sz; ++j)
                    ga()[j] += A().val[j] > 0.0 ? g[j] : n.cval * g[j];
            }
            break;
        case Op::kRowSoftmax:
            if (wa) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r) {
                    const double* p = n.val.data() + r * n.cols;
                    const double* gr = g + r * n.cols;
                    const double gp = K.dot(gr, p, n.cols);
                    double* out = ga() + r * n.cols;
                    for (std::size_t j = 0; j < std::size_t(n.cols); ++j)
                        out[j] += p[j] * (gr[j] - gp);
                }
            }
            break;
        case Op::kRowSum:
            if (wa) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r) {
                    const double gr = n.cval * g[r];
                    double* out = ga() + r * A().cols;
                    for (std::size_t j = 0; j < std::size_t(A().cols); ++j) out[j] += gr;
                }
            }
            break;
        case Op::kRowSumSq:
            if (wa) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    K.axpy(2.0 * g[r], A().val.data() + r * A().cols, ga() + r * A().cols,
                           A().cols);
            }
            break;
        case Op::kRowDot:
            if (wa) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    K.axpy(g[r], B().val.data() + r * A().cols, ga() + r * A().cols, A().cols);
            }
            if (wb) {
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r)
                    K.axpy(g[r], A().val.data() + r * A().cols, gb() + r * A().cols, A().cols);
            }
            break;
        case Op::kSumAll:
            if (wa) {
                double* out = ga();
                for (std::size_t j = 0; j < A().size(); ++j) out[j] += g[0];
            }
            break;
        case Op::kMeanAll:
            if (wa) {
                const double gr = g[0] / double(A().size());
                double* out = ga();
                for (std::size_t j = 0; j < A().size(); ++j) out[j] += gr;
            }
            break;
        case Op::kTanhRatio:
            if (wa) {
                for (std::size_t j = 0; j < sz; ++j)
                    ga()[j] += g[j] * geom::tanh_ratio_deriv(A().val[j]);
            }
            break;
        case Op::kAtanhRatio:
            if (wa) {
                for (std::size_t j = 0; j < sz; ++j)
                    ga()[j] += g[j] * geom::atanh_ratio_deriv(A().val[j]);
            }
            break;
        case Op::kAcosh1pSq:
            if (wa) {
                for (std::size_t j = 0; j < sz; ++j)
                    ga()[j] += g[j] * geom::acosh1p_sq_deriv(A().val[j]);
            }
            break;
        case Op::kConcatCols:
            for (std::size_t r = 0; r < std::size_t(n.rows); ++r) {
                if (wa) K.axpy(1.0, g + r * n.cols, ga() + r * A().cols, A().cols);
                if (wb) K.axpy(1.0, g + r * n.cols + A().cols, gb() + r * B().cols, B().cols);
            }
            break;
        case Op::kConcatRows:
            if (wa) K.axpy(1.0, g, ga(), A().size());
            if (wb) K.axpy(1.0, g + A().size(), gb(), B().size());
            break;
        case Op::kSliceRows:
            if (wa) K.axpy(1.0, g, ga() + std::size_t(n.aux) * n.cols, sz);
            break;
        case Op::kGatherRows:
            if (wa) {
                const auto& list = index_lists_[std::size_t(n.aux)];
                for (std::size_t r = 0; r < list.size(); ++r)
                    K.axpy(1.0, g + r * n.cols, ga() + std::size_t(list[r]) * n.cols, n.cols);
            }
            break;
        case Op::kGatherCols1:
            if (wa) {
                const auto& list = index_lists_[std::size_t(n.aux)];
                for (std::size_t r = 0; r < list.size(); ++r)
                    ga()[r * A().cols + std::size_t(list[r])] += g[r];
            }
            break;
        case Op::kCrossEntropy:
            if (wa) {
                const auto& list = index_lists_[std::size_t(n.aux)];
                const std::size_t nc = std::size_t(A().cols);
                for (std::size_t r = 0; r < std::size_t(n.rows); ++r) {
                    const double* x = A().val.data() + r * nc;
                    double* out = ga() + r * nc;
                    double m = x[0];
                    for (std::size_t j = 1; j < nc; ++j) m = std::max(m, x[j]);
                    double s = 0.0;
                    for (std::size_t j = 0; j < nc; ++j) s += std::exp(x[j] - m);
                    const double inv = 1.0 / s;
                    for (std::size_t j = 0; j < nc; ++j)
                        out[j] += g[r] * std::exp(x[j] - m) * inv;
                    out[std::size_t(list[r])] -= g[r];
                }
            }
            break;
        case Op::kBlockOuterAdd: {
            const std::size_t blk = std::size_t(n.aux);
            const std::size_t nblocks = std::size_t(n.rows) / blk;
            for (std::size_t s = 0; s < nblocks; ++s) {
                const double* gs = g + s * blk * blk;
                for (std::size_t i2 = 0; i2 < blk; ++i2) {
                    if (wa) ga()[s * blk + i2] += K.sum(gs + i2 * blk, blk);
                    if (wb) {
                        double acc = 0.0;
                        for (std::size_t r = 0; r < blk; ++r) acc += gs[r * blk + i2];
                        gb()[s * blk + i2] += acc;
                    }
                }
            }
            break;
        }
        case Op::kBlockMatmul: {
            const std::size_t blk = std::size_t(n.aux);
            const std::size_t f = std::size_t(n.cols);
            const std::size_t nblocks = std::size_t(n.rows) / blk;
            for (std::size_t s = 0; s < nblocks; ++s) {
                const double* gs = g + s * blk * f;
                const double* sc = A().val.data() + s * blk * blk;
                const double* ft = B().val.data() + s * blk * f;
                // d(scores) = g * feats^T,  d(feats) = scores^T * g
                if (wa) K.gemm_nt(gs, ft, ga() + s * blk * blk, blk, f, blk, true);
                if (wb) K.gemm_tn(sc, gs, gb() + s * blk * f, blk, blk, f, true);
            }
            break;
        }
        case Op::kHuber:
            if (wa || wb) {
                for (std::size_t j = 0; j < sz; ++j) {
                    const double d = A().val[j] - B().val[j];
                    const double c = std::clamp(d, -1.0, 1.0) * g[j];
                    if (wa) ga()[j] += c;
                    if (wb) gb()[j] -= c;
                }
            }
            break;
        case Op::kBallProject: {
            // Identity inside the shell. Where the clamp fired, y = c*x/|x|
            // and dy/dx = (c/|x|)(I - xhat xhat^T): the radial component dies.
            if (!wa) break;
            const std::size_t cols = std::size_t(n.cols);
            for (std::size_t r = 0; r < std::size_t(n.rows); ++r) {
                const double* x = A().val.data() + r * cols;
                const double* gr = g + r * cols;
                double* out = ga() + r * cols;
                const double norm = std::sqrt(K.sum_sq(x, cols));
                if (norm > geom::kMaxNorm) {
                    const double s = geom::kMaxNorm / norm;
                    const double radial = K.dot(x, gr, cols) / (norm * norm);
                    for (std::size_t j = 0; j < cols; ++j) {
                        out[j] += s * (gr[j] - radial * x[j]);
                    }
                } else {
                    K.axpy(1.0, gr, out, cols);
                }
            }
            break;
        }
        case Op::kDetach:
            break;
    }
}

}  // namespace hyp2nav::ad
