#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Reverse-mode autodiff over row-major double matrices. A Tape owns all node
// storage; Tensor is a cheap handle (tape pointer + node index). Recording is
// define-by-run: every op appends a node that remembers its parents and an
// opcode, and backward() replays the nodes in reverse. Node buffers are pooled
// and reused across tape.reset() calls, so a training step stops allocating
// once the pool has warmed up.
//
// The hyperbolic composites (exp_map / log_map / mobius ops / ball distance)
// are built from smooth ratio primitives, so their gradients stay finite at
// the origin and near the ball boundary.

namespace hyp2nav::ad {

class Tape;

struct Tensor {
    Tape* tape = nullptr;
    std::int32_t idx = -1;

    bool valid() const { return tape != nullptr && idx >= 0; }
    std::size_t rows() const;
    std::size_t cols() const;
    std::size_t size() const;
    const double* data() const;
    double* data();
    const double* grad() const;
    double scalar() const;  // value of a 1x1 tensor
};

// Trainable parameter: owns its value buffer; the tape reads it by pointer
// and accumulates into `grad`, so optimizer updates are visible to the next
// forward pass without copying.
struct Param {
    std::string name;
    std::size_t rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> grad;
    bool on_manifold = false;  // lives in the Poincare ball, needs Riemannian updates

    Param() = default;
    Param(std::string n, std::size_t r, std::size_t c, bool manifold = false)
        : name(std::move(n)), rows(r), cols(c), value(r * c, 0.0), grad(r * c, 0.0),
          on_manifold(manifold) {}
    std::size_t size() const { return rows * cols; }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

enum class Op : std::uint8_t {
    kLeaf,          // constant / input, no parents
    kParamLeaf,     // bound to an external Param
    kAdd,           // elementwise a + b
    kSub,           // a - b
    kMul,           // a * b
    kNeg,           // -a
    kScale,         // c * a                  (c = stored constant)
    kAddConst,      // a + c
    kMatmul,        // a(mxk) b(kxn)
    kMatmulNT,      // a(mxk) b(nxk)^T
    kAddRowVec,     // a(mxn) + b(1xn) broadcast down rows
    kAddColVec,     // a(mxn) + b(mx1) broadcast across columns
    kMulColVec,     // a(mxn) * b(mx1)
    kDivColVec,     // a(mxn) / b(mx1)
    kRelu,          // max(a, 0)
    kLeakyRelu,     // a > 0 ? a : c*a
    kRowSoftmax,    // softmax along each row
    kRowSum,        // c * sum over each row -> (mx1)
    kRowSumSq,      // per-row |a_r|^2 -> (mx1)
    kRowDot,        // per-row <a_r, b_r> -> (mx1)
    kSumAll,        // 1x1 total
    kMeanAll,       // 1x1 mean
    kTanhRatio,     // elementwise tanh(sqrt(t))/sqrt(t), t >= 0
    kAtanhRatio,    // elementwise atanh(sqrt(t))/sqrt(t), 0 <= t < 1
    kAcosh1pSq,     // elementwise arcosh(1+2t)^2, t >= 0
    kConcatCols,    // [a | b]
    kConcatRows,    // [a ; b]
    kSliceRows,     // `rows` rows of a starting at aux
    kGatherRows,    // rows of a picked by an index list
    kGatherCols1,   // per row r, entry a[r, list[r]] -> (mx1)
    kCrossEntropy,  // per row, logsumexp(a_r) - a_r[list[r]] -> (mx1)
    kBlockOuterAdd, // blocks of A rows: out[sA+i, j] = a[sA+i] + b[sA+j]
    kBlockMatmul,   // per block: out_i = sum_j a[sA+i, j] * b[sA+j, :]
    kHuber,         // elementwise huber(a - b), delta = 1
    kBallProject,   // row rescale into the ball shell; tangential gradient where clamped
    kDetach,        // value copy, gradient barrier
};

struct Node {
    Op op = Op::kLeaf;
    std::int32_t a = -1, b = -1;  // parent indices
    std::int32_t rows = 0, cols = 0;
    double cval = 0.0;            // scalar payload (scale factor, slope, ...)
    std::int32_t aux = -1;        // index-list slot, block size, or row offset
    Param* param = nullptr;       // for kParamLeaf
    std::vector<double> val;
    std::vector<double> grad;
    bool needs_grad = false;

    std::size_t size() const { return std::size_t(rows) * std::size_t(cols); }
};

class Tape {
public:
    // Releases every node but keeps buffer capacity; call once per step.
    void reset();

    // When false, ops still compute values but results carry no gradient.
    // Used for action selection, target-network passes and evaluation.
    void set_grad_enabled(bool on) { grad_enabled_ = on; }
    bool grad_enabled() const { return grad_enabled_; }

    Tensor input(std::size_t rows, std::size_t cols, const double* data);
    Tensor constant(std::size_t rows, std::size_t cols, double fill = 0.0);
    Tensor leaf(Param& p);

    Tensor add(Tensor a, Tensor b);
    Tensor sub(Tensor a, Tensor b);
    Tensor mul(Tensor a, Tensor b);
    Tensor neg(Tensor a);
    Tensor scale(Tensor a, double c);
    Tensor add_const(Tensor a, double c);
    Tensor matmul(Tensor a, Tensor b);
    Tensor matmul_nt(Tensor a, Tensor b);  // a(mxk) * b(nxk)^T -> (mxn)
    Tensor add_row_vec(Tensor a, Tensor row);
    Tensor add_col_vec(Tensor a, Tensor col);
    Tensor mul_col_vec(Tensor a, Tensor col);
    Tensor div_col_vec(Tensor a, Tensor col);
    Tensor relu(Tensor a);
    Tensor leaky_relu(Tensor a, double slope);
    Tensor row_softmax(Tensor a);
    Tensor row_sum(Tensor a, double c = 1.0);
    Tensor row_mean(Tensor a) { return row_sum(a, 1.0 / double(node(a.idx).cols)); }
    Tensor row_sum_sq(Tensor a);
    Tensor row_dot(Tensor a, Tensor b);
    Tensor sum_all(Tensor a);
    Tensor mean_all(Tensor a);
    Tensor tanh_ratio(Tensor t);
    Tensor atanh_ratio(Tensor t);
    Tensor acosh1p_sq(Tensor t);
    Tensor concat_cols(Tensor a, Tensor b);
    Tensor concat_rows(Tensor a, Tensor b);
    Tensor slice_rows(Tensor a, std::size_t first, std::size_t count);
    Tensor gather_rows(Tensor a, const std::vector<std::int32_t>& rows);
    Tensor gather_cols1(Tensor a, const std::vector<std::int32_t>& col_per_row);
    Tensor cross_entropy_rows(Tensor logits, const std::vector<std::int32_t>& targets);
    Tensor block_outer_add(Tensor a, Tensor b, std::size_t block);
    Tensor block_matmul(Tensor scores, Tensor feats, std::size_t block);
    Tensor huber(Tensor a, Tensor b);
    Tensor ball_project_rows(Tensor v);
    Tensor detach(Tensor a);

    // --- hyperbolic composites (rows are independent points) ---
    Tensor exp_map_rows(Tensor u);                 // tangent rows -> ball rows
    Tensor log_map_rows(Tensor v);                 // ball rows -> tangent rows
    Tensor mobius_matvec_rows(Tensor x, Tensor W); // per-row W (x) x_r, W is (out x in)
    Tensor mobius_add_rows(Tensor x, Tensor y);
    Tensor dist_sq_rows(Tensor x, Tensor y);       // squared ball distance per row

    // Seeds d(loss)/d(loss) = 1 on a 1x1 node and propagates to all params.
    // Throws std::runtime_error naming the parameter if a parameter gradient
    // turns non-finite.
    void backward(Tensor loss);

    const Node& node(std::int32_t i) const { return nodes_[std::size_t(i)]; }
    Node& node(std::int32_t i) { return nodes_[std::size_t(i)]; }
    std::size_t num_nodes() const { return n_used_; }

private:
    friend struct Tensor;
    Tensor push(Op op, std::size_t rows, std::size_t cols, std::int32_t a = -1,
                std::int32_t b = -1, double cval = 0.0);
    std::int32_t store_indices(const std::vector<std::int32_t>& idx);
    void backward_node(std::int32_t i);

    std::vector<Node> nodes_;
    std::size_t n_used_ = 0;
    std::vector<std::vector<std::int32_t>> index_lists_;
    std::size_t n_index_used_ = 0;
    bool grad_enabled_ = true;
};

}  // namespace hyp2nav::ad
