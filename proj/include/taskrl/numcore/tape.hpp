#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "taskrl/errors.hpp"
#include "taskrl/numcore/param_store.hpp"
#include "taskrl/numcore/tensor.hpp"

namespace taskrl {

/// Handle to a node on a Tape.
struct NodeRef {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

/// Reverse-mode autodiff over a linear tape of matrix ops.
///
/// Forward values are computed eagerly as ops are recorded; backward()
/// sweeps the tape in reverse and accumulates parameter gradients into the
/// bound ParamStore. Repeated backward calls accumulate (no implicit
/// grad reset). One tape is single-threaded; independent tapes may run
/// concurrently against read-only parameter values.
class Tape {
public:
    NodeRef leaf(Tensor t) {
        Node n;
        n.op = Op::Leaf;
        n.val = std::move(t);
        return push(std::move(n));
    }

    NodeRef scalar(double v) { return leaf(Tensor::full(1, 1, v)); }

    NodeRef param(ParamStore& store, const std::string& path) {
        Node n;
        n.op = Op::Param;
        n.entry = &store.at(path);
        n.val = n.entry->value;
        n.needs_grad = true;
        return push(std::move(n));
    }

    const Tensor& value(NodeRef r) const { return nodes_[check(r)].val; }

    NodeRef matmul(NodeRef ra, NodeRef rb) {
        const Tensor& a = value(ra);
        const Tensor& b = value(rb);
        if (a.cols() != b.rows())
            throw DimensionError("matmul: inner extents differ, " + a.shape_str() + " vs " +
                                 b.shape_str());
        Node n = binary(Op::Matmul, ra, rb);
        n.val = Tensor(a.rows(), b.cols());
        const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
        for (std::size_t i = 0; i < m; ++i) {
            double* ci = n.val.data() + i * p;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double aik = a(i, kk);
                const double* bk = b.data() + kk * p;
                for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
            }
        }
        return push(std::move(n));
    }

    NodeRef add(NodeRef ra, NodeRef rb) {
        const Tensor& a = value(ra);
        const Tensor& b = value(rb);
        if (!a.same_shape(b))
            throw DimensionError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
        Node n = binary(Op::Add, ra, rb);
        n.val = a;
        for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] += b[i];
        return push(std::move(n));
    }

    NodeRef sub(NodeRef ra, NodeRef rb) {
        const Tensor& a = value(ra);
        const Tensor& b = value(rb);
        if (!a.same_shape(b))
            throw DimensionError("sub: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
        Node n = binary(Op::Sub, ra, rb);
        n.val = a;
        for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] -= b[i];
        return push(std::move(n));
    }

    /// Broadcasts a 1xN row vector over every row of a TxN matrix.
    NodeRef add_rowvec(NodeRef ra, NodeRef rv) {
        const Tensor& a = value(ra);
        const Tensor& v = value(rv);
        if (v.rows() != 1 || v.cols() != a.cols())
            throw DimensionError("add_rowvec: " + a.shape_str() + " with " + v.shape_str());
        Node n = binary(Op::AddRowVec, ra, rv);
        n.val = a;
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) n.val(i, j) += v[j];
        return push(std::move(n));
    }

    NodeRef mul(NodeRef ra, NodeRef rb) {
        const Tensor& a = value(ra);
        const Tensor& b = value(rb);
        if (!a.same_shape(b))
            throw DimensionError("mul: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
        Node n = binary(Op::Mul, ra, rb);
        n.val = a;
        for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] *= b[i];
        return push(std::move(n));
    }

    NodeRef scale(NodeRef ra, double c) {
        Node n = unary(Op::Scale, ra);
        n.s0 = c;
        n.val = value(ra);
        for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] *= c;
        return push(std::move(n));
    }

    NodeRef relu(NodeRef ra) {
        Node n = unary(Op::Relu, ra);
        n.val = value(ra);
        for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::max(0.0, n.val[i]);
        return push(std::move(n));
    }

    NodeRef exp(NodeRef ra) {
        Node n = unary(Op::Exp, ra);
        n.val = value(ra);
        for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::exp(n.val[i]);
        return push(std::move(n));
    }

    NodeRef clamp(NodeRef ra, double lo, double hi) {
        Node n = unary(Op::Clamp, ra);
        n.s0 = lo;
        n.s1 = hi;
        n.val = value(ra);
        for (std::size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::clamp(n.val[i], lo, hi);
        return push(std::move(n));
    }

    /// Elementwise minimum of two scalars; gradient follows the smaller
    /// operand (the first on exact ties).
    NodeRef min2(NodeRef ra, NodeRef rb) {
        const Tensor& a = value(ra);
        const Tensor& b = value(rb);
        if (!a.is_scalar() || !b.is_scalar()) throw ContractError("min2: scalar operands required");
        Node n = binary(Op::Min2, ra, rb);
        n.val = Tensor::full(1, 1, std::min(a[0], b[0]));
        return push(std::move(n));
    }

    /// Numerically stable row softmax (max-subtracted).
    NodeRef softmax_rows(NodeRef ra) {
        const Tensor& a = value(ra);
        Node n = unary(Op::SoftmaxRows, ra);
        n.val = a;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double m = a(i, 0);
            for (std::size_t j = 1; j < a.cols(); ++j) m = std::max(m, a(i, j));
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols(); ++j) {
                const double e = std::exp(a(i, j) - m);
                n.val(i, j) = e;
                s += e;
            }
            const double inv = 1.0 / s;
            for (std::size_t j = 0; j < a.cols(); ++j) n.val(i, j) *= inv;
        }
        return push(std::move(n));
    }

    /// Per-row standardization (epsilon inside the sqrt) followed by an
    /// affine map with a shared gain/bias row pair.
    NodeRef layer_norm(NodeRef rx, NodeRef rgain, NodeRef rbias, double eps = 1e-5) {
        const Tensor& x = value(rx);
        const Tensor& g = value(rgain);
        const Tensor& b = value(rbias);
        if (x.cols() < 2) throw ContractError("layer_norm: row width must be >= 2");
        if (g.rows() != 1 || g.cols() != x.cols() || b.rows() != 1 || b.cols() != x.cols())
            throw DimensionError("layer_norm: gain/bias must be 1x" + std::to_string(x.cols()));
        Node n;
        n.op = Op::LayerNorm;
        n.a = check(rx);
        n.b = check(rgain);
        n.c = check(rbias);
        n.s0 = eps;
        n.needs_grad = nodes_[n.a].needs_grad || nodes_[n.b].needs_grad || nodes_[n.c].needs_grad;
        n.val = x;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double mean = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) mean += x(i, j);
            mean /= static_cast<double>(x.cols());
            double var = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) {
                const double d = x(i, j) - mean;
                var += d * d;
            }
            var /= static_cast<double>(x.cols());
            const double inv = 1.0 / std::sqrt(var + eps);
            for (std::size_t j = 0; j < x.cols(); ++j)
                n.val(i, j) = (x(i, j) - mean) * inv * g[j] + b[j];
        }
        return push(std::move(n));
    }

    NodeRef transpose(NodeRef ra) {
        const Tensor& a = value(ra);
        Node n = unary(Op::Transpose, ra);
        n.val = Tensor(a.cols(), a.rows());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) n.val(j, i) = a(i, j);
        return push(std::move(n));
    }

    /// Columns [c0, c1) as a new matrix.
    NodeRef slice_cols(NodeRef ra, std::size_t c0, std::size_t c1) {
        const Tensor& a = value(ra);
        if (c0 >= c1 || c1 > a.cols())
            throw DimensionError("slice_cols: [" + std::to_string(c0) + "," + std::to_string(c1) +
                                 ") of " + a.shape_str());
        Node n = unary(Op::SliceCols, ra);
        n.i0 = static_cast<int>(c0);
        n.i1 = static_cast<int>(c1);
        n.val = Tensor(a.rows(), c1 - c0);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = c0; j < c1; ++j) n.val(i, j - c0) = a(i, j);
        return push(std::move(n));
    }

    NodeRef concat_cols(const std::vector<NodeRef>& parts) {
        if (parts.empty()) throw ContractError("concat_cols: no inputs");
        const std::size_t rows = value(parts[0]).rows();
        std::size_t cols = 0;
        for (NodeRef r : parts) {
            if (value(r).rows() != rows) throw DimensionError("concat_cols: row count mismatch");
            cols += value(r).cols();
        }
        Node n;
        n.op = Op::ConcatCols;
        n.val = Tensor(rows, cols);
        std::size_t off = 0;
        for (NodeRef r : parts) {
            const Tensor& p = value(r);
            n.multi.push_back(check(r));
            n.needs_grad = n.needs_grad || nodes_[r.idx].needs_grad;
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < p.cols(); ++j) n.val(i, off + j) = p(i, j);
            off += p.cols();
        }
        return push(std::move(n));
    }

    NodeRef mean_rows(NodeRef ra) {
        const Tensor& a = value(ra);
        Node n = unary(Op::MeanRows, ra);
        n.val = Tensor(1, a.cols());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) n.val[j] += a(i, j);
        const double inv = 1.0 / static_cast<double>(a.rows());
        for (std::size_t j = 0; j < a.cols(); ++j) n.val[j] *= inv;
        return push(std::move(n));
    }

    NodeRef sum_all(NodeRef ra) {
        const Tensor& a = value(ra);
        Node n = unary(Op::SumAll, ra);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
        n.val = Tensor::full(1, 1, s);
        return push(std::move(n));
    }

    NodeRef mean_all(NodeRef ra) {
        const Tensor& a = value(ra);
        Node n = unary(Op::MeanAll, ra);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
        n.val = Tensor::full(1, 1, s / static_cast<double>(a.size()));
        return push(std::move(n));
    }

    /// Element (i, j) as a 1x1 tensor.
    NodeRef pick(NodeRef ra, std::size_t i, std::size_t j) {
        const Tensor& a = value(ra);
        if (i >= a.rows() || j >= a.cols())
            throw DimensionError("pick: (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") out of " + a.shape_str());
        Node n = unary(Op::Pick, ra);
        n.i0 = static_cast<int>(i);
        n.i1 = static_cast<int>(j);
        n.val = Tensor::full(1, 1, a(i, j));
        return push(std::move(n));
    }

    /// log(sum(exp(row))) of a 1xN row, max-shifted.
    NodeRef logsumexp_row(NodeRef ra) {
        const Tensor& a = value(ra);
        if (a.rows() != 1) throw ContractError("logsumexp_row: expected a 1xN row");
        Node n = unary(Op::LogSumExpRow, ra);
        double m = a[0];
        for (std::size_t j = 1; j < a.cols(); ++j) m = std::max(m, a[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += std::exp(a[j] - m);
        n.val = Tensor::full(1, 1, m + std::log(s));
        return push(std::move(n));
    }

    /// Reverse sweep from a scalar loss; accumulates into ParamStore grads.
    void backward(NodeRef loss) {
        Node& ln = nodes_[check(loss)];
        if (!ln.val.is_scalar())
            throw ContractError("backward: loss must be scalar, got " + ln.val.shape_str());
        for (auto& n : nodes_) n.grad = Tensor();
        ln.grad = Tensor::full(1, 1, 1.0);
        for (int i = loss.idx; i >= 0; --i) {
            Node& n = nodes_[i];
            if (!n.needs_grad || n.grad.size() == 0) continue;
            backprop(n);
        }
        for (auto& n : nodes_) {
            if (n.op == Op::Param && n.grad.size() != 0) {
                Tensor& g = n.entry->grad;
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
            }
        }
    }

    std::size_t num_nodes() const { return nodes_.size(); }

    void reset() { nodes_.clear(); }

private:
    enum class Op {
        Leaf, Param, Matmul, Add, Sub, AddRowVec, Mul, Scale, Relu, Exp, Clamp, Min2,
        SoftmaxRows, LayerNorm, Transpose, SliceCols, ConcatCols, MeanRows, SumAll,
        MeanAll, Pick, LogSumExpRow,
    };

    struct Node {
        Op op = Op::Leaf;
        int a = -1, b = -1, c = -1;
        Tensor val;
        Tensor grad;
        double s0 = 0.0, s1 = 0.0;
        int i0 = 0, i1 = 0;
        std::vector<int> multi;
        ParamStore::Entry* entry = nullptr;
        bool needs_grad = false;
    };

    int check(NodeRef r) const {
        if (r.idx < 0 || r.idx >= static_cast<int>(nodes_.size()))
            throw ContractError("Tape: invalid node handle");
        return r.idx;
    }

    Node unary(Op op, NodeRef ra) {
        Node n;
        n.op = op;
        n.a = check(ra);
        n.needs_grad = nodes_[n.a].needs_grad;
        return n;
    }

    Node binary(Op op, NodeRef ra, NodeRef rb) {
        Node n;
        n.op = op;
        n.a = check(ra);
        n.b = check(rb);
        n.needs_grad = nodes_[n.a].needs_grad || nodes_[n.b].needs_grad;
        return n;
    }

    NodeRef push(Node n) {
        nodes_.push_back(std::move(n));
        return NodeRef{static_cast<int>(nodes_.size()) - 1};
    }

    Tensor& grad_buf(int idx) {
        Node& n = nodes_[idx];
        if (n.grad.size() == 0) n.grad = Tensor(n.val.rows(), n.val.cols());
        return n.grad;
    }

    void backprop(Node& n) {
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
            case Op::Param:
                break;
            case Op::Matmul: {
                const Tensor& a = nodes_[n.a].val;
                const Tensor& b = nodes_[n.b].val;
                const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
                if (nodes_[n.a].needs_grad) {
                    Tensor& da = grad_buf(n.a);
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t kk = 0; kk < k; ++kk) {
                            double s = 0.0;
                            const double* gi = g.data() + i * p;
                            const double* bk = b.data() + kk * p;
                            for (std::size_t j = 0; j < p; ++j) s += gi[j] * bk[j];
                            da(i, kk) += s;
                        }
                }
                if (nodes_[n.b].needs_grad) {
                    Tensor& db = grad_buf(n.b);
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t kk = 0; kk < k; ++kk) {
                            const double aik = a(i, kk);
                            if (aik == 0.0) continue;
                            double* dbk = db.data() + kk * p;
                            const double* gi = g.data() + i * p;
                            for (std::size_t j = 0; j < p; ++j) dbk[j] += aik * gi[j];
                        }
                }
                break;
            }
            case Op::Add: {
                if (nodes_[n.a].needs_grad) {
                    Tensor& da = grad_buf(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
                }
                if (nodes_[n.b].needs_grad) {
                    Tensor& db = grad_buf(n.b);
                    for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
                }
                break;
            }
            case Op::Sub: {
                if (nodes_[n.a].needs_grad) {
                    Tensor& da = grad_buf(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
                }
                if (nodes_[n.b].needs_grad) {
                    Tensor& db = grad_buf(n.b);
                    for (std::size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
                }
                break;
            }
            case Op::AddRowVec: {
                if (nodes_[n.a].needs_grad) {
                    Tensor& da = grad_buf(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
                }
                if (nodes_[n.b].needs_grad) {
                    Tensor& dv = grad_buf(n.b);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) dv[j] += g(i, j);
                }
                break;
            }
            case Op::Mul: {
                const Tensor& a = nodes_[n.a].val;
                const Tensor& b = nodes_[n.b].val;
                if (nodes_[n.a].needs_grad) {
                    Tensor& da = grad_buf(n.a);
                    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * b[i];
                }
                if (nodes_[n.b].needs_grad) {
                    Tensor& db = grad_buf(n.b);
                    for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * a[i];
                }
                break;
            }
            case Op::Scale: {
                Tensor& da = grad_buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.s0;
                break;
            }
            case Op::Relu: {
                const Tensor& a = nodes_[n.a].val;
                Tensor& da = grad_buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (a[i] > 0.0) da[i] += g[i];
                break;
            }
            case Op::Exp: {
                Tensor& da = grad_buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.val[i];
                break;
            }
            case Op::Clamp: {
                const Tensor& a = nodes_[n.a].val;
                Tensor& da = grad_buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (a[i] >= n.s0 && a[i] <= n.s1) da[i] += g[i];
                break;
            }
            case Op::Min2: {
                const double av = nodes_[n.a].val[0];
                const double bv = nodes_[n.b].val[0];
                const int tgt = (av <= bv) ? n.a : n.b;
                if (nodes_[tgt].needs_grad) grad_buf(tgt)[0] += g[0];
                break;
            }
            case Op::SoftmaxRows: {
                Tensor& da = grad_buf(n.a);
                const Tensor& y = n.val;
                for (std::size_t i = 0; i < y.rows(); ++i) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
                    for (std::size_t j = 0; j < y.cols(); ++j)
                        da(i, j) += y(i, j) * (g(i, j) - dot);
                }
                break;
            }
            case Op::LayerNorm: {
                const Tensor& x = nodes_[n.a].val;
                const Tensor& gain = nodes_[n.b].val;
                const std::size_t d = x.cols();
                const double dd = static_cast<double>(d);
                for (std::size_t i = 0; i < x.rows(); ++i) {
                    double mean = 0.0;
                    for (std::size_t j = 0; j < d; ++j) mean += x(i, j);
                    mean /= dd;
                    double var = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const double dv = x(i, j) - mean;
                        var += dv * dv;
                    }
                    var /= dd;
                    const double inv = 1.0 / std::sqrt(var + n.s0);
                    double m1 = 0.0, m2 = 0.0;  // mean(dxhat), mean(dxhat*xhat)
                    for (std::size_t j = 0; j < d; ++j) {
                        const double xh = (x(i, j) - mean) * inv;
                        const double dxh = g(i, j) * gain[j];
                        m1 += dxh;
                        m2 += dxh * xh;
                    }
                    m1 /= dd;
                    m2 /= dd;
                    if (nodes_[n.a].needs_grad) {
                        Tensor& dx = grad_buf(n.a);
                        for (std::size_t j = 0; j < d; ++j) {
                            const double xh = (x(i, j) - mean) * inv;
                            const double dxh = g(i, j) * gain[j];
                            dx(i, j) += inv * (dxh - m1 - xh * m2);
                        }
                    }
                    if (nodes_[n.b].needs_grad) {
                        Tensor& dg = grad_buf(n.b);
                        for (std::size_t j = 0; j < d; ++j)
                            dg[j] += g(i, j) * (x(i, j) - mean) * inv;
                    }
                    if (nodes_[n.c].needs_grad) {
                        Tensor& db = grad_buf(n.c);
                        for (std::size_t j = 0; j < d; ++j) db[j] += g(i, j);
                    }
                }
                break;
            }
            case Op::Transpose: {
                Tensor& da = grad_buf(n.a);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) da(j, i) += g(i, j);
                break;
            }
            case Op::SliceCols: {
                Tensor& da = grad_buf(n.a);
                const std::size_t c0 = static_cast<std::size_t>(n.i0);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) da(i, c0 + j) += g(i, j);
                break;
            }
            case Op::ConcatCols: {
                std::size_t off = 0;
                for (int src : n.multi) {
                    const std::size_t w = nodes_[src].val.cols();
                    if (nodes_[src].needs_grad) {
                        Tensor& da = grad_buf(src);
                        for (std::size_t i = 0; i < g.rows(); ++i)
                            for (std::size_t j = 0; j < w; ++j) da(i, j) += g(i, off + j);
                    }
                    off += w;
                }
                break;
            }
            case Op::MeanRows: {
                Tensor& da = grad_buf(n.a);
                const double inv = 1.0 / static_cast<double>(nodes_[n.a].val.rows());
                for (std::size_t i = 0; i < da.rows(); ++i)
                    for (std::size_t j = 0; j < da.cols(); ++j) da(i, j) += g[j] * inv;
                break;
            }
            case Op::SumAll: {
                Tensor& da = grad_buf(n.a);
                for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[0];
                break;
            }
            case Op::MeanAll: {
                Tensor& da = grad_buf(n.a);
                const double inv = 1.0 / static_cast<double>(da.size());
                for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[0] * inv;
                break;
            }
            case Op::Pick: {
                Tensor& da = grad_buf(n.a);
                da(static_cast<std::size_t>(n.i0), static_cast<std::size_t>(n.i1)) += g[0];
                break;
            }
            case Op::LogSumExpRow: {
                const Tensor& a = nodes_[n.a].val;
                Tensor& da = grad_buf(n.a);
                const double lse = n.val[0];
                for (std::size_t j = 0; j < a.cols(); ++j)
                    da[j] += g[0] * std::exp(a[j] - lse);
                break;
            }
        }
    }

    std::vector<Node> nodes_;
};

}  // namespace taskrl
