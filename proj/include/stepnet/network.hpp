#pragma once

// Three-layer ReLU networks with the layer convention x |-> W x - b.
// Layers store their weights either densely (row-major) or sparsely (CSR);
// construction helpers pick whichever representation is smaller.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stepnet/geometry.hpp"

namespace stepnet {

enum class Storage { Dense, Sparse };

// One affine map x |-> W x - b together with the ReLU flag used by the
// network evaluator. W is rows x cols.
class AffineLayer {
 public:
  static AffineLayer dense(std::size_t rows, std::size_t cols,
                           std::vector<double> weights, std::vector<double> bias);
  static AffineLayer sparse(std::size_t rows, std::size_t cols,
                            std::vector<std::size_t> row_offsets,
                            std::vector<std::size_t> col_indices,
                            std::vector<double> values, std::vector<double> bias);

  // Re-encodes dense rows sparsely when fewer than 1% of entries are nonzero.
  static AffineLayer auto_storage(std::size_t rows, std::size_t cols,
                                  std::vector<double> weights,
                                  std::vector<double> bias);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Storage storage() const { return storage_; }
  const std::vector<double>& bias() const { return bias_; }
  std::vector<double>& mutable_bias() { return bias_; }

  std::size_t nonzeros() const;

  // y = W x - b ; y.size() must equal rows(), x.size() must equal cols().
  void apply(std::span<const double> x, std::span<double> y) const;

  // Row r as a dense vector.
  std::vector<double> row_dense(std::size_t r) const;

  // Dense copy of W (row-major). Refuses when rows*cols would exceed `cap`.
  std::vector<double> to_dense(std::size_t cap = std::size_t(1) << 28) const;

  // Sparse accessors (valid only when storage() == Storage::Sparse).
  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& dense_weights() const { return dense_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Storage storage_ = Storage::Dense;
  std::vector<double> dense_;  // row-major, rows*cols (dense only)
  std::vector<std::size_t> row_offsets_, col_indices_;  // CSR (sparse only)
  std::vector<double> values_;
  std::vector<double> bias_;
};

// N(x) = L3( relu(L2( relu(L1 x) )) ), scalar output. The two hidden layers
// apply ReLU; the output layer is affine.
class ReluNetwork {
 public:
  ReluNetwork(AffineLayer l1, AffineLayer l2, AffineLayer l3);

  const AffineLayer& layer1() const { return l1_; }
  const AffineLayer& layer2() const { return l2_; }
  const AffineLayer& layer3() const { return l3_; }
  AffineLayer& mutable_layer(std::size_t index);

  std::size_t input_dim() const { return l1_.cols(); }
  std::size_t width1() const { return l1_.rows(); }
  std::size_t width2() const { return l2_.rows(); }

  // "d–n1–n2–1" with en-dash separators.
  std::string shape_string() const;

  double eval(std::span<const double> x) const;

  // Evaluates `count` points packed row-major in xs (count * input_dim).
  // Deterministic: results are bit-identical for any thread count.
  std::vector<double> eval_batch(std::span<const double> xs, std::size_t count,
                                 unsigned threads = 1) const;

  double eval2(Vec2 p) const;  // convenience for planar networks

 private:
  AffineLayer l1_, l2_, l3_;
};

// Weighted sum of networks sharing one input dimension:
//   N(x) = constant + sum_k coeff_k * N_k(x)
// realised as a single network by stacking first layers, block-diagonal
// second layers, and concatenating scaled output rows. The constant is
// folded into the output bias with b3 = sum_k coeff_k * b3_k - constant.
ReluNetwork affine_combine(
    const std::vector<std::pair<double, const ReluNetwork*>>& parts,
    double constant);

// Rescales each first-layer row (and its bias entry) to unit norm; the
// compensating factor multiplies the matching second-layer column. Leaves
// the realised function unchanged. Throws on zero rows or sparse layers
// whose rescale would change the stored pattern (sparse values are scaled
// in place, so any storage is accepted).
ReluNetwork normalize_first_layer(const ReluNetwork& net);

// Hyperplane carried by first-layer unit r: {x : w_r . x = b_r}, normalised.
Hyperplane first_layer_breakline(const ReluNetwork& net, std::size_t r);
std::vector<Hyperplane> first_layer_breaklines(const ReluNetwork& net);

// Restriction of `net` to the affine slice where coordinates listed in
// `fixed_coords` are pinned to `fixed_values`. The surviving coordinates keep
// their relative order; constants fold into the first-layer bias. Rows whose
// surviving weights are all zero are folded into the second-layer bias and
// dropped.
ReluNetwork slice_network(const ReluNetwork& net,
                          const std::vector<std::size_t>& fixed_coords,
                          const std::vector<double>& fixed_values);

}  // namespace stepnet
