#include "stepnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace stepnet {

namespace {

void check_finite(const std::vector<double>& vs, const char* what) {
  for (double v : vs)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

double relu(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// AffineLayer

AffineLayer AffineLayer::dense(std::size_t rows, std::size_t cols,
                               std::vector<double> weights,
                               std::vector<double> bias) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("AffineLayer: zero-sized layer");
  if (weights.size() != rows * cols)
    throw std::invalid_argument("AffineLayer: weight count != rows*cols");
  if (bias.size() != rows)
    throw std::invalid_argument("AffineLayer: bias count != rows");
  check_finite(weights, "AffineLayer weights");
  check_finite(bias, "AffineLayer bias");
  AffineLayer l;
  l.rows_ = rows;
  l.cols_ = cols;
  l.storage_ = Storage::Dense;
  l.dense_ = std::move(weights);
  l.bias_ = std::move(bias);
  return l;
}

AffineLayer AffineLayer::sparse(std::size_t rows, std::size_t cols,
                                std::vector<std::size_t> row_offsets,
                                std::vector<std::size_t> col_indices,
                                std::vector<double> values,
                                std::vector<double> bias) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("AffineLayer: zero-sized layer");
  if (row_offsets.size() != rows + 1 || row_offsets.front() != 0 ||
      row_offsets.back() != values.size())
    throw std::invalid_argument("AffineLayer: malformed row offsets");
  if (col_indices.size() != values.size())
    throw std::invalid_argument("AffineLayer: column/value count mismatch");
  for (std::size_t r = 0; r < rows; ++r)
    if (row_offsets[r] > row_offsets[r + 1])
      throw std::invalid_argument("AffineLayer: row offsets must be non-decreasing");
  for (std::size_t c : col_indices)
    if (c >= cols) throw std::invalid_argument("AffineLayer: column index out of range");
  if (bias.size() != rows)
    throw std::invalid_argument("AffineLayer: bias count != rows");
  check_finite(values, "AffineLayer values");
  check_finite(bias, "AffineLayer bias");
  AffineLayer l;
  l.rows_ = rows;
  l.cols_ = cols;
  l.storage_ = Storage::Sparse;
  l.row_offsets_ = std::move(row_offsets);
  l.col_indices_ = std::move(col_indices);
  l.values_ = std::move(values);
  l.bias_ = std::move(bias);
  return l;
}

AffineLayer AffineLayer::auto_storage(std::size_t rows, std::size_t cols,
                                      std::vector<double> weights,
                                      std::vector<double> bias) {
  if (weights.size() != rows * cols)
    throw std::invalid_argument("AffineLayer: weight count != rows*cols");
  std::size_t nnz = 0;
  for (double w : weights)
    if (w != 0.0) ++nnz;
  const double density =
      static_cast<double>(nnz) / static_cast<double>(rows * cols);
  if (density >= 0.01)
    return dense(rows, cols, std::move(weights), std::move(bias));

  std::vector<std::size_t> offs(rows + 1, 0), cols_idx;
  std::vector<double> vals;
  cols_idx.reserve(nnz);
  vals.reserve(nnz);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double w = weights[r * cols + c];
      if (w != 0.0) {
        cols_idx.push_back(c);
        vals.push_back(w);
      }
    }
    offs[r + 1] = vals.size();
  }
  return sparse(rows, cols, std::move(offs), std::move(cols_idx), std::move(vals),
                std::move(bias));
}

std::size_t AffineLayer::nonzeros() const {
  if (storage_ == Storage::Sparse) return values_.size();
  std::size_t nnz = 0;
  for (double w : dense_)
    if (w != 0.0) ++nnz;
  return nnz;
}

void AffineLayer::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_)
    throw std::invalid_argument("AffineLayer::apply: dimension mismatch");
  if (storage_ == Storage::Dense) {
    const double* w = dense_.data();
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      const double* wr = w + r * cols_;
      for (std::size_t c = 0; c < cols_; ++c) s += wr[c] * x[c];
      y[r] = s - bias_[r];
    }
  } else {
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
        s += values_[k] * x[col_indices_[k]];
      y[r] = s - bias_[r];
    }
  }
}

std::vector<double> AffineLayer::row_dense(std::size_t r) const {
  if (r >= rows_) throw std::out_of_range("AffineLayer::row_dense");
  std::vector<double> row(cols_, 0.0);
  if (storage_ == Storage::Dense) {
    std::copy(dense_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
              dense_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_),
              row.begin());
  } else {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      row[col_indices_[k]] = values_[k];
  }
  return row;
}

std::vector<double> AffineLayer::to_dense(std::size_t cap) const {
  if (rows_ * cols_ > cap)
    throw std::length_error("AffineLayer::to_dense: layer too large to densify");
  if (storage_ == Storage::Dense) return dense_;
  std::vector<double> w(rows_ * cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      w[r * cols_ + col_indices_[k]] = values_[k];
  return w;
}

// ---------------------------------------------------------------------------
// ReluNetwork

ReluNetwork::ReluNetwork(AffineLayer l1, AffineLayer l2, AffineLayer l3)
    : l1_(std::move(l1)), l2_(std::move(l2)), l3_(std::move(l3)) {
  if (l2_.cols() != l1_.rows() || l3_.cols() != l2_.rows())
    throw std::invalid_argument("ReluNetwork: layer widths do not chain");
  if (l3_.rows() != 1)
    throw std::invalid_argument("ReluNetwork: output layer must have one row");
}

AffineLayer& ReluNetwork::mutable_layer(std::size_t index) {
  switch (index) {
    case 1: return l1_;
    case 2: return l2_;
    case 3: return l3_;
    default: throw std::out_of_range("ReluNetwork::mutable_layer: index must be 1..3");
  }
}

std::string ReluNetwork::shape_string() const {
  const char* dash = "–";
  return std::to_string(input_dim()) + dash + std::to_string(width1()) + dash +
         std::to_string(width2()) + dash + "1";
}

double ReluNetwork::eval(std::span<const double> x) const {
  std::vector<double> h1(width1()), h2(width2()), out(1);
  l1_.apply(x, h1);
  for (double& v : h1) v = relu(v);
  l2_.apply(h1, h2);
  for (double& v : h2) v = relu(v);
  l3_.apply(h2, out);
  return out[0];
}

double ReluNetwork::eval2(Vec2 p) const {
  const double xy[2] = {p.x, p.y};
  return eval(std::span<const double>(xy, 2));
}

std::vector<double> ReluNetwork::eval_batch(std::span<const double> xs,
                                            std::size_t count,
                                            unsigned threads) const {
  const std::size_t d = input_dim();
  if (xs.size() != count * d)
    throw std::invalid_argument("ReluNetwork::eval_batch: flat input size mismatch");
  std::vector<double> out(count);
  if (count == 0) return out;

  auto run = [&](std::size_t begin, std::size_t end) {
    std::vector<double> h1(width1()), h2(width2()), y(1);
    for (std::size_t i = begin; i < end; ++i) {
      l1_.apply(xs.subspan(i * d, d), h1);
      for (double& v : h1) v = relu(v);
      l2_.apply(h1, h2);
      for (double& v : h2) v = relu(v);
      l3_.apply(h2, y);
      out[i] = y[0];
    }
  };

  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (nt == 1) {
    run(0, count);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (count + nt - 1) / nt;
  for (unsigned t = 0; t < nt; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back(run, b, e);
  }
  for (auto& th : pool) th.join();
  return out;
}

// ---------------------------------------------------------------------------
// affine_combine

namespace {

struct CsrBuilder {
  std::vector<std::size_t> offs{0}, cols;
  std::vector<double> vals;

  void append_row_shifted(const AffineLayer& layer, std::size_t r,
                          std::size_t col_shift, double scale) {
    if (layer.storage() == Storage::Sparse) {
      for (std::size_t k = layer.row_offsets()[r]; k < layer.row_offsets()[r + 1]; ++k) {
        if (layer.values()[k] == 0.0) continue;
        cols.push_back(layer.col_indices()[k] + col_shift);
        vals.push_back(scale * layer.values()[k]);
      }
    } else {
      const auto& w = layer.dense_weights();
      for (std::size_t c = 0; c < layer.cols(); ++c) {
        const double v = w[r * layer.cols() + c];
        if (v == 0.0) continue;
        cols.push_back(c + col_shift);
        vals.push_back(scale * v);
      }
    }
    offs.push_back(vals.size());
  }

  AffineLayer finish(std::size_t rows, std::size_t cols_total,
                     std::vector<double> bias) {
    // Hand back the smaller representation.
    const double density = static_cast<double>(vals.size()) /
                           (static_cast<double>(rows) * static_cast<double>(cols_total));
    if (density >= 0.01 &&
        rows * cols_total <= (std::size_t(1) << 28)) {
      std::vector<double> w(rows * cols_total, 0.0);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = offs[r]; k < offs[r + 1]; ++k)
          w[r * cols_total + cols[k]] = vals[k];
      return AffineLayer::dense(rows, cols_total, std::move(w), std::move(bias));
    }
    return AffineLayer::sparse(rows, cols_total, std::move(offs), std::move(cols),
                               std::move(vals), std::move(bias));
  }
};

}  // namespace

ReluNetwork affine_combine(
    const std::vector<std::pair<double, const ReluNetwork*>>& parts,
    double constant) {
  if (parts.empty()) throw std::invalid_argument("affine_combine: no parts");
  const std::size_t d = parts.front().second->input_dim();
  std::size_t n1 = 0, n2 = 0;
  for (const auto& [coeff, net] : parts) {
    if (net == nullptr) throw std::invalid_argument("affine_combine: null part");
    if (net->input_dim() != d)
      throw std::invalid_argument("affine_combine: parts disagree on input dimension");
    if (!std::isfinite(coeff))
      throw std::invalid_argument("affine_combine: non-finite coefficient");
    n1 += net->width1();
    n2 += net->width2();
  }

  CsrBuilder b1, b2, b3;
  std::vector<double> bias1, bias2, bias3(1, -constant);
  bias1.reserve(n1);
  bias2.reserve(n2);

  std::size_t shift1 = 0;
  for (const auto& [coeff, net] : parts) {
    const AffineLayer& l1 = net->layer1();
    for (std::size_t r = 0; r < l1.rows(); ++r) {
      b1.append_row_shifted(l1, r, 0, 1.0);
      bias1.push_back(l1.bias()[r]);
    }
    const AffineLayer& l2 = net->layer2();
    for (std::size_t r = 0; r < l2.rows(); ++r) {
      b2.append_row_shifted(l2, r, shift1, 1.0);
      bias2.push_back(l2.bias()[r]);
    }
    shift1 += net->width1();
  }

  // Single output row: coeff_k * w3_k blocks; bias accumulates coeff_k * b3_k.
  std::size_t shift = 0;
  for (const auto& [coeff, net] : parts) {
    const AffineLayer& l3 = net->layer3();
    if (l3.storage() == Storage::Sparse) {
      for (std::size_t k = l3.row_offsets()[0]; k < l3.row_offsets()[1]; ++k) {
        if (l3.values()[k] == 0.0) continue;
        b3.cols.push_back(l3.col_indices()[k] + shift);
        b3.vals.push_back(coeff * l3.values()[k]);
      }
    } else {
      for (std::size_t c = 0; c < l3.cols(); ++c) {
        const double v = l3.dense_weights()[c];
        if (v == 0.0) continue;
        b3.cols.push_back(c + shift);
        b3.vals.push_back(coeff * v);
      }
    }
    bias3[0] += coeff * l3.bias()[0];
    shift += net->width2();
  }
  b3.offs.push_back(b3.vals.size());

  return ReluNetwork(b1.finish(n1, d, std::move(bias1)),
                     b2.finish(n2, n1, std::move(bias2)),
                     b3.finish(1, n2, std::move(bias3)));
}

// ---------------------------------------------------------------------------
// normalize_first_layer

ReluNetwork normalize_first_layer(const ReluNetwork& net) {
  AffineLayer l1 = net.layer1();
  AffineLayer l2 = net.layer2();

  std::vector<double> scales(l1.rows());
  if (l1.storage() == Storage::Dense) {
    std::vector<double> w = l1.dense_weights();
    std::vector<double> b = l1.bias();
    for (std::size_t r = 0; r < l1.rows(); ++r) {
      double sq = 0.0;
      for (std::size_t c = 0; c < l1.cols(); ++c) {
        const double v = w[r * l1.cols() + c];
        sq += v * v;
      }
      const double nrm = std::sqrt(sq);
      if (nrm < 1e-300)
        throw std::invalid_argument("normalize_first_layer: zero first-layer row");
      scales[r] = nrm;
      for (std::size_t c = 0; c < l1.cols(); ++c) w[r * l1.cols() + c] /= nrm;
      b[r] /= nrm;
    }
    l1 = AffineLayer::dense(l1.rows(), l1.cols(), std::move(w), std::move(b));
  } else {
    std::vector<double> vals = l1.values();
    std::vector<double> b = l1.bias();
    for (std::size_t r = 0; r < l1.rows(); ++r) {
      double sq = 0.0;
      for (std::size_t k = l1.row_offsets()[r]; k < l1.row_offsets()[r + 1]; ++k)
        sq += vals[k] * vals[k];
      const double nrm = std::sqrt(sq);
      if (nrm < 1e-300)
        throw std::invalid_argument("normalize_first_layer: zero first-layer row");
      scales[r] = nrm;
      for (std::size_t k = l1.row_offsets()[r]; k < l1.row_offsets()[r + 1]; ++k)
        vals[k] /= nrm;
      b[r] /= nrm;
    }
    l1 = AffineLayer::sparse(l1.rows(), l1.cols(), std::vector<std::size_t>(l1.row_offsets()),
                             std::vector<std::size_t>(l1.col_indices()), std::move(vals),
                             std::move(b));
  }

  // relu is positively homogeneous, so the compensating factor moves across
  // it onto the matching second-layer column.
  if (l2.storage() == Storage::Dense) {
    std::vector<double> w = l2.dense_weights();
    for (std::size_t r = 0; r < l2.rows(); ++r)
      for (std::size_t c = 0; c < l2.cols(); ++c) w[r * l2.cols() + c] *= scales[c];
    l2 = AffineLayer::dense(l2.rows(), l2.cols(), std::move(w),
                            std::vector<double>(l2.bias()));
  } else {
    std::vector<double> vals = l2.values();
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] *= scales[l2.col_indices()[k]];
    l2 = AffineLayer::sparse(l2.rows(), l2.cols(), std::vector<std::size_t>(l2.row_offsets()),
                             std::vector<std::size_t>(l2.col_indices()), std::move(vals),
                             std::vector<double>(l2.bias()));
  }

  return ReluNetwork(std::move(l1), std::move(l2), net.layer3());
}

// ---------------------------------------------------------------------------
// Breaklines and slicing

Hyperplane first_layer_breakline(const ReluNetwork& net, std::size_t r) {
  if (r >= net.width1())
    throw std::out_of_range("first_layer_breakline: row out of range");
  return Hyperplane(net.layer1().row_dense(r), net.layer1().bias()[r]);
}

std::vector<Hyperplane> first_layer_breaklines(const ReluNetwork& net) {
  std::vector<Hyperplane> hs;
  hs.reserve(net.width1());
  for (std::size_t r = 0; r < net.width1(); ++r)
    hs.push_back(first_layer_breakline(net, r));
  return hs;
}

ReluNetwork slice_network(const ReluNetwork& net,
                          const std::vector<std::size_t>& fixed_coords,
                          const std::vector<double>& fixed_values) {
  if (fixed_coords.size() != fixed_values.size())
    throw std::invalid_argument("slice_network: coords/values size mismatch");
  const std::size_t d = net.input_dim();
  std::vector<char> fixed(d, 0);
  std::vector<double> value(d, 0.0);
  for (std::size_t i = 0; i < fixed_coords.size(); ++i) {
    if (fixed_coords[i] >= d)
      throw std::out_of_range("slice_network: fixed coordinate out of range");
    if (fixed[fixed_coords[i]])
      throw std::invalid_argument("slice_network: coordinate fixed twice");
    fixed[fixed_coords[i]] = 1;
    value[fixed_coords[i]] = fixed_values[i];
  }
  std::vector<std::size_t> new_col(d, 0);
  std::size_t kept = 0;
  for (std::size_t c = 0; c < d; ++c)
    if (!fixed[c]) new_col[c] = kept++;
  if (kept == 0)
    throw std::invalid_argument("slice_network: all coordinates fixed");

  const AffineLayer& l1 = net.layer1();

  // Pass 1: restricted first-layer rows; all-zero rows become constants.
  CsrBuilder b1;
  std::vector<double> bias1;
  std::vector<double> folded;        // relu output of dropped rows
  std::vector<std::size_t> old_to_new(l1.rows());
  std::vector<char> dropped(l1.rows(), 0);
  std::size_t live = 0;
  for (std::size_t r = 0; r < l1.rows(); ++r) {
    double contrib = 0.0;
    std::size_t nnz_kept = 0;
    auto scan = [&](std::size_t c, double w) {
      if (fixed[c]) {
        contrib += w * value[c];
      } else if (w != 0.0) {
        ++nnz_kept;
      }
    };
    if (l1.storage() == Storage::Sparse) {
      for (std::size_t k = l1.row_offsets()[r]; k < l1.row_offsets()[r + 1]; ++k)
        scan(l1.col_indices()[k], l1.values()[k]);
    } else {
      for (std::size_t c = 0; c < d; ++c) scan(c, l1.dense_weights()[r * d + c]);
    }
    const double nb = l1.bias()[r] - contrib;
    if (nnz_kept == 0) {
      dropped[r] = 1;
      folded.push_back(relu(-nb));
      continue;
    }
    old_to_new[r] = live++;
    if (l1.storage() == Storage::Sparse) {
      for (std::size_t k = l1.row_offsets()[r]; k < l1.row_offsets()[r + 1]; ++k) {
        const std::size_t c = l1.col_indices()[k];
        if (!fixed[c] && l1.values()[k] != 0.0) {
          b1.cols.push_back(new_col[c]);
          b1.vals.push_back(l1.values()[k]);
        }
      }
    } else {
      for (std::size_t c = 0; c < d; ++c) {
        const double w = l1.dense_weights()[r * d + c];
        if (!fixed[c] && w != 0.0) {
          b1.cols.push_back(new_col[c]);
          b1.vals.push_back(w);
        }
      }
    }
    b1.offs.push_back(b1.vals.size());
    bias1.push_back(nb);
  }
  if (live == 0)
    throw std::invalid_argument("slice_network: slice kills every first-layer unit");

  // Pass 2: second layer loses the dropped columns; their constant relu
  // outputs fold into the bias.
  std::vector<std::size_t> drop_index(l1.rows(), 0);
  for (std::size_t r = 0, di = 0; r < l1.rows(); ++r)
    if (dropped[r]) drop_index[r] = di++;
  const AffineLayer& l2 = net.layer2();
  CsrBuilder b2;
  std::vector<double> bias2 = l2.bias();
  for (std::size_t r = 0; r < l2.rows(); ++r) {
    auto scan = [&](std::size_t c, double w) {
      if (w == 0.0) return;
      if (dropped[c]) {
        bias2[r] -= w * folded[drop_index[c]];
      } else {
        b2.cols.push_back(old_to_new[c]);
        b2.vals.push_back(w);
      }
    };
    if (l2.storage() == Storage::Sparse) {
      for (std::size_t k = l2.row_offsets()[r]; k < l2.row_offsets()[r + 1]; ++k)
        scan(l2.col_indices()[k], l2.values()[k]);
    } else {
      for (std::size_t c = 0; c < l2.cols(); ++c) scan(c, l2.dense_weights()[r * l2.cols() + c]);
    }
    b2.offs.push_back(b2.vals.size());
  }

  return ReluNetwork(b1.finish(live, kept, std::move(bias1)),
                     b2.finish(l2.rows(), live, std::move(bias2)), net.layer3());
}

}  // namespace stepnet
