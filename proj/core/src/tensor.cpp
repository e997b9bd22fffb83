#include "crowdcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "crowdcast/errors.hpp"

namespace crowdcast {

std::int64_t shape_size(const Shape& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

const char* primitive_name(Primitive kind) {
  switch (kind) {
    case Primitive::kLeaf: return "leaf";
    case Primitive::kMatmul: return "matmul";
    case Primitive::kAdd: return "add";
    case Primitive::kSub: return "sub";
    case Primitive::kMul: return "mul-elementwise";
    case Primitive::kScalarMul: return "scalar-mul";
    case Primitive::kExp: return "exp";
    case Primitive::kLog: return "log";
    case Primitive::kTanh: return "tanh";
    case Primitive::kPrelu: return "prelu";
    case Primitive::kMaxPoolChannel: return "max-pool-channel";
    case Primitive::kReduceSum: return "reduce-sum";
    case Primitive::kCumsumTime: return "cumsum-time";
    case Primitive::kConvTemporal: return "conv-temporal";
    case Primitive::kConvChannelTime: return "conv-channel-time";
    case Primitive::kConcat: return "concat";
    case Primitive::kReshape: return "reshape";
    case Primitive::kMaskedFill: return "masked-fill";
  }
  return "?";
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)) {
  if (shape_size(shape_) != static_cast<std::int64_t>(data.size())) {
    throw ShapeError("tensor: shape " + shape_str(shape_) + " does not match buffer of " +
                     std::to_string(data.size()) + " elements");
  }
  data_ = std::make_shared<const std::vector<double>>(std::move(data));
}

Tensor Tensor::zeros(Shape shape) {
  auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
  auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value));
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, {value}); }

double Tensor::value() const {
  if (size() != 1) {
    throw RankError("value: tensor " + shape_str(shape_) + " is not a scalar");
  }
  return (*data_)[0];
}

double Tensor::at(const std::vector<int>& index) const {
  std::int64_t flat = 0;
  for (std::size_t d = 0; d < shape_.size(); ++d) {
    flat = flat * shape_[d] + index[d];
  }
  return (*data_)[static_cast<std::size_t>(flat)];
}

bool Tensor::all_finite() const {
  for (double v : *data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool Tensor::same_bits(const Tensor& other) const {
  if (shape_ != other.shape_) return false;
  return std::memcmp(data_->data(), other.data_->data(), data_->size() * sizeof(double)) == 0;
}

namespace {

[[noreturn]] void shape_fail(Primitive kind, const std::string& detail) {
  throw ShapeError(std::string(primitive_name(kind)) + ": " + detail);
}

// Right-aligned broadcast of two shapes; each dimension must match or be 1.
Shape broadcast_shape(Primitive kind, const Shape& a, const Shape& b) {
  const int rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (int d = 0; d < rank; ++d) {
    const int ad = d < rank - static_cast<int>(a.size()) ? 1 : a[d - (rank - a.size())];
    const int bd = d < rank - static_cast<int>(b.size()) ? 1 : b[d - (rank - b.size())];
    if (ad != bd && ad != 1 && bd != 1) {
      shape_fail(kind, "shapes " + shape_str(a) + " and " + shape_str(b) + " do not broadcast");
    }
    out[d] = std::max(ad, bd);
  }
  return out;
}

// Flat index into an operand of `shape` for position `index` on the
// broadcast output grid (right-aligned).
std::int64_t operand_index(const std::vector<int>& index, const Shape& shape, int out_rank) {
  std::int64_t flat = 0;
  const int off = out_rank - static_cast<int>(shape.size());
  for (std::size_t d = 0; d < shape.size(); ++d) {
    const int idx = shape[d] == 1 ? 0 : index[off + d];
    flat = flat * shape[d] + idx;
  }
  return flat;
}

bool next_index(std::vector<int>& index, const Shape& shape) {
  for (int d = static_cast<int>(shape.size()) - 1; d >= 0; --d) {
    if (++index[d] < shape[d]) return true;
    index[d] = 0;
  }
  return false;
}

// Key giving a total order on doubles by numeric value (sign-magnitude flip);
// sorting by it is safe even if non-finite values slip in.
std::uint64_t sort_key(double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof(u));
  return (u >> 63) ? ~u : (u | 0x8000000000000000ULL);
}

struct KindCheck {
  Primitive kind;
  void inputs(const std::vector<Tensor>& in, std::size_t n) const {
    if (in.size() != n) {
      shape_fail(kind, "expects " + std::to_string(n) + " inputs, got " + std::to_string(in.size()));
    }
  }
};

Shape infer_shape(Primitive kind, const std::vector<Tensor>& in, const Attrs& attrs) {
  KindCheck check{kind};
  switch (kind) {
    case Primitive::kLeaf:
      check.inputs(in, 1);
      return in[0].shape();
    case Primitive::kMatmul: {
      check.inputs(in, 2);
      const Shape& a = in[0].shape();
      const Shape& b = in[1].shape();
      if (a.size() < 2 || b.size() != 2) {
        shape_fail(kind, "needs [...,k] x [k,m]; got " + shape_str(a) + " x " + shape_str(b));
      }
      if (a.back() != b[0]) {
        shape_fail(kind, "inner dimensions mismatch " + shape_str(a) + " x " + shape_str(b));
      }
      Shape out(a.begin(), a.end() - 1);
      out.push_back(b[1]);
      return out;
    }
    case Primitive::kAdd:
    case Primitive::kSub:
    case Primitive::kMul:
      check.inputs(in, 2);
      return broadcast_shape(kind, in[0].shape(), in[1].shape());
    case Primitive::kScalarMul:
    case Primitive::kExp:
    case Primitive::kLog:
    case Primitive::kTanh:
      check.inputs(in, 1);
      return in[0].shape();
    case Primitive::kPrelu:
      check.inputs(in, 2);
      if (in[1].size() != 1) {
        shape_fail(kind, "slope must be a scalar, got " + shape_str(in[1].shape()));
      }
      return in[0].shape();
    case Primitive::kMaxPoolChannel: {
      check.inputs(in, 1);
      const Shape& s = in[0].shape();
      if (s.empty() || attrs.window < 1 || s.back() % attrs.window != 0) {
        shape_fail(kind, "channel dim of " + shape_str(s) + " not divisible by window " +
                             std::to_string(attrs.window));
      }
      Shape out = s;
      out.back() /= attrs.window;
      return out;
    }
    case Primitive::kReduceSum: {
      check.inputs(in, 1);
      const Shape& s = in[0].shape();
      if (attrs.axis < 0) return Shape{};
      if (attrs.axis >= static_cast<int>(s.size())) {
        shape_fail(kind, "axis " + std::to_string(attrs.axis) + " out of range for " + shape_str(s));
      }
      Shape out = s;
      out.erase(out.begin() + attrs.axis);
      return out;
    }
    case Primitive::kCumsumTime:
      check.inputs(in, 1);
      if (in[0].rank() < 1) shape_fail(kind, "needs rank >= 1");
      return in[0].shape();
    case Primitive::kConvTemporal: {
      check.inputs(in, 2);
      const Shape& x = in[0].shape();
      const Shape& k = in[1].shape();
      if (x.size() != 3 || k.size() != 3) {
        shape_fail(kind, "needs x[T,n,C], kernel[k,C,O]; got " + shape_str(x) + ", " + shape_str(k));
      }
      if (k[0] % 2 == 0) shape_fail(kind, "kernel size must be odd, got " + std::to_string(k[0]));
      if (k[1] != x[2]) {
        shape_fail(kind, "kernel channels " + shape_str(k) + " do not match input " + shape_str(x));
      }
      return Shape{x[0], x[1], k[2]};
    }
    case Primitive::kConvChannelTime: {
      check.inputs(in, 2);
      const Shape& x = in[0].shape();
      const Shape& k = in[1].shape();
      if (x.size() != 3 || k.size() != 3) {
        shape_fail(kind, "needs x[T,n,C], kernel[U,T,w]; got " + shape_str(x) + ", " + shape_str(k));
      }
      if (k[2] % 2 == 0) shape_fail(kind, "kernel size must be odd, got " + std::to_string(k[2]));
      if (k[1] != x[0]) {
        shape_fail(kind, "kernel time-channels " + shape_str(k) + " do not match input " + shape_str(x));
      }
      return Shape{k[0], x[1], x[2]};
    }
    case Primitive::kConcat: {
      check.inputs(in, 2);
      const Shape& a = in[0].shape();
      const Shape& b = in[1].shape();
      if (a.size() != b.size() || attrs.axis < 0 || attrs.axis >= static_cast<int>(a.size())) {
        shape_fail(kind, "bad axis " + std::to_string(attrs.axis) + " for " + shape_str(a) + ", " +
                             shape_str(b));
      }
      for (std::size_t d = 0; d < a.size(); ++d) {
        if (static_cast<int>(d) != attrs.axis && a[d] != b[d]) {
          shape_fail(kind, "shapes " + shape_str(a) + " and " + shape_str(b) +
                               " differ outside axis " + std::to_string(attrs.axis));
        }
      }
      Shape out = a;
      out[attrs.axis] += b[attrs.axis];
      return out;
    }
    case Primitive::kReshape: {
      check.inputs(in, 1);
      if (shape_size(attrs.shape) != in[0].size()) {
        shape_fail(kind, "cannot reshape " + shape_str(in[0].shape()) + " to " + shape_str(attrs.shape));
      }
      return attrs.shape;
    }
    case Primitive::kMaskedFill:
      check.inputs(in, 1);
      if (!attrs.mask || static_cast<std::int64_t>(attrs.mask->size()) != in[0].size()) {
        shape_fail(kind, "mask length does not match tensor " + shape_str(in[0].shape()));
      }
      return in[0].shape();
  }
  shape_fail(kind, "unhandled kind");
}

void axis_extents(const Shape& s, int axis, std::int64_t* outer, std::int64_t* n, std::int64_t* inner) {
  *outer = 1;
  *n = s[axis];
  *inner = 1;
  for (int d = 0; d < axis; ++d) *outer *= s[d];
  for (int d = axis + 1; d < static_cast<int>(s.size()); ++d) *inner *= s[d];
}

std::vector<double> eval_forward(Primitive kind, const std::vector<Tensor>& in, const Attrs& attrs,
                                 const Shape& out_shape) {
  const std::int64_t out_n = shape_size(out_shape);
  std::vector<double> out(static_cast<std::size_t>(out_n), 0.0);
  switch (kind) {
    case Primitive::kLeaf:
      out = in[0].data();
      break;
    case Primitive::kMatmul: {
      const auto& a = in[0].data();
      const auto& b = in[1].data();
      const int k = in[0].shape().back();
      const int m = in[1].shape()[1];
      const std::int64_t rows = in[0].size() / k;
      for (std::int64_t r = 0; r < rows; ++r) {
        for (int j = 0; j < m; ++j) {
          double acc = 0.0;
          for (int q = 0; q < k; ++q) acc += a[r * k + q] * b[static_cast<std::int64_t>(q) * m + j];
          out[r * m + j] = acc;
        }
      }
      break;
    }
    case Primitive::kAdd:
    case Primitive::kSub:
    case Primitive::kMul: {
      const auto& a = in[0].data();
      const auto& b = in[1].data();
      if (in[0].shape() == in[1].shape()) {
        for (std::int64_t i = 0; i < out_n; ++i) {
          out[i] = kind == Primitive::kAdd   ? a[i] + b[i]
                   : kind == Primitive::kSub ? a[i] - b[i]
                                             : a[i] * b[i];
        }
        break;
      }
      std::vector<int> idx(out_shape.size(), 0);
      const int rank = static_cast<int>(out_shape.size());
      std::int64_t flat = 0;
      do {
        const double av = a[operand_index(idx, in[0].shape(), rank)];
        const double bv = b[operand_index(idx, in[1].shape(), rank)];
        out[flat++] = kind == Primitive::kAdd   ? av + bv
                      : kind == Primitive::kSub ? av - bv
                                                : av * bv;
      } while (next_index(idx, out_shape));
      break;
    }
    case Primitive::kScalarMul: {
      const auto& a = in[0].data();
      for (std::int64_t i = 0; i < out_n; ++i) out[i] = attrs.scalar * a[i];
      break;
    }
    case Primitive::kExp: {
      const auto& a = in[0].data();
      for (std::int64_t i = 0; i < out_n; ++i) out[i] = std::exp(a[i]);
      break;
    }
    case Primitive::kLog: {
      const auto& a = in[0].data();
      for (std::int64_t i = 0; i < out_n; ++i) out[i] = std::log(a[i]);
      break;
    }
    case Primitive::kTanh: {
      const auto& a = in[0].data();
      for (std::int64_t i = 0; i < out_n; ++i) out[i] = std::tanh(a[i]);
      break;
    }
    case Primitive::kPrelu: {
      const auto& a = in[0].data();
      const double slope = in[1].data()[0];
      for (std::int64_t i = 0; i < out_n; ++i) out[i] = a[i] >= 0.0 ? a[i] : slope * a[i];
      break;
    }
    case Primitive::kMaxPoolChannel: {
      const auto& a = in[0].data();
      const int w = attrs.window;
      for (std::int64_t o = 0; o < out_n; ++o) {
        double best = a[o * w];
        for (int j = 1; j < w; ++j) best = std::max(best, a[o * w + j]);
        out[o] = best;
      }
      break;
    }
    case Primitive::kReduceSum: {
      const auto& a = in[0].data();
      if (attrs.axis < 0) {
        if (attrs.sorted_sum) {
          std::vector<double> vals = a;
          std::sort(vals.begin(), vals.end(),
                    [](double x, double y) { return sort_key(x) < sort_key(y); });
          double acc = 0.0;
          for (double v : vals) acc += v;
          out[0] = acc;
        } else {
          double acc = 0.0;
          for (double v : a) acc += v;
          out[0] = acc;
        }
        break;
      }
      std::int64_t outer, n, inner;
      axis_extents(in[0].shape(), attrs.axis, &outer, &n, &inner);
      std::vector<double> vals;
      for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t i = 0; i < inner; ++i) {
          if (attrs.sorted_sum) {
            vals.clear();
            for (std::int64_t j = 0; j < n; ++j) vals.push_back(a[(o * n + j) * inner + i]);
            std::sort(vals.begin(), vals.end(),
                      [](double x, double y) { return sort_key(x) < sort_key(y); });
            double acc = 0.0;
            for (double v : vals) acc += v;
            out[o * inner + i] = acc;
          } else {
            double acc = 0.0;
            for (std::int64_t j = 0; j < n; ++j) acc += a[(o * n + j) * inner + i];
            out[o * inner + i] = acc;
          }
        }
      }
      break;
    }
    case Primitive::kCumsumTime: {
      const auto& a = in[0].data();
      const std::int64_t t_n = in[0].shape()[0];
      const std::int64_t inner = out_n / t_n;
      for (std::int64_t i = 0; i < inner; ++i) out[i] = a[i];
      for (std::int64_t t = 1; t < t_n; ++t) {
        for (std::int64_t i = 0; i < inner; ++i) {
          out[t * inner + i] = out[(t - 1) * inner + i] + a[t * inner + i];
        }
      }
      break;
    }
    case Primitive::kConvTemporal: {
      const auto& x = in[0].data();
      const auto& k = in[1].data();
      const int t_n = in[0].shape()[0], n = in[0].shape()[1], c_n = in[0].shape()[2];
      const int k_n = in[1].shape()[0], o_n = in[1].shape()[2];
      const int h = (k_n - 1) / 2;
      for (int t = 0; t < t_n; ++t) {
        for (int i = 0; i < n; ++i) {
          for (int o = 0; o < o_n; ++o) {
            double acc = 0.0;
            for (int tau = 0; tau < k_n; ++tau) {
              const int src = t + tau - h;
              if (src < 0 || src >= t_n) continue;
              for (int c = 0; c < c_n; ++c) {
                acc += x[(static_cast<std::int64_t>(src) * n + i) * c_n + c] *
                       k[(static_cast<std::int64_t>(tau) * c_n + c) * o_n + o];
              }
            }
            out[(static_cast<std::int64_t>(t) * n + i) * o_n + o] = acc;
          }
        }
      }
      break;
    }
    case Primitive::kConvChannelTime: {
      const auto& x = in[0].data();
      const auto& k = in[1].data();
      const int t_n = in[0].shape()[0], n = in[0].shape()[1], c_n = in[0].shape()[2];
      const int u_n = in[1].shape()[0], w_n = in[1].shape()[2];
      const int h = (w_n - 1) / 2;
      for (int u = 0; u < u_n; ++u) {
        for (int i = 0; i < n; ++i) {
          for (int c = 0; c < c_n; ++c) {
            double acc = 0.0;
            for (int t = 0; t < t_n; ++t) {
              for (int d = 0; d < w_n; ++d) {
                const int src = c + d - h;
                if (src < 0 || src >= c_n) continue;
                acc += x[(static_cast<std::int64_t>(t) * n + i) * c_n + src] *
                       k[(static_cast<std::int64_t>(u) * t_n + t) * w_n + d];
              }
            }
            out[(static_cast<std::int64_t>(u) * n + i) * c_n + c] = acc;
          }
        }
      }
      break;
    }
    case Primitive::kConcat: {
      const auto& a = in[0].data();
      const auto& b = in[1].data();
      std::int64_t outer, n, inner;
      axis_extents(out_shape, attrs.axis, &outer, &n, &inner);
      const std::int64_t an = in[0].shape()[attrs.axis];
      for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t j = 0; j < n; ++j) {
          const double* src = j < an ? &a[(o * an + j) * inner] : &b[(o * (n - an) + (j - an)) * inner];
          std::copy(src, src + inner, &out[(o * n + j) * inner]);
        }
      }
      break;
    }
    case Primitive::kReshape:
      out = in[0].data();
      break;
    case Primitive::kMaskedFill: {
      const auto& a = in[0].data();
      const auto& mask = *attrs.mask;
      for (std::int64_t i = 0; i < out_n; ++i) out[i] = mask[i] ? attrs.scalar : a[i];
      break;
    }
  }
  return out;
}

}  // namespace

int Tape::record(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

Tensor Tape::leaf(const Tensor& value) {
  if (value.on_tape()) {
    throw TapeError("leaf: value is already tracked on a tape");
  }
  Tensor tracked = value;
  tracked.tape_ = this;
  Node node{Primitive::kLeaf, {}, {value}, tracked, {}};
  tracked.node_ = record(std::move(node));
  nodes_.back().output = tracked;
  leaf_ids_.push_back(tracked.node_);
  return tracked;
}

Tensor apply_primitive(Primitive kind, const std::vector<Tensor>& inputs, const Attrs& attrs) {
  if (kind == Primitive::kLeaf) {
    throw TapeError("leaf tensors are created through Tape::leaf");
  }
  Tape* tape = nullptr;
  for (const Tensor& t : inputs) {
    if (!t.on_tape()) continue;
    if (tape == nullptr) {
      tape = t.tape();
    } else if (tape != t.tape()) {
      throw TapeError(std::string(primitive_name(kind)) + ": inputs recorded on different tapes");
    }
  }
  const Shape out_shape = infer_shape(kind, inputs, attrs);
  std::vector<double> data = eval_forward(kind, inputs, attrs, out_shape);
  Tensor out(out_shape, std::move(data));
  if (tape != nullptr) {
    Tape::Node node;
    node.kind = kind;
    node.attrs = attrs;
    node.inputs = inputs;
    for (const Tensor& t : inputs) node.parents.push_back(t.on_tape() ? t.node() : -1);
    out.tape_ = tape;
    out.node_ = tape->record(std::move(node));
    tape->nodes_[out.node_].output = out;
  }
  return out;
}

GradMap Tape::backward(const Tensor& loss) const {
  if (!loss.on_tape() || loss.tape() != this) {
    throw TapeError("backward: loss is not recorded on this tape");
  }
  if (loss.size() != 1) {
    throw RankError("backward: loss has shape " + shape_str(loss.shape()) + ", expected a scalar");
  }

  std::vector<std::vector<double>> acc(nodes_.size());
  acc[loss.node()] = {1.0};

  auto bump = [&](int parent, std::int64_t flat, double v) {
    auto& slot = acc[parent];
    if (slot.empty()) slot.assign(static_cast<std::size_t>(nodes_[parent].output.size()), 0.0);
    slot[static_cast<std::size_t>(flat)] += v;
  };

  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    const Node& node = nodes_[id];
    if (acc[id].empty() || node.kind == Primitive::kLeaf) continue;
    const std::vector<double>& g = acc[id];
    const auto tracked = [&](int slot) { return node.parents[slot] >= 0; };

    switch (node.kind) {
      case Primitive::kLeaf:
        break;
      case Primitive::kMatmul: {
        const auto& a = node.inputs[0].data();
        const auto& b = node.inputs[1].data();
        const int k = node.inputs[0].shape().back();
        const int m = node.inputs[1].shape()[1];
        const std::int64_t rows = node.inputs[0].size() / k;
        if (tracked(0)) {
          for (std::int64_t r = 0; r < rows; ++r)
            for (int q = 0; q < k; ++q) {
              double s = 0.0;
              for (int j = 0; j < m; ++j) s += g[r * m + j] * b[static_cast<std::int64_t>(q) * m + j];
              bump(node.parents[0], r * k + q, s);
            }
        }
        if (tracked(1)) {
          for (int q = 0; q < k; ++q)
            for (int j = 0; j < m; ++j) {
              double s = 0.0;
              for (std::int64_t r = 0; r < rows; ++r) s += a[r * k + q] * g[r * m + j];
              bump(node.parents[1], static_cast<std::int64_t>(q) * m + j, s);
            }
        }
        break;
      }
      case Primitive::kAdd:
      case Primitive::kSub:
      case Primitive::kMul: {
        const Shape& os = node.output.shape();
        const int rank = static_cast<int>(os.size());
        const auto& a = node.inputs[0].data();
        const auto& b = node.inputs[1].data();
        std::vector<int> idx(os.size(), 0);
        std::int64_t flat = 0;
        do {
          const std::int64_t ai = operand_index(idx, node.inputs[0].shape(), rank);
          const std::int64_t bi = operand_index(idx, node.inputs[1].shape(), rank);
          const double gv = g[flat++];
          switch (node.kind) {
            case Primitive::kAdd:
              if (tracked(0)) bump(node.parents[0], ai, gv);
              if (tracked(1)) bump(node.parents[1], bi, gv);
              break;
            case Primitive::kSub:
              if (tracked(0)) bump(node.parents[0], ai, gv);
              if (tracked(1)) bump(node.parents[1], bi, -gv);
              break;
            default:
              if (tracked(0)) bump(node.parents[0], ai, gv * b[bi]);
              if (tracked(1)) bump(node.parents[1], bi, gv * a[ai]);
              break;
          }
        } while (next_index(idx, os));
        break;
      }
      case Primitive::kScalarMul:
        if (tracked(0)) {
          for (std::int64_t i = 0; i < node.output.size(); ++i)
            bump(node.parents[0], i, node.attrs.scalar * g[i]);
        }
        break;
      case Primitive::kExp:
        if (tracked(0)) {
          const auto& out = node.output.data();
          for (std::int64_t i = 0; i < node.output.size(); ++i) bump(node.parents[0], i, g[i] * out[i]);
        }
        break;
      case Primitive::kLog:
        if (tracked(0)) {
          const auto& x = node.inputs[0].data();
          for (std::int64_t i = 0; i < node.output.size(); ++i) bump(node.parents[0], i, g[i] / x[i]);
        }
        break;
      case Primitive::kTanh:
        if (tracked(0)) {
          const auto& out = node.output.data();
          for (std::int64_t i = 0; i < node.output.size(); ++i)
            bump(node.parents[0], i, g[i] * (1.0 - out[i] * out[i]));
        }
        break;
      case Primitive::kPrelu: {
        const auto& x = node.inputs[0].data();
        const double slope = node.inputs[1].data()[0];
        if (tracked(0)) {
          for (std::int64_t i = 0; i < node.output.size(); ++i)
            bump(node.parents[0], i, g[i] * (x[i] >= 0.0 ? 1.0 : slope));
        }
        if (tracked(1)) {
          double s = 0.0;
          for (std::int64_t i = 0; i < node.output.size(); ++i)
            if (x[i] < 0.0) s += g[i] * x[i];
          bump(node.parents[1], 0, s);
        }
        break;
      }
      case Primitive::kMaxPoolChannel:
        if (tracked(0)) {
          const auto& x = node.inputs[0].data();
          const int w = node.attrs.window;
          for (std::int64_t o = 0; o < node.output.size(); ++o) {
            int best = 0;
            for (int j = 1; j < w; ++j)
              if (x[o * w + j] > x[o * w + best]) best = j;
            bump(node.parents[0], o * w + best, g[o]);
          }
        }
        break;
      case Primitive::kReduceSum:
        if (tracked(0)) {
          if (node.attrs.axis < 0) {
            for (std::int64_t i = 0; i < node.inputs[0].size(); ++i) bump(node.parents[0], i, g[0]);
          } else {
            std::int64_t outer, n, inner;
            axis_extents(node.inputs[0].shape(), node.attrs.axis, &outer, &n, &inner);
            for (std::int64_t o = 0; o < outer; ++o)
              for (std::int64_t j = 0; j < n; ++j)
                for (std::int64_t i = 0; i < inner; ++i)
                  bump(node.parents[0], (o * n + j) * inner + i, g[o * inner + i]);
          }
        }
        break;
      case Primitive::kCumsumTime:
        if (tracked(0)) {
          const std::int64_t t_n = node.inputs[0].shape()[0];
          const std::int64_t inner = node.output.size() / t_n;
          std::vector<double> suffix(static_cast<std::size_t>(inner), 0.0);
          for (std::int64_t t = t_n - 1; t >= 0; --t) {
            for (std::int64_t i = 0; i < inner; ++i) {
              suffix[i] += g[t * inner + i];
              bump(node.parents[0], t * inner + i, suffix[i]);
            }
          }
        }
        break;
      case Primitive::kConvTemporal: {
        const auto& x = node.inputs[0].data();
        const auto& k = node.inputs[1].data();
        const int t_n = node.inputs[0].shape()[0], n = node.inputs[0].shape()[1],
                  c_n = node.inputs[0].shape()[2];
        const int k_n = node.inputs[1].shape()[0], o_n = node.inputs[1].shape()[2];
        const int h = (k_n - 1) / 2;
        for (int t = 0; t < t_n; ++t)
          for (int tau = 0; tau < k_n; ++tau) {
            const int src = t + tau - h;
            if (src < 0 || src >= t_n) continue;
            for (int i = 0; i < n; ++i)
              for (int o = 0; o < o_n; ++o) {
                const double gv = g[(static_cast<std::int64_t>(t) * n + i) * o_n + o];
                if (gv == 0.0) continue;
                for (int c = 0; c < c_n; ++c) {
                  const std::int64_t xi = (static_cast<std::int64_t>(src) * n + i) * c_n + c;
                  const std::int64_t ki = (static_cast<std::int64_t>(tau) * c_n + c) * o_n + o;
                  if (tracked(0)) bump(node.parents[0], xi, gv * k[ki]);
                  if (tracked(1)) bump(node.parents[1], ki, gv * x[xi]);
                }
              }
          }
        break;
      }
      case Primitive::kConvChannelTime: {
        const auto& x = node.inputs[0].data();
        const auto& k = node.inputs[1].data();
        const int t_n = node.inputs[0].shape()[0], n = node.inputs[0].shape()[1],
                  c_n = node.inputs[0].shape()[2];
        const int u_n = node.inputs[1].shape()[0], w_n = node.inputs[1].shape()[2];
        const int h = (w_n - 1) / 2;
        for (int u = 0; u < u_n; ++u)
          for (int i = 0; i < n; ++i)
            for (int c = 0; c < c_n; ++c) {
              const double gv = g[(static_cast<std::int64_t>(u) * n + i) * c_n + c];
              if (gv == 0.0) continue;
              for (int t = 0; t < t_n; ++t)
                for (int d = 0; d < w_n; ++d) {
                  const int src = c + d - h;
                  if (src < 0 || src >= c_n) continue;
                  const std::int64_t xi = (static_cast<std::int64_t>(t) * n + i) * c_n + src;
                  const std::int64_t ki = (static_cast<std::int64_t>(u) * t_n + t) * w_n + d;
                  if (tracked(0)) bump(node.parents[0], xi, gv * k[ki]);
                  if (tracked(1)) bump(node.parents[1], ki, gv * x[xi]);
                }
            }
        break;
      }
      case Primitive::kConcat: {
        std::int64_t outer, n, inner;
        axis_extents(node.output.shape(), node.attrs.axis, &outer, &n, &inner);
        const std::int64_t an = node.inputs[0].shape()[node.attrs.axis];
        for (std::int64_t o = 0; o < outer; ++o)
          for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < inner; ++i) {
              const double gv = g[(o * n + j) * inner + i];
              if (j < an) {
                if (tracked(0)) bump(node.parents[0], (o * an + j) * inner + i, gv);
              } else {
                if (tracked(1)) bump(node.parents[1], (o * (n - an) + (j - an)) * inner + i, gv);
              }
            }
        break;
      }
      case Primitive::kReshape:
        if (tracked(0)) {
          for (std::int64_t i = 0; i < node.output.size(); ++i) bump(node.parents[0], i, g[i]);
        }
        break;
      case Primitive::kMaskedFill:
        if (tracked(0)) {
          const auto& mask = *node.attrs.mask;
          for (std::int64_t i = 0; i < node.output.size(); ++i)
            if (!mask[i]) bump(node.parents[0], i, g[i]);
        }
        break;
    }
  }

  GradMap grads;
  for (int leaf_id : leaf_ids_) {
    const Shape& shape = nodes_[leaf_id].output.shape();
    if (acc[leaf_id].empty()) {
      grads.emplace(leaf_id, Tensor::zeros(shape));
    } else {
      grads.emplace(leaf_id, Tensor(shape, std::move(acc[leaf_id])));
    }
  }
  return grads;
}

Tensor matmul(const Tensor& a, const Tensor& b) { return apply_primitive(Primitive::kMatmul, {a, b}); }
Tensor add(const Tensor& a, const Tensor& b) { return apply_primitive(Primitive::kAdd, {a, b}); }
Tensor sub(const Tensor& a, const Tensor& b) { return apply_primitive(Primitive::kSub, {a, b}); }
Tensor mul(const Tensor& a, const Tensor& b) { return apply_primitive(Primitive::kMul, {a, b}); }

Tensor scalar_mul(const Tensor& a, double factor) {
  Attrs attrs;
  attrs.scalar = factor;
  return apply_primitive(Primitive::kScalarMul, {a}, attrs);
}

Tensor exp(const Tensor& a) { return apply_primitive(Primitive::kExp, {a}); }
Tensor log(const Tensor& a) { return apply_primitive(Primitive::kLog, {a}); }
Tensor tanh(const Tensor& a) { return apply_primitive(Primitive::kTanh, {a}); }

Tensor prelu(const Tensor& x, const Tensor& slope) {
  return apply_primitive(Primitive::kPrelu, {x, slope});
}

Tensor max_pool_channel(const Tensor& x, int window) {
  Attrs attrs;
  attrs.window = window;
  return apply_primitive(Primitive::kMaxPoolChannel, {x}, attrs);
}

Tensor reduce_sum(const Tensor& x, int axis, bool sorted_sum) {
  Attrs attrs;
  attrs.axis = axis;
  attrs.sorted_sum = sorted_sum;
  return apply_primitive(Primitive::kReduceSum, {x}, attrs);
}

Tensor cumsum_time(const Tensor& x) { return apply_primitive(Primitive::kCumsumTime, {x}); }

Tensor conv_temporal(const Tensor& x, const Tensor& kernel) {
  return apply_primitive(Primitive::kConvTemporal, {x, kernel});
}

Tensor conv_channel_time(const Tensor& x, const Tensor& kernel) {
  return apply_primitive(Primitive::kConvChannelTime, {x, kernel});
}

Tensor concat(const Tensor& a, const Tensor& b, int axis) {
  Attrs attrs;
  attrs.axis = axis;
  return apply_primitive(Primitive::kConcat, {a, b}, attrs);
}

Tensor reshape(const Tensor& x, Shape shape) {
  Attrs attrs;
  attrs.shape = std::move(shape);
  return apply_primitive(Primitive::kReshape, {x}, attrs);
}

Tensor masked_fill(const Tensor& x, std::vector<std::uint8_t> mask, double value) {
  Attrs attrs;
  attrs.scalar = value;
  attrs.mask = std::make_shared<const std::vector<std::uint8_t>>(std::move(mask));
  return apply_primitive(Primitive::kMaskedFill, {x}, attrs);
}

}  // namespace crowdcast
