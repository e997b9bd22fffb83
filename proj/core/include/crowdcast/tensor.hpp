#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace crowdcast {

using Shape = std::vector<int>;

std::int64_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

enum class Primitive {
  kLeaf,
  kMatmul,
  kAdd,
  kSub,
  kMul,
  kScalarMul,
  kExp,
  kLog,
  kTanh,
  kPrelu,
  kMaxPoolChannel,
  kReduceSum,
  kCumsumTime,
  kConvTemporal,
  kConvChannelTime,
  kConcat,
  kReshape,
  kMaskedFill,
};

const char* primitive_name(Primitive kind);

// Attributes of a primitive application. Only the fields relevant to the
// kind are read; the rest keep their defaults.
struct Attrs {
  double scalar = 0.0;  // scalar-mul factor, masked-fill value
  int axis = -1;        // reduce-sum / concat axis; -1 on reduce-sum = all
  int window = 0;       // max-pool-channel window
  bool sorted_sum = false;  // reduce-sum folds addends in value order
  Shape shape;              // reshape target
  std::shared_ptr<const std::vector<std::uint8_t>> mask;  // masked-fill
};

class Tape;

// Dense row-major tensor of doubles. Immutable after creation; copies share
// the underlying buffer. A tensor recorded on a tape carries the id of the
// node that produced it.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return data_ ? static_cast<std::int64_t>(data_->size()) : 0; }
  const std::vector<double>& data() const { return *data_; }
  double value() const;  // sole element of a size-1 tensor

  double at(std::int64_t flat) const { return (*data_)[static_cast<std::size_t>(flat)]; }
  double at(const std::vector<int>& index) const;

  bool on_tape() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }

  bool all_finite() const;
  bool same_bits(const Tensor& other) const;

 private:
  friend class Tape;
  friend Tensor apply_primitive(Primitive, const std::vector<Tensor>&, const Attrs&);
  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Gradients keyed by leaf node id.
using GradMap = std::unordered_map<int, Tensor>;

// Append-only record of primitive applications. Node parents always precede
// the node itself, so one reverse sweep propagates gradients. Rebuilt per
// forward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers `value` as a differentiable leaf and returns the tracked copy.
  Tensor leaf(const Tensor& value);

  // Reverse sweep from a scalar loss. The result holds one gradient per
  // registered leaf; leaves unreachable from the loss get zero tensors.
  GradMap backward(const Tensor& loss) const;

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<int>& leaf_ids() const { return leaf_ids_; }

 private:
  friend Tensor apply_primitive(Primitive, const std::vector<Tensor>&, const Attrs&);

  struct Node {
    Primitive kind;
    std::vector<int> parents;    // -1 for untracked inputs
    std::vector<Tensor> inputs;  // saved forward values
    Tensor output;
    Attrs attrs;
  };

  int record(Node node);

  std::vector<Node> nodes_;
  std::vector<int> leaf_ids_;
};

// Applies one primitive. If any input is tracked the result is recorded on
// that tape; inputs tracked on two different tapes raise TapeError, and
// shape violations raise ShapeError naming the kind.
Tensor apply_primitive(Primitive kind, const std::vector<Tensor>& inputs,
                       const Attrs& attrs = {});

// Wrappers, one per primitive kind.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double factor);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor prelu(const Tensor& x, const Tensor& slope);
Tensor max_pool_channel(const Tensor& x, int window);
Tensor reduce_sum(const Tensor& x, int axis = -1, bool sorted_sum = false);
Tensor cumsum_time(const Tensor& x);
Tensor conv_temporal(const Tensor& x, const Tensor& kernel);
Tensor conv_channel_time(const Tensor& x, const Tensor& kernel);
Tensor concat(const Tensor& a, const Tensor& b, int axis);
Tensor reshape(const Tensor& x, Shape shape);
Tensor masked_fill(const Tensor& x, std::vector<std::uint8_t> mask, double value);

}  // namespace crowdcast
