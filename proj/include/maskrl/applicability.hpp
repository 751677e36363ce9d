#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <vector>

#include "maskrl/gridworld.hpp"
#include "maskrl/network.hpp"

namespace maskrl {

// binary action mask over an ordered action set
struct Mask {
  std::vector<uint8_t> bits;

  Mask() = default;
  explicit Mask(std::vector<uint8_t> b) : bits(std::move(b)) {}
  static Mask ones(int n) { return Mask(std::vector<uint8_t>(static_cast<size_t>(n), 1)); }

  int size() const { return static_cast<int>(bits.size()); }
  bool all_ones() const {
    for (uint8_t b : bits)
      if (!b) return false;
    return true;
  }
  bool all_zero() const {
    for (uint8_t b : bits)
      if (b) return false;
    return true;
  }
  bool operator==(const Mask&) const = default;
};

// logit value written over masked-out entries; underflows to an exact zero
// probability after the softmax in 32-bit
constexpr float kMaskedLogit = -1e9f;

// softmax(mask * logits): masked entries get kMaskedLogit, the rest keep
// their logits, then a plain softmax renormalizes. An all-zero mask falls
// back to the unmasked softmax and reports it through zero_mask_fallback.
std::vector<float> masked_distribution(const std::vector<float>& logits, const Mask& mask,
                                       bool* zero_mask_fallback = nullptr);

// y = 1 iff the transition changed (agent_pos, has_key, door_open); the
// identity distance with epsilon = 0
inline float label_applicability(const EnvState& s, const EnvState& next) {
  return next.same_config(s) ? 0.0f : 1.0f;
}

// ---- classifier network -----------------------------------------------------

// Applicability classifier: convolutional observation extractor, one-hot
// action encoding, and an MLP binary head (Dense-ReLU-Dropout-BatchNorm
// stack ending in a single logit).
class ClassifierNet {
 public:
  // paper_extractor selects the large-input stack (kernel 8 stride 4, then
  // 4/2, then 3/1), which needs upscaled observations; the default stack is
  // sized for desk-scale grids.
  ClassifierNet(std::vector<int> obs_shape, int num_actions, uint64_t seed,
                bool paper_extractor = false);

  int num_actions() const { return num_actions_; }
  int feature_dim() const { return feature_dim_; }
  const std::vector<int>& obs_shape() const { return obs_shape_; }

  // P(action applicable | obs), inference mode
  float prob(const Tensor& obs, int action) const;

  // all actions at once; runs the observation extractor a single time
  std::vector<float> prob_all(const Tensor& obs) const;

  // one supervised minibatch (training mode, Adam); returns mean BCE loss
  float train_batch(const std::vector<const Tensor*>& obs, const std::vector<int>& actions,
                    const std::vector<float>& labels);

  void set_lr(float lr);
  void seed_dropout(uint64_t seed) { dropout_rng_ = Rng(seed); }

  Net& extractor() { return extractor_; }
  Net& head() { return head_; }
  const Net& extractor() const { return extractor_; }
  const Net& head() const { return head_; }

 private:
  Tensor head_input(const Tensor& features, const std::vector<int>& actions) const;

  std::vector<int> obs_shape_;
  int num_actions_ = 0;
  int feature_dim_ = 0;
  Net extractor_;
  Net head_;
  AdamState adam_extractor_;
  AdamState adam_head_;
  Rng dropout_rng_;
};

// ---- knowledge sources ------------------------------------------------------

// A provider of the applicability function C(s, a).
class KnowledgeSource {
 public:
  virtual ~KnowledgeSource() = default;

  // probability that `action` is applicable in the state shown by `obs`
  virtual float classify(const Tensor& obs, int action) const = 0;

  virtual std::vector<float> classify_all(const Tensor& obs) const {
    std::vector<float> out(static_cast<size_t>(num_actions()));
    for (int a = 0; a < num_actions(); ++a) out[static_cast<size_t>(a)] = classify(obs, a);
    return out;
  }

  virtual int num_actions() const = 0;

  float tau = 0.5f;
};

// ground truth from the environment's is_applicable
class OracleSource : public KnowledgeSource {
 public:
  explicit OracleSource(EnvSpec spec) : spec_(std::move(spec)) {}
  float classify(const Tensor& obs, int action) const override;
  std::vector<float> classify_all(const Tensor& obs) const override;
  int num_actions() const override { return spec_.num_actions(); }

 private:
  EnvSpec spec_;
};

// hand-coded knowledge limited to a subset of actions; uncovered actions
// answer 1 (maximally permissive)
class PartialSource : public KnowledgeSource {
 public:
  PartialSource(std::set<int> covered_actions, EnvSpec spec)
      : covered_(std::move(covered_actions)), oracle_(std::move(spec)) {}
  float classify(const Tensor& obs, int action) const override;
  std::vector<float> classify_all(const Tensor& obs) const override;
  int num_actions() const override { return oracle_.num_actions(); }
  bool covers(int action) const { return covered_.count(action) > 0; }

 private:
  std::set<int> covered_;
  OracleSource oracle_;
};

// learned classifier; index_map translates target action indices to the
// classifier's own one-hot slots (-1 = not represented, answers 1)
class ClassifierSource : public KnowledgeSource {
 public:
  ClassifierSource(std::shared_ptr<const ClassifierNet> net, std::vector<int> index_map = {});
  float classify(const Tensor& obs, int action) const override;
  std::vector<float> classify_all(const Tensor& obs) const override;
  int num_actions() const override { return static_cast<int>(index_map_.size()); }
  const std::vector<int>& index_map() const { return index_map_; }

 private:
  std::shared_ptr<const ClassifierNet> net_;
  std::vector<int> index_map_;
};

// partial knowledge first, classifier for the uncovered actions
class CompositeSource : public KnowledgeSource {
 public:
  CompositeSource(std::shared_ptr<const PartialSource> partial,
                  std::shared_ptr<const ClassifierSource> classifier)
      : partial_(std::move(partial)), classifier_(std::move(classifier)) {}
  float classify(const Tensor& obs, int action) const override;
  std::vector<float> classify_all(const Tensor& obs) const override;
  int num_actions() const override { return partial_->num_actions(); }

 private:
  std::shared_ptr<const PartialSource> partial_;
  std::shared_ptr<const ClassifierSource> classifier_;
};

// bit i = [classify(obs, a_i) >= tau]
Mask build_mask(const KnowledgeSource& source, const Tensor& obs, float tau);

// ---- classifier training ----------------------------------------------------

struct ClassifierExample {
  const Tensor* obs;
  int action;
  float label;
};

// Weighted random sample with replacement, weight of a row proportional to
// 1 / count(its class). With a single-class buffer the sample is unweighted
// and single_class is set.
std::vector<int> balanced_batch(const std::vector<uint8_t>& labels, int batch_size, Rng& rng,
                                bool* single_class = nullptr);

// one epoch of balanced minibatch BCE descent; returns the epoch mean loss
float train_classifier_epoch(ClassifierNet& net, const std::vector<ClassifierExample>& rows,
                             int batch_size, Rng& rng);

// ---- enumeration-based analysis ----------------------------------------------

// all enumerated states with classify >= tau for the given action
std::vector<EnvState> initiation_set(const KnowledgeSource& source, const EnvSpec& spec,
                                     int action, float tau);

enum class HeatCell : int8_t { Inapplicable = 0, Applicable = 1, NotACell = -1 };

struct Heatmap {
  int height = 0;
  int width = 0;
  std::vector<HeatCell> cells;  // row-major

  HeatCell at(int r, int c) const { return cells[static_cast<size_t>(r) * width + c]; }
};

// per-cell prediction for one action at a fixed flag context; walls, water,
// the goal cell and a closed door are NotACell
Heatmap heatmap(const KnowledgeSource& source, const EnvSpec& spec, int action, float tau,
                bool has_key = false, bool door_open = false);

// number of Applicable/Inapplicable cells where the two maps disagree
int heatmap_mismatches(const Heatmap& a, const Heatmap& b);

// CSV export: header row,col,value with 1 applicable / 0 inapplicable / -1
// not-a-cell
std::string heatmap_csv(const Heatmap& map);

// exhaustive agreement between thresholded source output and the oracle over
// all enumerated (state, action) pairs
double exhaustive_accuracy(const KnowledgeSource& source, const EnvSpec& spec, float tau);

}  // namespace maskrl
