#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "gnp/dict_learn.hpp"
#include "gnp/partition.hpp"

namespace gnp {

/// FIFO window of the last `width` reconstructions and their confidence vectors.
class SignalBuffer {
 public:
  explicit SignalBuffer(int width);

  void push(VectorXd signal, VectorXd confidence);
  int size() const { return static_cast<int>(signals_.size()); }
  int width() const { return width_; }
  bool empty() const { return signals_.empty(); }
  /// N x size, oldest column first.
  MatrixXd signals() const;
  ConfidenceWeights confidences() const;

 private:
  int width_;
  std::deque<VectorXd> signals_;
  std::deque<VectorXd> confidences_;
};

enum class DictionaryMode {
  kLearned,  // relearned from the buffer after every step
  kOracle,   // ground-truth A_t supplied with each signal
  kStatic,   // the initial dictionary throughout
};

enum class PartitionMode {
  kAdaptive,  // re-partition every n_subsets steps with the current dictionary
  kFixed,     // one partition for the whole run
};

enum class LearnSource {
  kReconstructed,  // minimax reconstructions enter the buffer
  kZeroPadded,     // zero-padded measurements enter the buffer
};

struct SchedulerConfig {
  int n_subsets = 16;  // power of two
  double sigma = 0.0;
  PdcaConfig pdca;
  DictLearnConfig learner;
  int buffer_width = 20;
  double w_high = 1.0;
  double w_low = 0.0;
  DictionaryMode dictionary = DictionaryMode::kLearned;
  PartitionMode partition = PartitionMode::kAdaptive;
  LearnSource learn_source = LearnSource::kReconstructed;
  bool track_condition = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MetricsRecord {
  int t = 0;
  int subset_id = 0;
  double mse_db = 0.0;
  int epoch = 0;
  double cond = 0.0;
};

struct StepOutput {
  VectorXd reconstruction;
  MetricsRecord metrics;
};

/// Online sensor scheduling state machine. Every n_subsets steps the node set
/// is re-partitioned; in between, one subset per step is sampled, the signal
/// reconstructed, appended to the buffer and (in learned mode) the dictionary
/// relearned. The subset used at step t is t mod n_subsets.
class Scheduler {
 public:
  /// `fixed_partition` is required in fixed mode and ignored otherwise.
  Scheduler(SchedulerConfig cfg, SubspaceDictionary initial, std::optional<Partition> fixed_partition = std::nullopt);

  /// `oracle` supplies A_t in oracle mode and is ignored otherwise.
  StepOutput step(const VectorXd& x, const SubspaceDictionary* oracle = nullptr);

  int time() const { return t_; }
  int epoch() const { return epoch_; }
  const std::optional<Partition>& partition() const { return partition_; }
  const SubspaceDictionary& dictionary() const { return dictionary_; }
  const SignalBuffer& buffer() const { return buffer_; }
  const SchedulerConfig& config() const { return cfg_; }
  /// Every partition computed so far, in order.
  const std::vector<Partition>& partition_history() const { return history_; }

 private:
  SchedulerConfig cfg_;
  SubspaceDictionary initial_;
  SubspaceDictionary dictionary_;
  std::optional<Partition> partition_;
  std::vector<Partition> history_;
  SignalBuffer buffer_;
  Rng noise_rng_;
  int t_ = 0;
  int epoch_ = -1;
  int levels_ = 0;
  double static_cond_ = -1.0;
};

/// Runs the whole trace (oracle mode reads the trace's subspaces).
std::vector<MetricsRecord> run(const SignalTrace& trace, const SchedulerConfig& cfg,
                               const SubspaceDictionary& initial);

/// Fixed partition with either the trace's per-step subspaces (oracle) or a
/// single static dictionary.
std::vector<MetricsRecord> run_fixed(const SignalTrace& trace, const Partition& partition,
                                     const SchedulerConfig& cfg, const SubspaceDictionary& static_dictionary,
                                     bool oracle_dictionaries);

double mean_mse_db(const std::vector<MetricsRecord>& records);

}  // namespace gnp
