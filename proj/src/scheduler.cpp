#include "gnp/scheduler.hpp"

#include <bit>
#include <sstream>

#include "gnp/error.hpp"
#include "gnp/log.hpp"
#include "gnp/rng.hpp"

namespace gnp {

SignalBuffer::SignalBuffer(int width) : width_(width) {
  if (width < 1) throw InvalidInput("buffer width must be positive");
}

void SignalBuffer::push(VectorXd signal, VectorXd confidence) {
  if (signal.size() != confidence.size()) throw InvalidInput("signal and confidence lengths differ");
  if (!signals_.empty() && signal.size() != signals_.front().size())
    throw InvalidInput("buffer signals must share one length");
  if (size() == width_) {
    signals_.pop_front();
    confidences_.pop_front();
  }
  signals_.push_back(std::move(signal));
  confidences_.push_back(std::move(confidence));
}

MatrixXd SignalBuffer::signals() const {
  if (signals_.empty()) return {};
  MatrixXd out(signals_.front().size(), size());
  for (int i = 0; i < size(); ++i) out.col(i) = signals_[static_cast<std::size_t>(i)];
  return out;
}

ConfidenceWeights SignalBuffer::confidences() const {
  if (confidences_.empty()) return {};
  MatrixXd out(confidences_.front().size(), size());
  for (int i = 0; i < size(); ++i) out.col(i) = confidences_[static_cast<std::size_t>(i)];
  return {std::move(out)};
}

void SchedulerConfig::validate() const {
  if (n_subsets < 2 || !std::has_single_bit(static_cast<unsigned>(n_subsets)))
    throw InvalidInput("scheduler subset count must be a power of two >= 2");
  if (!(sigma >= 0.0)) throw InvalidInput("noise sigma must be nonnegative");
  if (buffer_width < 1) throw InvalidInput("buffer width must be positive");
  if (w_high < 0.0 || w_high > 1.0 || w_low < 0.0 || w_low > 1.0)
    throw InvalidInput("confidence weights must lie in [0, 1]");
  pdca.validate();
  learner.validate();
}

Scheduler::Scheduler(SchedulerConfig cfg, SubspaceDictionary initial, std::optional<Partition> fixed_partition)
    : cfg_(std::move(cfg)),
      initial_(initial),
      dictionary_(std::move(initial)),
      buffer_(cfg_.buffer_width),
      noise_rng_(derive_seed(cfg_.seed, 1)) {
  cfg_.validate();
  levels_ = std::countr_zero(static_cast<unsigned>(cfg_.n_subsets));
  if (cfg_.partition == PartitionMode::kFixed) {
    if (!fixed_partition) throw InvalidInput("fixed partition mode needs a partition");
    if (fixed_partition->n_subsets() != cfg_.n_subsets || fixed_partition->n_nodes() != initial_.n_nodes())
      throw InvalidInput("fixed partition does not match the scheduler configuration");
    partition_ = std::move(fixed_partition);
    history_.push_back(*partition_);
    epoch_ = 0;
  }
}

StepOutput Scheduler::step(const VectorXd& x, const SubspaceDictionary* oracle) {
  if (x.size() != initial_.n_nodes()) throw InvalidInput("signal length does not match the scheduler");
  if (cfg_.dictionary == DictionaryMode::kOracle) {
    if (oracle == nullptr) throw InvalidInput("oracle mode needs the current subspace at every step");
    dictionary_ = *oracle;
  }

  const int slot = t_ % cfg_.n_subsets;
  if (cfg_.partition == PartitionMode::kAdaptive && slot == 0) {
    PdcaConfig pcfg = cfg_.pdca;
    pcfg.seed = derive_seed(cfg_.pdca.seed, static_cast<std::uint64_t>(t_ / cfg_.n_subsets));
    partition_ = hierarchical_partition(dictionary_, levels_, pcfg);
    history_.push_back(*partition_);
    ++epoch_;
  }

  const SamplingSet& subset = (*partition_)[static_cast<std::size_t>(slot)];
  const Measurement meas = sample(x, subset, cfg_.sigma, noise_rng_);
  VectorXd reconstruction;
  try {
    reconstruction = minimax_reconstruct(dictionary_, meas);
  } catch (const DegenerateSubspace&) {
    std::ostringstream msg;
    msg << "degenerate sampled subspace at t=" << t_ << "; falling back to zero padding";
    log_warning(msg.str());
    reconstruction = ls_reconstruct(meas);
  }

  MetricsRecord rec;
  rec.t = t_;
  rec.subset_id = slot;
  rec.mse_db = mse_db(x, reconstruction);
  rec.epoch = epoch_;
  if (cfg_.track_condition) {
    if (cfg_.dictionary == DictionaryMode::kStatic) {
      if (static_cond_ < 0.0) static_cond_ = condition_number(dictionary_.matrix());
      rec.cond = static_cond_;
    } else {
      rec.cond = condition_number(dictionary_.matrix());
    }
  }

  if (cfg_.dictionary == DictionaryMode::kLearned) {
    VectorXd confidence = VectorXd::Constant(x.size(), cfg_.w_low);
    for (int i : subset.indices()) confidence(i) = cfg_.w_high;
    buffer_.push(cfg_.learn_source == LearnSource::kZeroPadded ? ls_reconstruct(meas) : reconstruction,
                 std::move(confidence));
    dictionary_ = learn(buffer_.signals(), buffer_.confidences(), dictionary_, cfg_.learner).dictionary;
  }
  ++t_;
  return {std::move(reconstruction), rec};
}

std::vector<MetricsRecord> run(const SignalTrace& trace, const SchedulerConfig& cfg,
                               const SubspaceDictionary& initial) {
  trace.validate();
  if (cfg.dictionary == DictionaryMode::kOracle && !trace.has_subspaces())
    throw InvalidInput("oracle dictionaries need a trace with subspaces");
  Scheduler scheduler(cfg, initial);
  std::vector<MetricsRecord> out;
  out.reserve(static_cast<std::size_t>(trace.length()));
  for (int t = 0; t < trace.length(); ++t) {
    const SubspaceDictionary* oracle = trace.has_subspaces() ? &trace.subspaces[static_cast<std::size_t>(t)] : nullptr;
    out.push_back(scheduler.step(trace.signals.col(t), oracle).metrics);
  }
  return out;
}

std::vector<MetricsRecord> run_fixed(const SignalTrace& trace, const Partition& partition,
                                     const SchedulerConfig& cfg, const SubspaceDictionary& static_dictionary,
                                     bool oracle_dictionaries) {
  trace.validate();
  SchedulerConfig fixed = cfg;
  fixed.partition = PartitionMode::kFixed;
  fixed.dictionary = oracle_dictionaries ? DictionaryMode::kOracle : DictionaryMode::kStatic;
  if (oracle_dictionaries && !trace.has_subspaces()) throw InvalidInput("oracle dictionaries need a trace with subspaces");
  Scheduler scheduler(fixed, static_dictionary, partition);
  std::vector<MetricsRecord> out;
  out.reserve(static_cast<std::size_t>(trace.length()));
  for (int t = 0; t < trace.length(); ++t) {
    const SubspaceDictionary* oracle = oracle_dictionaries ? &trace.subspaces[static_cast<std::size_t>(t)] : nullptr;
    out.push_back(scheduler.step(trace.signals.col(t), oracle).metrics);
  }
  return out;
}

double mean_mse_db(const std::vector<MetricsRecord>& records) {
  if (records.empty()) throw InvalidInput("no records to average");
  double s = 0.0;
  for (const auto& r : records) s += r.mse_db;
  return s / static_cast<double>(records.size());
}

}  // namespace gnp
