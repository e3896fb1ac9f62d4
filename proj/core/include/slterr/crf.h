#ifndef SLTERR_CRF_H_
#define SLTERR_CRF_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "slterr/error.h"
#include "slterr/features.h"
#include "slterr/template.h"

namespace slterr {

// A sequence in model space: per-token observation ids and the set of labels
// each token may take when computing the constrained (numerator) sum.
struct Lattice {
  std::vector<std::vector<std::uint32_t>> obs;  // [token] -> observation ids
  // [token] -> bitmask of admissible labels; empty for unlabeled sequences.
  std::vector<std::uint32_t> allowed;

  std::size_t size() const { return obs.size(); }
  bool labeled() const { return !allowed.empty(); }
};

// Linear-chain CRF over a size-generic label set.
//
// Weight layout, K = number of labels, M = number of observations:
//   [0, K*K)            transition (previous label, label)
//   next K              transition from the virtual begin label
//   next K              transition into the virtual end label
//   next M*K            unigram (observation, label)
class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(std::vector<std::string> labels, std::vector<Template> templates);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }
  const std::vector<Template>& templates() const { return templates_; }
  std::size_t num_observations() const { return obs_names_.size(); }
  const std::vector<std::string>& observation_names() const { return obs_names_; }
  std::size_t num_features() const { return weights_.size(); }
  int LabelIndex(std::string_view name) const;

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }

  std::size_t TransitionIndex(std::size_t prev, std::size_t cur) const {
    return prev * num_labels() + cur;
  }
  std::size_t BeginIndex(std::size_t label) const {
    return num_labels() * num_labels() + label;
  }
  std::size_t EndIndex(std::size_t label) const {
    return num_labels() * (num_labels() + 1) + label;
  }
  std::size_t UnigramIndex(std::uint32_t obs, std::size_t label) const {
    return num_labels() * (num_labels() + 2) + obs * num_labels() + label;
  }

  // Registers an observation string and returns its id. Resizes weights.
  std::uint32_t AddObservation(const std::string& name);
  // Allocates weights for `count` anonymous observations (tests, benchmarks).
  void ResizeObservations(std::size_t count);

  // Observation strings fired at each token of `attrs`.
  std::vector<std::vector<std::string>> Observations(const AttrSeq& attrs) const;

  // Maps an instance into model space; unknown observations are dropped.
  // Tokens with mask=false may take any label.
  Lattice Compile(const Instance& instance) const;

  void Save(const std::filesystem::path& path) const;
  std::string Serialize() const;
  static CrfModel Parse(const std::string& text, const std::string& source = "<model>");
  static CrfModel Load(const std::filesystem::path& path);

 private:
  void Reindex();

  std::vector<std::string> labels_;
  std::vector<Template> templates_;
  std::vector<std::string> obs_names_;
  std::unordered_map<std::string, std::uint32_t> obs_index_;
  std::vector<double> weights_;
};

// Builds a model over the observations seen in `instances`. Every template
// attribute must exist in the instances.
CrfModel CompileModel(const std::vector<Instance>& instances,
                      const std::vector<std::string>& templates,
                      const std::vector<std::string>& labels);

// log P(allowed paths | x) and its gradient (added into `grad`, which must be
// sized to the weight vector). Unlabeled lattices contribute 0.
double LogLikelihoodAndGradient(const CrfModel& model, const Lattice& lattice,
                                std::vector<double>* grad);

struct ViterbiResult {
  std::vector<int> labels;
  double score = 0.0;  // log P(labels | x)
};

// Ties resolve towards the lower label index.
ViterbiResult Viterbi(const CrfModel& model, const Lattice& lattice);

// Per-token posteriors P(y_t = k | x), [token][label].
std::vector<std::vector<double>> Marginals(const CrfModel& model, const Lattice& lattice);

// Unnormalized path score and log-partition, exposed for oracles.
double PathScore(const CrfModel& model, const Lattice& lattice,
                 const std::vector<int>& labels);
double LogPartition(const CrfModel& model, const Lattice& lattice);

enum class StepRule { kAdaptive, kLbfgs };

struct TrainConfig {
  double sigma2 = 1.0;
  int max_epochs = 200;
  double tolerance = 1e-4;
  StepRule step_rule = StepRule::kAdaptive;
  std::uint64_t seed = 0;
  bool verbose = false;
};

std::string_view StepRuleName(StepRule rule);
StepRule ParseStepRule(std::string_view name);

struct TrainReport {
  int evaluations = 0;
  int accepted_steps = 0;
  double objective = 0.0;
  double gradient_inf_norm = 0.0;
  bool converged = false;
  std::vector<double> accepted_objectives;
};

// Raised when the objective fails to improve for 10 consecutive evaluations.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// Maximizes sum of log-likelihoods - |w|^2 / (2 sigma2) in place.
TrainReport TrainWeights(CrfModel& model, const std::vector<Lattice>& data,
                         const TrainConfig& config);

// Compiles, then trains.
CrfModel TrainCrf(const std::vector<Instance>& instances,
                  const std::vector<std::string>& templates,
                  const std::vector<std::string>& labels, const TrainConfig& config,
                  TrainReport* report = nullptr);

}  // namespace slterr

#endif  // SLTERR_CRF_H_
