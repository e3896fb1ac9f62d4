#ifndef SLTERR_EVAL_H_
#define SLTERR_EVAL_H_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slterr/align.h"
#include "slterr/corpus.h"
#include "slterr/crf.h"

namespace slterr {

// (P(G), P(B)).
using GoodBad = std::array<double, 2>;

enum class Projection { kMin, kMean, kMax };
Projection ParseProjection(std::string_view name);
std::string_view ProjectionName(Projection projection);

// Source distribution seen by each target token. Unaligned targets get
// (0.5, 0.5). `pairs` are (source, target).
std::vector<GoodBad> ProjectToTarget(const std::vector<GoodBad>& source,
                                     const AlignmentPairs& pairs,
                                     std::size_t target_len,
                                     Projection projection = Projection::kMin);

// Log-linear interpolation p_asr^alpha * p_mt^(1-alpha), renormalized.
// alpha = 0 returns p_mt and alpha = 1 the projection, unchanged.
std::vector<GoodBad> CombinePosteriors(const std::vector<GoodBad>& p_asr,
                                       const std::vector<GoodBad>& p_mt,
                                       const AlignmentPairs& pairs, double alpha,
                                       Projection projection = Projection::kMin);

// G where p_good >= t.
LabelSeq ThresholdDecide(const std::vector<double>& p_good, double t);

// B_ASR / B_MT become B.
LabelSeq ToTwoClass(const LabelSeq& labels);

struct LabelScore {
  Label label = Label::kGood;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;  // fractions
};

struct PrfReport {
  Scheme scheme = Scheme::kTwoClass;
  std::vector<LabelScore> labels;  // in alphabet order
  double f_avg = 0.0;
  std::size_t tokens = 0;
  const LabelScore& Get(Label label) const;
};

using Mask = std::vector<std::vector<bool>>;

// Micro-averaged over all tokens with mask true (all tokens when mask is
// null). Unresolved reference tokens must be masked out.
PrfReport Prf(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& ref,
              Scheme scheme, const Mask* mask = nullptr);

// 0, step, ..., 1; step must divide 1.
std::vector<double> ThresholdGrid(double step);

struct SweepRow {
  double threshold = 0.0;
  double f_good = 0.0, f_bad = 0.0, f_avg = 0.0;
  std::size_t predicted_bad = 0;
};

// `ref` may be three-class; it is collapsed to G/B.
std::vector<SweepRow> Sweep(const std::vector<std::vector<double>>& p_good,
                            const std::vector<LabelSeq>& ref,
                            const std::vector<double>& grid, const Mask* mask = nullptr);

// Rows: reference B_ASR, B_MT. Columns: predicted B_ASR, B_MT.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};
  std::array<std::array<double, 2>, 2> percent{};
  std::array<bool, 2> row_empty{true, true};
  bool empty() const { return row_empty[0] && row_empty[1]; }
};

// Restricted to tokens whose reference and prediction are both errors.
ConfusionMatrix ConfusionOnTrueErrors(const std::vector<LabelSeq>& pred,
                                      const std::vector<LabelSeq>& ref,
                                      const Mask* mask = nullptr);

// Stage 1 Viterbi over {G,B}; tokens labelled B take the B-split model's
// argmax marginal over {B_ASR, B_MT}.
LabelSeq TwoStepClassify(const CrfModel& two_class, const CrfModel& bsplit,
                         const Instance& instance);
// Same, with each stage reading attributes built by its own feature models.
LabelSeq TwoStepClassify(const CrfModel& two_class, const Instance& first,
                         const CrfModel& bsplit, const Instance& second);

struct ScatterRow {
  std::string utt_id;
  double pct_asr = 0.0, pct_mt = 0.0;
};
std::vector<ScatterRow> ScatterErrors(const std::vector<LabelSeq>& labels,
                                      const std::vector<std::string>& utt_ids = {});

// Per-token label posteriors for a set of utterances.
struct PosteriorTable {
  std::vector<std::string> labels;
  std::vector<std::vector<std::vector<double>>> values;  // [utt][token][label]

  // Column of `label` as [utt][token].
  std::vector<std::vector<double>> Column(std::string_view label) const;
};

// CSV "utt_id,token_idx,<label>...". Utterances without tokens have no
// rows, so readers take the expected utterance count when known.
std::string SerializePosteriors(const PosteriorTable& table);
PosteriorTable ParsePosteriors(const std::string& text,
                               std::optional<std::size_t> utterances = std::nullopt,
                               const std::string& source = "<posteriors>");
PosteriorTable LoadPosteriors(const std::filesystem::path& path,
                              std::optional<std::size_t> utterances = std::nullopt);

std::string PrfCsv(const PrfReport& report);
std::string SweepCsv(const std::vector<SweepRow>& rows);
std::string ConfusionCsv(const ConfusionMatrix& m);
std::string ConfusionTable(const ConfusionMatrix& m);
std::string ScatterCsv(const std::vector<ScatterRow>& rows);

}  // namespace slterr

#endif  // SLTERR_EVAL_H_
