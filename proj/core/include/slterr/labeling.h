#ifndef SLTERR_LABELING_H_
#define SLTERR_LABELING_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slterr/align.h"
#include "slterr/corpus.h"

namespace slterr {

// Token counts per label over a denominator of `total` tokens. For the
// same/diff rows of an intersection the denominator is the full token count,
// so the two rows jointly sum to 100.
struct LabelStats {
  std::size_t total = 0;
  std::size_t good = 0, bad = 0, bad_asr = 0, bad_mt = 0;

  double pct_good() const { return Pct(good); }
  double pct_bad() const { return Pct(bad); }
  double pct_bad_asr() const { return Pct(bad_asr); }
  double pct_bad_mt() const { return Pct(bad_mt); }
  void Add(Label label);

 private:
  double Pct(std::size_t n) const {
    return total ? 100.0 * static_cast<double>(n) / static_cast<double>(total)
                 : 0.0;
  }
};

// G for tokens TER-aligned as Exact, B for Substitution/Insertion.
LabelSeq Infer2Class(std::span<const std::string> hyp,
                     std::span<const std::string> ref);

// 2-class labels for an ASR hypothesis from a plain edit alignment.
LabelSeq InferAsrLabels(std::span<const std::string> f_hyp,
                        std::span<const std::string> f_ref);

// Error attribution through SLT->MT word alignments and MT labels: a bad SLT
// token aligned to at least one bad MT token is an MT error, otherwise an ASR
// error. `slt_to_mt` holds (slt_index, mt_index) pairs.
LabelSeq Method1(const LabelSeq& slt_labels, const LabelSeq& mt_labels,
                 const AlignmentPairs& slt_to_mt);

// Error attribution through the edit ops between SLT (hypothesis side) and MT
// (reference side): Insertion/Substitution -> ASR error, Exact -> MT error.
LabelSeq Method2(const LabelSeq& slt_labels, const EditScript& slt_vs_mt);

struct Intersection {
  LabelSeq agreed;  // kUnresolved where the methods disagree
  LabelStats same;  // agreeing tokens, per label
  LabelStats diff;  // disagreeing tokens, counted under the first method
};

Intersection IntersectLabels(const LabelSeq& m1, const LabelSeq& m2);
Intersection IntersectLabels(const std::vector<LabelSeq>& m1,
                             const std::vector<LabelSeq>& m2,
                             std::vector<LabelSeq>* agreed);

// Token-level distribution; throws when there are no tokens.
LabelStats ComputeLabelStats(const std::vector<LabelSeq>& labels);

// Per-utterance output of the label-extraction pipeline.
struct ExtractedLabels {
  LabelSeq asr;        // over f_hyp
  LabelSeq mt;         // over e_mt
  LabelSeq slt;        // over e_slt, 2-class
  LabelSeq method1;    // over e_slt
  LabelSeq method2;    // over e_slt
  LabelSeq intersect;  // over e_slt, kUnresolved on disagreements
};

ExtractedLabels ExtractLabels(const Quintuplet& q);

// CSV rows: label/m1, label/m2, label/same(m1, m2),
// label/diff(m1, m2) with %G, %B_ASR, %B_MT.
std::string ThreeClassStatsCsv(const std::vector<LabelSeq>& m1,
                               const std::vector<LabelSeq>& m2);

}  // namespace slterr

#endif  // SLTERR_LABELING_H_
