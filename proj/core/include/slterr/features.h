#ifndef SLTERR_FEATURES_H_
#define SLTERR_FEATURES_H_

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "slterr/align.h"
#include "slterr/corpus.h"
#include "slterr/ibm1.h"
#include "slterr/ngram_lm.h"

namespace slterr {

// Value given to projected attributes of a target token with no aligned
// source token.
inline constexpr std::string_view kNoSource = "__nosrc__";

// Columnar per-token attributes: every token carries the same names.
struct AttrSeq {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> values;  // [token][attribute]
  // LM log10 probability per token, used to rank sources during projection.
  // Empty when the sequence carries no LM attribute.
  std::vector<double> lm_logprob;

  std::size_t size() const { return values.size(); }
  // Index of `name` in `names`, or -1.
  int Find(std::string_view name) const;
  const std::string& Get(std::size_t token, std::string_view name) const;
  void AddColumn(std::string name, std::vector<std::string> column);
};

// Concatenates the columns of two equally long sequences.
AttrSeq UnionAttrs(const AttrSeq& a, const AttrSeq& b);

struct AttrSpec {
  std::string name;
  int bins = 0;  // 0 when the attribute is not bucketed
};

// Declares which attributes are extracted and which CRF templates use them.
//
//   attr <name> [bins]
//   template <name>[<offset>](/<name>[<offset>])*
//   stopwords <path>          (relative to the config file)
//   lm_order <n>
//   ibm1_iterations <n>
//   aligner ibm1|edit         (source->target projection)
class FeatureConfig {
 public:
  std::vector<AttrSpec> attrs;
  std::vector<std::string> templates;
  std::set<std::string> stopwords;
  int lm_order = 3;
  int ibm1_iterations = 5;
  std::string aligner = "ibm1";
  std::string text;  // canonical source text; hashed into run manifests

  static FeatureConfig Default();
  static FeatureConfig Parse(const std::string& text,
                             const std::filesystem::path& base_dir = {});
  static FeatureConfig Load(const std::filesystem::path& path);

  bool Enabled(std::string_view name) const;
  int Bins(std::string_view name) const;
};

std::set<std::string> DefaultEnglishStopwords();

enum class FeatureMode { kJoint, kMtOnly, kAsrOnly };
FeatureMode ParseFeatureMode(std::string_view name);
std::string_view FeatureModeName(FeatureMode mode);

struct FeatureModels {
  NgramLM source_lm;  // over f_ref
  NgramLM target_lm;  // over e_ref
  LexTable lex;       // IBM-1 over (f_hyp, e_slt) and (f_ref, e_mt)
};

FeatureModels TrainFeatureModels(const Corpus& corpus, const FeatureConfig& config);

// Bucketing helpers shared with tests.
int BucketUnit(double x, int bins);       // x in [0,1]
int BucketLogProb(double log10p, int bins);  // clipped to [-8, 0]
int RelativePositionBin(std::size_t index, std::size_t length, int bins);
bool IsPunctuation(std::string_view token);
bool IsNumeric(std::string_view token);
std::string AsciiLower(std::string_view token);
std::size_t Utf8Length(std::string_view token);

// Target-side attributes over e_slt (mt.*).
AttrSeq ExtractMtFeatures(const Quintuplet& q, const NgramLM& target_lm,
                          const LexTable& lex, const FeatureConfig& config);

// Source-side attributes over f_hyp (asr.*). `confidence`, when present,
// must hold one value in [0,1] per token.
AttrSeq ExtractAsrFeatures(const Tokens& f_hyp, const NgramLM& source_lm,
                           const std::vector<double>* confidence,
                           const FeatureConfig& config);

// Copies source attributes onto target tokens through (source, target) pairs.
// A target aligned to several sources takes the one with the lowest LM
// log-probability; unaligned targets get kNoSource everywhere.
AttrSeq ProjectSourceAttrs(const AttrSeq& source, const AlignmentPairs& pairs,
                           std::size_t target_len);

// Source (f_hyp) -> target (e_slt) links used for projection.
AlignmentPairs SourceTargetLinks(const Quintuplet& q, const FeatureModels& models,
                                 const FeatureConfig& config);

struct Instance {
  AttrSeq attrs;
  std::optional<LabelSeq> labels;
  std::vector<bool> mask;  // false: token excluded from the loss

  std::size_t size() const { return attrs.size(); }
};

struct InstanceInputs {
  const std::vector<LabelSeq>* labels = nullptr;
  const std::vector<std::vector<bool>>* mask = nullptr;
  const std::vector<std::vector<double>>* confidence = nullptr;
};

// kJoint / kMtOnly instances cover e_slt; kAsrOnly instances cover f_hyp.
std::vector<Instance> BuildInstances(const Corpus& corpus,
                                     const InstanceInputs& inputs,
                                     const FeatureConfig& config,
                                     const FeatureModels& models,
                                     FeatureMode mode);

// Templates whose attributes are all present in `names`.
std::vector<std::string> UsableTemplates(const FeatureConfig& config,
                                         const std::vector<std::string>& names);

// Column format: one token per line, attribute values then label,
// blank line between sentences.
std::string SerializeInstances(const std::vector<Instance>& instances);

}  // namespace slterr

#endif  // SLTERR_FEATURES_H_
