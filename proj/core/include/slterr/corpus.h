#ifndef SLTERR_CORPUS_H_
#define SLTERR_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slterr/text_io.h"

namespace slterr {

// One utterance: the source transcript pair and the three target sides.
struct Quintuplet {
  std::string utt_id;
  Tokens f_hyp;  // ASR output
  Tokens f_ref;  // verbatim transcript
  Tokens e_mt;   // translation of f_ref
  Tokens e_slt;  // translation of f_hyp
  Tokens e_ref;  // post-edition
};

using Corpus = std::vector<Quintuplet>;

enum class Side { kFHyp, kFRef, kEMt, kESlt, kERef };

const Tokens& SideTokens(const Quintuplet& q, Side side);
std::string_view SideFileName(Side side);
constexpr Side kAllSides[] = {Side::kFHyp, Side::kFRef, Side::kEMt,
                              Side::kESlt, Side::kERef};

enum class Scheme { kTwoClass, kThreeClass };

// kUnresolved marks tokens where two label sources disagree. It never
// appears in serialized label files.
enum class Label : std::uint8_t { kGood, kBad, kBadAsr, kBadMt, kUnresolved };

std::string_view LabelName(Label label);
std::string_view SchemeName(Scheme scheme);
Scheme ParseScheme(std::string_view name);
bool InAlphabet(Label label, Scheme scheme);
const std::vector<Label>& Alphabet(Scheme scheme);

struct LabelSeq {
  Scheme scheme = Scheme::kTwoClass;
  std::vector<Label> labels;

  std::size_t size() const { return labels.size(); }
  Label operator[](std::size_t i) const { return labels[i]; }
  bool operator==(const LabelSeq&) const = default;
};

Corpus LoadCorpus(const std::filesystem::path& dir);
void SaveCorpus(const std::filesystem::path& dir, const Corpus& corpus);

// Optional per-token ASR confidences: one line per utterance.
std::vector<std::vector<double>> LoadConfidences(
    const std::filesystem::path& path);

LabelSeq ParseLabelLine(std::string_view line, Scheme scheme,
                        const std::string& file = "<string>",
                        std::size_t lineno = 1);
std::vector<LabelSeq> LoadLabels(const std::filesystem::path& path,
                                 Scheme scheme);
std::string SerializeLabels(const std::vector<LabelSeq>& labels);
void SaveLabels(const std::filesystem::path& path,
                const std::vector<LabelSeq>& labels);

// Token masks: "1" = token contributes to training/scoring, "0" = excluded.
std::vector<std::vector<bool>> LoadMask(const std::filesystem::path& path);
void SaveMask(const std::filesystem::path& path,
              const std::vector<std::vector<bool>>& mask);

struct LengthMismatch {
  std::string utt_id;
  std::size_t tokens;
  std::size_t labels;
  bool operator==(const LengthMismatch&) const = default;
};

struct ValidationReport {
  std::vector<LengthMismatch> mismatches;
  // Set when the number of label lines differs from the corpus size.
  std::optional<std::pair<std::size_t, std::size_t>> count_mismatch;

  bool ok() const { return mismatches.empty() && !count_mismatch; }
};

ValidationReport Validate(const Corpus& corpus,
                          const std::vector<LabelSeq>& labels, Side target);

}  // namespace slterr

#endif  // SLTERR_CORPUS_H_
