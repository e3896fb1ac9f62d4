#ifndef SLTERR_NGRAM_LM_H_
#define SLTERR_NGRAM_LM_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slterr/text_io.h"

namespace slterr {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

struct NgramEntry {
  double logprob = 0.0;  // log10 P(w | context)
  double backoff = 0.0;  // log10 backoff weight of this n-gram as a context
};

struct TokenScore {
  double logprob;  // log10
  int level;       // order - n of the matched n-gram; 0 on a full-order hit
};

// Backoff n-gram model with interpolated Witten-Bell estimates:
//   P(w|h) = (c(h,w) + T(h) P(w|h')) / (c(h) + T(h))
// stored as explicit probabilities for seen (h,w) and bow(h) = T(h)/(c(h)+T(h))
// otherwise. The unigram level interpolates with a uniform distribution over
// the vocabulary including <unk> and </s>.
class NgramLM {
 public:
  NgramLM() = default;

  int order() const { return order_; }
  bool empty() const { return grams_.empty(); }

  // log10 P(word | context), context given oldest-first. Unknown words are
  // mapped to <unk>.
  TokenScore Score(std::span<const std::string> context,
                   std::string_view word) const;

  // One score per token; sentence-start context is implied.
  std::vector<TokenScore> ScoreSentence(std::span<const std::string> tokens,
                                        bool include_eos = false) const;

  bool InVocabulary(std::string_view word) const;
  // Predictable vocabulary: training words plus </s> and <unk>.
  std::vector<std::string> Vocabulary() const;

  const std::map<std::string, NgramEntry>& Grams(int n) const {
    return grams_.at(static_cast<std::size_t>(n - 1));
  }

  std::string ToArpa() const;
  static NgramLM FromArpa(const std::string& text,
                          const std::string& source = "<arpa>");
  void Save(const std::filesystem::path& path) const;
  static NgramLM Load(const std::filesystem::path& path);

  friend NgramLM TrainNgramLM(const std::vector<Tokens>& corpus, int order);

 private:
  const NgramEntry* Find(int n, std::span<const std::string> words) const;

  int order_ = 0;
  // grams_[n-1] maps the space-joined n-gram to its entry.
  std::vector<std::map<std::string, NgramEntry>> grams_;
};

NgramLM TrainNgramLM(const std::vector<Tokens>& corpus, int order);

}  // namespace slterr

#endif  // SLTERR_NGRAM_LM_H_
