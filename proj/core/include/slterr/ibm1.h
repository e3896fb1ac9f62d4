#ifndef SLTERR_IBM1_H_
#define SLTERR_IBM1_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slterr/align.h"
#include "slterr/text_io.h"

namespace slterr {

inline constexpr std::string_view kNullWord = "NULL";

// A (source sentence, target sentence) pair.
using SentencePair = std::pair<Tokens, Tokens>;

// Lexical translation table t(e|f), including the NULL source word.
class LexTable {
 public:
  double Prob(std::string_view f, std::string_view e) const;
  void Set(const std::string& f, const std::string& e, double p) { t_[f][e] = p; }

  // Sum over e of t(e|f).
  double RowSum(const std::string& f) const;
  const std::map<std::string, std::map<std::string, double>>& rows() const {
    return t_;
  }
  bool empty() const { return t_.empty(); }

  // "f<TAB>e<TAB>prob" lines.
  std::string Serialize() const;
  static LexTable Parse(const std::string& text, const std::string& source = "<lex>");
  void Save(const std::filesystem::path& path) const;
  static LexTable Load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::map<std::string, double>> t_;
};

// Natural-log likelihood of the targets given the sources under IBM-1 with a
// NULL word prepended to every source sentence.
double Ibm1LogLikelihood(const LexTable& table,
                         const std::vector<SentencePair>& corpus);

// EM from a uniform table. `log_likelihoods`, when given, receives the corpus
// log-likelihood after every iteration.
LexTable TrainIbm1(const std::vector<SentencePair>& corpus, int iterations,
                   std::vector<double>* log_likelihoods = nullptr);

// Links every target position j to argmax_i t(e_j|f_i) when that beats
// t(e_j|NULL); ties go to the smallest i. Returns (f_index, e_index) pairs.
AlignmentPairs Ibm1Align(const LexTable& table, std::span<const std::string> f,
                         std::span<const std::string> e);

}  // namespace slterr

#endif  // SLTERR_IBM1_H_
