#include "slterr/ngram_lm.h"

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "slterr/error.h"

namespace slterr {

namespace {

constexpr double kLogZero = -99.0;

std::string Key(std::span<const std::string> words) {
  std::string k;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) k += ' ';
    k += words[i];
  }
  return k;
}

}  // namespace

NgramLM TrainNgramLM(const std::vector<Tokens>& corpus, int order) {
  if (order < 1 || order > 5)
    throw Error("n-gram order must be in 1..5, got " + std::to_string(order));
  if (corpus.empty()) throw Error("cannot train a language model on an empty corpus");

  // counts[n-1][context key][word] over "<s> w1 .. wm </s>".
  std::vector<std::map<std::string, std::map<std::string, double>>> counts(
      static_cast<std::size_t>(order));
  std::set<std::string> vocab;
  for (const auto& sent : corpus) {
    std::vector<std::string> padded;
    padded.reserve(sent.size() + 2);
    padded.emplace_back(kBos);
    for (const auto& w : sent) {
      if (w == kBos || w == kEos || w == kUnk)
        throw Error("reserved symbol '" + w + "' in language model corpus");
      padded.push_back(w);
      vocab.insert(w);
    }
    padded.emplace_back(kEos);
    for (std::size_t i = 1; i < padded.size(); ++i) {
      for (int n = 1; n <= order && static_cast<std::size_t>(n) <= i + 1; ++n) {
        std::span<const std::string> ctx(padded.data() + i - (n - 1),
                                         static_cast<std::size_t>(n - 1));
        counts[n - 1][Key(ctx)][padded[i]] += 1.0;
      }
    }
  }
  vocab.emplace(kEos);
  vocab.emplace(kUnk);

  NgramLM lm;
  lm.order_ = order;
  lm.grams_.assign(static_cast<std::size_t>(order), {});

  // Unigrams: interpolate with a uniform distribution over the vocabulary.
  {
    const auto& uni = counts[0][""];
    double total = 0.0;
    for (const auto& [w, c] : uni) total += c;
    const double types = static_cast<double>(uni.size());
    const double uniform = 1.0 / static_cast<double>(vocab.size());
    for (const auto& w : vocab) {
      auto it = uni.find(w);
      double c = it == uni.end() ? 0.0 : it->second;
      lm.grams_[0][w].logprob = std::log10((c + types * uniform) / (total + types));
    }
    lm.grams_[0][std::string(kBos)].logprob = kLogZero;
  }

  // Higher orders; lower-order probabilities are already final.
  for (int n = 2; n <= order; ++n) {
    for (const auto& [ctx, nexts] : counts[n - 1]) {
      double c_h = 0.0;
      for (const auto& [w, c] : nexts) c_h += c;
      const double t_h = static_cast<double>(nexts.size());
      auto ctx_words = SplitTokens(ctx);
      const double lambda = t_h / (c_h + t_h);
      for (const auto& [w, c] : nexts) {
        std::vector<std::string> lower_ctx(ctx_words.begin() + 1, ctx_words.end());
        double lower = std::pow(10.0, lm.Score(lower_ctx, w).logprob);
        ctx_words.push_back(w);
        lm.grams_[n - 1][Key(ctx_words)].logprob =
            std::log10((c + t_h * lower) / (c_h + t_h));
        ctx_words.pop_back();
      }
      lm.grams_[n - 2][ctx].backoff = std::log10(lambda);
    }
  }
  return lm;
}

const NgramEntry* NgramLM::Find(int n, std::span<const std::string> words) const {
  if (n < 1 || n > order_) return nullptr;
  const auto& table = grams_[static_cast<std::size_t>(n - 1)];
  auto it = table.find(Key(words));
  return it == table.end() ? nullptr : &it->second;
}

bool NgramLM::InVocabulary(std::string_view word) const {
  if (grams_.empty()) return false;
  return grams_[0].count(std::string(word)) && word != kBos;
}

std::vector<std::string> NgramLM::Vocabulary() const {
  std::vector<std::string> out;
  if (grams_.empty()) return out;
  for (const auto& [w, e] : grams_[0])
    if (w != kBos) out.push_back(w);
  return out;
}

TokenScore NgramLM::Score(std::span<const std::string> context,
                          std::string_view word) const {
  if (grams_.empty()) throw Error("language model is empty");
  std::string w(word);
  if (!InVocabulary(w)) w = kUnk;
  const std::size_t max_ctx =
      std::min(context.size(), static_cast<std::size_t>(order_ - 1));
  std::vector<std::string> gram(context.end() - static_cast<long>(max_ctx),
                                context.end());
  double backoff = 0.0;
  for (int n = static_cast<int>(max_ctx) + 1; n >= 1; --n) {
    std::span<const std::string> ctx(gram.data() + (gram.size() - (n - 1)),
                                     static_cast<std::size_t>(n - 1));
    std::vector<std::string> full(ctx.begin(), ctx.end());
    full.push_back(w);
    if (const NgramEntry* e = Find(n, full))
      return {backoff + e->logprob, order_ - n};
    if (const NgramEntry* c = Find(n - 1, ctx)) backoff += c->backoff;
  }
  throw Error("language model has no entry for <unk>");
}

std::vector<TokenScore> NgramLM::ScoreSentence(std::span<const std::string> tokens,
                                               bool include_eos) const {
  std::vector<std::string> history{std::string(kBos)};
  std::vector<TokenScore> out;
  out.reserve(tokens.size() + 1);
  for (const auto& t : tokens) {
    out.push_back(Score(history, t));
    history.push_back(InVocabulary(t) ? t : std::string(kUnk));
  }
  if (include_eos) out.push_back(Score(history, kEos));
  return out;
}

std::string NgramLM::ToArpa() const {
  std::ostringstream out;
  out << "\\data\\\n";
  for (int n = 1; n <= order_; ++n)
    out << "ngram " << n << "=" << grams_[static_cast<std::size_t>(n - 1)].size() << "\n";
  for (int n = 1; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    for (const auto& [key, e] : grams_[static_cast<std::size_t>(n - 1)]) {
      out << FormatExact(e.logprob) << '\t' << key;
      if (n < order_) out << '\t' << FormatExact(e.backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
  return out.str();
}

NgramLM NgramLM::FromArpa(const std::string& text, const std::string& source) {
  NgramLM lm;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  int section = -1;  // 0 = header, n = n-grams
  std::vector<std::size_t> declared;
  auto fail = [&](const std::string& msg) {
    throw ParseError(source + ":" + std::to_string(lineno) + ": " + msg, source,
                     lineno);
  };
  bool ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line == "\\data\\") {
      section = 0;
      continue;
    }
    if (line == "\\end\\") {
      ended = true;
      break;
    }
    if (line.front() == '\\') {
      int n = std::atoi(line.c_str() + 1);
      if (n < 1 || n > static_cast<int>(declared.size())) fail("bad section header");
      section = n;
      continue;
    }
    if (section == 0) {
      if (line.rfind("ngram ", 0) != 0) fail("expected 'ngram N=count'");
      auto eq = line.find('=');
      if (eq == std::string::npos) fail("expected 'ngram N=count'");
      declared.push_back(std::stoul(line.substr(eq + 1)));
      continue;
    }
    if (section < 1) fail("n-gram line outside a section");
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3) fail("expected 'logprob<TAB>ngram[<TAB>backoff]'");
    if (static_cast<int>(SplitTokens(fields[1]).size()) != section)
      fail("n-gram has wrong order");
    NgramEntry e;
    try {
      e.logprob = std::stod(fields[0]);
      if (fields.size() == 3) e.backoff = std::stod(fields[2]);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    lm.grams_.resize(declared.size());
    lm.grams_[static_cast<std::size_t>(section - 1)][fields[1]] = e;
  }
  if (!ended) fail("missing \\end\\ marker (truncated file?)");
  lm.order_ = static_cast<int>(declared.size());
  lm.grams_.resize(declared.size());
  for (std::size_t n = 0; n < declared.size(); ++n)
    if (lm.grams_[n].size() != declared[n])
      throw ParseError(source + ": " + std::to_string(n + 1) +
                           "-gram count differs from header",
                       source, lineno);
  if (lm.order_ == 0 || !lm.InVocabulary(kUnk))
    throw ParseError(source + ": model has no <unk> unigram", source, lineno);
  return lm;
}

void NgramLM::Save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, ToArpa());
}

NgramLM NgramLM::Load(const std::filesystem::path& path) {
  return FromArpa(ReadFile(path), path.string());
}

}  // namespace slterr
