#include "slterr/ibm1.h"

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "slterr/error.h"

namespace slterr {

double LexTable::Prob(std::string_view f, std::string_view e) const {
  auto row = t_.find(std::string(f));
  if (row == t_.end()) return 0.0;
  auto it = row->second.find(std::string(e));
  return it == row->second.end() ? 0.0 : it->second;
}

double LexTable::RowSum(const std::string& f) const {
  auto row = t_.find(f);
  if (row == t_.end()) return 0.0;
  double s = 0.0;
  for (const auto& [e, p] : row->second) s += p;
  return s;
}

std::string LexTable::Serialize() const {
  std::string out;
  for (const auto& [f, row] : t_)
    for (const auto& [e, p] : row) out += f + '\t' + e + '\t' + FormatExact(p) + '\n';
  return out;
}

LexTable LexTable::Parse(const std::string& text, const std::string& source) {
  LexTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw ParseError(source + ":" + std::to_string(lineno) +
                           ": expected 'f<TAB>e<TAB>prob'",
                       source, lineno);
    double p;
    try {
      p = std::stod(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": bad probability",
                       source, lineno);
    }
    table.Set(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), p);
  }
  return table;
}

void LexTable::Save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, Serialize());
}

LexTable LexTable::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path), path.string());
}

double Ibm1LogLikelihood(const LexTable& table,
                         const std::vector<SentencePair>& corpus) {
  double ll = 0.0;
  for (const auto& [f, e] : corpus) {
    const double norm = static_cast<double>(f.size() + 1);
    for (const auto& ew : e) {
      double s = table.Prob(kNullWord, ew);
      for (const auto& fw : f) s += table.Prob(fw, ew);
      ll += std::log(s / norm);
    }
  }
  return ll;
}

namespace {

// Interned corpus for EM: ids into the source and target vocabularies.
struct Interned {
  std::vector<std::string> f_vocab, e_vocab;  // f_vocab[0] == NULL
  std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
};

Interned Intern(const std::vector<SentencePair>& corpus) {
  Interned out;
  std::unordered_map<std::string, int> f_ids, e_ids;
  out.f_vocab.emplace_back(kNullWord);
  f_ids.emplace(kNullWord, 0);
  auto id = [](std::unordered_map<std::string, int>& ids,
               std::vector<std::string>& vocab, const std::string& w) {
    auto [it, inserted] = ids.emplace(w, static_cast<int>(vocab.size()));
    if (inserted) vocab.push_back(w);
    return it->second;
  };
  for (const auto& [f, e] : corpus) {
    std::vector<int> fi{0}, ei;
    for (const auto& w : f) fi.push_back(id(f_ids, out.f_vocab, w));
    for (const auto& w : e) ei.push_back(id(e_ids, out.e_vocab, w));
    out.pairs.emplace_back(std::move(fi), std::move(ei));
  }
  return out;
}

}  // namespace

LexTable TrainIbm1(const std::vector<SentencePair>& corpus, int iterations,
                   std::vector<double>* log_likelihoods) {
  if (corpus.empty()) throw Error("IBM-1: empty training corpus");
  if (iterations < 1) throw Error("IBM-1: iterations must be >= 1");
  Interned data = Intern(corpus);
  if (data.e_vocab.empty()) throw Error("IBM-1: no target tokens in corpus");

  // Sparse t(e|f) over co-occurring pairs, keyed by (f << 32 | e).
  auto key = [](int f, int e) {
    return (static_cast<std::uint64_t>(f) << 32) | static_cast<std::uint32_t>(e);
  };
  std::unordered_map<std::uint64_t, double> t;
  const double uniform = 1.0 / static_cast<double>(data.e_vocab.size());
  for (const auto& [fs, es] : data.pairs)
    for (int f : fs)
      for (int e : es) t.emplace(key(f, e), uniform);

  std::unordered_map<std::uint64_t, double> counts;
  std::vector<double> totals(data.f_vocab.size());
  for (int it = 0; it < iterations; ++it) {
    for (auto& [k, c] : counts) c = 0.0;
    std::fill(totals.begin(), totals.end(), 0.0);
    for (const auto& [fs, es] : data.pairs) {
      for (int e : es) {
        double z = 0.0;
        for (int f : fs) z += t[key(f, e)];
        for (int f : fs) {
          double post = t[key(f, e)] / z;
          counts[key(f, e)] += post;
          totals[static_cast<std::size_t>(f)] += post;
        }
      }
    }
    for (auto& [k, p] : t) {
      auto f = static_cast<std::size_t>(k >> 32);
      p = totals[f] > 0.0 ? counts[k] / totals[f] : 0.0;
    }
    if (log_likelihoods) {
      double ll = 0.0;
      for (const auto& [fs, es] : data.pairs) {
        const double norm = static_cast<double>(fs.size());
        for (int e : es) {
          double s = 0.0;
          for (int f : fs) s += t[key(f, e)];
          ll += std::log(s / norm);
        }
      }
      log_likelihoods->push_back(ll);
    }
  }

  LexTable table;
  for (const auto& [k, p] : t) {
    if (p <= 0.0) continue;
    table.Set(data.f_vocab[k >> 32], data.e_vocab[k & 0xffffffffu], p);
  }
  return table;
}

AlignmentPairs Ibm1Align(const LexTable& table, std::span<const std::string> f,
                         std::span<const std::string> e) {
  AlignmentPairs links;
  for (std::size_t j = 0; j < e.size(); ++j) {
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double p = table.Prob(f[i], e[j]);
      if (p > best) {
        best = p;
        best_i = i;
      }
    }
    if (!f.empty() && best > table.Prob(kNullWord, e[j]))
      links.emplace_back(best_i, j);
  }
  return links;
}

}  // namespace slterr
