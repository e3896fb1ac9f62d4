#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "slterr/error.h"
#include "slterr/ibm1.h"
#include "slterr/ngram_lm.h"
#include "test_util.h"

using namespace slterr;
using slterr::testing::T;

namespace {

// Dense IBM-1 EM with an explicit NULL source, written independently of the
// sparse trainer.
std::map<std::string, std::map<std::string, double>> OracleIbm1(
    const std::vector<SentencePair>& corpus, int iterations) {
  std::set<std::string> fv{"NULL"}, ev;
  for (const auto& [f, e] : corpus) {
    fv.insert(f.begin(), f.end());
    ev.insert(e.begin(), e.end());
  }
  std::map<std::string, std::map<std::string, double>> t;
  for (const auto& f : fv)
    for (const auto& e : ev) t[f][e] = 1.0 / static_cast<double>(ev.size());
  for (int it = 0; it < iterations; ++it) {
    std::map<std::string, std::map<std::string, double>> count;
    std::map<std::string, double> total;
    for (const auto& [f, e] : corpus) {
      Tokens src{"NULL"};
      src.insert(src.end(), f.begin(), f.end());
      for (const auto& ew : e) {
        double z = 0.0;
        for (const auto& fw : src) z += t[fw][ew];
        for (const auto& fw : src) {
          count[fw][ew] += t[fw][ew] / z;
          total[fw] += t[fw][ew] / z;
        }
      }
    }
    for (auto& [f, row] : t)
      for (auto& [e, p] : row) p = total[f] > 0 ? count[f][e] / total[f] : 0.0;
  }
  return t;
}

std::vector<SentencePair> ToyParallel(std::mt19937_64& rng, std::size_t pairs) {
  std::uniform_int_distribution<int> len(1, 6), w(0, 9), noise(0, 9);
  std::vector<SentencePair> out;
  for (std::size_t i = 0; i < pairs; ++i) {
    SentencePair p;
    int n = len(rng);
    for (int k = 0; k < n; ++k) {
      int id = w(rng);
      p.first.push_back("f" + std::to_string(id));
      // Mostly word-for-word, with occasional noise.
      p.second.push_back(noise(rng) == 0 ? "junk" : "e" + std::to_string(id));
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_SUITE("lexmodel") {

TEST_CASE("Witten-Bell unigram and bigram values") {
  NgramLM lm = TrainNgramLM({T("a b"), T("a")}, 2);
  // Unigram: counts a=2 b=1 </s>=2, N=5, T=3, |V|=4 with <unk>.
  auto uni = [](double c) { return (c + 3.0 / 4.0) / 8.0; };
  CHECK(lm.Score({}, "a").logprob == doctest::Approx(std::log10(uni(2))));
  CHECK(lm.Score({}, "b").logprob == doctest::Approx(std::log10(uni(1))));
  CHECK(lm.Score({}, "zzz").logprob == doctest::Approx(std::log10(uni(0))));
  // History "<s>": one type seen twice.
  Tokens bos{"<s>"};
  CHECK(lm.Score(bos, "a").logprob == doctest::Approx(std::log10((2 + uni(2)) / 3.0)));
  CHECK(lm.Score(bos, "a").level == 0);
  auto backed = lm.Score(bos, "b");
  CHECK(backed.logprob == doctest::Approx(std::log10(uni(1) / 3.0)));
  CHECK(backed.level == 1);
  // History "a": two types, two tokens.
  Tokens a{"a"};
  CHECK(lm.Score(a, "b").logprob == doctest::Approx(std::log10((1 + 2 * uni(1)) / 4.0)));
  CHECK(lm.Score(a, "a").logprob == doctest::Approx(std::log10(0.5 * uni(2))));
}

TEST_CASE("LM distributions are normalized") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(0, 9), w(0, 14);
  std::vector<Tokens> corpus;
  for (int i = 0; i < 80; ++i) {
    Tokens s(len(rng));
    for (auto& t : s) t = "w" + std::to_string(w(rng));
    corpus.push_back(s);
  }
  for (int order = 1; order <= 4; ++order) {
    NgramLM lm = TrainNgramLM(corpus, order);
    auto vocab = lm.Vocabulary();
    for (int trial = 0; trial < 25; ++trial) {
      Tokens ctx{"<s>"};
      int n = len(rng) % 4;
      for (int i = 0; i < n; ++i) ctx.push_back(vocab[static_cast<std::size_t>(w(rng)) % vocab.size()]);
      double sum = 0.0;
      for (const auto& v : vocab) sum += std::pow(10.0, lm.Score(ctx, v).logprob);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("ARPA round trip and errors") {
  NgramLM lm = TrainNgramLM({T("a b c"), T("a c"), T("b")}, 3);
  std::string arpa = lm.ToArpa();
  NgramLM back = NgramLM::FromArpa(arpa);
  CHECK(back.ToArpa() == arpa);
  Tokens ctx = T("<s> a");
  CHECK(back.Score(ctx, "c").logprob == lm.Score(ctx, "c").logprob);
  std::string truncated = arpa.substr(0, arpa.find("\\end\\"));
  CHECK_THROWS_AS(NgramLM::FromArpa(truncated), ParseError);
  CHECK_THROWS_AS(TrainNgramLM({}, 3), Error);
  CHECK_THROWS_AS(TrainNgramLM({T("a")}, 0), Error);
  CHECK_THROWS_AS(TrainNgramLM({T("a <s>")}, 2), Error);
}

TEST_CASE("IBM-1 matches a dense EM oracle") {
  std::mt19937_64 rng(9);
  auto corpus = ToyParallel(rng, 30);
  LexTable table = TrainIbm1(corpus, 4);
  auto oracle = OracleIbm1(corpus, 4);
  for (const auto& [f, row] : oracle)
    for (const auto& [e, p] : row) CHECK(table.Prob(f, e) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("IBM-1 single pair converges to certainty") {
  LexTable t = TrainIbm1({{T("a"), T("x")}}, 1);
  CHECK(t.Prob("a", "x") == doctest::Approx(1.0));
  CHECK(t.Prob("NULL", "x") == doctest::Approx(1.0));
  CHECK(t.Prob("a", "y") == 0.0);
}

TEST_CASE("IBM-1 log-likelihood never decreases") {
  std::mt19937_64 rng(21);
  auto corpus = ToyParallel(rng, 50);
  std::vector<double> lls;
  LexTable t = TrainIbm1(corpus, 20, &lls);
  REQUIRE(lls.size() == 20);
  for (std::size_t i = 1; i < lls.size(); ++i) CHECK(lls[i] >= lls[i - 1] - 1e-9);
  CHECK(Ibm1LogLikelihood(t, corpus) == doctest::Approx(lls.back()));
  for (const auto& [f, row] : t.rows()) CHECK(t.RowSum(f) == doctest::Approx(1.0));
}

TEST_CASE("IBM-1 alignment and table round trip") {
  std::mt19937_64 rng(4);
  auto corpus = ToyParallel(rng, 200);
  LexTable t = TrainIbm1(corpus, 10);
  auto links = Ibm1Align(t, T("f1 f2 f3"), T("e1 e2 e3"));
  CHECK(links == AlignmentPairs{{0, 0}, {1, 1}, {2, 2}});
  CHECK(Ibm1Align(t, {}, T("e1")).empty());
  LexTable back = LexTable::Parse(t.Serialize());
  CHECK(back.Serialize() == t.Serialize());
  CHECK_THROWS_AS(LexTable::Parse("a\tb\n"), ParseError);
  CHECK_THROWS_AS(TrainIbm1({}, 3), Error);
}

}  // TEST_SUITE
