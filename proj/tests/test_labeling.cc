#include <doctest.h>

#include <random>

#include "slterr/align.h"
#include "slterr/error.h"
#include "slterr/labeling.h"
#include "slterr/synth.h"
#include "test_util.h"

using namespace slterr;
using slterr::testing::T;

namespace {

LabelSeq L2(std::string_view s) { return ParseLabelLine(s, Scheme::kTwoClass); }
LabelSeq L3(std::string_view s) { return ParseLabelLine(s, Scheme::kThreeClass); }

// Random quintuplet over a tiny vocabulary, so alignments are ambiguous.
Quintuplet RandomQuintuplet(std::mt19937_64& rng, std::size_t id) {
  std::uniform_int_distribution<int> len(0, 8), sym(0, 4);
  auto seq = [&](char base) {
    Tokens t(len(rng));
    for (auto& w : t) w = std::string(1, static_cast<char>(base + sym(rng)));
    return t;
  };
  Quintuplet q;
  q.utt_id = std::to_string(id);
  q.f_hyp = seq('a');
  q.f_ref = seq('a');
  q.e_mt = seq('p');
  q.e_slt = seq('p');
  q.e_ref = seq('p');
  return q;
}

}  // namespace

TEST_SUITE("labeling") {

TEST_CASE("2-class labels of the surgeons SLT and MT outputs") {
  auto q = slterr::testing::SurgeonsQuintuplet();
  CHECK(Infer2Class(q.e_slt, q.e_ref) == L2("G B G G B B G"));
  CHECK(Infer2Class(q.e_mt, q.e_ref) == L2("G B G G B G"));
  CHECK(InferAsrLabels(q.f_hyp, q.f_ref) == L2("G G G G G B G"));
}

TEST_CASE("method1 and method2 on the surgeons example") {
  auto q = slterr::testing::SurgeonsQuintuplet();
  LabelSeq slt = L2("G B G G B B G"), mt = L2("G B G G B G");
  EditScript script = EditAlign(q.e_slt, q.e_mt);
  CHECK(Method1(slt, mt, ExtractAlignmentPairs(script)) == L3("G B_MT G G B_ASR B_MT G"));
  CHECK(Method2(slt, script) == L3("G B_MT G G B_ASR B_ASR G"));
  auto all = ExtractLabels(q);
  CHECK(all.method1 == L3("G B_MT G G B_ASR B_MT G"));
  CHECK(all.method2 == L3("G B_MT G G B_ASR B_ASR G"));
  CHECK(all.intersect[5] == Label::kUnresolved);
  CHECK(all.intersect[1] == Label::kBadMt);
}

TEST_CASE("method1 is any-bad-wins over several alignments") {
  LabelSeq slt = L2("B"), mt = L2("G B");
  CHECK(Method1(slt, mt, {{0, 0}, {0, 1}}) == L3("B_MT"));
  CHECK(Method1(slt, mt, {{0, 0}}) == L3("B_ASR"));
  CHECK(Method1(slt, mt, {}) == L3("B_ASR"));
  CHECK_THROWS_AS(Method1(slt, mt, {{0, 2}}), Error);
}

TEST_CASE("method2 needs a script covering every SLT token") {
  EditScript s;
  s.ops = {{EditKind::kExact, 0, 0}};
  CHECK_THROWS_AS(Method2(L2("B B"), s), Error);
}

TEST_CASE("intersection counts") {
  auto r = IntersectLabels(L3("G B_MT G G B_ASR B_MT G"), L3("G B_MT G G B_ASR B_ASR G"));
  CHECK(r.agreed.labels[5] == Label::kUnresolved);
  CHECK(r.same.total == 7);
  CHECK(r.same.good == 4);
  CHECK(r.same.bad_asr == 1);
  CHECK(r.same.bad_mt == 1);
  CHECK(r.diff.bad_mt == 1);
  CHECK(r.diff.good == 0);
  CHECK_THROWS_AS(IntersectLabels(L3("G"), L3("G G")), Error);
}

TEST_CASE("label stats") {
  auto s = ComputeLabelStats({L3("G B_MT G G B_ASR B_MT G")});
  CHECK(s.pct_good() == doctest::Approx(400.0 / 7));
  CHECK(s.pct_bad_asr() == doctest::Approx(100.0 / 7));
  CHECK(s.pct_bad_mt() == doctest::Approx(200.0 / 7));
  CHECK_THROWS_AS(ComputeLabelStats({LabelSeq{}}), Error);
}

TEST_CASE("stats CSV rows") {
  std::string csv = ThreeClassStatsCsv({L3("G B_MT G G B_ASR B_MT G")},
                                       {L3("G B_MT G G B_ASR B_ASR G")});
  CHECK(csv ==
        "label,pct_G,pct_B_ASR,pct_B_MT\n"
        "label/m1,57.14,14.29,28.57\n"
        "label/m2,57.14,28.57,14.29\n"
        "\"label/same(m1, m2)\",57.14,14.29,14.29\n"
        "\"label/diff(m1, m2)\",0.00,0.00,14.29\n");
}

TEST_CASE("G is preserved and disagreements sit on bad tokens") {
  std::mt19937_64 rng(3);
  SynthConfig sc;
  sc.utterances = 200;
  sc.asr_substitution_rate = 0.2;
  sc.asr_insertion_rate = 0.1;
  Corpus corpus = Synthesize(sc).corpus;
  for (std::size_t i = 0; i < 200; ++i) corpus.push_back(RandomQuintuplet(rng, 200 + i));
  std::vector<LabelSeq> slt, m1, m2;
  for (const auto& q : corpus) {
    auto e = ExtractLabels(q);
    REQUIRE(e.slt.size() == q.e_slt.size());
    for (std::size_t t = 0; t < e.slt.size(); ++t) {
      bool good = e.slt[t] == Label::kGood;
      CHECK((e.method1[t] == Label::kGood) == good);
      CHECK((e.method2[t] == Label::kGood) == good);
      if (e.method1[t] != e.method2[t]) CHECK(!good);
    }
    slt.push_back(e.slt);
    m1.push_back(e.method1);
    m2.push_back(e.method2);
  }
  auto inter = IntersectLabels(m1, m2, nullptr);
  auto s1 = ComputeLabelStats(m1);
  CHECK(inter.same.good == ComputeLabelStats(slt).good);
  CHECK(inter.diff.good == 0);
  // The first method's distribution splits exactly into agreeing and
  // disagreeing tokens.
  CHECK(inter.same.bad_asr + inter.diff.bad_asr == s1.bad_asr);
  CHECK(inter.same.bad_mt + inter.diff.bad_mt == s1.bad_mt);
}

}  // TEST_SUITE
