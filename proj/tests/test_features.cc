#include <doctest.h>

#include "slterr/error.h"
#include "slterr/features.h"
#include "slterr/synth.h"
#include "slterr/template.h"
#include "test_util.h"

using namespace slterr;
using slterr::testing::T;
using slterr::testing::TempDir;

namespace {

AttrSeq Source(std::vector<std::string> values, std::vector<double> lm) {
  AttrSeq s;
  s.names = {"asr.x"};
  for (auto& v : values) s.values.push_back({v});
  s.lm_logprob = std::move(lm);
  return s;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("bucketing helpers") {
  CHECK(BucketUnit(0.0, 10) == 0);
  CHECK(BucketUnit(0.55, 10) == 5);
  CHECK(BucketUnit(1.0, 10) == 9);
  CHECK(BucketUnit(-3.0, 10) == 0);
  CHECK(BucketLogProb(0.0, 10) == 9);
  CHECK(BucketLogProb(-8.0, 10) == 0);
  CHECK(BucketLogProb(-50.0, 10) == 0);
  CHECK(BucketLogProb(-4.0, 10) == 5);
  CHECK(RelativePositionBin(0, 7, 10) == 0);
  CHECK(RelativePositionBin(6, 7, 10) == 8);
  CHECK(RelativePositionBin(3, 4, 2) == 1);
}

TEST_CASE("token predicates") {
  CHECK(IsPunctuation(","));
  CHECK(IsPunctuation("..."));
  CHECK_FALSE(IsPunctuation("a."));
  CHECK(IsNumeric("1984"));
  CHECK(IsNumeric("3.5"));
  CHECK_FALSE(IsNumeric("abc"));
  CHECK(AsciiLower("Los") == "los");
  CHECK(Utf8Length("\xc3\xa9t\xc3\xa9") == 3);
}

TEST_CASE("template parsing") {
  Template t = ParseTemplate("mt.lm[-1]/mt.lm[0]");
  REQUIRE(t.items.size() == 2);
  CHECK(t.items[0].attr == "mt.lm");
  CHECK(t.items[0].offset == -1);
  CHECK(t.items[1].offset == 0);
  CHECK_THROWS_AS(ParseTemplate("mt.lm[3]"), Error);
  CHECK_THROWS_AS(ParseTemplate("mt.lm"), Error);
  CHECK_THROWS_AS(ParseTemplate("mt.lm[x]"), Error);
}

TEST_CASE("feature config parsing") {
  auto cfg = FeatureConfig::Parse("attr mt.surface\nattr mt.lm 4\ntemplate mt.surface[0]\nlm_order 2\n");
  CHECK(cfg.Enabled("mt.surface"));
  CHECK_FALSE(cfg.Enabled("asr.lm"));
  CHECK(cfg.Bins("mt.lm") == 4);
  CHECK(cfg.lm_order == 2);
  CHECK_THROWS_AS(FeatureConfig::Parse("attr nope.attr\n"), ParseError);
  CHECK_THROWS_AS(FeatureConfig::Parse("bogus 1\n"), ParseError);
  auto def = FeatureConfig::Default();
  CHECK(def.Enabled("mt.surface"));
  CHECK(def.Enabled("asr.conf"));
  CHECK(def.stopwords.count("the") == 1);
}

TEST_CASE("stopwords file is resolved next to the config") {
  TempDir dir;
  WriteFileAtomic(dir / "sw.txt", "Le\nla\n");
  WriteFileAtomic(dir / "f.cfg", "attr mt.stopword\ntemplate mt.stopword[0]\nstopwords sw.txt\n");
  auto cfg = FeatureConfig::Load(dir / "f.cfg");
  CHECK(cfg.stopwords == std::set<std::string>{"la", "le"});
}

TEST_CASE("projection takes the least likely source and pads unaligned targets") {
  AttrSeq src = Source({"a", "b", "c"}, {-1.0, -3.0, -3.0});
  AttrSeq out = ProjectSourceAttrs(src, {{0, 0}, {1, 0}, {2, 1}, {1, 1}}, 3);
  REQUIRE(out.size() == 3);
  CHECK(out.values[0][0] == "b");
  CHECK(out.values[1][0] == "b");  // tie on LM score goes to the smaller index
  CHECK(out.values[2][0] == std::string(kNoSource));
  CHECK_THROWS_AS(ProjectSourceAttrs(src, {{3, 0}}, 1), Error);
}

TEST_CASE("instances: unresolved labels and masks drop tokens from the loss") {
  SynthConfig sc;
  sc.utterances = 20;
  SynthCorpus synth = Synthesize(sc);
  FeatureConfig cfg = FeatureConfig::Default();
  FeatureModels models = TrainFeatureModels(synth.corpus, cfg);
  std::vector<LabelSeq> labels;
  std::vector<std::vector<bool>> mask;
  for (const auto& q : synth.corpus) {
    LabelSeq l{Scheme::kThreeClass, std::vector<Label>(q.e_slt.size(), Label::kGood)};
    l.labels[0] = Label::kUnresolved;
    labels.push_back(l);
    std::vector<bool> m(q.e_slt.size(), true);
    m.back() = false;
    mask.push_back(m);
  }
  InstanceInputs in;
  in.labels = &labels;
  in.mask = &mask;
  in.confidence = &synth.confidence;
  auto inst = BuildInstances(synth.corpus, in, cfg, models, FeatureMode::kJoint);
  REQUIRE(inst.size() == synth.corpus.size());
  for (std::size_t u = 0; u < inst.size(); ++u) {
    CHECK(inst[u].size() == synth.corpus[u].e_slt.size());
    CHECK_FALSE(inst[u].mask.front());
    CHECK_FALSE(inst[u].mask.back());
    CHECK(inst[u].attrs.Find("asr.conf") >= 0);
    CHECK(inst[u].attrs.Find("mt.surface") >= 0);
  }
  auto asr = BuildInstances(synth.corpus, {}, cfg, models, FeatureMode::kAsrOnly);
  CHECK(asr[0].size() == synth.corpus[0].f_hyp.size());
  CHECK(asr[0].attrs.Find("mt.surface") < 0);
  auto mt = BuildInstances(synth.corpus, {}, cfg, models, FeatureMode::kMtOnly);
  CHECK(mt[0].attrs.Find("asr.lm") < 0);

  // Without confidences, templates over asr.conf are unusable.
  auto noconf = BuildInstances(synth.corpus, {}, cfg, models, FeatureMode::kJoint);
  auto usable = UsableTemplates(cfg, noconf[0].attrs.names);
  for (const auto& t : usable) CHECK(t.find("asr.conf") == std::string::npos);
  CHECK(usable.size() + 2 == cfg.templates.size());
}

TEST_CASE("instances reject length mismatches and bad confidences") {
  Corpus c = {slterr::testing::SurgeonsQuintuplet()};
  FeatureConfig cfg = FeatureConfig::Default();
  FeatureModels models = TrainFeatureModels(c, cfg);
  std::vector<LabelSeq> labels = {ParseLabelLine("G B", Scheme::kTwoClass)};
  InstanceInputs in;
  in.labels = &labels;
  CHECK_THROWS_AS(BuildInstances(c, in, cfg, models, FeatureMode::kJoint), Error);
  std::vector<std::vector<double>> conf = {std::vector<double>(7, 1.5)};
  InstanceInputs in2;
  in2.confidence = &conf;
  CHECK_THROWS_AS(BuildInstances(c, in2, cfg, models, FeatureMode::kJoint), Error);
}

TEST_CASE("feature models refuse an empty corpus") {
  CHECK_THROWS_AS(TrainFeatureModels({}, FeatureConfig::Default()), Error);
}

}  // TEST_SUITE
