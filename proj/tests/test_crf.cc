#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.h"
#include "slterr/crf.h"
#include "slterr/error.h"
#include "test_util.h"

using namespace slterr;
using slterr::testing::BruteForce;
using slterr::testing::MakeRandomCrf;
using slterr::testing::TempDir;

namespace {

Instance Inst(const std::vector<std::string>& x, const std::string& labels = "",
              Scheme scheme = Scheme::kTwoClass) {
  Instance inst;
  inst.attrs.names = {"x"};
  for (const auto& v : x) inst.attrs.values.push_back({v});
  inst.mask.assign(x.size(), true);
  if (!labels.empty()) inst.labels = ParseLabelLine(labels, scheme);
  return inst;
}

// Label is a deterministic function of the single attribute.
std::vector<Instance> SeparableSet(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(1, 8), coin(0, 3);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::string> x;
    std::string labels;
    int n = len(rng);
    for (int t = 0; t < n; ++t) {
      bool bad = coin(rng) == 0;
      x.push_back(bad ? "q" + std::to_string(coin(rng)) : "p" + std::to_string(coin(rng)));
      labels += bad ? "B " : "G ";
    }
    out.push_back(Inst(x, labels));
  }
  return out;
}

double Norm(const std::vector<double>& w) {
  return std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
}

std::uint32_t Bit(int y) { return 1u << y; }

}  // namespace

TEST_SUITE("crf") {

TEST_CASE("compile counts unigram, transition and boundary weights") {
  CrfModel m = CompileModel({Inst({"v"}, "G")}, {"x[0]"}, {"G", "B"});
  CHECK(m.num_observations() == 1);
  // 1 observation x 2 labels, 2x2 transitions, 2 begin and 2 end weights.
  CHECK(m.num_features() == 10);
  CrfModel bare = CompileModel({Inst({"v"}, "G")}, {}, {"G", "B"});
  CHECK(bare.num_observations() == 0);
  CHECK(bare.num_features() == 8);
}

TEST_CASE("templates past the sentence edge use padding values") {
  CrfModel m = CompileModel({Inst({"v"}, "G")}, {"x[1]", "x[-2]/x[0]"}, {"G", "B"});
  auto names = m.observation_names();
  CHECK(std::find(names.begin(), names.end(), "x[1]=_X+1") != names.end());
  CHECK(std::find(names.begin(), names.end(), "x[-2]/x[0]=_X-2 v") != names.end());
  CHECK_THROWS_AS(CompileModel({Inst({"v"})}, {"y[0]"}, {"G", "B"}), Error);
}

TEST_CASE("zero weights give a uniform model") {
  for (std::size_t k = 2; k <= 3; ++k)
    for (std::size_t n = 1; n <= 6; ++n) {
      std::mt19937_64 rng(k * 10 + n);
      auto r = MakeRandomCrf(rng, k, n);
      std::fill(r.model.weights().begin(), r.model.weights().end(), 0.0);
      r.lattice.allowed.assign(n, Bit(static_cast<int>(n % k)));
      double ll = LogLikelihoodAndGradient(r.model, r.lattice, nullptr);
      CHECK(std::fabs(ll + static_cast<double>(n) * std::log(static_cast<double>(k))) < 1e-12);
      auto v = Viterbi(r.model, r.lattice);
      CHECK(v.labels == std::vector<int>(n, 0));
      for (const auto& row : Marginals(r.model, r.lattice))
        for (double p : row) CHECK(p == doctest::Approx(1.0 / static_cast<double>(k)));
    }
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t k = 2 + trial % 2, n = 1 + static_cast<std::size_t>(trial) % 6;
    auto r = MakeRandomCrf(rng, k, n);
    std::uniform_int_distribution<std::uint32_t> mask(1, (1u << k) - 1);
    for (std::size_t t = 0; t < n; ++t) r.lattice.allowed.push_back(mask(rng));
    std::vector<double> grad(r.model.num_features(), 0.0);
    LogLikelihoodAndGradient(r.model, r.lattice, &grad);
    auto& w = r.model.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      double keep = w[i], h = 1e-5;
      w[i] = keep + h;
      double up = LogLikelihoodAndGradient(r.model, r.lattice, nullptr);
      w[i] = keep - h;
      double down = LogLikelihoodAndGradient(r.model, r.lattice, nullptr);
      w[i] = keep;
      double fd = (up - down) / (2 * h);
      CHECK(std::fabs(fd - grad[i]) <= 1e-4 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST_CASE("viterbi, marginals and likelihood match enumeration") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t k = 2 + trial % 2, n = 1 + static_cast<std::size_t>(trial) % 8;
    auto r = MakeRandomCrf(rng, k, n);
    std::uniform_int_distribution<std::uint32_t> mask(1, (1u << k) - 1);
    for (std::size_t t = 0; t < n; ++t) r.lattice.allowed.push_back(mask(rng));
    auto brute = BruteForce(r.model, r.lattice);
    CHECK(LogPartition(r.model, r.lattice) == doctest::Approx(brute.log_z).epsilon(1e-12));
    CHECK(std::fabs(LogLikelihoodAndGradient(r.model, r.lattice, nullptr) -
                    (brute.log_allowed - brute.log_z)) < 1e-9);
    auto v = Viterbi(r.model, r.lattice);
    CHECK(v.labels == brute.best);
    CHECK(std::fabs(v.score - (brute.best_score - brute.log_z)) < 1e-9);
    CHECK(v.score <= 0.0);
    auto marg = Marginals(r.model, r.lattice);
    for (std::size_t t = 0; t < n; ++t) {
      double sum = 0.0;
      for (std::size_t y = 0; y < k; ++y) {
        CHECK(std::fabs(marg[t][y] - brute.marginals[t][y]) < 1e-9);
        sum += marg[t][y];
      }
      CHECK(std::fabs(sum - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("viterbi score equals the likelihood of its own path") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    auto r = MakeRandomCrf(rng, 3, 7);
    auto v = Viterbi(r.model, r.lattice);
    Lattice fixed = r.lattice;
    for (int y : v.labels) fixed.allowed.push_back(Bit(y));
    CHECK(std::fabs(v.score - LogLikelihoodAndGradient(r.model, fixed, nullptr)) < 1e-9);
    CHECK(std::fabs(PathScore(r.model, r.lattice, v.labels) -
                    slterr::testing::OraclePathScore(r.model, r.lattice, v.labels)) < 1e-12);
  }
}

TEST_CASE("fully masked and unlabeled lattices contribute nothing") {
  std::mt19937_64 rng(31);
  auto r = MakeRandomCrf(rng, 3, 5);
  std::vector<double> grad(r.model.num_features(), 0.0);
  CHECK(LogLikelihoodAndGradient(r.model, r.lattice, &grad) == 0.0);
  r.lattice.allowed.assign(5, 0b111);
  CHECK(std::fabs(LogLikelihoodAndGradient(r.model, r.lattice, &grad)) < 1e-12);
  for (double g : grad) CHECK(std::fabs(g) < 1e-12);
}

TEST_CASE("permuting the label set permutes the outputs") {
  std::mt19937_64 rng(37);
  const std::vector<std::size_t> perm = {2, 0, 1};  // new index of old label
  for (int trial = 0; trial < 10; ++trial) {
    auto r = MakeRandomCrf(rng, 3, 6);
    const CrfModel& a = r.model;
    std::vector<std::string> labels(3);
    for (std::size_t y = 0; y < 3; ++y) labels[perm[y]] = a.labels()[y];
    CrfModel b(labels, {});
    b.ResizeObservations(a.num_observations());
    auto& w = b.weights();
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t y = 0; y < 3; ++y)
        w[b.TransitionIndex(perm[p], perm[y])] = a.weights()[a.TransitionIndex(p, y)];
      w[b.BeginIndex(perm[p])] = a.weights()[a.BeginIndex(p)];
      w[b.EndIndex(perm[p])] = a.weights()[a.EndIndex(p)];
    }
    for (std::uint32_t o = 0; o < a.num_observations(); ++o)
      for (std::size_t y = 0; y < 3; ++y)
        w[b.UnigramIndex(o, perm[y])] = a.weights()[a.UnigramIndex(o, y)];
    auto va = Viterbi(a, r.lattice), vb = Viterbi(b, r.lattice);
    auto ma = Marginals(a, r.lattice), mb = Marginals(b, r.lattice);
    for (std::size_t t = 0; t < 6; ++t) {
      CHECK(static_cast<std::size_t>(vb.labels[t]) == perm[va.labels[t]]);
      for (std::size_t y = 0; y < 3; ++y) CHECK(std::fabs(ma[t][y] - mb[t][perm[y]]) < 1e-12);
    }
  }
}

TEST_CASE("training fits a separable set") {
  auto data = SeparableSet(1, 60);
  TrainReport report;
  CrfModel m = TrainCrf(data, {"x[0]"}, {"G", "B"}, TrainConfig{}, &report);
  for (std::size_t i = 1; i < report.accepted_objectives.size(); ++i)
    CHECK(report.accepted_objectives[i] >= report.accepted_objectives[i - 1]);
  std::size_t errors = 0;
  for (const auto& inst : data) {
    auto v = Viterbi(m, m.Compile(inst));
    for (std::size_t t = 0; t < inst.size(); ++t)
      errors += LabelName((*inst.labels)[t]) != m.labels()[v.labels[t]];
  }
  CHECK(errors == 0);
}

TEST_CASE("both step rules converge to the same optimum") {
  auto data = SeparableSet(2, 30);
  TrainConfig a;
  a.max_epochs = 2000;
  a.tolerance = 1e-6;
  TrainConfig b = a;
  b.step_rule = StepRule::kLbfgs;
  TrainReport ra, rb;
  TrainCrf(data, {"x[0]", "x[-1]"}, {"G", "B"}, a, &ra);
  TrainCrf(data, {"x[0]", "x[-1]"}, {"G", "B"}, b, &rb);
  CHECK(rb.converged);
  CHECK(ra.objective == doctest::Approx(rb.objective).epsilon(1e-6));
  CHECK(rb.evaluations < ra.evaluations);
}

TEST_CASE("a tighter prior shrinks the weights") {
  auto data = SeparableSet(3, 40);
  double last = INFINITY;
  for (double s2 : {1.0, 0.1, 0.01}) {
    TrainConfig c;
    c.sigma2 = s2;
    c.max_epochs = 1000;
    c.tolerance = 1e-7;
    c.step_rule = StepRule::kLbfgs;
    CrfModel m = TrainCrf(data, {"x[0]"}, {"G", "B"}, c);
    double norm = Norm(m.weights());
    CHECK(norm < last);
    last = norm;
  }
}

TEST_CASE("training is deterministic") {
  auto data = SeparableSet(4, 30);
  auto a = TrainCrf(data, {"x[0]", "x[-1]/x[0]"}, {"G", "B"}, TrainConfig{}).Serialize();
  auto b = TrainCrf(data, {"x[0]", "x[-1]/x[0]"}, {"G", "B"}, TrainConfig{}).Serialize();
  CHECK(a == b);
}

TEST_CASE("training rejects bad configurations") {
  auto data = SeparableSet(5, 5);
  TrainConfig c;
  c.sigma2 = 0.0;
  CHECK_THROWS_AS(TrainCrf(data, {"x[0]"}, {"G", "B"}, c), Error);
  c = TrainConfig{};
  c.tolerance = -1;
  CHECK_THROWS_AS(TrainCrf(data, {"x[0]"}, {"G", "B"}, c), Error);
  CHECK_THROWS_AS(TrainCrf({}, {"x[0]"}, {"G", "B"}, TrainConfig{}), Error);
  CHECK(ParseStepRule("lbfgs") == StepRule::kLbfgs);
  CHECK_THROWS_AS(ParseStepRule("sgd"), Error);
}

TEST_CASE("model files round trip") {
  TempDir dir;
  auto data = SeparableSet(6, 25);
  CrfModel m = TrainCrf(data, {"x[0]", "x[1]"}, {"G", "B"}, TrainConfig{});
  m.Save(dir / "a.crf");
  CrfModel back = CrfModel::Load(dir / "a.crf");
  back.Save(dir / "b.crf");
  CHECK(slterr::testing::Slurp(dir / "a.crf") == slterr::testing::Slurp(dir / "b.crf"));
  auto held_out = SeparableSet(7, 20);
  for (const auto& inst : held_out) {
    CHECK(Viterbi(m, m.Compile(inst)).labels == Viterbi(back, back.Compile(inst)).labels);
    CHECK(Marginals(m, m.Compile(inst)) == Marginals(back, back.Compile(inst)));
  }
}

TEST_CASE("truncated model files name the failing line") {
  CrfModel m = TrainCrf(SeparableSet(8, 10), {"x[0]"}, {"G", "B"}, TrainConfig{});
  std::string text = m.Serialize();
  std::string cut = text.substr(0, text.size() / 2);
  cut = cut.substr(0, cut.rfind('\n') + 1);
  try {
    CrfModel::Parse(cut, "m.crf");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() > 0);
    CHECK(std::string(e.what()).find("m.crf:") == 0);
  }
  CHECK_THROWS_AS(CrfModel::Parse("not a model\n"), ParseError);
}

TEST_CASE("compile rejects labels outside the model") {
  CrfModel m = CompileModel({Inst({"v"}, "G")}, {"x[0]"}, {"G", "B"});
  Instance three = Inst({"v"}, "B_ASR", Scheme::kThreeClass);
  CHECK_THROWS_AS(m.Compile(three), Error);
  three.mask = {false};
  CHECK(m.Compile(three).allowed == std::vector<std::uint32_t>{0b11});
}

}  // TEST_SUITE
