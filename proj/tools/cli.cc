#include "cli.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "slterr/align.h"
#include "slterr/corpus.h"
#include "slterr/crf.h"
#include "slterr/error.h"
#include "slterr/eval.h"
#include "slterr/features.h"
#include "slterr/labeling.h"
#include "slterr/synth.h"
#include "slterr/text_io.h"

namespace fs = std::filesystem;

namespace slterr::cli {

namespace {

constexpr const char* kConfigEnv = "SLTERR_CONFIG";

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Label LabelFromName(std::string_view name) {
  for (Scheme s : {Scheme::kTwoClass, Scheme::kThreeClass})
    for (Label l : Alphabet(s))
      if (LabelName(l) == name) return l;
  throw Error("unknown label '" + std::string(name) + "'");
}

std::vector<std::string> LabelNames(Scheme scheme) {
  std::vector<std::string> out;
  for (Label l : Alphabet(scheme)) out.emplace_back(LabelName(l));
  return out;
}

std::vector<std::string> BsplitLabels() { return {"B_ASR", "B_MT"}; }

std::optional<std::vector<std::vector<double>>> MaybeConfidences(const fs::path& corpus_dir) {
  fs::path p = corpus_dir / "f_hyp.conf";
  if (!fs::exists(p)) return std::nullopt;
  return LoadConfidences(p);
}

std::optional<Mask> MaybeMask(const fs::path& labels_path) {
  fs::path p = labels_path;
  p += ".mask";
  if (!fs::exists(p)) return std::nullopt;
  return LoadMask(p);
}

// Loads a label file whose scheme is not known in advance.
std::vector<LabelSeq> LoadLabelsDetect(const fs::path& path) {
  try {
    return LoadLabels(path, Scheme::kTwoClass);
  } catch (const ParseError&) {
    return LoadLabels(path, Scheme::kThreeClass);
  }
}

// Resolves --labels: a file is used as is; a directory written by
// extract-labels selects the file matching the scheme, method and mode.
fs::path ResolveLabels(const fs::path& labels, Scheme scheme, const std::string& method,
                       FeatureMode mode) {
  if (!fs::is_directory(labels)) return labels;
  if (mode == FeatureMode::kAsrOnly) {
    if (scheme != Scheme::kTwoClass) throw Error("asr-only mode supports two_class only");
    return labels / "labels.asr";
  }
  if (scheme == Scheme::kTwoClass) return labels / "labels.2class";
  if (method == "m1") return labels / "labels.m1";
  if (method == "m2") return labels / "labels.m2";
  if (method == "intersection") return labels / "labels.intersect";
  throw Error("unknown method '" + method + "' (expected m1, m2 or intersection)");
}

FeatureConfig LoadFeatureConfig(const std::string& flag) {
  if (!flag.empty()) return FeatureConfig::Load(flag);
  if (const char* env = std::getenv(kConfigEnv); env && *env) return FeatureConfig::Load(env);
  return FeatureConfig::Default();
}

// Config text with the stopword list inlined as a sibling file so a model
// directory is self-contained.
std::string PortableConfigText(const FeatureConfig& config, bool* needs_stopwords) {
  std::istringstream in(config.text);
  std::string line, out;
  *needs_stopwords = false;
  while (std::getline(in, line)) {
    Tokens f = SplitTokens(line);
    if (!f.empty() && f[0] == "stopwords") {
      line = "stopwords stopwords.txt";
      *needs_stopwords = true;
    }
    out += line + "\n";
  }
  return out;
}

std::map<std::string, std::string> ReadManifest(const fs::path& path) {
  std::map<std::string, std::string> kv;
  for (const auto& line : ReadLines(path)) {
    auto sp = line.find(' ');
    if (sp == std::string::npos) continue;
    kv[line.substr(0, sp)] = line.substr(sp + 1);
  }
  return kv;
}

struct LoadedModel {
  fs::path dir;
  CrfModel crf;
  FeatureConfig config;
  FeatureModels models;
  FeatureMode mode = FeatureMode::kJoint;
};

LoadedModel LoadModelDir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("model directory " + dir.string() + " not found");
  LoadedModel m;
  m.dir = dir;
  auto manifest = ReadManifest(dir / "manifest.txt");
  if (!manifest.count("mode")) throw Error(dir.string() + "/manifest.txt: missing mode");
  m.mode = ParseFeatureMode(manifest["mode"]);
  m.crf = CrfModel::Load(dir / "model.crf");
  m.config = FeatureConfig::Load(dir / "features.cfg");
  m.models.source_lm = NgramLM::Load(dir / "source.arpa");
  m.models.target_lm = NgramLM::Load(dir / "target.arpa");
  m.models.lex = LexTable::Load(dir / "lex.tsv");
  return m;
}

std::vector<Instance> DecodeInstances(const LoadedModel& m, const Corpus& corpus,
                                      const fs::path& corpus_dir) {
  auto conf = MaybeConfidences(corpus_dir);
  InstanceInputs inputs;
  if (conf) inputs.confidence = &*conf;
  return BuildInstances(corpus, inputs, m.config, m.models, m.mode);
}

LabelSeq ToLabelSeq(const CrfModel& model, const std::vector<int>& path, Scheme scheme) {
  LabelSeq out{scheme, {}};
  for (int y : path) out.labels.push_back(LabelFromName(model.labels()[y]));
  return out;
}

Scheme SchemeOfModel(const CrfModel& model) {
  if (model.labels() == LabelNames(Scheme::kTwoClass)) return Scheme::kTwoClass;
  if (model.labels() == LabelNames(Scheme::kThreeClass)) return Scheme::kThreeClass;
  throw Error("model label set cannot be used for direct prediction");
}

// ---- subcommands ----

struct ExtractArgs {
  std::string corpus, out;
};

int CmdExtract(const ExtractArgs& a, std::ostream& out) {
  Corpus corpus = LoadCorpus(a.corpus);
  std::vector<LabelSeq> asr, mt, slt, m1, m2, inter;
  Mask inter_mask;
  for (const auto& q : corpus) {
    ExtractedLabels e = ExtractLabels(q);
    asr.push_back(std::move(e.asr));
    mt.push_back(std::move(e.mt));
    slt.push_back(std::move(e.slt));
    // Disagreements keep the first method's label on disk; the mask drops them.
    LabelSeq stored = e.method1;
    std::vector<bool> mask(stored.size(), true);
    for (std::size_t t = 0; t < stored.size(); ++t)
      if (e.intersect[t] == Label::kUnresolved) mask[t] = false;
    m1.push_back(std::move(e.method1));
    m2.push_back(std::move(e.method2));
    inter.push_back(std::move(stored));
    inter_mask.push_back(std::move(mask));
  }
  fs::path dir = a.out;
  fs::create_directories(dir);
  SaveLabels(dir / "labels.asr", asr);
  SaveLabels(dir / "labels.mt", mt);
  SaveLabels(dir / "labels.2class", slt);
  SaveLabels(dir / "labels.m1", m1);
  SaveLabels(dir / "labels.m2", m2);
  SaveLabels(dir / "labels.intersect", inter);
  SaveMask(dir / "labels.intersect.mask", inter_mask);
  std::string csv = ThreeClassStatsCsv(m1, m2);
  WriteFileAtomic(dir / "stats.csv", csv);
  out << "extracted labels for " << corpus.size() << " utterances into " << dir.string()
      << "\n" << csv;
  return 0;
}

struct TrainArgs {
  std::string corpus, labels, out, config, scheme = "two_class", method = "m1",
                                           mode = "joint", optimizer = "adaptive";
  double sigma2 = 1.0, tolerance = 1e-4;
  int max_epochs = 200;
  std::uint64_t seed = 0;
  bool bsplit = false, verbose = false;
};

int CmdTrain(const TrainArgs& a, std::ostream& out) {
  Scheme scheme = ParseScheme(a.scheme);
  FeatureMode mode = ParseFeatureMode(a.mode);
  if (a.bsplit && scheme != Scheme::kThreeClass)
    throw Error("--bsplit needs --scheme three_class");
  Corpus corpus = LoadCorpus(a.corpus);
  if (corpus.empty()) throw Error("corpus " + a.corpus + " is empty");
  fs::path label_path = ResolveLabels(a.labels, scheme, a.method, mode);
  std::vector<LabelSeq> labels = LoadLabels(label_path, scheme);
  std::optional<Mask> mask = MaybeMask(label_path);
  if (a.bsplit) {
    // The second stage only learns to tell error types apart.
    if (!mask) {
      mask.emplace();
      for (const auto& l : labels) mask->emplace_back(l.size(), true);
    }
    if (mask->size() != labels.size()) throw Error("mask and label files differ in length");
    for (std::size_t u = 0; u < labels.size(); ++u) {
      if ((*mask)[u].size() != labels[u].size())
        throw Error("mask line " + std::to_string(u + 1) + " length mismatch");
      for (std::size_t t = 0; t < labels[u].size(); ++t)
        if (labels[u][t] == Label::kGood) (*mask)[u][t] = false;
    }
  }

  FeatureConfig config = LoadFeatureConfig(a.config);
  FeatureModels models = TrainFeatureModels(corpus, config);
  auto conf = MaybeConfidences(a.corpus);
  InstanceInputs inputs;
  inputs.labels = &labels;
  if (mask) inputs.mask = &*mask;
  if (conf) inputs.confidence = &*conf;
  std::vector<Instance> instances = BuildInstances(corpus, inputs, config, models, mode);
  std::vector<std::string> templates = UsableTemplates(config, instances.front().attrs.names);

  TrainConfig tc;
  tc.sigma2 = a.sigma2;
  tc.tolerance = a.tolerance;
  tc.max_epochs = a.max_epochs;
  tc.step_rule = ParseStepRule(a.optimizer);
  tc.seed = a.seed;
  tc.verbose = a.verbose;
  std::vector<std::string> label_set = a.bsplit ? BsplitLabels() : LabelNames(scheme);
  TrainReport report;
  CrfModel crf = TrainCrf(instances, templates, label_set, tc, &report);

  fs::path dir = a.out;
  fs::create_directories(dir);
  crf.Save(dir / "model.crf");
  models.source_lm.Save(dir / "source.arpa");
  models.target_lm.Save(dir / "target.arpa");
  models.lex.Save(dir / "lex.tsv");
  bool needs_stopwords = false;
  std::string cfg_text = PortableConfigText(config, &needs_stopwords);
  WriteFileAtomic(dir / "features.cfg", cfg_text);
  if (needs_stopwords) {
    std::string words;
    for (const auto& w : config.stopwords) words += w + "\n";
    WriteFileAtomic(dir / "stopwords.txt", words);
  }
  std::ostringstream m;
  m << "format slterr-run 1\n"
    << "mode " << FeatureModeName(mode) << "\n"
    << "scheme " << SchemeName(scheme) << "\n"
    << "labels " << JoinTokens(label_set) << "\n"
    << "bsplit " << (a.bsplit ? 1 : 0) << "\n"
    << "label_file " << label_path.filename().string() << "\n"
    << "feature_config_fnv1a64 " << Hex(Fnv1a64(cfg_text)) << "\n"
    << "templates " << templates.size() << "\n"
    << "features " << crf.num_features() << "\n"
    << "sigma2 " << FormatExact(tc.sigma2) << "\n"
    << "max_epochs " << tc.max_epochs << "\n"
    << "tolerance " << FormatExact(tc.tolerance) << "\n"
    << "optimizer " << StepRuleName(tc.step_rule) << "\n"
    << "seed " << tc.seed << "\n"
    << "evaluations " << report.evaluations << "\n"
    << "objective " << FormatExact(report.objective) << "\n"
    << "gradient_inf_norm " << FormatExact(report.gradient_inf_norm) << "\n"
    << "converged " << (report.converged ? 1 : 0) << "\n";
  WriteFileAtomic(dir / "manifest.txt", m.str());
  out << "trained " << crf.num_features() << " weights on " << instances.size()
      << " utterances (" << report.evaluations << " evaluations, objective "
      << FormatFixed(report.objective, 4) << (report.converged ? ", converged" : "")
      << ") -> " << dir.string() << "\n";
  return 0;
}

struct PredictArgs {
  std::string corpus, model, bsplit, out;
};

int CmdPredict(const PredictArgs& a, std::ostream& out) {
  Corpus corpus = LoadCorpus(a.corpus);
  LoadedModel m = LoadModelDir(a.model);
  std::vector<Instance> instances = DecodeInstances(m, corpus, a.corpus);
  std::vector<LabelSeq> labels;
  PosteriorTable post;
  if (a.bsplit.empty()) {
    Scheme scheme = SchemeOfModel(m.crf);
    post.labels = m.crf.labels();
    for (const auto& inst : instances) {
      Lattice lat = m.crf.Compile(inst);
      labels.push_back(ToLabelSeq(m.crf, Viterbi(m.crf, lat).labels, scheme));
      post.values.push_back(Marginals(m.crf, lat));
    }
  } else {
    LoadedModel b = LoadModelDir(a.bsplit);
    if (SchemeOfModel(m.crf) != Scheme::kTwoClass)
      throw Error("two-step prediction needs a two_class first-stage model");
    if (b.mode != m.mode) throw Error("two-step models were trained in different modes");
    std::vector<Instance> b_instances = DecodeInstances(b, corpus, a.corpus);
    int g = m.crf.LabelIndex("G"), bad = m.crf.LabelIndex("B");
    int ba = b.crf.LabelIndex("B_ASR"), bm = b.crf.LabelIndex("B_MT");
    post.labels = LabelNames(Scheme::kThreeClass);
    for (std::size_t u = 0; u < instances.size(); ++u) {
      labels.push_back(TwoStepClassify(m.crf, instances[u], b.crf, b_instances[u]));
      // P(B_x) = P(B) * P(B_x | B) from the second stage.
      auto p1 = Marginals(m.crf, m.crf.Compile(instances[u]));
      auto p2 = Marginals(b.crf, b.crf.Compile(b_instances[u]));
      std::vector<std::vector<double>> rows;
      for (std::size_t t = 0; t < p1.size(); ++t) {
        double pb = p1[t][bad];
        double z = p2[t][ba] + p2[t][bm];
        rows.push_back({p1[t][g], pb * p2[t][ba] / z, pb * p2[t][bm] / z});
      }
      post.values.push_back(std::move(rows));
    }
  }
  fs::path dir = a.out;
  fs::create_directories(dir);
  SaveLabels(dir / "pred.labels", labels);
  WriteFileAtomic(dir / "posteriors.csv", SerializePosteriors(post));
  out << "predicted " << labels.size() << " utterances -> " << dir.string() << "\n";
  return 0;
}

struct CombineArgs {
  std::string corpus, asr, mt, lex, out, projection = "min";
  double alpha = 0.5, threshold = 0.5;
};

std::vector<GoodBad> ToGoodBad(const std::vector<std::vector<double>>& rows,
                               const PosteriorTable& table, const std::string& what) {
  auto gi = std::find(table.labels.begin(), table.labels.end(), "G") - table.labels.begin();
  auto bi = std::find(table.labels.begin(), table.labels.end(), "B") - table.labels.begin();
  if (static_cast<std::size_t>(gi) == table.labels.size() ||
      static_cast<std::size_t>(bi) == table.labels.size())
    throw Error(what + " posteriors must have G and B columns");
  std::vector<GoodBad> out;
  for (const auto& r : rows) out.push_back({r[gi], r[bi]});
  return out;
}

int CmdCombine(const CombineArgs& a, std::ostream& out) {
  Corpus corpus = LoadCorpus(a.corpus);
  PosteriorTable asr = LoadPosteriors(a.asr, corpus.size());
  PosteriorTable mt = LoadPosteriors(a.mt, corpus.size());
  Projection projection = ParseProjection(a.projection);
  std::optional<LexTable> lex;
  if (!a.lex.empty()) lex = LexTable::Load(a.lex);
  PosteriorTable combined;
  combined.labels = {"G", "B"};
  std::vector<LabelSeq> labels;
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    const Quintuplet& q = corpus[u];
    if (asr.values[u].size() != q.f_hyp.size())
      throw Error("utterance " + q.utt_id + ": ASR posteriors cover " +
                  std::to_string(asr.values[u].size()) + " tokens, f_hyp has " +
                  std::to_string(q.f_hyp.size()));
    if (mt.values[u].size() != q.e_slt.size())
      throw Error("utterance " + q.utt_id + ": MT posteriors cover " +
                  std::to_string(mt.values[u].size()) + " tokens, e_slt has " +
                  std::to_string(q.e_slt.size()));
    AlignmentPairs pairs;
    if (lex) {
      pairs = Ibm1Align(*lex, q.f_hyp, q.e_slt);
    } else {
      pairs = ExtractAlignmentPairs(EditAlign(q.f_hyp, q.e_slt));
    }
    auto p = CombinePosteriors(ToGoodBad(asr.values[u], asr, "ASR"),
                               ToGoodBad(mt.values[u], mt, "MT"), pairs, a.alpha, projection);
    std::vector<std::vector<double>> rows;
    std::vector<double> good;
    for (const auto& gb : p) {
      rows.push_back({gb[0], gb[1]});
      good.push_back(gb[0]);
    }
    combined.values.push_back(std::move(rows));
    labels.push_back(ThresholdDecide(good, a.threshold));
  }
  fs::path dir = a.out;
  fs::create_directories(dir);
  WriteFileAtomic(dir / "combined.csv", SerializePosteriors(combined));
  SaveLabels(dir / "combined.labels", labels);
  out << "combined " << corpus.size() << " utterances (alpha " << FormatFixed(a.alpha, 2)
      << ", threshold " << FormatFixed(a.threshold, 2) << ") -> " << dir.string() << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string pred, labels, posteriors, out, scheme;
  double grid_step = 0.01;
};

int CmdEvaluate(const EvaluateArgs& a, std::ostream& out) {
  std::vector<LabelSeq> ref, pred;
  Scheme scheme;
  if (a.scheme.empty()) {
    ref = LoadLabelsDetect(a.labels);
    scheme = ref.empty() ? Scheme::kTwoClass : ref.front().scheme;
  } else {
    scheme = ParseScheme(a.scheme);
    ref = LoadLabels(a.labels, scheme);
  }
  try {
    pred = LoadLabels(a.pred, scheme);
  } catch (const ParseError& e) {
    throw Error(std::string("scheme mismatch between prediction and reference: ") + e.what());
  }
  std::optional<Mask> mask = MaybeMask(a.labels);
  const Mask* mp = mask ? &*mask : nullptr;
  PrfReport prf = Prf(pred, ref, scheme, mp);

  std::vector<std::vector<double>> p_good;
  if (!a.posteriors.empty()) {
    p_good = LoadPosteriors(a.posteriors, ref.size()).Column("G");
  } else {
    for (const auto& p : pred) {
      std::vector<double> row;
      for (Label l : p.labels) row.push_back(l == Label::kGood ? 1.0 : 0.0);
      p_good.push_back(std::move(row));
    }
  }
  auto sweep = Sweep(p_good, ref, ThresholdGrid(a.grid_step), mp);

  fs::path dir = a.out;
  fs::create_directories(dir);
  WriteFileAtomic(dir / "prf.csv", PrfCsv(prf));
  WriteFileAtomic(dir / "sweep.csv", SweepCsv(sweep));
  out << "F-avg " << FormatFixed(100.0 * prf.f_avg, 2) << " over " << prf.tokens << " tokens\n";
  for (const auto& s : prf.labels)
    out << "  " << LabelName(s.label) << "  P " << FormatFixed(100 * s.precision, 2) << "  R "
        << FormatFixed(100 * s.recall, 2) << "  F " << FormatFixed(100 * s.f1, 2) << "\n";
  if (scheme == Scheme::kThreeClass) {
    ConfusionMatrix cm = ConfusionOnTrueErrors(pred, ref, mp);
    WriteFileAtomic(dir / "confusion.csv", ConfusionCsv(cm));
    WriteFileAtomic(dir / "confusion.txt", ConfusionTable(cm));
    WriteFileAtomic(dir / "scatter.csv", ScatterCsv(ScatterErrors(ref)));
    out << ConfusionTable(cm);
  }
  return 0;
}

struct StatsArgs {
  std::string corpus;
  std::vector<std::string> labels;
};

int CmdStats(const StatsArgs& a, std::ostream& out) {
  Corpus corpus = LoadCorpus(a.corpus);
  out << "utterances " << corpus.size() << "\n";
  for (Side side : kAllSides) {
    std::size_t n = 0;
    for (const auto& q : corpus) n += SideTokens(q, side).size();
    out << "tokens " << SideFileName(side) << " " << n << "\n";
  }
  std::vector<Tokens> hyp, ref;
  for (const auto& q : corpus) {
    hyp.push_back(q.f_hyp);
    ref.push_back(q.f_ref);
  }
  std::size_t ref_tokens = 0;
  for (const auto& r : ref) ref_tokens += r.size();
  if (ref_tokens > 0) {
    out << "WER " << FormatFixed(Wer(hyp, ref), 2) << "\n";
  } else {
    out << "WER n/a (empty reference)\n";
  }
  for (const auto& path : a.labels) {
    auto labels = LoadLabelsDetect(path);
    LabelStats s = ComputeLabelStats(labels);
    out << fs::path(path).filename().string() << " tokens " << s.total << " %G "
        << FormatFixed(s.pct_good(), 2);
    if (labels.front().scheme == Scheme::kTwoClass) {
      out << " %B " << FormatFixed(s.pct_bad(), 2) << "\n";
    } else {
      out << " %B_ASR " << FormatFixed(s.pct_bad_asr(), 2) << " %B_MT "
          << FormatFixed(s.pct_bad_mt(), 2) << "\n";
    }
  }
  return 0;
}

struct SynthArgs {
  std::string out;
  SynthConfig config;
};

int CmdSynth(const SynthArgs& a, std::ostream& out) {
  SynthCorpus s = Synthesize(a.config);
  SaveSynthCorpus(a.out, s);
  out << "wrote " << s.corpus.size() << " synthetic utterances to " << a.out << "\n";
  return 0;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-level error detection and attribution for speech translation", "slterr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  ExtractArgs ex;
  auto* c_ex = app.add_subcommand("extract-labels", "Infer 2-class and 3-class labels");
  c_ex->add_option("--corpus", ex.corpus, "Corpus directory")->required();
  c_ex->add_option("--out", ex.out, "Output directory")->required();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train a CRF error detector");
  c_tr->add_option("--corpus", tr.corpus, "Corpus directory")->required();
  c_tr->add_option("--labels", tr.labels, "Label file, or an extract-labels directory")
      ->required();
  c_tr->add_option("--out", tr.out, "Model directory")->required();
  c_tr->add_option("--scheme", tr.scheme, "two_class | three_class")->capture_default_str();
  c_tr->add_option("--method", tr.method, "m1 | m2 | intersection (label directory only)")
      ->capture_default_str();
  c_tr->add_option("--mode", tr.mode, "joint | mt-only | asr-only")->capture_default_str();
  c_tr->add_option("--config", tr.config, "Feature config (default: $SLTERR_CONFIG or built-in)");
  c_tr->add_option("--sigma2", tr.sigma2, "L2 prior variance")->capture_default_str();
  c_tr->add_option("--max-epochs", tr.max_epochs, "Objective evaluations")->capture_default_str();
  c_tr->add_option("--tolerance", tr.tolerance, "Gradient inf-norm stop")->capture_default_str();
  c_tr->add_option("--optimizer", tr.optimizer, "adaptive | lbfgs")->capture_default_str();
  c_tr->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
  c_tr->add_flag("--bsplit", tr.bsplit, "Train the B_ASR/B_MT second stage");
  c_tr->add_flag("--verbose", tr.verbose, "Log optimizer progress");

  PredictArgs pr;
  auto* c_pr = app.add_subcommand("predict", "Label a corpus with a trained model");
  c_pr->add_option("--corpus", pr.corpus, "Corpus directory")->required();
  c_pr->add_option("--model", pr.model, "Model directory")->required();
  c_pr->add_option("--bsplit", pr.bsplit, "Second-stage model directory (two-step)");
  c_pr->add_option("--out", pr.out, "Output directory")->required();

  CombineArgs co;
  auto* c_co = app.add_subcommand("combine", "Combine ASR and MT posteriors");
  c_co->add_option("--corpus", co.corpus, "Corpus directory")->required();
  c_co->add_option("--asr", co.asr, "Source-side posteriors (f_hyp)")->required();
  c_co->add_option("--mt", co.mt, "Target-side posteriors (e_slt)")->required();
  c_co->add_option("--lex", co.lex, "Lexical table for f_hyp/e_slt links (default: edit)");
  c_co->add_option("--projection", co.projection, "min | mean | max")->capture_default_str();
  c_co->add_option("--alpha", co.alpha, "ASR weight")->capture_default_str();
  c_co->add_option("--threshold", co.threshold, "G iff P(G) >= threshold")
      ->capture_default_str();
  c_co->add_option("--out", co.out, "Output directory")->required();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score predictions against reference labels");
  c_ev->add_option("--pred", ev.pred, "Predicted labels")->required();
  c_ev->add_option("--labels", ev.labels, "Reference labels")->required();
  c_ev->add_option("--posteriors", ev.posteriors, "Posterior CSV for the threshold sweep");
  c_ev->add_option("--scheme", ev.scheme, "two_class | three_class (default: detect)");
  c_ev->add_option("--grid-step", ev.grid_step, "Sweep step")->capture_default_str();
  c_ev->add_option("--out", ev.out, "Output directory")->required();

  StatsArgs st;
  auto* c_st = app.add_subcommand("stats", "Corpus WER and label distributions");
  c_st->add_option("--corpus", st.corpus, "Corpus directory")->required();
  c_st->add_option("--labels", st.labels, "Label files");

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Generate a synthetic corpus");
  c_sy->add_option("--out", sy.out, "Corpus directory")->required();
  c_sy->add_option("--seed", sy.config.seed, "Random seed")->capture_default_str();
  c_sy->add_option("--utterances", sy.config.utterances, "Utterances")->capture_default_str();
  c_sy->add_option("--vocab", sy.config.vocabulary, "Source vocabulary")->capture_default_str();
  c_sy->add_option("--asr-sub", sy.config.asr_substitution_rate, "ASR substitution rate")
      ->capture_default_str();
  c_sy->add_option("--asr-ins", sy.config.asr_insertion_rate, "ASR insertion rate")
      ->capture_default_str();
  c_sy->add_option("--mt-error", sy.config.mt_error_rate, "Mistranslation rate of hard words")
      ->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*c_ex) return CmdExtract(ex, out);
    if (*c_tr) return CmdTrain(tr, out);
    if (*c_pr) return CmdPredict(pr, out);
    if (*c_co) return CmdCombine(co, out);
    if (*c_ev) return CmdEvaluate(ev, out);
    if (*c_st) return CmdStats(st, out);
    if (*c_sy) return CmdSynth(sy, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int Main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return Run(args, std::cout, std::cerr);
}

}  // namespace slterr::cli
