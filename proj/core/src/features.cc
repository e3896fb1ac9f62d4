#include "slterr/features.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "slterr/error.h"
#include "slterr/template.h"

namespace fs = std::filesystem;

namespace slterr {

Template ParseTemplate(std::string_view spec) {
  Template t;
  t.text = std::string(spec);
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t slash = spec.find('/', start);
    std::string_view part = spec.substr(
        start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    auto open = part.find('[');
    if (open == std::string_view::npos || open == 0 || part.back() != ']')
      throw Error("malformed template '" + t.text + "' (expected name[offset])");
    Template::Item item;
    item.attr = std::string(part.substr(0, open));
    std::string off(part.substr(open + 1, part.size() - open - 2));
    try {
      std::size_t used = 0;
      item.offset = std::stoi(off, &used);
      if (used != off.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error("malformed offset in template '" + t.text + "'");
    }
    if (item.offset < -kMaxTemplateOffset || item.offset > kMaxTemplateOffset)
      throw Error("template offset out of [-2, 2] in '" + t.text + "'");
    t.items.push_back(std::move(item));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return t;
}

int AttrSeq::Find(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

const std::string& AttrSeq::Get(std::size_t token, std::string_view name) const {
  int idx = Find(name);
  if (idx < 0) throw Error("no attribute named '" + std::string(name) + "'");
  return values.at(token)[static_cast<std::size_t>(idx)];
}

void AttrSeq::AddColumn(std::string name, std::vector<std::string> column) {
  if (!names.empty() && column.size() != values.size())
    throw Error("attribute column '" + name + "' has wrong length");
  if (values.empty()) values.resize(column.size());
  for (std::size_t t = 0; t < column.size(); ++t)
    values[t].push_back(std::move(column[t]));
  names.push_back(std::move(name));
}

AttrSeq UnionAttrs(const AttrSeq& a, const AttrSeq& b) {
  if (a.names.empty()) return b;
  if (b.names.empty()) return a;
  if (a.size() != b.size()) throw Error("cannot join attribute sequences of different length");
  AttrSeq out = a;
  for (std::size_t t = 0; t < out.size(); ++t)
    out.values[t].insert(out.values[t].end(), b.values[t].begin(), b.values[t].end());
  out.names.insert(out.names.end(), b.names.begin(), b.names.end());
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

constexpr const char* kDefaultConfig = R"(# target side (speech translation output)
attr mt.surface
attr mt.lower
attr mt.punct
attr mt.numeric
attr mt.stopword
attr mt.length
attr mt.relpos 10
attr mt.lm 10
attr mt.lm_backoff
attr mt.lex 10
attr mt.aligned_src
# source side (ASR output), projected onto the target in joint mode
attr asr.lm 10
attr asr.lm_backoff
attr asr.length
attr asr.numeric
attr asr.punct
attr asr.relpos 10
attr asr.conf 10
template mt.surface[0]
template mt.surface[-1]
template mt.surface[1]
template mt.lower[-1]/mt.lower[0]
template mt.lower[0]/mt.lower[1]
template mt.punct[0]
template mt.numeric[0]
template mt.stopword[0]
template mt.length[0]
template mt.relpos[0]
template mt.lm[0]
template mt.lm[-1]/mt.lm[0]
template mt.lm_backoff[0]
template mt.lex[0]
template mt.aligned_src[0]
template asr.lm[0]
template asr.lm_backoff[0]
template asr.length[0]
template asr.numeric[0]
template asr.punct[0]
template asr.relpos[0]
template asr.conf[0]
template asr.conf[-1]/asr.conf[0]
lm_order 3
ibm1_iterations 5
aligner ibm1
)";

constexpr const char* kEnglishStopwords =
    "a about above after again against all am an and any are as at be because "
    "been before being below between both but by can could did do does doing "
    "down during each few for from further had has have having he her here "
    "hers herself him himself his how i if in into is it its itself just me "
    "more most my myself no nor not now of off on once only or other our ours "
    "ourselves out over own same she should so some such than that the their "
    "theirs them themselves then there these they this those through to too "
    "under until up very was we were what when where which while who whom why "
    "will with would you your yours yourself yourselves";

const char* const kKnownAttrs[] = {
    "mt.surface", "mt.lower",  "mt.punct",    "mt.numeric",  "mt.stopword",
    "mt.length",  "mt.relpos", "mt.lm",       "mt.lm_backoff", "mt.lex",
    "mt.aligned_src", "asr.lm", "asr.lm_backoff", "asr.length", "asr.numeric",
    "asr.punct",  "asr.relpos", "asr.conf"};

bool KnownAttr(std::string_view name) {
  for (const char* a : kKnownAttrs)
    if (name == a) return true;
  return false;
}

}  // namespace

std::set<std::string> DefaultEnglishStopwords() {
  auto words = SplitTokens(kEnglishStopwords);
  return {words.begin(), words.end()};
}

FeatureConfig FeatureConfig::Default() { return Parse(kDefaultConfig); }

FeatureConfig FeatureConfig::Parse(const std::string& text,
                                   const fs::path& base_dir) {
  FeatureConfig cfg;
  cfg.text = text;
  cfg.stopwords = DefaultEnglishStopwords();
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError("feature config line " + std::to_string(lineno) + ": " + msg,
                     "<config>", lineno);
  };
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail("expected an integer, got '" + s + "'");
    return 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto f = SplitTokens(line);
    if (f.empty()) continue;
    const std::string& kw = f[0];
    if (kw == "attr") {
      if (f.size() < 2 || f.size() > 3) fail("expected 'attr <name> [bins]'");
      if (!KnownAttr(f[1])) fail("unknown attribute '" + f[1] + "'");
      AttrSpec spec{f[1], f.size() == 3 ? to_int(f[2]) : 0};
      if (f.size() == 3 && spec.bins < 1) fail("bins must be >= 1");
      cfg.attrs.push_back(spec);
    } else if (kw == "template") {
      if (f.size() != 2) fail("expected 'template <spec>'");
      try {
        ParseTemplate(f[1]);
      } catch (const Error& e) {
        fail(e.what());
      }
      cfg.templates.push_back(f[1]);
    } else if (kw == "stopwords") {
      if (f.size() != 2) fail("expected 'stopwords <path>'");
      fs::path p = fs::path(f[1]).is_absolute() ? fs::path(f[1]) : base_dir / f[1];
      cfg.stopwords.clear();
      for (const auto& l : ReadLines(p))
        for (const auto& w : SplitTokens(l)) cfg.stopwords.insert(AsciiLower(w));
    } else if (kw == "lm_order") {
      if (f.size() != 2) fail("expected 'lm_order <n>'");
      cfg.lm_order = to_int(f[1]);
      if (cfg.lm_order < 1 || cfg.lm_order > 5) fail("lm_order must be in 1..5");
    } else if (kw == "ibm1_iterations") {
      if (f.size() != 2) fail("expected 'ibm1_iterations <n>'");
      cfg.ibm1_iterations = to_int(f[1]);
      if (cfg.ibm1_iterations < 1) fail("ibm1_iterations must be >= 1");
    } else if (kw == "aligner") {
      if (f.size() != 2 || (f[1] != "ibm1" && f[1] != "edit"))
        fail("expected 'aligner ibm1|edit'");
      cfg.aligner = f[1];
    } else {
      fail("unknown directive '" + kw + "'");
    }
  }
  return cfg;
}

FeatureConfig FeatureConfig::Load(const fs::path& path) {
  return Parse(ReadFile(path), path.parent_path());
}

bool FeatureConfig::Enabled(std::string_view name) const {
  return std::any_of(attrs.begin(), attrs.end(),
                     [&](const AttrSpec& a) { return a.name == name; });
}

int FeatureConfig::Bins(std::string_view name) const {
  for (const auto& a : attrs)
    if (a.name == name) return a.bins > 0 ? a.bins : 10;
  return 10;
}

FeatureMode ParseFeatureMode(std::string_view name) {
  if (name == "joint") return FeatureMode::kJoint;
  if (name == "mt-only") return FeatureMode::kMtOnly;
  if (name == "asr-only") return FeatureMode::kAsrOnly;
  throw Error("unknown mode '" + std::string(name) +
              "' (expected joint, mt-only or asr-only)");
}

std::string_view FeatureModeName(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kJoint: return "joint";
    case FeatureMode::kMtOnly: return "mt-only";
    case FeatureMode::kAsrOnly: return "asr-only";
  }
  return "";
}

FeatureModels TrainFeatureModels(const Corpus& corpus, const FeatureConfig& config) {
  std::vector<Tokens> src, tgt;
  std::vector<SentencePair> pairs;
  for (const auto& q : corpus) {
    src.push_back(q.f_ref);
    tgt.push_back(q.e_ref);
    pairs.emplace_back(q.f_hyp, q.e_slt);
    pairs.emplace_back(q.f_ref, q.e_mt);
  }
  FeatureModels models;
  models.source_lm = TrainNgramLM(src, config.lm_order);
  models.target_lm = TrainNgramLM(tgt, config.lm_order);
  models.lex = TrainIbm1(pairs, config.ibm1_iterations);
  return models;
}

// ---------------------------------------------------------------------------
// Token-level helpers

int BucketUnit(double x, int bins) {
  if (x <= 0.0) return 0;
  int b = static_cast<int>(std::floor(x * bins));
  return std::min(b, bins - 1);
}

int BucketLogProb(double log10p, int bins) {
  double clipped = std::clamp(log10p, -8.0, 0.0);
  return BucketUnit((clipped + 8.0) / 8.0, bins);
}

int RelativePositionBin(std::size_t index, std::size_t length, int bins) {
  if (length == 0) return 0;
  return static_cast<int>((index * static_cast<std::size_t>(bins)) / length);
}

bool IsPunctuation(std::string_view token) {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  });
}

bool IsNumeric(std::string_view token) {
  bool digit = false;
  char prev = 0;
  for (std::size_t i = 0; i < token.size(); ++i) {
    char c = token[i];
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if ((c == '.' || c == ',') && i > 0 && i + 1 < token.size() &&
               prev >= '0' && prev <= '9') {
    } else {
      return false;
    }
    prev = c;
  }
  return digit;
}

std::string AsciiLower(std::string_view token) {
  std::string out(token);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::size_t Utf8Length(std::string_view token) {
  std::size_t n = 0;
  for (unsigned char c : token)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

namespace {

std::string Flag(bool b) { return b ? "1" : "0"; }

std::string LengthValue(std::string_view token) {
  return std::to_string(std::min<std::size_t>(Utf8Length(token), 10));
}

}  // namespace

AttrSeq ExtractMtFeatures(const Quintuplet& q, const NgramLM& target_lm,
                          const LexTable& lex, const FeatureConfig& config) {
  const Tokens& e = q.e_slt;
  const std::size_t n = e.size();
  AttrSeq out;
  out.values.resize(n);
  auto column = [&](const char* name, auto&& fn) {
    if (!config.Enabled(name)) return;
    std::vector<std::string> col(n);
    for (std::size_t j = 0; j < n; ++j) col[j] = fn(j);
    out.AddColumn(name, std::move(col));
  };
  const bool need_lm = config.Enabled("mt.lm") || config.Enabled("mt.lm_backoff");
  if (need_lm && target_lm.empty()) throw Error("mt features: target language model absent");
  const bool need_lex = config.Enabled("mt.lex") || config.Enabled("mt.aligned_src");
  if (need_lex && lex.empty()) throw Error("mt features: lexical table absent");

  std::vector<TokenScore> lm;
  if (need_lm) lm = target_lm.ScoreSentence(e);
  AlignmentPairs links;
  if (config.Enabled("mt.aligned_src")) links = Ibm1Align(lex, q.f_hyp, e);
  std::vector<std::string> aligned(n, std::string(kNullWord));
  for (auto [i, j] : links) aligned[j] = q.f_hyp[i];

  column("mt.surface", [&](std::size_t j) { return e[j]; });
  column("mt.lower", [&](std::size_t j) { return AsciiLower(e[j]); });
  column("mt.punct", [&](std::size_t j) { return Flag(IsPunctuation(e[j])); });
  column("mt.numeric", [&](std::size_t j) { return Flag(IsNumeric(e[j])); });
  column("mt.stopword",
         [&](std::size_t j) { return Flag(config.stopwords.count(AsciiLower(e[j])) > 0); });
  column("mt.length", [&](std::size_t j) { return LengthValue(e[j]); });
  column("mt.relpos", [&](std::size_t j) {
    return std::to_string(RelativePositionBin(j, n, config.Bins("mt.relpos")));
  });
  column("mt.lm", [&](std::size_t j) {
    return std::to_string(BucketLogProb(lm[j].logprob, config.Bins("mt.lm")));
  });
  column("mt.lm_backoff", [&](std::size_t j) { return std::to_string(lm[j].level); });
  column("mt.lex", [&](std::size_t j) {
    double best = 0.0;
    for (const auto& f : q.f_hyp) best = std::max(best, lex.Prob(f, e[j]));
    double lp = best > 0.0 ? std::log10(best) : -8.0;
    return std::to_string(BucketLogProb(lp, config.Bins("mt.lex")));
  });
  column("mt.aligned_src", [&](std::size_t j) { return aligned[j]; });
  if (need_lm)
    for (const auto& s : lm) out.lm_logprob.push_back(s.logprob);
  return out;
}

AttrSeq ExtractAsrFeatures(const Tokens& f, const NgramLM& source_lm,
                           const std::vector<double>* confidence,
                           const FeatureConfig& config) {
  const std::size_t n = f.size();
  if (confidence) {
    if (confidence->size() != n)
      throw Error("asr features: " + std::to_string(confidence->size()) +
                  " confidences for " + std::to_string(n) + " tokens");
    for (double c : *confidence)
      if (!(c >= 0.0 && c <= 1.0))
        throw Error("asr features: confidence " + std::to_string(c) + " outside [0,1]");
  }
  AttrSeq out;
  out.values.resize(n);
  auto column = [&](const char* name, auto&& fn) {
    if (!config.Enabled(name)) return;
    std::vector<std::string> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = fn(i);
    out.AddColumn(name, std::move(col));
  };
  const bool need_lm = config.Enabled("asr.lm") || config.Enabled("asr.lm_backoff");
  if (need_lm && source_lm.empty()) throw Error("asr features: source language model absent");
  std::vector<TokenScore> lm;
  if (need_lm) lm = source_lm.ScoreSentence(f);

  column("asr.lm", [&](std::size_t i) {
    return std::to_string(BucketLogProb(lm[i].logprob, config.Bins("asr.lm")));
  });
  column("asr.lm_backoff", [&](std::size_t i) { return std::to_string(lm[i].level); });
  column("asr.length", [&](std::size_t i) { return LengthValue(f[i]); });
  column("asr.numeric", [&](std::size_t i) { return Flag(IsNumeric(f[i])); });
  column("asr.punct", [&](std::size_t i) { return Flag(IsPunctuation(f[i])); });
  column("asr.relpos", [&](std::size_t i) {
    return std::to_string(RelativePositionBin(i, n, config.Bins("asr.relpos")));
  });
  if (confidence)
    column("asr.conf", [&](std::size_t i) {
      return std::to_string(BucketUnit((*confidence)[i], config.Bins("asr.conf")));
    });
  if (need_lm)
    for (const auto& s : lm) out.lm_logprob.push_back(s.logprob);
  return out;
}

AttrSeq ProjectSourceAttrs(const AttrSeq& source, const AlignmentPairs& pairs,
                           std::size_t target_len) {
  std::vector<long> chosen(target_len, -1);
  for (auto [i, j] : pairs) {
    if (i >= source.size() || j >= target_len)
      throw Error("projection: pair (" + std::to_string(i) + "," + std::to_string(j) +
                  ") out of range");
    long& c = chosen[j];
    if (c < 0) {
      c = static_cast<long>(i);
    } else if (!source.lm_logprob.empty()) {
      double cur = source.lm_logprob[static_cast<std::size_t>(c)];
      double cand = source.lm_logprob[i];
      if (cand < cur || (cand == cur && static_cast<long>(i) < c)) c = static_cast<long>(i);
    } else if (static_cast<long>(i) < c) {
      c = static_cast<long>(i);
    }
  }
  AttrSeq out;
  out.names = source.names;
  out.values.resize(target_len);
  for (std::size_t j = 0; j < target_len; ++j) {
    if (chosen[j] < 0)
      out.values[j].assign(source.names.size(), std::string(kNoSource));
    else
      out.values[j] = source.values[static_cast<std::size_t>(chosen[j])];
  }
  return out;
}

AlignmentPairs SourceTargetLinks(const Quintuplet& q, const FeatureModels& models,
                                 const FeatureConfig& config) {
  if (config.aligner == "edit") return ExtractAlignmentPairs(EditAlign(q.f_hyp, q.e_slt));
  return Ibm1Align(models.lex, q.f_hyp, q.e_slt);
}

std::vector<Instance> BuildInstances(const Corpus& corpus,
                                     const InstanceInputs& inputs,
                                     const FeatureConfig& config,
                                     const FeatureModels& models,
                                     FeatureMode mode) {
  if (inputs.labels && inputs.labels->size() != corpus.size())
    throw Error("instances: " + std::to_string(inputs.labels->size()) +
                " label lines for " + std::to_string(corpus.size()) + " utterances");
  if (inputs.mask && inputs.mask->size() != corpus.size())
    throw Error("instances: mask line count differs from corpus size");
  if (inputs.confidence && inputs.confidence->size() != corpus.size())
    throw Error("instances: confidence line count differs from corpus size");

  std::vector<Instance> out;
  out.reserve(corpus.size());
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    const Quintuplet& q = corpus[u];
    const std::vector<double>* conf =
        inputs.confidence ? &(*inputs.confidence)[u] : nullptr;
    Instance inst;
    if (mode == FeatureMode::kAsrOnly) {
      inst.attrs = ExtractAsrFeatures(q.f_hyp, models.source_lm, conf, config);
    } else {
      inst.attrs = ExtractMtFeatures(q, models.target_lm, models.lex, config);
      if (mode == FeatureMode::kJoint) {
        AttrSeq src = ExtractAsrFeatures(q.f_hyp, models.source_lm, conf, config);
        AttrSeq projected =
            ProjectSourceAttrs(src, SourceTargetLinks(q, models, config), q.e_slt.size());
        inst.attrs = UnionAttrs(inst.attrs, projected);
      }
    }
    const std::size_t n = mode == FeatureMode::kAsrOnly ? q.f_hyp.size() : q.e_slt.size();
    if (inst.attrs.names.empty()) inst.attrs.values.resize(n);
    inst.mask.assign(n, true);
    if (inputs.labels) {
      const LabelSeq& labels = (*inputs.labels)[u];
      if (labels.size() != n)
        throw Error("instances: utterance " + q.utt_id + " has " + std::to_string(n) +
                    " tokens but " + std::to_string(labels.size()) + " labels");
      for (std::size_t t = 0; t < n; ++t)
        if (labels[t] == Label::kUnresolved) inst.mask[t] = false;
      inst.labels = labels;
    }
    if (inputs.mask) {
      const auto& m = (*inputs.mask)[u];
      if (m.size() != n)
        throw Error("instances: utterance " + q.utt_id + " mask length mismatch");
      for (std::size_t t = 0; t < n; ++t) inst.mask[t] = inst.mask[t] && m[t];
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<std::string> UsableTemplates(const FeatureConfig& config,
                                         const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& spec : config.templates) {
    Template t = ParseTemplate(spec);
    bool ok = std::all_of(t.items.begin(), t.items.end(), [&](const Template::Item& it) {
      return std::find(names.begin(), names.end(), it.attr) != names.end();
    });
    if (ok) out.push_back(spec);
  }
  return out;
}

std::string SerializeInstances(const std::vector<Instance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    for (std::size_t t = 0; t < inst.size(); ++t) {
      const auto& row = inst.attrs.values[t];
      for (std::size_t a = 0; a < row.size(); ++a) {
        if (a) out += '\t';
        out += row[a];
      }
      if (inst.labels) {
        if (!row.empty()) out += '\t';
        out += inst.mask[t] ? LabelName((*inst.labels)[t]) : std::string_view("?");
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

}  // namespace slterr
