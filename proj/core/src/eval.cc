#include "slterr/eval.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <sstream>

#include "slterr/error.h"
#include "slterr/text_io.h"

namespace slterr {

namespace {

constexpr double kNormTolerance = 1e-6;

void CheckDistribution(const GoodBad& p, const char* what, std::size_t index) {
  if (!(p[0] >= 0.0 && p[1] >= 0.0) || std::fabs(p[0] + p[1] - 1.0) > kNormTolerance)
    throw Error(std::string(what) + " distribution at token " + std::to_string(index) +
                " is not normalized (" + FormatExact(p[0]) + ", " + FormatExact(p[1]) + ")");
}

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string Pct(double fraction) { return FormatFixed(100.0 * fraction, 2); }

void CheckParallel(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& ref,
                   const Mask* mask) {
  if (pred.size() != ref.size())
    throw Error("prediction has " + std::to_string(pred.size()) +
                " utterances, reference has " + std::to_string(ref.size()));
  if (mask && mask->size() != ref.size())
    throw Error("mask has " + std::to_string(mask->size()) + " utterances, reference has " +
                std::to_string(ref.size()));
  for (std::size_t u = 0; u < ref.size(); ++u) {
    if (pred[u].size() != ref[u].size())
      throw Error("utterance " + std::to_string(u) + ": prediction has " +
                  std::to_string(pred[u].size()) + " labels, reference has " +
                  std::to_string(ref[u].size()));
    if (mask && (*mask)[u].size() != ref[u].size())
      throw Error("utterance " + std::to_string(u) + ": mask length " +
                  std::to_string((*mask)[u].size()) + " != " + std::to_string(ref[u].size()));
  }
}

bool Counted(const Mask* mask, std::size_t u, std::size_t t) {
  return !mask || (*mask)[u][t];
}

}  // namespace

Projection ParseProjection(std::string_view name) {
  if (name == "min") return Projection::kMin;
  if (name == "mean") return Projection::kMean;
  if (name == "max") return Projection::kMax;
  throw Error("unknown projection '" + std::string(name) + "' (expected min, mean or max)");
}

std::string_view ProjectionName(Projection projection) {
  switch (projection) {
    case Projection::kMin: return "min";
    case Projection::kMean: return "mean";
    case Projection::kMax: return "max";
  }
  return "?";
}

std::vector<GoodBad> ProjectToTarget(const std::vector<GoodBad>& source,
                                     const AlignmentPairs& pairs, std::size_t target_len,
                                     Projection projection) {
  std::vector<std::vector<std::size_t>> links(target_len);
  for (auto [s, t] : pairs) {
    if (s >= source.size() || t >= target_len)
      throw Error("alignment pair (" + std::to_string(s) + "," + std::to_string(t) +
                  ") out of range for lengths " + std::to_string(source.size()) + "/" +
                  std::to_string(target_len));
    links[t].push_back(s);
  }
  std::vector<GoodBad> out(target_len, GoodBad{0.5, 0.5});
  for (std::size_t t = 0; t < target_len; ++t) {
    auto& src = links[t];
    if (src.empty()) continue;
    std::sort(src.begin(), src.end());
    if (projection == Projection::kMean) {
      double g = 0.0;
      for (std::size_t s : src) g += source[s][0];
      g /= static_cast<double>(src.size());
      out[t] = {g, 1.0 - g};
      continue;
    }
    std::size_t best = src.front();
    for (std::size_t s : src) {
      bool better = projection == Projection::kMin ? source[s][0] < source[best][0]
                                                   : source[s][0] > source[best][0];
      if (better) best = s;
    }
    out[t] = source[best];
  }
  return out;
}

std::vector<GoodBad> CombinePosteriors(const std::vector<GoodBad>& p_asr,
                                       const std::vector<GoodBad>& p_mt,
                                       const AlignmentPairs& pairs, double alpha,
                                       Projection projection) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error("alpha must be in [0,1], got " + FormatExact(alpha));
  for (std::size_t i = 0; i < p_asr.size(); ++i) CheckDistribution(p_asr[i], "ASR", i);
  for (std::size_t i = 0; i < p_mt.size(); ++i) CheckDistribution(p_mt[i], "MT", i);
  std::vector<GoodBad> proj = ProjectToTarget(p_asr, pairs, p_mt.size(), projection);
  if (alpha == 1.0) return proj;
  if (alpha == 0.0) return p_mt;
  std::vector<GoodBad> out(p_mt.size());
  for (std::size_t t = 0; t < p_mt.size(); ++t) {
    double g = std::pow(proj[t][0], alpha) * std::pow(p_mt[t][0], 1.0 - alpha);
    double b = std::pow(proj[t][1], alpha) * std::pow(p_mt[t][1], 1.0 - alpha);
    double z = g + b;
    // Both sides certain but opposite: no evidence either way.
    out[t] = z > 0.0 ? GoodBad{g / z, b / z} : GoodBad{0.5, 0.5};
  }
  return out;
}

LabelSeq ThresholdDecide(const std::vector<double>& p_good, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error("threshold must be in [0,1], got " + FormatExact(t));
  LabelSeq out{Scheme::kTwoClass, {}};
  out.labels.reserve(p_good.size());
  for (double p : p_good) out.labels.push_back(p >= t ? Label::kGood : Label::kBad);
  return out;
}

LabelSeq ToTwoClass(const LabelSeq& labels) {
  LabelSeq out{Scheme::kTwoClass, labels.labels};
  for (Label& l : out.labels)
    if (l == Label::kBadAsr || l == Label::kBadMt) l = Label::kBad;
  return out;
}

const LabelScore& PrfReport::Get(Label label) const {
  for (const auto& s : labels)
    if (s.label == label) return s;
  throw Error("label " + std::string(LabelName(label)) + " not in report");
}

PrfReport Prf(const std::vector<LabelSeq>& pred, const std::vector<LabelSeq>& ref,
              Scheme scheme, const Mask* mask) {
  CheckParallel(pred, ref, mask);
  const auto& alphabet = Alphabet(scheme);
  PrfReport report;
  report.scheme = scheme;
  for (Label l : alphabet) report.labels.push_back(LabelScore{l});
  auto slot = [&](Label l) -> LabelScore& {
    for (auto& s : report.labels)
      if (s.label == l) return s;
    throw Error("unreachable");
  };
  for (std::size_t u = 0; u < ref.size(); ++u) {
    if (pred[u].scheme != scheme || ref[u].scheme != scheme)
      throw Error("utterance " + std::to_string(u) + ": scheme mismatch (expected " +
                  std::string(SchemeName(scheme)) + ")");
    for (std::size_t t = 0; t < ref[u].size(); ++t) {
      if (!Counted(mask, u, t)) continue;
      Label p = pred[u][t], r = ref[u][t];
      if (!InAlphabet(r, scheme) || !InAlphabet(p, scheme))
        throw Error("utterance " + std::to_string(u) + " token " + std::to_string(t) +
                    ": label outside the " + std::string(SchemeName(scheme)) +
                    " alphabet (unresolved tokens must be masked)");
      ++report.tokens;
      if (p == r) {
        ++slot(r).tp;
      } else {
        ++slot(p).fp;
        ++slot(r).fn;
      }
    }
  }
  double sum = 0.0;
  for (auto& s : report.labels) {
    s.precision = Ratio(s.tp, s.tp + s.fp);
    s.recall = Ratio(s.tp, s.tp + s.fn);
    double pr = s.precision + s.recall;
    s.f1 = pr == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / pr;
    sum += s.f1;
  }
  report.f_avg = sum / static_cast<double>(report.labels.size());
  return report;
}

std::vector<double> ThresholdGrid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw Error("grid step must be in (0,1]");
  double n = std::round(1.0 / step);
  if (std::fabs(n * step - 1.0) > 1e-9)
    throw Error("grid step " + FormatExact(step) + " does not divide 1");
  std::vector<double> grid;
  auto count = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i <= count; ++i)
    grid.push_back(static_cast<double>(i) / static_cast<double>(count));
  return grid;
}

std::vector<SweepRow> Sweep(const std::vector<std::vector<double>>& p_good,
                            const std::vector<LabelSeq>& ref,
                            const std::vector<double>& grid, const Mask* mask) {
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw Error("threshold grid must be sorted ascending");
  if (p_good.size() != ref.size())
    throw Error("posteriors cover " + std::to_string(p_good.size()) +
                " utterances, reference has " + std::to_string(ref.size()));
  std::vector<LabelSeq> ref2;
  ref2.reserve(ref.size());
  for (const auto& r : ref) ref2.push_back(ToTwoClass(r));
  std::vector<SweepRow> rows;
  for (double t : grid) {
    std::vector<LabelSeq> pred;
    pred.reserve(p_good.size());
    for (const auto& p : p_good) pred.push_back(ThresholdDecide(p, t));
    PrfReport r = Prf(pred, ref2, Scheme::kTwoClass, mask);
    SweepRow row{t, r.Get(Label::kGood).f1, r.Get(Label::kBad).f1, r.f_avg, 0};
    for (std::size_t u = 0; u < pred.size(); ++u)
      for (std::size_t i = 0; i < pred[u].size(); ++i)
        if (Counted(mask, u, i) && pred[u][i] == Label::kBad) ++row.predicted_bad;
    rows.push_back(row);
  }
  return rows;
}

ConfusionMatrix ConfusionOnTrueErrors(const std::vector<LabelSeq>& pred,
                                      const std::vector<LabelSeq>& ref, const Mask* mask) {
  CheckParallel(pred, ref, mask);
  auto index = [](Label l) { return l == Label::kBadAsr ? 0 : l == Label::kBadMt ? 1 : -1; };
  ConfusionMatrix m;
  for (std::size_t u = 0; u < ref.size(); ++u) {
    if (pred[u].scheme != Scheme::kThreeClass || ref[u].scheme != Scheme::kThreeClass)
      throw Error("confusion matrix needs three_class labels (utterance " +
                  std::to_string(u) + ")");
    for (std::size_t t = 0; t < ref[u].size(); ++t) {
      if (!Counted(mask, u, t)) continue;
      int r = index(ref[u][t]), p = index(pred[u][t]);
      if (r >= 0 && p >= 0) ++m.counts[r][p];
    }
  }
  for (int r = 0; r < 2; ++r) {
    std::size_t total = m.counts[r][0] + m.counts[r][1];
    m.row_empty[r] = total == 0;
    for (int p = 0; p < 2; ++p) m.percent[r][p] = 100.0 * Ratio(m.counts[r][p], total);
  }
  return m;
}

LabelSeq TwoStepClassify(const CrfModel& two_class, const CrfModel& bsplit,
                         const Instance& instance) {
  return TwoStepClassify(two_class, instance, bsplit, instance);
}

LabelSeq TwoStepClassify(const CrfModel& two_class, const Instance& first,
                         const CrfModel& bsplit, const Instance& second) {
  int g = two_class.LabelIndex("G"), b = two_class.LabelIndex("B");
  if (two_class.num_labels() != 2 || g < 0 || b < 0)
    throw Error("two-step: first model must have labels {G, B}");
  int ba = bsplit.LabelIndex("B_ASR"), bm = bsplit.LabelIndex("B_MT");
  if (ba < 0 || bm < 0) throw Error("two-step: second model must have labels B_ASR and B_MT");
  if (first.size() != second.size())
    throw Error("two-step: stage instances differ in length");
  ViterbiResult stage1 = Viterbi(two_class, two_class.Compile({first.attrs, std::nullopt, {}}));
  LabelSeq out{Scheme::kThreeClass, std::vector<Label>(first.size(), Label::kGood)};
  if (std::none_of(stage1.labels.begin(), stage1.labels.end(), [&](int y) { return y == b; }))
    return out;
  auto marg = Marginals(bsplit, bsplit.Compile({second.attrs, std::nullopt, {}}));
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (stage1.labels[t] != b) continue;
    out.labels[t] = marg[t][bm] > marg[t][ba] ? Label::kBadMt : Label::kBadAsr;
  }
  return out;
}

std::vector<ScatterRow> ScatterErrors(const std::vector<LabelSeq>& labels,
                                      const std::vector<std::string>& utt_ids) {
  if (!utt_ids.empty() && utt_ids.size() != labels.size())
    throw Error("scatter: " + std::to_string(utt_ids.size()) + " ids for " +
                std::to_string(labels.size()) + " utterances");
  std::vector<ScatterRow> rows;
  for (std::size_t u = 0; u < labels.size(); ++u) {
    if (labels[u].scheme != Scheme::kThreeClass)
      throw Error("scatter needs three_class labels (utterance " + std::to_string(u) + ")");
    std::size_t asr = 0, mt = 0;
    for (Label l : labels[u].labels) {
      asr += l == Label::kBadAsr;
      mt += l == Label::kBadMt;
    }
    std::size_t n = labels[u].size();
    rows.push_back({utt_ids.empty() ? std::to_string(u) : utt_ids[u], 100.0 * Ratio(asr, n),
                    100.0 * Ratio(mt, n)});
  }
  return rows;
}

std::vector<std::vector<double>> PosteriorTable::Column(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end())
    throw Error("posterior table has no column for label '" + std::string(label) + "'");
  auto c = static_cast<std::size_t>(it - labels.begin());
  std::vector<std::vector<double>> out(values.size());
  for (std::size_t u = 0; u < values.size(); ++u)
    for (const auto& row : values[u]) out[u].push_back(row[c]);
  return out;
}

std::string SerializePosteriors(const PosteriorTable& table) {
  std::string out = "utt_id,token_idx";
  for (const auto& l : table.labels) out += "," + CsvField(l);
  out += "\n";
  for (std::size_t u = 0; u < table.values.size(); ++u) {
    for (std::size_t t = 0; t < table.values[u].size(); ++t) {
      out += std::to_string(u) + "," + std::to_string(t);
      for (double v : table.values[u][t]) out += "," + FormatExact(v);
      out += "\n";
    }
  }
  return out;
}

PosteriorTable ParsePosteriors(const std::string& text, std::optional<std::size_t> utterances,
                               const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(source + ":" + std::to_string(lineno) + ": " + msg, source, lineno);
  };
  auto number = [&](const std::string& field, auto& out) {
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (ec != std::errc() || p != field.data() + field.size())
      throw fail("bad number '" + field + "'");
  };
  PosteriorTable table;
  if (!std::getline(in, line)) throw fail("empty posterior file");
  ++lineno;
  auto header = SplitCsvLine(line);
  if (header.size() < 3 || header[0] != "utt_id" || header[1] != "token_idx")
    throw fail("header must be utt_id,token_idx,<labels>");
  table.labels.assign(header.begin() + 2, header.end());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = SplitCsvLine(line);
    if (fields.size() != header.size())
      throw fail("expected " + std::to_string(header.size()) + " fields, got " +
                 std::to_string(fields.size()));
    std::size_t u = 0, t = 0;
    number(fields[0], u);
    number(fields[1], t);
    if (utterances && u >= *utterances)
      throw fail("utt_id " + fields[0] + " beyond " + std::to_string(*utterances) +
                 " utterances");
    if (u + 1 < table.values.size()) throw fail("utt_id " + fields[0] + " out of order");
    if (u >= table.values.size()) table.values.resize(u + 1);
    if (t != table.values[u].size())
      throw fail("token_idx " + fields[1] + " out of order (expected " +
                 std::to_string(table.values[u].size()) + ")");
    std::vector<double> row(table.labels.size());
    for (std::size_t c = 0; c < row.size(); ++c) number(fields[c + 2], row[c]);
    table.values[u].push_back(std::move(row));
  }
  if (utterances) table.values.resize(*utterances);
  return table;
}

PosteriorTable LoadPosteriors(const std::filesystem::path& path,
                              std::optional<std::size_t> utterances) {
  return ParsePosteriors(ReadFile(path), utterances, path.string());
}

std::string PrfCsv(const PrfReport& report) {
  std::string out = "label,precision,recall,f1,tp,fp,fn\n";
  for (const auto& s : report.labels) {
    out += std::string(LabelName(s.label)) + "," + Pct(s.precision) + "," + Pct(s.recall) + "," +
           Pct(s.f1) + "," + std::to_string(s.tp) + "," + std::to_string(s.fp) + "," +
           std::to_string(s.fn) + "\n";
  }
  out += "F-avg,,," + Pct(report.f_avg) + ",,,\n";
  return out;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out = "threshold,F_G,F_B,F_avg,predicted_B\n";
  for (const auto& r : rows)
    out += FormatFixed(r.threshold, 2) + "," + Pct(r.f_good) + "," + Pct(r.f_bad) + "," +
           Pct(r.f_avg) + "," + std::to_string(r.predicted_bad) + "\n";
  return out;
}

namespace {
constexpr const char* kConfusionNames[2] = {"B_ASR", "B_MT"};
}

std::string ConfusionCsv(const ConfusionMatrix& m) {
  std::string out = "reference,pred_B_ASR,pred_B_MT,count\n";
  for (int r = 0; r < 2; ++r) {
    out += std::string(kConfusionNames[r]) + ",";
    if (m.row_empty[r]) {
      out += ",,0\n";
      continue;
    }
    out += FormatFixed(m.percent[r][0], 2) + "," + FormatFixed(m.percent[r][1], 2) + "," +
           std::to_string(m.counts[r][0] + m.counts[r][1]) + "\n";
  }
  return out;
}

std::string ConfusionTable(const ConfusionMatrix& m) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s %8s\n", "ref\\pred", "B_ASR", "B_MT", "count");
  out += buf;
  for (int r = 0; r < 2; ++r) {
    std::size_t n = m.counts[r][0] + m.counts[r][1];
    if (m.row_empty[r]) {
      std::snprintf(buf, sizeof buf, "%-10s %10s %10s %8zu\n", kConfusionNames[r], "-", "-", n);
    } else {
      std::snprintf(buf, sizeof buf, "%-10s %10s %10s %8zu\n", kConfusionNames[r],
                    FormatFixed(m.percent[r][0], 2).c_str(),
                    FormatFixed(m.percent[r][1], 2).c_str(), n);
    }
    out += buf;
  }
  return out;
}

std::string ScatterCsv(const std::vector<ScatterRow>& rows) {
  std::string out = "utt_id,pct_B_ASR,pct_B_MT\n";
  for (const auto& r : rows)
    out += CsvField(r.utt_id) + "," + FormatFixed(r.pct_asr, 2) + "," +
           FormatFixed(r.pct_mt, 2) + "\n";
  return out;
}

}  // namespace slterr
