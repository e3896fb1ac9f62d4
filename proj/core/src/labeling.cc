#include "slterr/labeling.h"

#include "slterr/error.h"

namespace slterr {

void LabelStats::Add(Label label) {
  switch (label) {
    case Label::kGood: ++good; break;
    case Label::kBad: ++bad; break;
    case Label::kBadAsr: ++bad_asr; break;
    case Label::kBadMt: ++bad_mt; break;
    case Label::kUnresolved: break;
  }
}

namespace {

LabelSeq LabelsFromScript(const EditScript& script, std::size_t hyp_len) {
  LabelSeq out{Scheme::kTwoClass, std::vector<Label>(hyp_len, Label::kBad)};
  for (const auto& op : script.ops)
    if (op.hyp && op.kind == EditKind::kExact) out.labels[*op.hyp] = Label::kGood;
  return out;
}

void RequireTwoClass(const LabelSeq& seq, const char* what) {
  if (seq.scheme != Scheme::kTwoClass)
    throw Error(std::string(what) + ": expected two_class labels");
}

}  // namespace

LabelSeq Infer2Class(std::span<const std::string> hyp,
                     std::span<const std::string> ref) {
  return LabelsFromScript(TerAlign(hyp, ref), hyp.size());
}

LabelSeq InferAsrLabels(std::span<const std::string> f_hyp,
                        std::span<const std::string> f_ref) {
  return LabelsFromScript(EditAlign(f_hyp, f_ref), f_hyp.size());
}

LabelSeq Method1(const LabelSeq& slt_labels, const LabelSeq& mt_labels,
                 const AlignmentPairs& slt_to_mt) {
  RequireTwoClass(slt_labels, "method1");
  RequireTwoClass(mt_labels, "method1");
  const std::size_t n = slt_labels.size();
  std::vector<bool> aligned_to_bad(n, false);
  for (auto [j, i] : slt_to_mt) {
    if (j >= n || i >= mt_labels.size())
      throw Error("method1: alignment pair (" + std::to_string(j) + "," +
                  std::to_string(i) + ") out of range for SLT length " +
                  std::to_string(n) + " and MT length " +
                  std::to_string(mt_labels.size()));
    if (mt_labels[i] == Label::kBad) aligned_to_bad[j] = true;
  }
  LabelSeq out{Scheme::kThreeClass, std::vector<Label>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    if (slt_labels[j] == Label::kGood)
      out.labels[j] = Label::kGood;
    else
      out.labels[j] = aligned_to_bad[j] ? Label::kBadMt : Label::kBadAsr;
  }
  return out;
}

LabelSeq Method2(const LabelSeq& slt_labels, const EditScript& slt_vs_mt) {
  RequireTwoClass(slt_labels, "method2");
  const std::size_t n = slt_labels.size();
  std::vector<int> kind(n, -1);
  for (const auto& op : slt_vs_mt.ops) {
    if (!op.hyp) continue;
    if (*op.hyp >= n)
      throw Error("method2: script references SLT index " +
                  std::to_string(*op.hyp) + " beyond length " +
                  std::to_string(n));
    kind[*op.hyp] = static_cast<int>(op.kind);
  }
  LabelSeq out{Scheme::kThreeClass, std::vector<Label>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    if (kind[j] < 0)
      throw Error("method2: script does not cover SLT index " +
                  std::to_string(j));
    if (slt_labels[j] == Label::kGood) {
      out.labels[j] = Label::kGood;
      continue;
    }
    auto k = static_cast<EditKind>(kind[j]);
    out.labels[j] = (k == EditKind::kInsertion || k == EditKind::kSubstitution)
                        ? Label::kBadAsr
                        : Label::kBadMt;
  }
  return out;
}

namespace {

void IntersectInto(const LabelSeq& m1, const LabelSeq& m2, LabelSeq& agreed,
                   Intersection& acc) {
  if (m1.scheme != Scheme::kThreeClass || m2.scheme != Scheme::kThreeClass)
    throw Error("intersect: both label sequences must be three_class");
  if (m1.size() != m2.size())
    throw Error("intersect: length mismatch (" + std::to_string(m1.size()) +
                " vs " + std::to_string(m2.size()) + ")");
  agreed = {Scheme::kThreeClass, std::vector<Label>(m1.size())};
  for (std::size_t i = 0; i < m1.size(); ++i) {
    if (m1[i] == m2[i]) {
      agreed.labels[i] = m1[i];
      acc.same.Add(m1[i]);
    } else {
      agreed.labels[i] = Label::kUnresolved;
      acc.diff.Add(m1[i]);
    }
  }
  acc.same.total += m1.size();
  acc.diff.total += m1.size();
}

}  // namespace

Intersection IntersectLabels(const LabelSeq& m1, const LabelSeq& m2) {
  Intersection out;
  IntersectInto(m1, m2, out.agreed, out);
  return out;
}

Intersection IntersectLabels(const std::vector<LabelSeq>& m1,
                             const std::vector<LabelSeq>& m2,
                             std::vector<LabelSeq>* agreed) {
  if (m1.size() != m2.size())
    throw Error("intersect: utterance count mismatch");
  Intersection out;
  if (agreed) agreed->assign(m1.size(), {});
  LabelSeq scratch;
  for (std::size_t u = 0; u < m1.size(); ++u)
    IntersectInto(m1[u], m2[u], agreed ? (*agreed)[u] : scratch, out);
  return out;
}

LabelStats ComputeLabelStats(const std::vector<LabelSeq>& labels) {
  LabelStats stats;
  for (const auto& seq : labels) {
    if (seq.scheme != labels.front().scheme)
      throw Error("label stats: mixed label schemes");
    for (Label l : seq.labels) stats.Add(l);
    stats.total += seq.size();
  }
  if (stats.total == 0) throw Error("label stats: zero tokens");
  return stats;
}

ExtractedLabels ExtractLabels(const Quintuplet& q) {
  ExtractedLabels out;
  out.asr = InferAsrLabels(q.f_hyp, q.f_ref);
  out.mt = Infer2Class(q.e_mt, q.e_ref);
  out.slt = Infer2Class(q.e_slt, q.e_ref);
  EditScript slt_vs_mt = EditAlign(q.e_slt, q.e_mt);
  out.method1 = Method1(out.slt, out.mt, ExtractAlignmentPairs(slt_vs_mt));
  out.method2 = Method2(out.slt, slt_vs_mt);
  out.intersect = IntersectLabels(out.method1, out.method2).agreed;
  return out;
}

std::string ThreeClassStatsCsv(const std::vector<LabelSeq>& m1,
                               const std::vector<LabelSeq>& m2) {
  auto s1 = ComputeLabelStats(m1);
  auto s2 = ComputeLabelStats(m2);
  auto inter = IntersectLabels(m1, m2, nullptr);
  std::string out = "label,pct_G,pct_B_ASR,pct_B_MT\n";
  auto row = [&](const std::string& name, const LabelStats& s) {
    out += CsvField(name) + "," + FormatFixed(s.pct_good(), 2) + "," +
           FormatFixed(s.pct_bad_asr(), 2) + "," +
           FormatFixed(s.pct_bad_mt(), 2) + "\n";
  };
  row("label/m1", s1);
  row("label/m2", s2);
  row("label/same(m1, m2)", inter.same);
  row("label/diff(m1, m2)", inter.diff);
  return out;
}

}  // namespace slterr
