#include "slterr/corpus.h"

#include <sstream>

#include "slterr/error.h"

namespace fs = std::filesystem;

namespace slterr {

const Tokens& SideTokens(const Quintuplet& q, Side side) {
  switch (side) {
    case Side::kFHyp: return q.f_hyp;
    case Side::kFRef: return q.f_ref;
    case Side::kEMt: return q.e_mt;
    case Side::kESlt: return q.e_slt;
    case Side::kERef: return q.e_ref;
  }
  throw Error("bad side");
}

namespace {

Tokens& MutableSide(Quintuplet& q, Side side) {
  return const_cast<Tokens&>(SideTokens(q, side));
}

}  // namespace

std::string_view SideFileName(Side side) {
  switch (side) {
    case Side::kFHyp: return "f_hyp.txt";
    case Side::kFRef: return "f_ref.txt";
    case Side::kEMt: return "mt_hyp.txt";
    case Side::kESlt: return "slt_hyp.txt";
    case Side::kERef: return "e_ref.txt";
  }
  return "";
}

std::string_view LabelName(Label label) {
  switch (label) {
    case Label::kGood: return "G";
    case Label::kBad: return "B";
    case Label::kBadAsr: return "B_ASR";
    case Label::kBadMt: return "B_MT";
    case Label::kUnresolved: return "?";
  }
  return "?";
}

std::string_view SchemeName(Scheme scheme) {
  return scheme == Scheme::kTwoClass ? "two_class" : "three_class";
}

Scheme ParseScheme(std::string_view name) {
  if (name == "two_class" || name == "2") return Scheme::kTwoClass;
  if (name == "three_class" || name == "3") return Scheme::kThreeClass;
  throw Error("unknown scheme '" + std::string(name) +
              "' (expected two_class or three_class)");
}

const std::vector<Label>& Alphabet(Scheme scheme) {
  static const std::vector<Label> two{Label::kGood, Label::kBad};
  static const std::vector<Label> three{Label::kGood, Label::kBadAsr,
                                        Label::kBadMt};
  return scheme == Scheme::kTwoClass ? two : three;
}

bool InAlphabet(Label label, Scheme scheme) {
  for (Label l : Alphabet(scheme))
    if (l == label) return true;
  return false;
}

Corpus LoadCorpus(const fs::path& dir) {
  std::vector<std::vector<std::string>> sides;
  std::string missing;
  for (Side side : kAllSides) {
    fs::path p = dir / SideFileName(side);
    if (!fs::exists(p)) {
      missing += (missing.empty() ? "" : ", ") + p.string();
      continue;
    }
    sides.push_back(ReadLines(p));
  }
  if (!missing.empty()) throw Error("missing corpus file(s): " + missing);

  bool same = true;
  for (const auto& s : sides) same = same && s.size() == sides[0].size();
  if (!same) {
    std::ostringstream msg;
    msg << "line-count mismatch in " << dir.string() << ":";
    for (std::size_t i = 0; i < sides.size(); ++i)
      msg << " " << SideFileName(kAllSides[i]) << "=" << sides[i].size();
    throw Error(msg.str());
  }

  Corpus corpus(sides[0].size());
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    corpus[u].utt_id = std::to_string(u);
    for (std::size_t s = 0; s < sides.size(); ++s)
      MutableSide(corpus[u], kAllSides[s]) = SplitTokens(sides[s][u]);
  }
  return corpus;
}

void SaveCorpus(const fs::path& dir, const Corpus& corpus) {
  fs::create_directories(dir);
  for (Side side : kAllSides) {
    std::string content;
    for (const auto& q : corpus) content += JoinTokens(SideTokens(q, side)) + "\n";
    WriteFileAtomic(dir / SideFileName(side), content);
  }
}

std::vector<std::vector<double>> LoadConfidences(const fs::path& path) {
  std::vector<std::vector<double>> out;
  auto lines = ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<double> row;
    for (const auto& tok : SplitTokens(lines[i])) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size())
        throw ParseError(path.string() + ":" + std::to_string(i + 1) +
                             ": not a number '" + tok + "'",
                         path.string(), i + 1, row.size() + 1);
      row.push_back(v);
    }
    out.push_back(std::move(row));
  }
  return out;
}

LabelSeq ParseLabelLine(std::string_view line, Scheme scheme,
                        const std::string& file, std::size_t lineno) {
  LabelSeq seq{scheme, {}};
  auto tokens = SplitTokens(line);
  for (std::size_t c = 0; c < tokens.size(); ++c) {
    const std::string& tok = tokens[c];
    Label label;
    if (tok == "G") label = Label::kGood;
    else if (tok == "B") label = Label::kBad;
    else if (tok == "B_ASR") label = Label::kBadAsr;
    else if (tok == "B_MT") label = Label::kBadMt;
    else
      throw ParseError(file + ":" + std::to_string(lineno) + ":" +
                           std::to_string(c + 1) + ": unknown label '" + tok +
                           "'",
                       file, lineno, c + 1);
    if (!InAlphabet(label, scheme))
      throw ParseError(file + ":" + std::to_string(lineno) + ":" +
                           std::to_string(c + 1) + ": label '" + tok +
                           "' is not in the " +
                           std::string(SchemeName(scheme)) +
                           " alphabet (scheme mismatch)",
                       file, lineno, c + 1);
    seq.labels.push_back(label);
  }
  return seq;
}

std::vector<LabelSeq> LoadLabels(const fs::path& path, Scheme scheme) {
  auto lines = ReadLines(path);
  std::vector<LabelSeq> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i)
    out.push_back(ParseLabelLine(lines[i], scheme, path.string(), i + 1));
  return out;
}

std::string SerializeLabels(const std::vector<LabelSeq>& labels) {
  std::string out;
  for (const auto& seq : labels) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] == Label::kUnresolved)
        throw Error("unresolved label cannot be serialized");
      if (i) out += ' ';
      out += LabelName(seq[i]);
    }
    out += '\n';
  }
  return out;
}

void SaveLabels(const fs::path& path, const std::vector<LabelSeq>& labels) {
  WriteFileAtomic(path, SerializeLabels(labels));
}

std::vector<std::vector<bool>> LoadMask(const fs::path& path) {
  std::vector<std::vector<bool>> out;
  auto lines = ReadLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<bool> row;
    auto tokens = SplitTokens(lines[i]);
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      if (tokens[c] != "0" && tokens[c] != "1")
        throw ParseError(path.string() + ":" + std::to_string(i + 1) + ":" +
                             std::to_string(c + 1) + ": mask value must be 0 or 1",
                         path.string(), i + 1, c + 1);
      row.push_back(tokens[c] == "1");
    }
    out.push_back(std::move(row));
  }
  return out;
}

void SaveMask(const fs::path& path, const std::vector<std::vector<bool>>& mask) {
  std::string out;
  for (const auto& row : mask) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ' ';
      out += row[i] ? '1' : '0';
    }
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

ValidationReport Validate(const Corpus& corpus,
                          const std::vector<LabelSeq>& labels, Side target) {
  ValidationReport report;
  if (corpus.size() != labels.size())
    report.count_mismatch = {corpus.size(), labels.size()};
  std::size_t n = std::min(corpus.size(), labels.size());
  for (std::size_t u = 0; u < n; ++u) {
    std::size_t tokens = SideTokens(corpus[u], target).size();
    if (tokens != labels[u].size())
      report.mismatches.push_back({corpus[u].utt_id, tokens, labels[u].size()});
  }
  return report;
}

}  // namespace slterr
