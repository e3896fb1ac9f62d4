#include "slterr/align.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "slterr/error.h"

namespace slterr {

namespace {

// (n+1) x (m+1) cost table, row-major.
std::vector<int> DistanceTable(std::span<const std::string> hyp,
                               std::span<const std::string> ref) {
  const std::size_t n = hyp.size(), m = ref.size(), w = m + 1;
  std::vector<int> d((n + 1) * w);
  for (std::size_t i = 0; i <= n; ++i) d[i * w] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      int diag = d[(i - 1) * w + j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      int ins = d[(i - 1) * w + j] + 1;
      int del = d[i * w + j - 1] + 1;
      d[i * w + j] = std::min({diag, ins, del});
    }
  }
  return d;
}

}  // namespace

int EditDistance(std::span<const std::string> hyp,
                 std::span<const std::string> ref) {
  // Two-row variant of DistanceTable.
  std::vector<int> prev(ref.size() + 1), cur(ref.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= ref.size(); ++j)
      cur[j] = std::min({prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    std::swap(prev, cur);
  }
  return prev[ref.size()];
}

EditScript EditAlign(std::span<const std::string> hyp,
                     std::span<const std::string> ref) {
  const std::size_t n = hyp.size(), m = ref.size(), w = m + 1;
  auto d = DistanceTable(hyp, ref);
  EditScript script;
  script.cost = d[n * w + m];

  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    int here = d[i * w + j];
    if (i > 0 && j > 0) {
      bool match = hyp[i - 1] == ref[j - 1];
      if (d[(i - 1) * w + j - 1] + (match ? 0 : 1) == here) {
        script.ops.push_back({match ? EditKind::kExact : EditKind::kSubstitution,
                              i - 1, j - 1});
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && d[i * w + j - 1] + 1 == here) {
      script.ops.push_back({EditKind::kDeletion, std::nullopt, j - 1});
      --j;
      continue;
    }
    script.ops.push_back({EditKind::kInsertion, i - 1, std::nullopt});
    --i;
  }
  std::reverse(script.ops.begin(), script.ops.end());
  return script;
}

namespace {

struct Shift {
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t dest = 0;  // insertion point in the sequence with the block removed
  int gain = 0;
};

std::vector<std::size_t> ApplyShift(const std::vector<std::size_t>& order,
                                    const Shift& s) {
  std::vector<std::size_t> rest;
  rest.reserve(order.size());
  rest.insert(rest.end(), order.begin(), order.begin() + s.start);
  rest.insert(rest.end(), order.begin() + s.start + s.length, order.end());
  std::vector<std::size_t> out(rest.begin(), rest.begin() + s.dest);
  out.insert(out.end(), order.begin() + s.start,
             order.begin() + s.start + s.length);
  out.insert(out.end(), rest.begin() + s.dest, rest.end());
  return out;
}

bool BlockOccursIn(std::span<const std::string> block,
                   std::span<const std::string> ref) {
  if (block.size() > ref.size()) return false;
  return std::search(ref.begin(), ref.end(), block.begin(), block.end()) !=
         ref.end();
}

}  // namespace

EditScript TerAlign(std::span<const std::string> hyp,
                    std::span<const std::string> ref) {
  std::vector<std::size_t> order(hyp.size());
  std::iota(order.begin(), order.end(), 0);
  auto permuted = [&](const std::vector<std::size_t>& ord) {
    std::vector<std::string> out;
    out.reserve(ord.size());
    for (std::size_t k : ord) out.push_back(hyp[k]);
    return out;
  };

  std::vector<std::string> current = permuted(order);
  int edits = EditDistance(current, ref);
  int shifts = 0;

  while (edits > 0) {
    Shift best;
    const std::size_t n = current.size();
    for (std::size_t start = 0; start < n; ++start) {
      for (std::size_t len = 1; len <= kMaxShiftBlock && start + len <= n;
           ++len) {
        std::span<const std::string> block(current.data() + start, len);
        if (!BlockOccursIn(block, ref)) break;  // longer blocks cannot match
        for (std::size_t dest = 0; dest + len <= n; ++dest) {
          if (dest == start) continue;
          Shift cand{start, len, dest, 0};
          auto moved = permuted(ApplyShift(order, cand));
          // A shift costs one edit; keep it only if the total drops.
          cand.gain = edits - (EditDistance(moved, ref) + 1);
          if (cand.gain <= 0) continue;
          // Largest gain, then leftmost block, then longest, then nearest
          // destination index.
          bool better = cand.gain > best.gain ||
                        (cand.gain == best.gain &&
                         (cand.start < best.start ||
                          (cand.start == best.start &&
                           (cand.length > best.length ||
                            (cand.length == best.length &&
                             cand.dest < best.dest)))));
          if (best.gain == 0 || better) best = cand;
        }
      }
    }
    if (best.gain <= 0) break;
    order = ApplyShift(order, best);
    current = permuted(order);
    edits = EditDistance(current, ref);
    ++shifts;
  }

  EditScript script = EditAlign(current, ref);
  for (auto& op : script.ops)
    if (op.hyp) op.hyp = order[*op.hyp];
  script.shifts = shifts;
  script.cost += shifts;
  return script;
}

double Wer(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs) {
  if (hyps.size() != refs.size())
    throw Error("WER: utterance count mismatch (" + std::to_string(hyps.size()) +
                " hypotheses vs " + std::to_string(refs.size()) + " references)");
  long long errors = 0, length = 0;
  for (std::size_t u = 0; u < hyps.size(); ++u) {
    errors += EditDistance(hyps[u], refs[u]);
    length += static_cast<long long>(refs[u].size());
  }
  if (length == 0) throw Error("WER: total reference length is 0");
  return 100.0 * static_cast<double>(errors) / static_cast<double>(length);
}

AlignmentPairs ExtractAlignmentPairs(const EditScript& script) {
  AlignmentPairs pairs;
  for (const auto& op : script.ops)
    if (op.kind == EditKind::kExact || op.kind == EditKind::kSubstitution)
      pairs.emplace_back(*op.hyp, *op.ref);
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

char EditKindCode(EditKind kind) {
  switch (kind) {
    case EditKind::kExact: return 'E';
    case EditKind::kSubstitution: return 'S';
    case EditKind::kInsertion: return 'I';
    case EditKind::kDeletion: return 'D';
  }
  return '?';
}

std::string SerializeEditScript(const EditScript& script) {
  std::ostringstream out;
  auto idx = [](const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string("-");
  };
  for (const auto& op : script.ops)
    out << EditKindCode(op.kind) << ' ' << idx(op.hyp) << ' ' << idx(op.ref)
        << '\n';
  return out.str();
}

EditScript ParseEditScript(const std::string& text) {
  EditScript script;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = SplitTokens(line);
    if (f.empty()) continue;
    if (f.size() != 3 || f[0].size() != 1)
      throw ParseError("edit script line " + std::to_string(lineno) +
                           ": expected 'kind hyp_idx ref_idx'",
                       "<script>", lineno);
    EditOp op{};
    switch (f[0][0]) {
      case 'E': op.kind = EditKind::kExact; break;
      case 'S': op.kind = EditKind::kSubstitution; break;
      case 'I': op.kind = EditKind::kInsertion; break;
      case 'D': op.kind = EditKind::kDeletion; break;
      default:
        throw ParseError("edit script line " + std::to_string(lineno) +
                             ": unknown op kind '" + f[0] + "'",
                         "<script>", lineno);
    }
    auto parse_idx = [&](const std::string& s) -> std::optional<std::size_t> {
      if (s == "-") return std::nullopt;
      return static_cast<std::size_t>(std::stoul(s));
    };
    op.hyp = parse_idx(f[1]);
    op.ref = parse_idx(f[2]);
    if (op.kind != EditKind::kExact) ++script.cost;
    script.ops.push_back(op);
  }
  return script;
}

}  // namespace slterr
