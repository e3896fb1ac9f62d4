#ifndef SLTERR_ALIGN_H_
#define SLTERR_ALIGN_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slterr/text_io.h"

namespace slterr {

// Insertion: a hypothesis token with no reference counterpart.
// Deletion: a reference token with no hypothesis counterpart.
enum class EditKind { kExact, kSubstitution, kInsertion, kDeletion };

struct EditOp {
  EditKind kind;
  std::optional<std::size_t> hyp;
  std::optional<std::size_t> ref;
  bool operator==(const EditOp&) const = default;
};

struct EditScript {
  std::vector<EditOp> ops;
  int cost = 0;
  int shifts = 0;  // block shifts applied (TER mode only)
};

using AlignmentPairs = std::vector<std::pair<std::size_t, std::size_t>>;

// Unit-cost Levenshtein alignment. Backtrace prefers the diagonal
// (Exact/Substitution), then Deletion, then Insertion.
EditScript EditAlign(std::span<const std::string> hyp,
                     std::span<const std::string> ref);

// Levenshtein distance only (no backtrace).
int EditDistance(std::span<const std::string> hyp,
                 std::span<const std::string> ref);

// Maximum number of tokens moved by one block shift.
inline constexpr std::size_t kMaxShiftBlock = 10;

// Exact-match TER: greedy block shifts followed by an edit alignment of the
// permuted hypothesis. Op indices refer to the original hypothesis order;
// ops are listed in permuted order. cost = edits + shifts.
EditScript TerAlign(std::span<const std::string> hyp,
                    std::span<const std::string> ref);

// Corpus word error rate as a percentage.
double Wer(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs);

// (hyp_index, ref_index) for each Exact and Substitution op.
AlignmentPairs ExtractAlignmentPairs(const EditScript& script);

char EditKindCode(EditKind kind);

// One op per line: "kind hyp_idx ref_idx" with "-" for an absent index.
std::string SerializeEditScript(const EditScript& script);
EditScript ParseEditScript(const std::string& text);

}  // namespace slterr

#endif  // SLTERR_ALIGN_H_
