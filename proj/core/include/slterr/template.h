#ifndef SLTERR_TEMPLATE_H_
#define SLTERR_TEMPLATE_H_

#include <string>
#include <string_view>
#include <vector>

namespace slterr {

// Observation template: a conjunction of attributes read at window offsets
// relative to the current token, written "name[off](/name[off])*".
struct Template {
  struct Item {
    std::string attr;
    int offset = 0;
  };
  std::vector<Item> items;
  std::string text;
};

inline constexpr int kMaxTemplateOffset = 2;

Template ParseTemplate(std::string_view spec);

}  // namespace slterr

#endif  // SLTERR_TEMPLATE_H_
