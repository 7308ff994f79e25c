#pragma once

#include <string>
#include <vector>

#include "pidparse/symbol_catalog.hpp"
#include "pidparse/types.hpp"

namespace pidparse {

struct SymbolInstance {
  int class_id = kOthers;
  Rect bbox;
  double score = 0.0;
  std::string label;          // filled by aggregation (or embedded text)
  std::vector<int> edge_ids;  // filled by aggregation
  int embedded_text = -1;     // index into the text list the symbol was assembled with
  bool ambiguous = false;
  std::vector<std::string> flags;

  friend bool operator==(const SymbolInstance&, const SymbolInstance&) = default;
};

}  // namespace pidparse
