#pragma once

#include <compare>
#include <string>

#include "gvarsv/errors.hpp"

namespace gvarsv {

// A calendar quarter, e.g. "1979Q2". Ordered and index-convertible so panel
// rows can be addressed either way.
struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  Quarter() = default;
  Quarter(int year_, int q_) : year(year_), q(q_) {
    if (q < 1 || q > 4)
      throw ValidationError("Quarter: q must be in 1..4, got " +
                            std::to_string(q_));
  }

  int index() const { return year * 4 + (q - 1); }

  static Quarter from_index(int idx) {
    int y = idx >= 0 ? idx / 4 : (idx - 3) / 4;
    return Quarter(y, idx - y * 4 + 1);
  }

  Quarter plus(int n) const { return from_index(index() + n); }
  int minus(const Quarter& other) const { return index() - other.index(); }

  auto operator<=>(const Quarter& other) const {
    return index() <=> other.index();
  }
  bool operator==(const Quarter& other) const {
    return index() == other.index();
  }

  std::string str() const {
    return std::to_string(year) + "Q" + std::to_string(q);
  }

  // Parses "1979Q2" (case-insensitive 'q'). Throws DataError on anything else.
  static Quarter parse(const std::string& s);
};

}  // namespace gvarsv
