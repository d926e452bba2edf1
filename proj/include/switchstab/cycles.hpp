#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "switchstab/core.hpp"
#include "switchstab/signal.hpp"

namespace switchstab {

/// Closed mode sequence (g_1, ..., g_m) with g_1 = g_m.
using Cycle = std::vector<ModeId>;

/// Every simple cycle of H with at least one jump between distinct modes
/// (self-loops are not switches). Each cycle starts and ends at its smallest
/// mode; the list is sorted by length, then lexicographically.
///
/// Johnson's algorithm restricted, for each start s, to the vertices >= s.
inline std::vector<Cycle> SimpleCycles(const SetValuedMap& h) {
  const std::vector<ModeId> vertices = h.Domain();
  std::vector<Cycle> out;

  for (ModeId s : vertices) {
    std::set<ModeId> blocked;
    std::map<ModeId, std::set<ModeId>> blocked_by;
    std::vector<ModeId> stack;

    std::function<void(ModeId)> unblock = [&](ModeId u) {
      blocked.erase(u);
      auto it = blocked_by.find(u);
      if (it == blocked_by.end()) return;
      std::set<ModeId> waiting = std::move(it->second);
      blocked_by.erase(it);
      for (ModeId w : waiting) {
        if (blocked.count(w)) unblock(w);
      }
    };

    std::function<bool(ModeId)> circuit = [&](ModeId v) {
      bool found = false;
      stack.push_back(v);
      blocked.insert(v);
      for (ModeId w : h.Successors(v)) {
        if (w < s || w == v) continue;
        if (w == s) {
          Cycle c = stack;
          c.push_back(s);
          out.push_back(std::move(c));
          found = true;
        } else if (!blocked.count(w) && circuit(w)) {
          found = true;
        }
      }
      if (found) {
        unblock(v);
      } else {
        for (ModeId w : h.Successors(v)) {
          if (w >= s && w != v) blocked_by[w].insert(v);
        }
      }
      stack.pop_back();
      return found;
    };

    circuit(s);
  }

  std::sort(out.begin(), out.end(), [](const Cycle& a, const Cycle& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

}  // namespace switchstab
