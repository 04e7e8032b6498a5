#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spatialrel/scene.hpp"

namespace spatialrel {

/// The benchmark's relation phrases and the category each belongs to.
class VsrLexicon {
 public:
  struct Entry {
    std::string relation;
    std::string category;
  };

  VsrLexicon() = default;
  explicit VsrLexicon(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  /// 65 relations in 7 categories.
  static const VsrLexicon& builtin() {
    static const VsrLexicon lexicon = [] {
      std::vector<Entry> e;
      auto add = [&e](std::string_view category, std::initializer_list<std::string_view> relations) {
        for (auto r : relations) e.push_back({std::string(r), std::string(category)});
      };
      add("adjacency", {"adjacent to", "alongside", "at the side of", "at the right side of", "at the left side of",
                        "attached to", "at the back of", "ahead of", "against", "at the edge of"});
      add("directional", {"off", "past", "toward", "down", "away from", "along", "around", "into", "across",
                          "across from", "down from"});
      add("orientation", {"facing", "facing away from", "parallel to", "perpendicular to"});
      add("projective", {"on top of", "beneath", "beside", "behind", "left of", "right of", "under", "in front of",
                         "below", "above", "over", "in the middle of"});
      add("proximity", {"by", "close to", "near", "far from", "far away from"});
      add("topological", {"connected to", "detached from", "has as a part", "part of", "contains", "within", "at",
                          "on", "in", "with", "surrounding", "among", "consists of", "out of", "between", "inside",
                          "outside", "touching"});
      add("unallocated", {"beyond", "next to", "opposite to", "after", "enclosed by"});
      return VsrLexicon(std::move(e));
    }();
    return lexicon;
  }

  /// Reads "relation<TAB>category" lines; '#' starts a comment line.
  static VsrLexicon load_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open file");
    std::vector<Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 'relation<TAB>category'");
      }
      entries.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return VsrLexicon(std::move(entries));
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  bool contains(std::string_view relation) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.relation == relation; });
  }

  std::optional<std::string> category(std::string_view relation) const {
    for (const auto& e : entries_) {
      if (e.relation == relation) return e.category;
    }
    return std::nullopt;
  }

  std::vector<std::string> relations() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.relation);
    return out;
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace spatialrel
