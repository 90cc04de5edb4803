// Copyright 2026 The gridtalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gridtalk/verbalizer.hpp"

#include <algorithm>
#include <regex>

#include "gridtalk/text.hpp"

namespace gridtalk::verbal {

using voxel::BlockColor;

namespace {

struct Item {
  BlockColor color;
  int count;
  int first_seen;
};

std::vector<Item> ordered_items(const voxel::VoxelWorld& world, int level) {
  std::vector<Item> items;
  int order = 0;
  for (int x = 0; x < voxel::kSizeX; ++x) {
    for (int z = 0; z < voxel::kSizeZ; ++z) {
      auto c = world.at({x, level, z});
      if (!c) continue;
      auto it = std::find_if(items.begin(), items.end(), [&](const Item& i) { return i.color == *c; });
      if (it == items.end()) {
        items.push_back({*c, 1, order++});
      } else {
        ++it->count;
      }
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.first_seen < b.first_seen;
  });
  return items;
}

std::string render_list(const std::vector<Item>& items) {
  std::vector<std::string> parts;
  for (const auto& i : items) {
    parts.push_back(std::to_string(i.count) + " " + std::string(voxel::color_name(i.color)));
  }
  std::string out;
  if (parts.size() == 1) {
    out = parts[0];
  } else if (parts.size() == 2) {
    out = parts[0] + " and " + parts[1];
  } else {
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) out += parts[i] + ", ";
    out += "and " + parts.back();
  }
  out += items.back().count == 1 ? " block" : " blocks";
  return out;
}

}  // namespace

std::vector<LevelSummary> level_histogram(const voxel::VoxelWorld& world) {
  std::vector<LevelSummary> out;
  for (int y = 0; y < voxel::kSizeY; ++y) {
    LevelSummary s{y, {}};
    for (int x = 0; x < voxel::kSizeX; ++x) {
      for (int z = 0; z < voxel::kSizeZ; ++z) {
        if (auto c = world.at({x, y, z})) ++s.counts[*c];
      }
    }
    if (!s.counts.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::string verbalize_world(const voxel::VoxelWorld& world) {
  int max_level = -1;
  int total = 0;
  for (const auto& p : world.blocks()) {
    max_level = std::max(max_level, p.y);
    ++total;
  }
  std::string out = "There are " + std::to_string(max_level + 1) + " levels. There are " +
                    std::to_string(total) + " different blocks.";
  for (int y = 0; y <= max_level; ++y) {
    auto items = ordered_items(world, y);
    if (items.empty()) continue;
    out += y == 0 ? " At level 0, there are " : " Above at level " + std::to_string(y) + ", there are ";
    out += render_list(items);
    out += ".";
  }
  return out;
}

std::vector<LevelSummary> parse_verbalization(std::string_view text) {
  static const std::regex kHeader(R"(^There are (\d+) levels\. There are (\d+) different blocks\.)");
  static const std::regex kLevel(
      R"(^ (?:At level (\d+)|Above at level (\d+)|Above the (\d+)(?:st|nd|rd|th) level), there are ([^.]+)\.)");
  static const std::regex kItem(R"(^(\d+) (blue|green|red|orange|purple|yellow)$)");

  std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, kHeader)) throw Error(Errc::ParseError, "missing level/block totals");
  const int levels = std::stoi(m[1]);
  const int total = std::stoi(m[2]);
  std::string rest = m.suffix();

  std::vector<LevelSummary> out;
  while (!rest.empty()) {
    if (!std::regex_search(rest, m, kLevel)) throw Error(Errc::ParseError, "unrecognized sentence: " + rest);
    int level = std::stoi(m[1].matched ? m[1].str() : m[2].matched ? m[2].str() : m[3].str());
    std::string list = m[4];
    rest = m.suffix();

    // Strip the trailing noun, then split "a, b, and c" / "a and b".
    for (std::string_view noun : {" blocks", " block"}) {
      if (list.size() > noun.size() && list.compare(list.size() - noun.size(), noun.size(), noun) == 0) {
        list.erase(list.size() - noun.size());
        break;
      }
    }
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (true) {
      auto comma = list.find(", ", start);
      if (comma == std::string::npos) {
        pieces.push_back(list.substr(start));
        break;
      }
      pieces.push_back(list.substr(start, comma - start));
      start = comma + 2;
    }
    if (!pieces.empty()) {
      auto& last = pieces.back();
      if (last.rfind("and ", 0) == 0) {
        last.erase(0, 4);
      } else if (auto pos = last.find(" and "); pos != std::string::npos) {
        std::string tail = last.substr(pos + 5);
        last.erase(pos);
        pieces.push_back(tail);
      }
    }

    LevelSummary summary{level, {}};
    for (const auto& piece : pieces) {
      std::smatch im;
      if (!std::regex_match(piece, im, kItem)) throw Error(Errc::ParseError, "bad list item: " + piece);
      summary.counts[*voxel::parse_color(im[2].str())] += std::stoi(im[1]);
    }
    out.push_back(std::move(summary));
  }

  int sum = 0;
  int max_level = -1;
  for (const auto& l : out) {
    for (const auto& [c, n] : l.counts) sum += n;
    max_level = std::max(max_level, l.level);
  }
  if (sum != total || max_level + 1 != levels) {
    throw Error(Errc::ParseError, "totals disagree with the per-level lists");
  }
  return out;
}

std::string state_line(const voxel::VoxelWorld& world, std::uint64_t seed) {
  std::map<BlockColor, int> counts;
  for (const auto& p : world.blocks()) ++counts[*world.at(p)];
  if (counts.empty()) throw Error(Errc::EmptyWorld, "no blocks to describe");
  Rng rng(seed);
  auto it = counts.begin();
  std::advance(it, static_cast<long>(rng.below(counts.size())));
  const auto [color, n] = *it;
  if (n == 1) return "state: There is one " + std::string(voxel::color_name(color)) + " block";
  return "state: There are " + count_word(static_cast<std::size_t>(n)) + " " +
         std::string(voxel::color_name(color)) + " blocks";
}

}  // namespace gridtalk::verbal
