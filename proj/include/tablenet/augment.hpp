#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tablenet/checker.hpp"
#include "tablenet/infill.hpp"
#include "tablenet/record.hpp"
#include "tablenet/rng.hpp"
#include "tablenet/table.hpp"

namespace tablenet {

struct SpanRegionMap {
  std::vector<bool> row_crossed;  // row i lies strictly inside some vertical span
  std::vector<bool> col_crossed;
  std::vector<Rect> merged;       // every cell with rowspan>1 or colspan>1
};

inline SpanRegionMap span_regions(const TableGrid& g) {
  SpanRegionMap m{std::vector<bool>(g.rows(), false), std::vector<bool>(g.cols(), false), {}};
  for (const Cell& c : g.cells()) {
    for (std::size_t r = c.row_start + 1; r < c.row_end(); ++r) m.row_crossed[r] = true;
    for (std::size_t k = c.col_start + 1; k < c.col_end(); ++k) m.col_crossed[k] = true;
    if (c.is_spanning()) m.merged.push_back(c.region());
  }
  return m;
}

enum class TransformOp { copy, del, swap, alter };
enum class TransformAxis { row, column, block };

NLOHMANN_JSON_SERIALIZE_ENUM(TransformOp, {{TransformOp::copy, "copy"},
                                           {TransformOp::del, "delete"},
                                           {TransformOp::swap, "swap"},
                                           {TransformOp::alter, "alter"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TransformAxis, {{TransformAxis::row, "row"},
                                             {TransformAxis::column, "column"},
                                             {TransformAxis::block, "block"}})

// indices by op and axis:
//   row/column: copy, delete -> {i}; swap -> {i, j}; alter (rows) -> {i...}
//   block: copy, delete, alter -> {begin, end}; swap -> {b1, e1, b2, e2}
// block_dim selects whether a block is a range of rows or of columns.
struct Transform {
  TransformOp op = TransformOp::copy;
  TransformAxis axis = TransformAxis::row;
  std::vector<std::size_t> indices;
  std::string payload;  // background color, alter only
  TransformAxis block_dim = TransformAxis::row;

  friend bool operator==(const Transform&, const Transform&) = default;
};

inline void to_json(json& j, const Transform& t) {
  j = json{{"op", t.op}, {"axis", t.axis}, {"indices", t.indices}};
  if (t.axis == TransformAxis::block) j["block_dim"] = t.block_dim;
  if (t.op == TransformOp::alter) j["payload"] = t.payload;
}

inline void from_json(const json& j, Transform& t) {
  t = Transform{};
  t.op = enum_from_string<TransformOp>(j.at("op").get<std::string>(), "transform op");
  t.axis = enum_from_string<TransformAxis>(j.at("axis").get<std::string>(), "transform axis");
  j.at("indices").get_to(t.indices);
  if (j.contains("block_dim")) {
    t.block_dim = enum_from_string<TransformAxis>(j.at("block_dim").get<std::string>(), "block_dim");
  }
  t.payload = j.value("payload", std::string{});
}

// Every rejection names the rectangle that blocks it.
class TransformError : public Error {
 public:
  TransformError(std::string kind, Rect blocking, const std::string& detail)
      : Error(kind, kind + ": " + detail + " (blocked by " + to_string(blocking) + ")"),
        blocking_(blocking),
        detail_(detail) {}
  const Rect& blocking() const noexcept { return blocking_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Rect blocking_;
  std::string detail_;
};

struct DeleteBreaksSpan : TransformError {
  DeleteBreaksSpan(Rect r, const std::string& d) : TransformError("DeleteBreaksSpan", r, d) {}
};
struct SwapIntersectsSpan : TransformError {
  SwapIntersectsSpan(Rect r, const std::string& d) : TransformError("SwapIntersectsSpan", r, d) {}
};
struct BlockStraddlesSpan : TransformError {
  BlockStraddlesSpan(Rect r, const std::string& d) : TransformError("BlockStraddlesSpan", r, d) {}
};
struct CopyStretchesOnly : TransformError {
  CopyStretchesOnly(Rect r, const std::string& d) : TransformError("CopyStretchesOnly", r, d) {}
};
struct OutOfBounds : TransformError {
  OutOfBounds(Rect r, const std::string& d) : TransformError("OutOfBounds", r, d) {}
};

namespace detail {

inline Rect whole(const TableGrid& g) { return {0, 0, g.rows(), g.cols()}; }

inline Rect transpose(const Rect& r) { return {r.col, r.row, r.cols, r.rows}; }

inline TableGrid transpose(const TableGrid& g) {
  std::vector<Cell> cells = g.cells();
  for (Cell& c : cells) {
    std::swap(c.row_start, c.col_start);
    std::swap(c.rowspan, c.colspan);
  }
  return TableGrid::build(g.cols(), g.rows(), std::move(cells));
}

struct Segment {
  std::size_t begin, end;
};

// Rebuilds the grid from source row ranges laid out in the given order. A
// cell must fit inside one range boundary-wise; cells inside ranges that are
// omitted disappear, cells inside ranges listed twice are duplicated.
template <typename Reject>
TableGrid relayout_rows(const TableGrid& g, const std::vector<Segment>& order, Reject reject) {
  std::set<std::size_t> cuts;
  for (const auto& s : order) {
    cuts.insert(s.begin);
    cuts.insert(s.end);
  }
  for (const Cell& c : g.cells()) {
    for (std::size_t p : cuts) {
      if (c.row_start < p && p < c.row_end()) reject(c.region());
    }
  }
  std::vector<Cell> cells;
  std::vector<std::string> fills;
  std::size_t offset = 0;
  for (const auto& s : order) {
    for (const Cell& c : g.cells()) {
      if (c.row_start >= s.begin && c.row_end() <= s.end) {
        Cell moved = c;
        moved.row_start = c.row_start - s.begin + offset;
        cells.push_back(std::move(moved));
      }
    }
    for (std::size_t r = s.begin; r < s.end; ++r) fills.push_back(g.row_fills()[r]);
    offset += s.end - s.begin;
  }
  return TableGrid::build(offset, g.cols(), std::move(cells), std::move(fills));
}

inline TableGrid copy_row(const TableGrid& g, std::size_t i) {
  std::vector<Cell> cells;
  bool duplicated = false;
  std::optional<Rect> stretched;
  for (const Cell& c : g.cells()) {
    Cell moved = c;
    if (c.row_start > i) {
      moved.row_start += 1;
    } else if (c.row_end() > i) {  // covers row i
      if (c.rowspan > 1) {
        moved.rowspan += 1;
        if (!stretched) stretched = c.region();
      } else {
        Cell dup = c;
        dup.row_start = i + 1;
        cells.push_back(std::move(dup));
        duplicated = true;
      }
    }
    cells.push_back(std::move(moved));
  }
  if (!duplicated) {
    throw CopyStretchesOnly(*stretched, "every cell of row " + std::to_string(i) +
                                            " spans vertically; copying would only stretch them");
  }
  std::vector<std::string> fills = g.row_fills();
  fills.insert(fills.begin() + static_cast<std::ptrdiff_t>(i) + 1, g.row_fills()[i]);
  return TableGrid::build(g.rows() + 1, g.cols(), std::move(cells), std::move(fills));
}

inline void require(bool ok, const TableGrid& g, const std::string& what) {
  if (!ok) throw OutOfBounds(whole(g), what);
}

// Row-direction form of every structural op; columns go through transpose.
inline TableGrid apply_rows(const TableGrid& g, const Transform& t, bool block) {
  const auto& ix = t.indices;
  const std::size_t n = g.rows();
  const auto in_range = [&](std::size_t b, std::size_t e) { return b < e && e <= n; };
  switch (t.op) {
    case TransformOp::copy:
      if (!block) {
        require(ix.size() == 1 && ix[0] < n, g, "copy needs one index inside the table");
        return copy_row(g, ix[0]);
      }
      require(ix.size() == 2 && in_range(ix[0], ix[1]) && ix[1] - ix[0] < n, g,
              "block copy needs a proper sub-range [begin, end)");
      return relayout_rows(g, {{0, ix[1]}, {ix[0], ix[1]}, {ix[1], n}}, [&](Rect r) {
        throw BlockStraddlesSpan(r, "span straddles the copied block boundary");
      });
    case TransformOp::del: {
      const std::size_t b = ix.empty() ? 0 : ix[0];
      const std::size_t e = block ? (ix.size() == 2 ? ix[1] : 0) : b + 1;
      require(!ix.empty() && ix.size() == (block ? 2u : 1u) && in_range(b, e), g,
              "delete operand outside the table");
      require(e - b < n, g, "delete would leave an empty table");
      return relayout_rows(g, {{0, b}, {e, n}}, [&](Rect r) {
        if (block) throw BlockStraddlesSpan(r, "span straddles the deleted block boundary");
        throw DeleteBreaksSpan(r, "deleting index " + std::to_string(b) + " would cut a span");
      });
    }
    case TransformOp::swap: {
      std::size_t b1, e1, b2, e2;
      if (block) {
        require(ix.size() == 4, g, "block swap needs {b1, e1, b2, e2}");
        b1 = ix[0]; e1 = ix[1]; b2 = ix[2]; e2 = ix[3];
        if (b2 < b1) {
          std::swap(b1, b2);
          std::swap(e1, e2);
        }
        require(in_range(b1, e1) && in_range(b2, e2) && e1 <= b2, g,
                "block swap needs two disjoint ranges inside the table");
      } else {
        require(ix.size() == 2 && ix[0] < n && ix[1] < n && ix[0] != ix[1], g,
                "swap needs two distinct indices inside the table");
        b1 = std::min(ix[0], ix[1]);
        b2 = std::max(ix[0], ix[1]);
        e1 = b1 + 1;
        e2 = b2 + 1;
      }
      return relayout_rows(g, {{0, b1}, {b2, e2}, {e1, b2}, {b1, e1}, {e2, n}}, [&](Rect r) {
        if (block) throw BlockStraddlesSpan(r, "span straddles a swapped block boundary");
        throw SwapIntersectsSpan(r, "swapped operand intersects a merged cell");
      });
    }
    case TransformOp::alter:
      break;
  }
  return g;
}

inline TableGrid apply_alter(const TableGrid& g, const Transform& t) {
  if (t.axis == TransformAxis::column ||
      (t.axis == TransformAxis::block && t.block_dim == TransformAxis::column)) {
    throw OutOfBounds(whole(g), "alter recolors rows only");
  }
  if (t.payload.empty()) throw OutOfBounds(whole(g), "alter needs a color payload");
  std::vector<std::size_t> rows = t.indices;
  if (t.axis == TransformAxis::block) {
    require(rows.size() == 2 && rows[0] < rows[1] && rows[1] <= g.rows(), g,
            "alter block needs [begin, end) inside the table");
    const std::size_t b = rows[0], e = rows[1];
    rows.clear();
    for (std::size_t r = b; r < e; ++r) rows.push_back(r);
  }
  require(!rows.empty(), g, "alter needs at least one row");
  TableGrid out = g;
  for (std::size_t r : rows) {
    require(r < g.rows(), g, "alter row " + std::to_string(r) + " outside the table");
    out = out.with_row_fill(r, t.payload);
  }
  return out;
}

}  // namespace detail

inline TableGrid apply_transform(const TableGrid& g, const Transform& t) {
  if (t.op == TransformOp::alter) return detail::apply_alter(g, t);
  const bool block = t.axis == TransformAxis::block;
  const bool columns = t.axis == TransformAxis::column ||
                       (block && t.block_dim == TransformAxis::column);
  if (block && t.block_dim == TransformAxis::block) {
    throw OutOfBounds(detail::whole(g), "block_dim must be row or column");
  }
  if (!columns) return detail::apply_rows(g, t, block);
  try {
    const TableGrid flipped = detail::apply_rows(detail::transpose(g), t, block);
    TableGrid back = detail::transpose(flipped);
    return TableGrid::build(back.rows(), back.cols(), back.cells(), g.row_fills());
  } catch (const TransformError& e) {
    // report the blocking rectangle in the caller's orientation
    const Rect r = detail::transpose(e.blocking());
    const std::string& kind = e.kind();
    const std::string& msg = e.detail();
    if (kind == "DeleteBreaksSpan") throw DeleteBreaksSpan(r, msg);
    if (kind == "SwapIntersectsSpan") throw SwapIntersectsSpan(r, msg);
    if (kind == "BlockStraddlesSpan") throw BlockStraddlesSpan(r, msg);
    if (kind == "CopyStretchesOnly") throw CopyStretchesOnly(r, msg);
    throw OutOfBounds(r, msg);
  }
}

struct FanoutOptions {
  std::string parent_id = "table";
  std::string topic;
  std::string domain = "telecommunication";
  Language language = Language::en;
  StyleSpec style;
};

namespace detail {

inline const std::vector<std::string>& alter_palette() {
  static const std::vector<std::string> kColors = {"#fff2cc", "#deebf7", "#e2f0d9", "#fbe5d6",
                                                   "#ededed", "#f4e1ff"};
  return kColors;
}

// Lanes (rows or columns) whose cells are all body cells come first.
inline std::vector<std::size_t> lane_order(const TableGrid& g, bool columns, Rng& rng) {
  const std::size_t n = columns ? g.cols() : g.rows();
  std::vector<std::size_t> body, header;
  for (std::size_t i = 0; i < n; ++i) {
    bool all_body = true;
    const std::size_t m = columns ? g.rows() : g.cols();
    for (std::size_t k = 0; k < m; ++k) {
      if ((columns ? g.at(k, i) : g.at(i, k)).is_header) all_body = false;
    }
    (all_body ? body : header).push_back(i);
  }
  rng.shuffle(body);
  rng.shuffle(header);
  body.insert(body.end(), header.begin(), header.end());
  return body;
}

inline std::optional<std::pair<Transform, TableGrid>> try_structural(const TableGrid& g,
                                                                     TransformOp op, Rng& rng) {
  std::vector<bool> axes = {false, true};
  if (rng.chance(0.5)) std::swap(axes[0], axes[1]);
  for (bool columns : axes) {
    const auto lanes = lane_order(g, columns, rng);
    for (std::size_t a = 0; a < lanes.size(); ++a) {
      Transform t;
      t.op = op;
      t.axis = columns ? TransformAxis::column : TransformAxis::row;
      if (op == TransformOp::swap) {
        bool done = false;
        for (std::size_t b = a + 1; b < lanes.size() && !done; ++b) {
          t.indices = {lanes[a], lanes[b]};
          try {
            return std::pair{t, apply_transform(g, t)};
          } catch (const TransformError&) {
          }
        }
        continue;
      }
      t.indices = {lanes[a]};
      try {
        return std::pair{t, apply_transform(g, t)};
      } catch (const TransformError&) {
      }
    }
  }
  return std::nullopt;
}

inline std::pair<Transform, TableGrid> make_alter(const TableGrid& g, Rng& rng) {
  Transform t;
  t.op = TransformOp::alter;
  t.axis = TransformAxis::row;
  const auto lanes = lane_order(g, false, rng);
  t.indices = {lanes.front()};
  t.payload = rng.pick(alter_palette());
  return {t, apply_transform(g, t)};
}

}  // namespace detail

// Five untransformed content variants plus one copy, delete, swap and alter
// variant. A structural op that no operand admits degrades to alter.
inline std::vector<AnnotationRecord> variant_fanout(std::string_view skeleton_html,
                                                    const ContentProvider& provider, Rng& rng,
                                                    const FanoutOptions& opt = {}) {
  const TableGrid skeleton = html_to_grid(skeleton_html);
  std::string headed(skeleton_html);
  const bool headers_blank = std::any_of(skeleton.cells().begin(), skeleton.cells().end(),
                                         [](const Cell& c) { return c.is_header && c.content.empty(); });
  if (headers_blank) headed = provider.fill_headers(headed, opt.topic, opt.domain, opt.language);
  const auto bodies =
      provider.fill_bodies(headed, opt.topic, opt.domain, opt.language, kDefaultBodyVariants);
  if (bodies.size() < kDefaultBodyVariants) {
    throw ResponseFormatError("provider returned fewer than 9 body variants");
  }
  std::vector<AnnotationRecord> out;
  const auto id = [&](std::size_t k) { return opt.parent_id + "-v" + std::to_string(k); };
  for (std::size_t k = 0; k < 5; ++k) {
    const TableGrid filled = html_to_grid(bodies[k]);
    AnnotationRecord r = make_record(id(k), filled, opt.style, opt.topic, opt.language);
    r.provenance = Provenance{opt.parent_id, nullptr};
    out.push_back(std::move(r));
  }
  const TransformOp ops[] = {TransformOp::copy, TransformOp::del, TransformOp::swap,
                             TransformOp::alter};
  for (std::size_t k = 0; k < 4; ++k) {
    const TableGrid filled = html_to_grid(bodies[5 + k]);
    std::optional<std::pair<Transform, TableGrid>> result;
    if (ops[k] != TransformOp::alter) result = detail::try_structural(filled, ops[k], rng);
    if (!result) result = detail::make_alter(filled, rng);
    AnnotationRecord r = make_record(id(5 + k), result->second, opt.style, opt.topic, opt.language);
    r.provenance = Provenance{opt.parent_id, json(result->first)};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tablenet
