#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tablenet/error.hpp"
#include "tablenet/html.hpp"

namespace tablenet {

enum class HeaderLayout { horizontal, vertical, matrix };

enum class LineStyle {
  fully_lined,
  horizontally_lineless,
  vertically_lineless,
  lined_headers_only,
  lineless
};

inline constexpr std::array<LineStyle, 5> kLineStyles = {
    LineStyle::fully_lined, LineStyle::horizontally_lineless, LineStyle::vertically_lineless,
    LineStyle::lined_headers_only, LineStyle::lineless};

inline constexpr std::array<HeaderLayout, 3> kHeaderLayouts = {
    HeaderLayout::horizontal, HeaderLayout::vertical, HeaderLayout::matrix};

inline std::string_view to_string(HeaderLayout layout) {
  switch (layout) {
    case HeaderLayout::horizontal: return "horizontal";
    case HeaderLayout::vertical: return "vertical";
    case HeaderLayout::matrix: return "matrix";
  }
  return "vertical";
}

inline std::string_view to_string(LineStyle style) {
  switch (style) {
    case LineStyle::fully_lined: return "fully_lined";
    case LineStyle::horizontally_lineless: return "horizontally_lineless";
    case LineStyle::vertically_lineless: return "vertically_lineless";
    case LineStyle::lined_headers_only: return "lined_headers_only";
    case LineStyle::lineless: return "lineless";
  }
  return "fully_lined";
}

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

inline constexpr std::string_view kDefaultFontColor = "#000000";
inline constexpr std::string_view kDefaultBorderColor = "#000000";

struct StyleSpec {
  LineStyle line_style = LineStyle::fully_lined;
  int border_thickness = 1;
  std::string font_color = std::string(kDefaultFontColor);
  std::string border_color = std::string(kDefaultBorderColor);
  std::string header_background;  // empty: no fill
  std::string body_background;
  bool zebra = false;
  std::string zebra_color;
  std::string font_family = "Arial";
  int font_size_px = 14;

  // True iff any non-default background, border or font color is set.
  bool is_colored() const {
    return font_color != kDefaultFontColor || border_color != kDefaultBorderColor ||
           !header_background.empty() || !body_background.empty() ||
           (zebra && !zebra_color.empty());
  }

  bool is_lined() const { return line_style == LineStyle::fully_lined; }

  friend bool operator==(const StyleSpec&, const StyleSpec&) = default;
};

// Logical blueprint of a table. Span matrices use anchor encoding: the entry
// at an anchor is the cell's extent, positions absorbed by a span hold 0.
struct TableSchema {
  std::size_t n_rows = 1;
  std::size_t n_cols = 1;
  Matrix<int> row_spans;
  Matrix<int> col_spans;
  HeaderLayout header_layout = HeaderLayout::vertical;
  std::size_t header_rows = 1;  // depth of the top header band (vertical, matrix)
  std::size_t header_cols = 1;  // depth of the left header band (horizontal, matrix)
  StyleSpec style;

  static TableSchema unit(std::size_t rows, std::size_t cols,
                          HeaderLayout layout = HeaderLayout::vertical) {
    TableSchema s;
    s.n_rows = rows;
    s.n_cols = cols;
    s.row_spans = Matrix<int>(rows, cols, 1);
    s.col_spans = Matrix<int>(rows, cols, 1);
    s.header_layout = layout;
    return s;
  }

  bool has_top_band() const { return header_layout != HeaderLayout::horizontal; }
  bool has_left_band() const { return header_layout != HeaderLayout::vertical; }

  friend bool operator==(const TableSchema&, const TableSchema&) = default;
};

struct Rect {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t rows = 1;
  std::size_t cols = 1;

  bool contains(std::size_t r, std::size_t c) const {
    return r >= row && r < row + rows && c >= col && c < col + cols;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline std::string to_string(const Rect& r) {
  return "[" + std::to_string(r.row) + "," + std::to_string(r.row + r.rows) + ")x[" +
         std::to_string(r.col) + "," + std::to_string(r.col + r.cols) + ")";
}

struct Cell {
  std::size_t row_start = 0;
  std::size_t col_start = 0;
  std::size_t rowspan = 1;
  std::size_t colspan = 1;
  bool is_header = false;
  std::string content;

  Rect region() const { return {row_start, col_start, rowspan, colspan}; }
  bool is_spanning() const { return rowspan > 1 || colspan > 1; }
  std::size_t row_end() const { return row_start + rowspan; }
  std::size_t col_end() const { return col_start + colspan; }

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Occupancy-resolved table. Cells are kept in row-major anchor order, which is
// also their document order in emitted HTML.
class TableGrid {
 public:
  TableGrid() = default;

  // Throws std::invalid_argument unless the cells tile rows x cols exactly.
  static TableGrid build(std::size_t rows, std::size_t cols, std::vector<Cell> cells,
                         std::vector<std::string> row_fills = {}) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("grid dimensions must be positive");
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      return std::pair(a.row_start, a.col_start) < std::pair(b.row_start, b.col_start);
    });
    constexpr std::size_t kEmpty = SIZE_MAX;
    Matrix<std::size_t> occ(rows, cols, kEmpty);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const Cell& c = cells[i];
      if (c.rowspan == 0 || c.colspan == 0 || c.row_end() > rows || c.col_end() > cols) {
        throw std::invalid_argument("cell " + to_string(c.region()) + " outside grid");
      }
      for (std::size_t r = c.row_start; r < c.row_end(); ++r) {
        for (std::size_t k = c.col_start; k < c.col_end(); ++k) {
          if (occ(r, k) != kEmpty) {
            throw std::invalid_argument("cells overlap at (" + std::to_string(r) + "," +
                                        std::to_string(k) + ")");
          }
          occ(r, k) = i;
        }
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < cols; ++k) {
        if (occ(r, k) == kEmpty) {
          throw std::invalid_argument("hole at (" + std::to_string(r) + "," +
                                      std::to_string(k) + ")");
        }
      }
    }
    row_fills.resize(rows);
    TableGrid g;
    g.n_rows_ = rows;
    g.n_cols_ = cols;
    g.cells_ = std::move(cells);
    g.occupancy_ = std::move(occ);
    g.row_fills_ = std::move(row_fills);
    return g;
  }

  std::size_t rows() const noexcept { return n_rows_; }
  std::size_t cols() const noexcept { return n_cols_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const Cell& cell(std::size_t index) const { return cells_.at(index); }
  std::size_t index_at(std::size_t r, std::size_t c) const { return occupancy_(r, c); }
  const Cell& at(std::size_t r, std::size_t c) const { return cells_[occupancy_(r, c)]; }
  const Matrix<std::size_t>& occupancy() const noexcept { return occupancy_; }

  // Per-row background override (empty string: none). Visual only.
  const std::vector<std::string>& row_fills() const noexcept { return row_fills_; }

  bool has_row_fills() const {
    return std::any_of(row_fills_.begin(), row_fills_.end(),
                       [](const std::string& f) { return !f.empty(); });
  }

  TableGrid with_contents(const std::vector<std::string>& contents) const {
    TableGrid g = *this;
    for (std::size_t i = 0; i < g.cells_.size() && i < contents.size(); ++i) {
      g.cells_[i].content = contents[i];
    }
    return g;
  }

  TableGrid without_contents() const {
    TableGrid g = *this;
    for (auto& c : g.cells_) c.content.clear();
    return g;
  }

  TableGrid with_row_fill(std::size_t row, std::string color) const {
    TableGrid g = *this;
    g.row_fills_.at(row) = std::move(color);
    return g;
  }

  // Equality of dimensions, spans, header flags and (optionally) contents.
  bool same_structure(const TableGrid& other, bool compare_content = true) const {
    if (n_rows_ != other.n_rows_ || n_cols_ != other.n_cols_) return false;
    if (cells_.size() != other.cells_.size()) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      const Cell& a = cells_[i];
      const Cell& b = other.cells_[i];
      if (a.region() != b.region() || a.is_header != b.is_header) return false;
      if (compare_content && a.content != b.content) return false;
    }
    return true;
  }

  friend bool operator==(const TableGrid&, const TableGrid&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<Cell> cells_;
  Matrix<std::size_t> occupancy_;
  std::vector<std::string> row_fills_;
};

// Checks the tiling and header-band invariants. Throws SchemaError naming the
// first conflicting anchor in row-major order.
inline void validate_schema(const TableSchema& s) {
  if (s.n_rows == 0 || s.n_cols == 0) throw SchemaError(0, 0, "dimensions must be positive");
  if (s.row_spans.rows() != s.n_rows || s.row_spans.cols() != s.n_cols ||
      s.col_spans.rows() != s.n_rows || s.col_spans.cols() != s.n_cols) {
    throw SchemaError(0, 0, "span matrices must be " + std::to_string(s.n_rows) + "x" +
                                std::to_string(s.n_cols));
  }
  Matrix<unsigned char> covered(s.n_rows, s.n_cols, 0);
  for (std::size_t r = 0; r < s.n_rows; ++r) {
    for (std::size_t c = 0; c < s.n_cols; ++c) {
      const int rs = s.row_spans(r, c);
      const int cs = s.col_spans(r, c);
      if (rs < 0 || cs < 0) throw SchemaError(r, c, "negative span");
      if (rs == 0 && cs == 0) continue;  // absorbed position
      if (rs == 0 || cs == 0) throw SchemaError(r, c, "row and column span must both be 0 or both positive");
      if (r + rs > s.n_rows) throw SchemaError(r, c, "rowspan " + std::to_string(rs) + " exceeds remaining rows");
      if (c + cs > s.n_cols) throw SchemaError(r, c, "colspan " + std::to_string(cs) + " exceeds remaining columns");
      for (std::size_t rr = r; rr < r + rs; ++rr) {
        for (std::size_t cc = c; cc < c + cs; ++cc) {
          if (covered(rr, cc)) {
            throw SchemaError(r, c, "overlaps a span at (" + std::to_string(rr) + "," + std::to_string(cc) + ")");
          }
          if ((rr != r || cc != c) && (s.row_spans(rr, cc) != 0 || s.col_spans(rr, cc) != 0)) {
            throw SchemaError(r, c, "absorbs anchor (" + std::to_string(rr) + "," + std::to_string(cc) + ")");
          }
          covered(rr, cc) = 1;
        }
      }
      const auto crosses = [](std::size_t start, std::size_t extent, std::size_t boundary) {
        return start < boundary && boundary < start + extent;
      };
      if (s.has_top_band() && crosses(r, static_cast<std::size_t>(rs), s.header_rows)) {
        throw SchemaError(r, c, "rowspan crosses the header band boundary");
      }
      if (s.has_left_band() && crosses(c, static_cast<std::size_t>(cs), s.header_cols)) {
        throw SchemaError(r, c, "colspan crosses the header band boundary");
      }
    }
  }
  for (std::size_t r = 0; r < s.n_rows; ++r) {
    for (std::size_t c = 0; c < s.n_cols; ++c) {
      if (!covered(r, c)) throw SchemaError(r, c, "position not covered by any anchor");
    }
  }
  if (s.has_top_band() && (s.header_rows == 0 || s.header_rows > s.n_rows)) {
    throw SchemaError(0, 0, "header_rows out of range");
  }
  if (s.has_left_band() && (s.header_cols == 0 || s.header_cols > s.n_cols)) {
    throw SchemaError(0, 0, "header_cols out of range");
  }
  // A vertical/horizontal band covering the whole table would read back as matrix.
  if (s.header_layout == HeaderLayout::vertical && s.header_rows >= s.n_rows) {
    throw SchemaError(0, 0, "vertical layout needs at least one body row");
  }
  if (s.header_layout == HeaderLayout::horizontal && s.header_cols >= s.n_cols) {
    throw SchemaError(0, 0, "horizontal layout needs at least one body column");
  }
}

inline TableGrid grid_from_schema(const TableSchema& s) {
  validate_schema(s);
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < s.n_rows; ++r) {
    for (std::size_t c = 0; c < s.n_cols; ++c) {
      if (s.row_spans(r, c) == 0) continue;
      Cell cell;
      cell.row_start = r;
      cell.col_start = c;
      cell.rowspan = static_cast<std::size_t>(s.row_spans(r, c));
      cell.colspan = static_cast<std::size_t>(s.col_spans(r, c));
      cell.is_header = (s.has_top_band() && r < s.header_rows) ||
                       (s.has_left_band() && c < s.header_cols);
      cells.push_back(std::move(cell));
    }
  }
  return TableGrid::build(s.n_rows, s.n_cols, std::move(cells));
}

// Inverse of grid_from_schema for the span matrices.
inline std::pair<Matrix<int>, Matrix<int>> span_matrices(const TableGrid& g) {
  Matrix<int> rs(g.rows(), g.cols(), 0);
  Matrix<int> cs(g.rows(), g.cols(), 0);
  for (const Cell& c : g.cells()) {
    rs(c.row_start, c.col_start) = static_cast<int>(c.rowspan);
    cs(c.row_start, c.col_start) = static_cast<int>(c.colspan);
  }
  return {std::move(rs), std::move(cs)};
}

// Number of leading rows that form a pure header band: every cell covering
// them is a header and no cell crosses the band's lower boundary.
inline std::size_t top_header_rows(const TableGrid& g) {
  for (std::size_t h = g.rows(); h >= 1; --h) {
    bool ok = true;
    for (const Cell& c : g.cells()) {
      if (c.row_start < h && !c.is_header) ok = false;
      if (c.row_start < h && h < c.row_end()) ok = false;
      if (!ok) break;
    }
    if (ok) return h;
  }
  return 0;
}

inline std::size_t left_header_cols(const TableGrid& g) {
  for (std::size_t w = g.cols(); w >= 1; --w) {
    bool ok = true;
    for (const Cell& c : g.cells()) {
      if (c.col_start < w && !c.is_header) ok = false;
      if (c.col_start < w && w < c.col_end()) ok = false;
      if (!ok) break;
    }
    if (ok) return w;
  }
  return 0;
}

inline HeaderLayout infer_header_layout(const TableGrid& g) {
  bool top = true;
  bool left = true;
  for (const Cell& c : g.cells()) {
    if (c.row_start == 0 && !c.is_header) top = false;
    if (c.col_start == 0 && !c.is_header) left = false;
  }
  if (top && left) return HeaderLayout::matrix;
  if (left) return HeaderLayout::horizontal;
  return HeaderLayout::vertical;
}

namespace detail {

inline std::string border_rules(const StyleSpec& s) {
  const std::string line =
      std::to_string(s.border_thickness) + "px solid " + s.border_color;
  switch (s.line_style) {
    case LineStyle::fully_lined:
      return "table{border:" + line + ";}th,td{border:" + line + ";}";
    case LineStyle::horizontally_lineless:
      return "th,td{border-left:" + line + ";border-right:" + line +
             ";border-top:none;border-bottom:none;}";
    case LineStyle::vertically_lineless:
      return "th,td{border-top:" + line + ";border-bottom:" + line +
             ";border-left:none;border-right:none;}";
    case LineStyle::lined_headers_only:
      return "th{border:" + line + ";}td{border:none;}";
    case LineStyle::lineless:
      return "th,td{border:none;}";
  }
  return {};
}

inline std::string row_selector(std::size_t row, std::size_t band) {
  if (band == 0) return "tr:nth-child(" + std::to_string(row + 1) + ")";
  if (row < band) return "thead>tr:nth-child(" + std::to_string(row + 1) + ")";
  return "tbody>tr:nth-child(" + std::to_string(row - band + 1) + ")";
}

inline std::string css(const TableGrid& g, const StyleSpec& s, std::size_t band) {
  std::string out = "table{border-collapse:collapse;font-family:" + s.font_family +
                    ";font-size:" + std::to_string(s.font_size_px) + "px;color:" +
                    s.font_color + ";}th,td{padding:4px 8px;}th{font-weight:bold;}";
  out += border_rules(s);
  if (!s.header_background.empty()) out += "th{background-color:" + s.header_background + ";}";
  if (!s.body_background.empty()) out += "td{background-color:" + s.body_background + ";}";
  if (s.zebra && !s.zebra_color.empty()) {
    out += std::string(band == 0 ? "" : "tbody>") + "tr:nth-child(even)>td{background-color:" +
           s.zebra_color + ";}";
  }
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const std::string& fill = g.row_fills()[r];
    if (fill.empty()) continue;
    const std::string sel = row_selector(r, band);
    out += sel + ">th," + sel + ">td{background-color:" + fill + ";}";
  }
  return out;
}

inline std::string open_cell_tag(const Cell& c) {
  std::string tag = c.is_header ? "<th" : "<td";
  if (c.rowspan > 1) tag += " rowspan=\"" + std::to_string(c.rowspan) + "\"";
  if (c.colspan > 1) tag += " colspan=\"" + std::to_string(c.colspan) + "\"";
  tag += ">";
  return tag;
}

// Emits the table element as a token list; texts are appended to `cell_text`
// callbacks so both the full HTML and the structure tokens share one walk.
template <typename OnTag, typename OnCell>
void walk_table(const TableGrid& g, OnTag&& on_tag, OnCell&& on_cell) {
  const std::size_t band = top_header_rows(g);
  on_tag("<table>");
  std::size_t next = 0;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    if (band > 0 && r == 0) on_tag("<thead>");
    if (band > 0 && r == band) on_tag("<tbody>");
    on_tag("<tr>");
    while (next < g.cells().size() && g.cells()[next].row_start == r) {
      const Cell& c = g.cells()[next++];
      on_tag(open_cell_tag(c));
      on_cell(c);
      on_tag(c.is_header ? "</th>" : "</td>");
    }
    on_tag("</tr>");
    if (band > 0 && r + 1 == band) on_tag("</thead>");
  }
  if (band > 0 && band < g.rows()) on_tag("</tbody>");
  on_tag("</table>");
}

}  // namespace detail

inline std::string table_markup(const TableGrid& g) {
  std::string out;
  detail::walk_table(
      g, [&](std::string_view tag) { out += tag; },
      [&](const Cell& c) { out += html::escape_text(c.content); });
  return out;
}

inline std::string grid_to_html(const TableGrid& g, const StyleSpec& style) {
  std::string out = "<!DOCTYPE html><html><head><meta charset=\"utf-8\"><style>";
  out += detail::css(g, style, top_header_rows(g));
  out += "</style></head><body>";
  out += table_markup(g);
  out += "</body></html>";
  return out;
}

inline std::vector<std::string> structure_tokens(const TableGrid& g) {
  std::vector<std::string> tokens;
  detail::walk_table(
      g, [&](std::string_view tag) { tokens.emplace_back(tag); }, [](const Cell&) {});
  return tokens;
}

// ---------------------------------------------------------------------------
// Parsing

enum class DefectKind {
  ragged_rows,
  overlapping_spans,
  span_out_of_bounds,
  disallowed_tag,
  empty_structure,
  missing_table
};

inline std::string_view to_string(DefectKind kind) {
  switch (kind) {
    case DefectKind::ragged_rows: return "RaggedRows";
    case DefectKind::overlapping_spans: return "OverlappingSpans";
    case DefectKind::span_out_of_bounds: return "SpanOutOfBounds";
    case DefectKind::disallowed_tag: return "DisallowedTag";
    case DefectKind::empty_structure: return "EmptyStructure";
    case DefectKind::missing_table: return "MissingTable";
  }
  return "DisallowedTag";
}

struct Defect {
  DefectKind kind;
  std::string location;
  std::string detail;
};

class TableParseError : public Error {
 public:
  explicit TableParseError(Defect defect)
      : Error(std::string(to_string(defect.kind)),
              std::string(to_string(defect.kind)) + " at " + defect.location + ": " +
                  defect.detail),
        defect_(std::move(defect)) {}

  DefectKind defect_kind() const noexcept { return defect_.kind; }
  const Defect& defect() const noexcept { return defect_; }

 private:
  Defect defect_;
};

// Byte range of a cell's inner markup inside the analysed document.
struct CellSlice {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct TableAnalysis {
  std::vector<Defect> defects;
  std::optional<TableGrid> grid;  // set iff defects is empty
  std::vector<std::size_t> row_widths;  // occupied slots per <tr>
  std::size_t cell_count = 0;
  std::vector<CellSlice> cell_slices;  // document order, parallel to grid cells
  std::size_t table_begin = 0;
  std::size_t table_end = 0;

  bool valid() const { return defects.empty(); }
};

namespace detail {

struct RawCell {
  std::size_t rowspan = 1;
  std::size_t colspan = 1;
  bool is_header = false;
  std::string text;
  CellSlice slice;
};

inline std::optional<std::size_t> parse_span(std::string_view value) {
  if (value.empty() || value.size() > 4) return std::nullopt;
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (ec != std::errc{} || ptr != value.data() + value.size() || n == 0) return std::nullopt;
  return n;
}

inline bool allowed_child(std::string_view parent, std::string_view child) {
  if (parent == "table") return child == "thead" || child == "tbody" || child == "tr";
  if (parent == "thead" || parent == "tbody") return child == "tr";
  if (parent == "tr") return child == "td" || child == "th";
  return false;
}

inline bool whitelisted(std::string_view name) {
  return name == "thead" || name == "tbody" || name == "tr" || name == "td" || name == "th";
}

}  // namespace detail

// Parses the first table of a document, collecting every defect rather than
// stopping at the first. Malformed markup is reported, never repaired.
inline TableAnalysis analyze_table(std::string_view document) {
  using html::TokenKind;
  TableAnalysis result;
  const auto tokens = html::tokenize(document);

  std::size_t start = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::start_tag && tokens[i].name == "table") {
      start = i;
      break;
    }
  }
  if (start == tokens.size()) {
    result.defects.push_back({DefectKind::missing_table, "document", "no <table> element"});
    return result;
  }
  result.table_begin = tokens[start].offset;
  result.table_end = document.size();

  struct Open {
    std::string name;
    bool allowed;
  };
  std::vector<Open> stack{{"table", true}};
  std::vector<std::vector<detail::RawCell>> rows;
  std::optional<detail::RawCell> cell;
  bool in_row = false;
  std::size_t tr_count = 0;

  auto defect = [&](DefectKind kind, std::string detail) {
    const std::string where = "row " + std::to_string(tr_count == 0 ? 0 : tr_count - 1);
    result.defects.push_back({kind, where, std::move(detail)});
  };
  auto current_allowed = [&]() -> const std::string& {
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      if (it->allowed) return it->name;
    }
    return stack.front().name;
  };
  auto close_allowed = [&](const std::string& name, std::size_t at) {
    if (name == "td" || name == "th") {
      if (cell) {
        cell->slice.end = at;
        if (rows.empty()) rows.emplace_back();
        rows.back().push_back(std::move(*cell));
        cell.reset();
      }
    } else if (name == "tr") {
      in_row = false;
    }
  };
  // Pops up to and including the topmost element named `name`; intervening
  // allowed elements were never closed explicitly.
  auto pop_to = [&](std::size_t depth, std::size_t at, bool explicit_close) {
    while (stack.size() > depth) {
      Open top = std::move(stack.back());
      stack.pop_back();
      const bool is_target = stack.size() == depth;
      if (top.allowed) {
        if (!is_target || !explicit_close) {
          defect(DefectKind::disallowed_tag, "missing </" + top.name + ">");
        }
        close_allowed(top.name, at);
      }
    }
  };
  auto open_row = [&](std::size_t at) {
    (void)at;
    rows.emplace_back();
    in_row = true;
    ++tr_count;
  };

  std::size_t i = start + 1;
  for (; i < tokens.size() && !stack.empty(); ++i) {
    const html::Token& t = tokens[i];
    if (t.kind == TokenKind::text) {
      const std::string& ctx = current_allowed();
      if (ctx == "td" || ctx == "th") {
        if (cell) cell->text += t.text;
      } else if (!html::is_blank(t.text)) {
        defect(DefectKind::disallowed_tag, "text outside a cell inside <" + ctx + ">");
      }
      continue;
    }
    if (t.kind == TokenKind::start_tag) {
      if (!detail::whitelisted(t.name)) {
        defect(DefectKind::disallowed_tag, "<" + t.name + "> is not allowed in a table");
        if (!t.self_closing && !html::is_void_element(t.name)) stack.push_back({t.name, false});
        continue;
      }
      // Find the nearest open allowed ancestor that accepts this tag,
      // implicitly closing whatever lies above it.
      std::size_t depth = stack.size();
      while (depth > 0 && !(stack[depth - 1].allowed &&
                            detail::allowed_child(stack[depth - 1].name, t.name))) {
        --depth;
      }
      if (depth == 0) {
        defect(DefectKind::disallowed_tag, "<" + t.name + "> misplaced");
        continue;
      }
      if (depth != stack.size()) {
        defect(DefectKind::disallowed_tag,
               "<" + t.name + "> inside <" + current_allowed() + ">");
        pop_to(depth, t.offset, false);
      }
      if (t.name == "td" || t.name == "th") {
        if (!in_row) {
          defect(DefectKind::disallowed_tag, "<" + t.name + "> outside <tr>");
          open_row(t.offset);
        }
        detail::RawCell raw;
        raw.is_header = t.name == "th";
        for (const auto& attr : t.attributes) {
          if (attr.name != "rowspan" && attr.name != "colspan") continue;
          const auto n = detail::parse_span(attr.value);
          if (!n) {
            defect(DefectKind::disallowed_tag,
                   "invalid " + attr.name + " value '" + attr.value + "'");
            continue;
          }
          (attr.name == "rowspan" ? raw.rowspan : raw.colspan) = *n;
        }
        raw.slice.begin = t.offset + t.length;
        cell = std::move(raw);
        if (t.self_closing) {
          close_allowed(t.name, t.offset + t.length);
          cell.reset();
          rows.back().back().slice.end = rows.back().back().slice.begin;
        } else {
          stack.push_back({t.name, true});
        }
      } else if (t.name == "tr") {
        open_row(t.offset);
        if (t.self_closing) {
          in_row = false;
        } else {
          stack.push_back({t.name, true});
        }
      } else if (!t.self_closing) {
        stack.push_back({t.name, true});
      }
      continue;
    }
    // end tag
    std::size_t depth = stack.size();
    while (depth > 0 && stack[depth - 1].name != t.name) --depth;
    if (depth == 0) {
      defect(DefectKind::disallowed_tag, "stray </" + t.name + ">");
      continue;
    }
    pop_to(depth - 1, t.offset, true);
    if (stack.empty()) result.table_end = t.offset + t.length;
  }
  if (!stack.empty()) pop_to(0, document.size(), false);

  // Slot placement.
  const std::size_t n_rows = rows.size();
  std::vector<std::vector<bool>> occupied(n_rows);
  std::vector<Cell> placed;
  bool out_of_bounds = false;
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t col = 0;
    for (auto& raw : rows[r]) {
      ++result.cell_count;
      while (col < occupied[r].size() && occupied[r][col]) ++col;
      Cell c;
      c.row_start = r;
      c.col_start = col;
      c.rowspan = raw.rowspan;
      c.colspan = raw.colspan;
      c.is_header = raw.is_header;
      c.content = html::normalize_space(html::decode_entities(raw.text));
      if (r + raw.rowspan > n_rows) {
        out_of_bounds = true;
        result.defects.push_back({DefectKind::span_out_of_bounds, "row " + std::to_string(r),
                                  "rowspan " + std::to_string(raw.rowspan) + " at column " +
                                      std::to_string(col) + " exceeds " +
                                      std::to_string(n_rows) + " rows"});
      }
      bool overlap = false;
      for (std::size_t rr = r; rr < std::min(n_rows, r + raw.rowspan); ++rr) {
        if (occupied[rr].size() < col + raw.colspan) occupied[rr].resize(col + raw.colspan, false);
        for (std::size_t cc = col; cc < col + raw.colspan; ++cc) {
          if (occupied[rr][cc]) overlap = true;
          occupied[rr][cc] = true;
        }
      }
      if (overlap) {
        result.defects.push_back({DefectKind::overlapping_spans, "row " + std::to_string(r),
                                  "cell " + to_string(c.region()) + " overlaps another cell"});
      }
      col += raw.colspan;
      result.cell_slices.push_back(raw.slice);
      placed.push_back(std::move(c));
    }
  }

  std::size_t n_cols = 0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto w = static_cast<std::size_t>(std::count(occupied[r].begin(), occupied[r].end(), true));
    result.row_widths.push_back(w);
    n_cols = std::max(n_cols, w);
  }
  if (n_rows == 0 || result.cell_count == 0) {
    result.defects.push_back({DefectKind::empty_structure, "table", "table has no cells"});
    return result;
  }
  std::vector<std::size_t> ragged;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const bool holes = result.row_widths[r] != occupied[r].size();
    if (result.row_widths[r] != n_cols || holes) ragged.push_back(r);
  }
  if (!ragged.empty()) {
    std::string detail = "logical widths";
    for (std::size_t r = 0; r < n_rows; ++r) {
      detail += (r == 0 ? " " : ",") + std::to_string(result.row_widths[r]);
    }
    std::string where = "rows";
    for (std::size_t r : ragged) where += " " + std::to_string(r);
    result.defects.push_back({DefectKind::ragged_rows, where, detail});
  }
  if (result.defects.empty() && !out_of_bounds) {
    result.grid = TableGrid::build(n_rows, n_cols, std::move(placed));
  }
  return result;
}

inline TableGrid html_to_grid(std::string_view document) {
  TableAnalysis a = analyze_table(document);
  if (!a.valid()) throw TableParseError(a.defects.front());
  return std::move(*a.grid);
}

// Replaces the inner text of cells of a valid table, in document order; a
// nullopt entry keeps that cell as is. Everything outside the cell bodies is
// copied byte for byte.
inline std::string rewrite_cells(std::string_view document,
                                 const std::vector<std::optional<std::string>>& contents) {
  const TableAnalysis a = analyze_table(document);
  if (!a.valid()) throw TableParseError(a.defects.front());
  std::string out;
  out.reserve(document.size() + 64 * contents.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < a.cell_slices.size(); ++i) {
    const CellSlice& s = a.cell_slices[i];
    out.append(document.substr(pos, s.begin - pos));
    if (i < contents.size() && contents[i]) {
      out += html::escape_text(*contents[i]);
    } else {
      out.append(document.substr(s.begin, s.end - s.begin));
    }
    pos = s.end;
  }
  out.append(document.substr(pos));
  return out;
}

// ---------------------------------------------------------------------------
// Labels

struct Labels {
  bool is_simple = true;
  bool is_colored = false;
  bool is_lined = true;
  LineStyle line_style = LineStyle::fully_lined;
  HeaderLayout header_layout = HeaderLayout::vertical;

  friend bool operator==(const Labels&, const Labels&) = default;
};

inline Labels derive_labels(const TableGrid& g, const StyleSpec& style) {
  Labels l;
  l.is_simple = std::none_of(g.cells().begin(), g.cells().end(),
                             [](const Cell& c) { return c.is_spanning(); });
  l.is_colored = style.is_colored() || g.has_row_fills();
  l.is_lined = style.is_lined();
  l.line_style = style.line_style;
  l.header_layout = infer_header_layout(g);
  return l;
}

}  // namespace tablenet
