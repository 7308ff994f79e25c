#include "pidparse/aggregate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "pidparse/error.hpp"
#include "pidparse/image_io.hpp"

namespace pidparse {

// ---------------------------------------------------------------------------
// Rule sets

namespace {

std::string_view kind_name(DomainRule::Kind k) {
  switch (k) {
    case DomainRule::Kind::static_label: return "static_label";
    case DomainRule::Kind::require_connection: return "require_connection";
    default: return "label_regex";
  }
}

DomainRule::Kind kind_from(const std::string& s) {
  if (s == "label_regex") return DomainRule::Kind::label_regex;
  if (s == "static_label") return DomainRule::Kind::static_label;
  if (s == "require_connection") return DomainRule::Kind::require_connection;
  throw ConfigError("rule kind must be label_regex, static_label or require_connection, got '" + s + "'");
}

bool matches(const std::string& text, const std::string& pattern) {
  return std::regex_search(text, std::regex(pattern));
}

}  // namespace

void RuleSet::validate() const {
  for (const auto& r : rules) {
    if (r.scope != kAllClasses && !(r.scope >= 0 && r.scope <= kClassCount)) {
      throw ConfigError("rule scope must be ALL or a class id in 0.." + std::to_string(kClassCount));
    }
    if (r.kind == DomainRule::Kind::label_regex) {
      try {
        std::regex re(r.payload);
      } catch (const std::regex_error& e) {
        throw ConfigError("rule regex '" + r.payload + "' does not compile: " + e.what());
      }
    }
  }
}

RuleSet RuleSet::from_json(const std::string& text) {
  RuleSet set;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& r : j.at("rules")) {
      DomainRule rule;
      const auto& scope = r.at("scope");
      if (scope.is_string()) {
        if (scope.get<std::string>() != "ALL") throw ConfigError("rule scope string must be \"ALL\"");
        rule.scope = kAllClasses;
      } else {
        rule.scope = scope.get<int>();
      }
      rule.kind = kind_from(r.at("kind").get<std::string>());
      rule.payload = r.value("payload", std::string());
      set.rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("rule set: ") + e.what());
  }
  set.validate();
  return set;
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return from_json(std::string(bytes.begin(), bytes.end()));
}

std::string RuleSet::to_json() const {
  nlohmann::json j;
  j["rules"] = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json e;
    e["scope"] = r.scope == kAllClasses ? nlohmann::json("ALL") : nlohmann::json(r.scope);
    e["kind"] = std::string(kind_name(r.kind));
    e["payload"] = r.payload;
    j["rules"].push_back(e);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Association

void map_symbols_to_graph(std::vector<SymbolInstance>& symbols, const PidGraph& graph, double weak_distance,
                          std::vector<std::string>* warnings) {
  if (symbols.empty()) return;
  if (graph.vertices.empty()) {
    if (warnings) warnings->push_back("graph is empty; symbols left unconnected");
    for (auto& s : symbols) s.edge_ids.clear();
    return;
  }
  std::vector<std::vector<int>> incident(graph.vertices.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    incident[graph.edges[e].v1].push_back(static_cast<int>(e));
    incident[graph.edges[e].v2].push_back(static_cast<int>(e));
  }
  for (auto& s : symbols) {
    const double cx = s.bbox.center_x(), cy = s.bbox.center_y();
    double best = 1e300;
    std::size_t best_v = 0;
    for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
      const double d = std::hypot(graph.vertices[v].x - cx, graph.vertices[v].y - cy);
      if (d < best) {
        best = d;
        best_v = v;
      }
    }
    s.edge_ids = incident[best_v];
    std::sort(s.edge_ids.begin(), s.edge_ids.end());
    if (best > weak_distance) s.flags.emplace_back("weak_association");
  }
}

std::string label_pattern(const std::string& text) {
  std::string out;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    const char t = std::isalpha(u) ? '@' : std::isdigit(u) ? '#' : c;
    if ((t == '@' || t == '#') && !out.empty() && out.back() == t) continue;
    out.push_back(t);
  }
  return out;
}

void map_symbols_to_text(std::vector<SymbolInstance>& symbols, const std::vector<TextBox>& texts, int k,
                         const RuleSet& rules, const std::vector<bool>& excluded) {
  if (k < 1) throw ConfigError("k_text_neighbors must be >= 1");
  std::vector<bool> used(texts.size(), false);
  for (std::size_t t = 0; t < texts.size() && t < excluded.size(); ++t) used[t] = excluded[t];
  for (auto& s : symbols) {
    if (s.embedded_text < 0 || s.embedded_text >= static_cast<int>(texts.size())) continue;
    used[s.embedded_text] = true;
    if (s.label.empty()) s.label = texts[s.embedded_text].text;
  }

  // k nearest unused texts per pending symbol.
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i].embedded_text < 0 && symbols[i].label.empty()) pending.push_back(i);
  std::map<std::size_t, std::vector<std::pair<double, std::size_t>>> near;
  for (std::size_t i : pending) {
    auto& list = near[i];
    const double cx = symbols[i].bbox.center_x(), cy = symbols[i].bbox.center_y();
    for (std::size_t t = 0; t < texts.size(); ++t) {
      if (used[t] || texts[t].text.empty()) continue;
      list.emplace_back(std::hypot(texts[t].bbox.center_x() - cx, texts[t].bbox.center_y() - cy), t);
    }
    std::sort(list.begin(), list.end());
    if (list.size() > static_cast<std::size_t>(k)) list.resize(k);
  }

  auto regex_for = [&](int class_id) -> const DomainRule* {
    for (const auto& r : rules.rules)
      if (r.kind == DomainRule::Kind::label_regex && r.applies_to(class_id)) return &r;
    return nullptr;
  };

  // Pattern per class without a regex: the one realized by the most distinct
  // candidate texts, then by the smallest candidate distance, then by name.
  std::map<int, std::string> winner;
  {
    std::map<int, std::map<std::string, std::pair<std::set<std::string>, double>>> stats;
    for (std::size_t i : pending) {
      const int c = symbols[i].class_id;
      if (regex_for(c)) continue;
      for (const auto& [d, t] : near[i]) {
        auto& [distinct, closest] = stats[c].try_emplace(label_pattern(texts[t].text), std::set<std::string>{}, 1e300)
                                        .first->second;
        distinct.insert(texts[t].text);
        closest = std::min(closest, d);
      }
    }
    for (const auto& [c, per] : stats) {
      const std::string* best = nullptr;
      std::tuple<std::size_t, double> best_key{0, 0};
      for (const auto& [pat, st] : per) {
        const std::tuple<std::size_t, double> key{st.first.size(), -st.second};
        if (!best || key > best_key) {
          best = &pat;
          best_key = key;
        }
      }
      if (best) winner[c] = *best;
    }
  }

  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i : pending) {
    const int c = symbols[i].class_id;
    const DomainRule* re = regex_for(c);
    for (const auto& [d, t] : near[i]) {
      const bool ok = re ? matches(texts[t].text, re->payload)
                         : (winner.count(c) && label_pattern(texts[t].text) == winner[c]);
      if (ok) pairs.emplace_back(d, i, t);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> done(symbols.size(), false);
  for (const auto& [d, i, t] : pairs) {
    if (done[i] || used[t]) continue;
    done[i] = true;
    used[t] = true;
    symbols[i].label = texts[t].text;
  }
  for (std::size_t i : pending)
    if (!done[i]) symbols[i].flags.emplace_back("no_label");
}

// ---------------------------------------------------------------------------
// Result tables

DigitizationResult emit_result(const std::vector<SymbolInstance>& symbols, const PidGraph& graph) {
  DigitizationResult r;
  std::vector<std::size_t> order(symbols.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Rect &p = symbols[a].bbox, &q = symbols[b].bbox;
    return std::tie(p.y, p.x, p.h, p.w, symbols[a].class_id, a) < std::tie(q.y, q.x, q.h, q.w, symbols[b].class_id, b);
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& s = symbols[order[i]];
    std::vector<int> edges;
    for (int e : s.edge_ids)
      if (e >= 0 && e < static_cast<int>(graph.edges.size())) edges.push_back(e);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    r.symbols.push_back({static_cast<int>(i), s.class_id, s.bbox, s.label, std::move(edges)});
  }
  const auto adj = graph.edge_adjacency();
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& ed = graph.edges[e];
    r.pipelines.push_back({static_cast<int>(e), ed.label.value_or(""), graph.vertices[ed.v1], graph.vertices[ed.v2],
                           ed.style, adj[e]});
  }
  return r;
}

Reconciled reconcile(const DigitizationResult& result, const RuleSet& rules) {
  rules.validate();
  Reconciled out{result, {}};
  for (const auto& rule : rules.rules) {
    std::optional<std::regex> re;
    if (rule.kind == DomainRule::Kind::label_regex) re.emplace(rule.payload);
    for (auto& s : out.result.symbols) {
      if (!rule.applies_to(s.class_id)) continue;
      switch (rule.kind) {
        case DomainRule::Kind::static_label:
          if (s.label != rule.payload) {
            out.report.push_back({s.symbol_id, "relabel", "'" + s.label + "' -> '" + rule.payload + "'"});
            s.label = rule.payload;
          }
          break;
        case DomainRule::Kind::label_regex:
          if (!s.label.empty() && !std::regex_search(s.label, *re)) {
            out.report.push_back({s.symbol_id, "blank", "'" + s.label + "' does not match " + rule.payload});
            s.label.clear();
          }
          break;
        case DomainRule::Kind::require_connection:
          if (s.connected_edge_ids.empty()) out.report.push_back({s.symbol_id, "flag", "no connected pipeline"});
          break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

std::string join_ids(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? ";" : "") + std::to_string(ids[i]);
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

int to_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw ConfigError("csv: bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("csv: bad integer '" + s + "'");
  }
}

std::vector<int> split_ids(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ';')) out.push_back(to_int(part));
  return out;
}

constexpr const char* kSymbolHeader = "symbol_id,class_id,x,y,w,h,label,connected_edge_ids";
constexpr const char* kPipelineHeader = "edge_id,label,x1,y1,x2,y2,style,adjacent_edge_ids";
constexpr const char* kLineHeader = "x1,y1,x2,y2,orientation,style";
constexpr const char* kTextHeader = "x,y,w,h,orientation,text";

std::vector<std::vector<std::string>> body(const std::string& text, const char* header, std::size_t columns) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw ConfigError(std::string("csv: missing header '") + header + "'");
  std::string got;
  for (std::size_t i = 0; i < rows[0].size(); ++i) got += (i ? "," : "") + rows[0][i];
  if (got != header) throw ConfigError("csv: expected header '" + std::string(header) + "', got '" + got + "'");
  rows.erase(rows.begin());
  for (const auto& r : rows)
    if (r.size() != columns) throw ConfigError("csv: row has " + std::to_string(r.size()) + " fields, expected " +
                                               std::to_string(columns));
  return rows;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  const auto b = read_file_bytes(path);
  return {b.begin(), b.end()};
}

}  // namespace

std::string symbols_csv(const std::vector<SymbolRow>& rows) {
  std::string out = std::string(kSymbolHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.symbol_id) + "," + std::to_string(r.class_id) + "," + std::to_string(r.bbox.x) + "," +
           std::to_string(r.bbox.y) + "," + std::to_string(r.bbox.w) + "," + std::to_string(r.bbox.h) + "," +
           quote(r.label) + "," + join_ids(r.connected_edge_ids) + "\n";
  }
  return out;
}

std::string pipelines_csv(const std::vector<PipelineRow>& rows) {
  std::string out = std::string(kPipelineHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.edge_id) + "," + quote(r.label) + "," + std::to_string(r.p1.x) + "," +
           std::to_string(r.p1.y) + "," + std::to_string(r.p2.x) + "," + std::to_string(r.p2.y) + "," +
           std::string(to_string(r.style)) + "," + join_ids(r.adjacent_edge_ids) + "\n";
  }
  return out;
}

std::vector<SymbolRow> parse_symbols_csv(const std::string& text) {
  std::vector<SymbolRow> out;
  for (const auto& f : body(text, kSymbolHeader, 8)) {
    out.push_back({to_int(f[0]), to_int(f[1]), {to_int(f[2]), to_int(f[3]), to_int(f[4]), to_int(f[5])}, f[6],
                   split_ids(f[7])});
  }
  return out;
}

std::vector<PipelineRow> parse_pipelines_csv(const std::string& text) {
  std::vector<PipelineRow> out;
  for (const auto& f : body(text, kPipelineHeader, 8)) {
    LineStyle style;
    try {
      style = line_style_from_string(f[6]);
    } catch (const std::exception&) {
      throw ConfigError("csv: bad style '" + f[6] + "'");
    }
    out.push_back({to_int(f[0]), f[1], {to_int(f[2]), to_int(f[3])}, {to_int(f[4]), to_int(f[5])}, style,
                   split_ids(f[7])});
  }
  return out;
}

std::string lines_csv(const std::vector<LineSegment>& lines) {
  std::string out = std::string(kLineHeader) + "\n";
  for (const auto& l : lines) {
    out += std::to_string(l.p1.x) + "," + std::to_string(l.p1.y) + "," + std::to_string(l.p2.x) + "," +
           std::to_string(l.p2.y) + "," + std::string(to_string(l.orientation)) + "," +
           std::string(to_string(l.style)) + "\n";
  }
  return out;
}

std::string texts_csv(const std::vector<TextBox>& texts) {
  std::string out = std::string(kTextHeader) + "\n";
  for (const auto& t : texts) {
    out += std::to_string(t.bbox.x) + "," + std::to_string(t.bbox.y) + "," + std::to_string(t.bbox.w) + "," +
           std::to_string(t.bbox.h) + "," + std::string(to_string(t.orientation)) + "," + quote(t.text) + "\n";
  }
  return out;
}

std::vector<LineSegment> parse_lines_csv(const std::string& text) {
  std::vector<LineSegment> out;
  for (const auto& f : body(text, kLineHeader, 6)) {
    out.push_back({{to_int(f[0]), to_int(f[1])}, {to_int(f[2]), to_int(f[3])}, orientation_from_string(f[4]),
                   line_style_from_string(f[5])});
  }
  return out;
}

std::vector<TextBox> parse_texts_csv(const std::string& text) {
  std::vector<TextBox> out;
  for (const auto& f : body(text, kTextHeader, 6)) {
    out.push_back({{to_int(f[0]), to_int(f[1]), to_int(f[2]), to_int(f[3])}, f[5], orientation_from_string(f[4]), 1.0});
  }
  return out;
}

void save_result(const DigitizationResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "symbols.csv", symbols_csv(r.symbols));
  write_text(dir / "pipelines.csv", pipelines_csv(r.pipelines));
}

DigitizationResult load_result(const std::filesystem::path& dir) {
  return {parse_symbols_csv(read_text(dir / "symbols.csv")), parse_pipelines_csv(read_text(dir / "pipelines.csv"))};
}

}  // namespace pidparse
