#include "tse/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(s)};
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// Splits a context containing <b>target</b> into tokens and the target index.
std::pair<std::vector<std::string>, std::size_t> parse_marked_context(std::string_view raw, std::size_t line_no) {
  std::string s;
  s.reserve(raw.size() + 8);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.substr(i, 3) == "<b>") {
      s += " <b> ";
      i += 2;
    } else if (raw.substr(i, 4) == "</b>") {
      s += " </b> ";
      i += 3;
    } else {
      s += raw[i];
    }
  }
  std::vector<std::string> tokens;
  std::optional<std::size_t> target;
  bool inside = false;
  for (auto& tok : split_ws(s)) {
    if (tok == "<b>") {
      inside = true;
      continue;
    }
    if (tok == "</b>") {
      inside = false;
      continue;
    }
    if (inside && !target) target = tokens.size();
    tokens.push_back(std::move(tok));
  }
  if (!target) throw FormatError("line " + std::to_string(line_no) + ": context has no <b>target</b> marker");
  return {std::move(tokens), *target};
}

double parse_double(std::string_view s, const std::string& where) {
  try {
    std::size_t used = 0;
    const std::string str(text::trim(s));
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError(where + ": expected a number, got '" + std::string(s) + "'");
  }
}

std::string xml_unescape(std::string_view s) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool replaced = false;
    if (s[i] == '&') {
      for (const auto& [ent, ch] : kEntities) {
        if (s.substr(i, ent.size()) == ent) {
          out += ch;
          i += ent.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += s[i++];
  }
  return out;
}

std::string attribute(std::string_view tag, std::string_view name) {
  const std::string key = std::string(name) + "=\"";
  const auto pos = tag.find(key);
  if (pos == std::string_view::npos) return {};
  const auto start = pos + key.size();
  const auto end = tag.find('"', start);
  return std::string(tag.substr(start, end - start));
}

}  // namespace

std::string normalize_pos(std::string_view pos) {
  std::string p(text::trim(pos));
  std::transform(p.begin(), p.end(), p.begin(), [](unsigned char c) { return std::tolower(c); });
  if (!p.empty() && p.back() == '.') p.pop_back();
  if (p == "n" || p == "noun") return "n.";
  if (p == "v" || p == "verb") return "v.";
  if (p == "a" || p == "adj" || p == "j" || p == "s") return "adj.";
  if (p == "r" || p == "adv") return "adv.";
  return std::string(text::trim(pos));
}

std::vector<ScwsInstance> read_scws(std::istream& in) {
  std::vector<ScwsInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, '\t');
    const std::string where = "SCWS line " + std::to_string(line_no);
    if (f.size() < 8) throw FormatError(where + ": expected at least 8 tab-separated fields");
    if (out.empty() && line_no == 1) {
      // Optional header row.
      try {
        parse_double(f[7], where);
      } catch (const FormatError&) {
        continue;
      }
    }
    ScwsInstance inst;
    inst.id = std::string(text::trim(f[0]));
    inst.word1 = std::string(text::trim(f[1]));
    inst.pos1 = std::string(text::trim(f[2]));
    inst.word2 = std::string(text::trim(f[3]));
    inst.pos2 = std::string(text::trim(f[4]));
    std::tie(inst.context1, inst.target1) = parse_marked_context(f[5], line_no);
    std::tie(inst.context2, inst.target2) = parse_marked_context(f[6], line_no);
    inst.human_score = parse_double(f[7], where);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<ScwsInstance> read_scws(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_scws(in);
}

void write_scws(std::ostream& out, const std::vector<ScwsInstance>& data) {
  const auto marked = [](const std::vector<std::string>& ctx, std::size_t target) {
    std::string s;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      if (i) s += ' ';
      s += i == target ? "<b> " + ctx[i] + " </b>" : ctx[i];
    }
    return s;
  };
  for (const auto& inst : data) {
    out << inst.id << '\t' << inst.word1 << '\t' << inst.pos1 << '\t' << inst.word2 << '\t' << inst.pos2 << '\t'
        << marked(inst.context1, inst.target1) << '\t' << marked(inst.context2, inst.target2) << '\t'
        << inst.human_score << '\n';
  }
}

std::vector<LexsubInstance> read_lexsub(std::istream& in) {
  std::vector<LexsubInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, '\t');
    const std::string where = "lexsub line " + std::to_string(line_no);
    if (f.size() != 6) throw FormatError(where + ": expected 6 tab-separated fields");
    LexsubInstance inst;
    inst.id = std::string(text::trim(f[0]));
    inst.target = std::string(text::trim(f[1]));
    inst.pos = normalize_pos(f[2]);
    const double idx = parse_double(f[3], where);
    inst.context = split_ws(f[4]);
    if (idx < 0 || idx != static_cast<double>(static_cast<std::size_t>(idx)) ||
        static_cast<std::size_t>(idx) >= inst.context.size()) {
      throw FormatError(where + ": target index out of range");
    }
    inst.target_index = static_cast<std::size_t>(idx);
    for (auto item : text::split(f[5], ';')) {
      item = text::trim(item);
      if (item.empty()) continue;
      const auto colon = item.rfind(':');
      if (colon == std::string_view::npos) throw FormatError(where + ": gold entry without weight");
      const double w = parse_double(item.substr(colon + 1), where);
      if (w < 1 || w != static_cast<double>(static_cast<int>(w))) throw FormatError(where + ": gold weights must be positive integers");
      inst.gold.emplace_back(std::string(text::trim(item.substr(0, colon))), static_cast<int>(w));
    }
    if (inst.gold.empty()) throw FormatError(where + ": empty gold set");
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<LexsubInstance> read_lexsub(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_lexsub(in);
}

void write_lexsub(std::ostream& out, const std::vector<LexsubInstance>& data) {
  for (const auto& inst : data) {
    out << inst.id << '\t' << inst.target << '\t' << inst.pos << '\t' << inst.target_index << '\t' << join(inst.context)
        << '\t';
    for (std::size_t i = 0; i < inst.gold.size(); ++i) {
      if (i) out << ';';
      out << inst.gold[i].first << ':' << inst.gold[i].second;
    }
    out << '\n';
  }
}

LexsubConversion convert_semeval_lexsub(std::istream& xml, std::istream& gold) {
  // Gold: "lemma.p id :: sub n;sub n;"
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<std::string, int>>> gold_map;
  LexsubConversion result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(gold, line)) {
    ++line_no;
    const auto sep = line.find("::");
    if (sep == std::string::npos) continue;
    const auto head = split_ws(std::string_view(line).substr(0, sep));
    if (head.size() < 2) throw FormatError("gold line " + std::to_string(line_no) + ": expected 'lemma.pos id ::'");
    auto& entries = gold_map[{head[0], head[1]}];
    for (auto item : text::split(std::string_view(line).substr(sep + 2), ';')) {
      item = text::trim(item);
      if (item.empty()) continue;
      const auto space = item.rfind(' ');
      if (space == std::string_view::npos) continue;
      const std::string sub(text::trim(item.substr(0, space)));
      const int weight = static_cast<int>(parse_double(item.substr(space + 1), "gold line " + std::to_string(line_no)));
      if (sub.find(' ') != std::string::npos || sub.find('-') != std::string::npos) {
        ++result.dropped_multiword;
        continue;
      }
      if (weight >= 1) entries.emplace_back(sub, weight);
    }
  }

  std::stringstream buffer;
  buffer << xml.rdbuf();
  const std::string doc = buffer.str();
  std::string item;
  std::size_t pos = 0;
  while (true) {
    const auto lexelt = doc.find("<lexelt", pos);
    const auto instance = doc.find("<instance", pos);
    if (instance == std::string::npos) break;
    if (lexelt != std::string::npos && lexelt < instance) {
      const auto end = doc.find('>', lexelt);
      item = attribute(std::string_view(doc).substr(lexelt, end - lexelt), "item");
      pos = end;
      continue;
    }
    const auto tag_end = doc.find('>', instance);
    const std::string id = attribute(std::string_view(doc).substr(instance, tag_end - instance), "id");
    const auto ctx_open = doc.find("<context>", tag_end);
    const auto ctx_close = doc.find("</context>", ctx_open);
    if (ctx_open == std::string::npos || ctx_close == std::string::npos) throw FormatError("instance " + id + ": missing <context>");
    const std::string_view ctx = std::string_view(doc).substr(ctx_open + 9, ctx_close - ctx_open - 9);
    pos = ctx_close;

    const auto head_open = ctx.find("<head>");
    const auto head_close = ctx.find("</head>");
    if (head_open == std::string_view::npos || head_close == std::string_view::npos) {
      throw FormatError("instance " + id + ": missing <head>");
    }
    LexsubInstance inst;
    inst.id = id;
    const auto dot = item.rfind('.');
    inst.target = item.substr(0, dot);
    inst.pos = normalize_pos(dot == std::string::npos ? "" : item.substr(dot + 1));
    inst.context = split_ws(xml_unescape(ctx.substr(0, head_open)));
    inst.target_index = inst.context.size();
    auto head = split_ws(xml_unescape(ctx.substr(head_open + 6, head_close - head_open - 6)));
    std::string head_word;
    for (const auto& h : head) head_word += h;
    inst.context.push_back(head_word.empty() ? inst.target : head_word);
    for (auto& t : split_ws(xml_unescape(ctx.substr(head_close + 7)))) inst.context.push_back(std::move(t));

    auto it = gold_map.find({item, id});
    if (it == gold_map.end() || it->second.empty()) {
      ++result.dropped_instances;
      continue;
    }
    inst.gold = it->second;
    result.instances.push_back(std::move(inst));
  }
  return result;
}

}  // namespace tse
