#include "comviewer/labeling.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "comviewer/error.hpp"
#include "comviewer/text.hpp"

#ifndef COMVIEWER_DEFAULT_DATA_DIR
#define COMVIEWER_DEFAULT_DATA_DIR "data"
#endif

namespace comviewer {

std::string_view to_string(Direction d) { return d == Direction::seeking ? "seeking" : "providing"; }

std::string_view to_string(SupportKind k) { return k == SupportKind::emotional ? "emotional" : "informational"; }

std::string_view to_string(Level l) {
  switch (l) {
    case Level::high: return "high";
    case Level::medium: return "medium";
    case Level::low: return "low";
  }
  return "low";
}

std::optional<Direction> parse_direction(std::string_view s) {
  auto v = text::to_lower(text::trim(s));
  if (v == "seeking") return Direction::seeking;
  if (v == "providing") return Direction::providing;
  return std::nullopt;
}

std::optional<SupportKind> parse_kind(std::string_view s) {
  auto v = text::to_lower(text::trim(s));
  if (v == "emotional") return SupportKind::emotional;
  if (v == "informational") return SupportKind::informational;
  return std::nullopt;
}

std::optional<Level> parse_level(std::string_view s) {
  auto v = text::to_lower(text::trim(s));
  if (v == "high") return Level::high;
  if (v == "medium") return Level::medium;
  if (v == "low") return Level::low;
  return std::nullopt;
}

// --- Lexicon --------------------------------------------------------------

Lexicon Lexicon::parse(std::string_view content) {
  Lexicon lex;
  std::istringstream in{std::string(content)};
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": bad section");
      section = text::to_lower(s.substr(1, s.size() - 2));
      continue;
    }
    if (section == "params") {
      auto eq = s.find('=');
      if (eq == std::string_view::npos)
        throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": expected key = value");
      auto key = text::trim(s.substr(0, eq));
      double value = std::stod(std::string(text::trim(s.substr(eq + 1))));
      if (key == "high") lex.high_threshold = value;
      else if (key == "medium") lex.medium_threshold = value;
      else if (key == "saturation") lex.saturation = value;
      else if (key == "window") lex.window = value;
      else throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": unknown param");
      continue;
    }
    auto dot = section.find('.');
    std::optional<Direction> dir;
    std::optional<SupportKind> kind;
    if (dot != std::string::npos) {
      dir = parse_direction(section.substr(0, dot));
      kind = parse_kind(section.substr(dot + 1));
    }
    if (!dir || !kind)
      throw std::runtime_error("lexicon line " + std::to_string(line_no) + ": phrase outside a direction.kind section");
    auto words = text::split_words(s);
    if (!words.empty()) lex.phrases[{*dir, *kind}].push_back(std::move(words));
  }
  if (!(lex.medium_threshold <= lex.high_threshold) || lex.saturation <= 0 || lex.window <= 0)
    throw std::runtime_error("lexicon params out of range");
  // Longest phrases first so that "you are not alone" wins over "alone".
  for (auto& [_, list] : lex.phrases) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Lexicon Lexicon::load_default() {
  if (const char* dir = std::getenv("COMVIEWER_DATA_DIR"); dir && *dir)
    return load(std::filesystem::path(dir) / "lexicon.txt");
  return load(std::filesystem::path(COMVIEWER_DEFAULT_DATA_DIR) / "lexicon.txt");
}

// --- HeuristicProvider ------------------------------------------------------

HeuristicProvider::HeuristicProvider(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

std::size_t HeuristicProvider::count_markers(std::string_view text_in, Direction direction, SupportKind kind) const {
  auto it = lexicon_.phrases.find({direction, kind});
  if (it == lexicon_.phrases.end()) return 0;
  const auto& phrases = it->second;
  const auto words = text::split_words(text_in);

  std::size_t hits = 0;
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t matched = 0;
    for (const auto& phrase : phrases) {
      if (i + phrase.size() > words.size()) continue;
      if (std::equal(phrase.begin(), phrase.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
        matched = phrase.size();
        break;
      }
    }
    if (matched > 0) {
      ++hits;
      i += matched;
    } else {
      ++i;
    }
  }
  return hits;
}

double HeuristicProvider::score(std::string_view text_in, Direction direction, SupportKind kind) const {
  const auto n_words = static_cast<double>(text::split_words(text_in).size());
  const auto hits = static_cast<double>(count_markers(text_in, direction, kind));
  const double scale = lexicon_.saturation * std::max(1.0, n_words / lexicon_.window);
  return std::min(1.0, hits / scale);
}

Level HeuristicProvider::to_level(double s) const {
  if (s >= lexicon_.high_threshold) return Level::high;
  if (s >= lexicon_.medium_threshold) return Level::medium;
  return Level::low;
}

LabelPair HeuristicProvider::label_text(std::string_view text_in, Direction direction) const {
  return {to_level(score(text_in, direction, SupportKind::emotional)),
          to_level(score(text_in, direction, SupportKind::informational))};
}

LabelPair HeuristicProvider::label_post(const Post& post) const {
  return label_text(post.full_text(), Direction::seeking);
}

LabelPair HeuristicProvider::label_comment(const Comment& comment) const {
  return label_text(comment.body, Direction::providing);
}

// --- LabelTable -------------------------------------------------------------

void LabelTable::set(std::string id, Direction d, SupportKind k, Level level) {
  rows_[Key{std::move(id), d, k}] = level;
}

std::optional<Level> LabelTable::get(std::string_view id, Direction d, SupportKind k) const {
  auto it = rows_.find(Key{std::string(id), d, k});
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

LabelTable LabelTable::parse_csv(std::string_view content, std::string_view source) {
  LabelTable table;
  std::istringstream in{std::string(content)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw BadRequest(std::string(source) + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
      auto comma = s.find(',', start);
      cols.push_back(text::trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (line_no == 1 && cols.size() == 4 && text::to_lower(cols[0]) == "id") continue;  // header
    if (cols.size() != 4) fail("expected 4 columns (id,direction,kind,level), got " + std::to_string(cols.size()));
    if (cols[0].empty()) fail("empty id");
    auto d = parse_direction(cols[1]);
    if (!d) fail("unknown direction '" + std::string(cols[1]) + "'");
    auto k = parse_kind(cols[2]);
    if (!k) fail("unknown kind '" + std::string(cols[2]) + "'");
    auto l = parse_level(cols[3]);
    if (!l) fail("unknown level '" + std::string(cols[3]) + "'");
    table.set(std::string(cols[0]), *d, *k, *l);
  }
  return table;
}

LabelTable LabelTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.filename().string());
}

std::string LabelTable::to_csv() const {
  std::string out = "id,direction,kind,level\n";
  for (const auto& [key, level] : rows_) {
    const auto& [id, d, k] = key;
    out += id;
    out += ',';
    out += to_string(d);
    out += ',';
    out += to_string(k);
    out += ',';
    out += to_string(level);
    out += '\n';
  }
  return out;
}

void LabelTable::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write label file: " + path.string());
  out << to_csv();
}

LabelPair LabelTable::post_labels(std::string_view id) const {
  return {get(id, Direction::seeking, SupportKind::emotional).value_or(Level::low),
          get(id, Direction::seeking, SupportKind::informational).value_or(Level::low)};
}

LabelPair LabelTable::comment_labels(std::string_view id) const {
  return {get(id, Direction::providing, SupportKind::emotional).value_or(Level::low),
          get(id, Direction::providing, SupportKind::informational).value_or(Level::low)};
}

// --- ImportedProvider -------------------------------------------------------

ImportedProvider::ImportedProvider(LabelTable table, std::shared_ptr<const LabelProvider> fallback)
    : table_(std::move(table)), fallback_(std::move(fallback)) {
  if (!fallback_) throw std::invalid_argument("ImportedProvider needs a fallback provider");
}

LabelPair ImportedProvider::label_post(const Post& post) const {
  auto e = table_.get(post.id, Direction::seeking, SupportKind::emotional);
  auto i = table_.get(post.id, Direction::seeking, SupportKind::informational);
  if (e && i) return {*e, *i};
  auto fb = fallback_->label_post(post);
  return {e.value_or(fb.emotional), i.value_or(fb.informational)};
}

LabelPair ImportedProvider::label_comment(const Comment& comment) const {
  auto e = table_.get(comment.id, Direction::providing, SupportKind::emotional);
  auto i = table_.get(comment.id, Direction::providing, SupportKind::informational);
  if (e && i) return {*e, *i};
  auto fb = fallback_->label_comment(comment);
  return {e.value_or(fb.emotional), i.value_or(fb.informational)};
}

std::unique_ptr<LabelProvider> import_labels(const std::filesystem::path& label_file,
                                             std::shared_ptr<const LabelProvider> fallback) {
  return std::make_unique<ImportedProvider>(LabelTable::load_csv(label_file), std::move(fallback));
}

LabelTable label_corpus(const Corpus& corpus, const LabelProvider& provider) {
  LabelTable table;
  for (const auto& post : corpus.posts()) {
    auto l = provider.label_post(post);
    table.set(post.id, Direction::seeking, SupportKind::emotional, l.emotional);
    table.set(post.id, Direction::seeking, SupportKind::informational, l.informational);
    for (const auto* c : corpus.comments_of(post)) {
      auto cl = provider.label_comment(*c);
      table.set(c->id, Direction::providing, SupportKind::emotional, cl.emotional);
      table.set(c->id, Direction::providing, SupportKind::informational, cl.informational);
    }
  }
  return table;
}

}  // namespace comviewer
