#include "comviewer/notes.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "comviewer/error.hpp"
#include "comviewer/text.hpp"

namespace comviewer {

Palette::Palette() : colors_{"yellow", "green", "red"} {}

Palette::Palette(std::vector<std::string> colors) : colors_(std::move(colors)) {
  if (colors_.empty() || colors_.size() > kMaxColors)
    throw std::invalid_argument("palette needs 1 to 8 colors");
  std::set<std::string> seen(colors_.begin(), colors_.end());
  if (seen.size() != colors_.size()) throw std::invalid_argument("palette colors must be distinct");
}

bool Palette::contains(std::string_view color) const {
  return std::find(colors_.begin(), colors_.end(), color) != colors_.end();
}

void validate_anchor(const Anchor& anchor, std::string_view body) {
  const auto length = text::utf8_length(body);
  if (anchor.char_start >= anchor.char_end)
    throw BadRequest("empty or inverted anchor range [" + std::to_string(anchor.char_start) + ", " +
                     std::to_string(anchor.char_end) + ")");
  if (anchor.char_end > length)
    throw BadRequest("anchor range ends at " + std::to_string(anchor.char_end) + " past text length " +
                     std::to_string(length));
  auto found = text::utf8_substr(body, anchor.char_start, anchor.char_end);
  if (found != anchor.exact_text)
    throw BadRequest("anchor text mismatch", "expected: \"" + anchor.exact_text + "\"\nfound:    \"" + found + "\"");
}

NoteBook::NoteBook(Palette palette) : palette_(std::move(palette)) {}

void NoteBook::check_color(const std::string& color) const {
  if (!palette_.contains(color)) throw BadRequest("color '" + color + "' is not in the palette");
}

Highlight& NoteBook::mutable_get(const std::string& id) {
  auto it = highlights_.find(id);
  if (it == highlights_.end()) throw NotFound("unknown highlight id: " + id);
  return it->second;
}

const Highlight& NoteBook::get(const std::string& id) const {
  auto it = highlights_.find(id);
  if (it == highlights_.end()) throw NotFound("unknown highlight id: " + id);
  return it->second;
}

std::string NoteBook::merge_from(const std::string& seed_id, const BodyLookup& bodies) {
  const Highlight& seed = get(seed_id);
  const std::string target = seed.anchor.target;
  const std::string color = seed.color;
  std::size_t lo = seed.anchor.char_start;
  std::size_t hi = seed.anchor.char_end;

  std::vector<std::string> group{seed_id};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [id, h] : highlights_) {
      if (h.color != color || h.anchor.target != target) continue;
      if (std::find(group.begin(), group.end(), id) != group.end()) continue;
      if (h.anchor.char_start <= hi && lo <= h.anchor.char_end) {
        lo = std::min(lo, h.anchor.char_start);
        hi = std::max(hi, h.anchor.char_end);
        group.push_back(id);
        grew = true;
      }
    }
  }
  if (group.size() == 1) return seed_id;

  auto oldest = *std::min_element(group.begin(), group.end(), [&](const std::string& a, const std::string& b) {
    return highlights_.at(a).created_at < highlights_.at(b).created_at;
  });
  auto body = bodies(target);
  if (!body) throw NotFound("unknown anchor target: " + target);

  Highlight& keep = highlights_.at(oldest);
  keep.anchor.char_start = lo;
  keep.anchor.char_end = hi;
  keep.anchor.exact_text = text::utf8_substr(*body, lo, hi);
  keep.edited_text.reset();  // the edit described a narrower span
  for (const auto& id : group)
    if (id != oldest) highlights_.erase(id);
  return oldest;
}

const Highlight& NoteBook::add_highlight(const Anchor& anchor, const std::string& color, const BodyLookup& bodies) {
  check_color(color);
  auto body = bodies(anchor.target);
  if (!body) throw NotFound("unknown anchor target: " + anchor.target);
  validate_anchor(anchor, *body);

  Highlight h;
  h.id = "h" + std::to_string(next_id_++);
  h.anchor = anchor;
  h.color = color;
  h.created_at = ++clock_;
  auto id = h.id;
  highlights_.emplace(id, std::move(h));
  return get(merge_from(id, bodies));
}

const Highlight& NoteBook::recolor(const std::string& id, const std::string& color, const BodyLookup& bodies) {
  check_color(color);
  Highlight& h = mutable_get(id);
  if (h.color == color) return h;
  h.color = color;
  return get(merge_from(id, bodies));
}

void NoteBook::clear(const std::string& id) {
  if (highlights_.erase(id) == 0) throw NotFound("unknown highlight id: " + id);
}

const Anchor& NoteBook::navigate(const std::string& id) const { return get(id).anchor; }

const Highlight& NoteBook::edit_entry(const std::string& id, std::string new_text) {
  Highlight& h = mutable_get(id);
  h.edited_text = std::move(new_text);
  return h;
}

std::vector<const Highlight*> NoteBook::highlights() const {
  std::vector<const Highlight*> out;
  for (const auto& [_, h] : highlights_) out.push_back(&h);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->created_at < b->created_at; });
  return out;
}

std::vector<const Highlight*> NoteBook::highlights_on(std::string_view target) const {
  auto all = highlights();
  std::erase_if(all, [&](const Highlight* h) { return h->anchor.target != target; });
  return all;
}

Folder NoteBook::folder(const std::string& color) const {
  check_color(color);
  Folder f{color, {}};
  for (const auto* h : highlights())
    if (h->color == color) f.entries.push_back(h->id);
  return f;
}

std::vector<Folder> NoteBook::folders() const {
  std::vector<Folder> out;
  for (const auto& c : palette_.colors()) out.push_back(folder(c));
  return out;
}

void NoteBook::restore(std::vector<Highlight> highlights) {
  highlights_.clear();
  clock_ = 0;
  next_id_ = 1;
  for (auto& h : highlights) {
    check_color(h.color);
    clock_ = std::max(clock_, h.created_at);
    if (h.id.size() > 1 && h.id[0] == 'h') {
      try {
        next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(h.id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
    auto id = h.id;
    highlights_.emplace(std::move(id), std::move(h));
  }
}

}  // namespace comviewer
