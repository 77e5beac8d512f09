#include "comviewer/config.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "comviewer/text.hpp"

namespace comviewer {

namespace {

// Whole-string numeric parse; nullopt on trailing junk or overflow.
template <typename T>
std::optional<T> number(std::string_view s) {
  T v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

ServerConfig ServerConfig::parse(std::string_view content) {
  ServerConfig c;
  std::istringstream in{std::string(content)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto s = text::trim(line);
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = text::trim(s.substr(0, hash));
    if (s.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": " + why);
    };
    auto eq = s.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    const std::string key(text::trim(s.substr(0, eq)));
    const std::string_view value = text::trim(s.substr(eq + 1));

    auto count = [&](std::size_t min) {
      auto v = number<std::size_t>(value);
      if (!v) fail("bad value for '" + key + "'");
      if (*v < min) fail("'" + key + "' must be >= " + std::to_string(min));
      return *v;
    };
    auto real = [&]() {
      auto v = number<double>(value);
      if (!v) fail("bad value for '" + key + "'");
      return *v;
    };

    if (key == "port") {
      auto v = number<int>(value);
      if (!v || *v < 0 || *v > 65535) fail("port must be an integer in [0, 65535]");
      c.port = *v;
    } else if (key == "k") {
      c.k = count(1);
    } else if (key == "n_top") {
      c.n_top = count(1);
    } else if (key == "iterations") {
      c.iterations = count(1);
    } else if (key == "keywords") {
      c.keywords = count(0);
    } else if (key == "theta") {
      c.theta = real();
      if (!(c.theta > 0.0 && c.theta <= 1.0)) fail("theta must be in (0, 1]");
    } else if (key == "beta") {
      c.beta = real();
      if (!(c.beta > 0.0)) fail("beta must be > 0");
    } else if (key == "seed") {
      auto v = number<std::uint64_t>(value);
      if (!v) fail("bad value for 'seed'");
      c.seed = *v;
    } else if (key == "palette") {
      c.palette.clear();
      std::string_view rest = value;
      while (true) {
        const auto comma = rest.find(',');
        auto t = text::trim(rest.substr(0, comma));
        if (!t.empty()) c.palette.emplace_back(t);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (c.palette.empty() || c.palette.size() > 8) fail("palette needs 1 to 8 colors");
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  return c;
}

ServerConfig ServerConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace comviewer
