#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace deft {

// Process exit codes double as error categories.
enum class ErrorCode : int { Config = 2, Data = 3, ModelMismatch = 4 };

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "config";
    case ErrorCode::Data: return "data";
    case ErrorCode::ModelMismatch: return "model-mismatch";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, std::string message, std::string recipe_id = {})
      : std::runtime_error(message),
        code_(code),
        module_(std::move(module)),
        recipe_id_(std::move(recipe_id)) {}

  ErrorCode code() const { return code_; }
  const std::string& module() const { return module_; }
  const std::string& recipe_id() const { return recipe_id_; }

  // Single line, tab-free, suitable for log scraping.
  std::string one_line() const {
    std::string out = "error code=" + std::to_string(static_cast<int>(code_)) + " kind=" +
                      error_code_name(code_) + " module=" + module_;
    if (!recipe_id_.empty()) out += " recipe=" + recipe_id_;
    std::string msg = what();
    for (char& ch : msg)
      if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
    out += " msg=\"" + msg + "\"";
    return out;
  }

 private:
  ErrorCode code_;
  std::string module_;
  std::string recipe_id_;
};

// SplitMix64 (Steele, Lea & Flood 2014). Chosen because its output sequence is
// fully specified, unlike std::shuffle or the std distributions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound) by rejection on the top of the range.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Fisher-Yates, last index downward.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

// Shortest representation that parses back to the same double (locale-free).
inline std::string format_exact(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double value, int digits = 6) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const char* module = "common") {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(ErrorCode::Data, module, "not a number: '" + std::string(text) + "'");
  return value;
}

inline long long parse_int(std::string_view text, const char* module = "common") {
  long long value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::Data, module, "not an integer: '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string read_file(const std::string& path, const char* module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, module, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> read_lines(const std::string& path, const char* module) {
  std::istringstream in(read_file(path, module));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void write_file(const std::string& path, const std::string& content, const char* module) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Config, module, "cannot write file: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// UTF-8 helpers. Case mapping covers ASCII, Latin-1 letters and the oe/OE
// ligature, which is all that French recipe text needs.

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Invalid bytes decode to U+FFFD, one byte at a time.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out += U'�';
      ++i;
      continue;
    }
    out += cp;
    i += len;
  }
  return out;
}

inline std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) append_utf8(out, cp);
  return out;
}

inline char32_t to_lower_cp(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp == 0x152) return 0x153;  // OE ligature
  if (cp == 0x178) return 0xFF;   // Y diaeresis
  return cp;
}

inline char32_t to_upper_cp(char32_t cp) {
  if (cp >= U'a' && cp <= U'z') return cp - 32;
  if (cp >= 0xE0 && cp <= 0xFE && cp != 0xF7) return cp - 32;
  if (cp == 0x153) return 0x152;
  if (cp == 0xFF) return 0x178;
  return cp;
}

inline std::string to_lower_utf8(std::string_view s) {
  std::u32string cps = decode_utf8(s);
  for (char32_t& cp : cps) cp = to_lower_cp(cp);
  return encode_utf8(cps);
}

inline std::string to_upper_utf8(std::string_view s) {
  std::u32string cps = decode_utf8(s);
  for (char32_t& cp : cps) cp = to_upper_cp(cp);
  return encode_utf8(cps);
}

// Folds Latin-1 accented letters and ligatures to ASCII. Only used by the
// evaluator's optional comparison mode.
inline std::string strip_accents(std::string_view s) {
  std::string out;
  for (char32_t cp : decode_utf8(s)) {
    switch (cp) {
      case U'à': case U'á': case U'â': case U'ã': case U'ä': case U'å': out += 'a'; break;
      case U'À': case U'Á': case U'Â': case U'Ã': case U'Ä': case U'Å': out += 'A'; break;
      case U'ç': out += 'c'; break;
      case U'Ç': out += 'C'; break;
      case U'è': case U'é': case U'ê': case U'ë': out += 'e'; break;
      case U'È': case U'É': case U'Ê': case U'Ë': out += 'E'; break;
      case U'ì': case U'í': case U'î': case U'ï': out += 'i'; break;
      case U'Ì': case U'Í': case U'Î': case U'Ï': out += 'I'; break;
      case U'ñ': out += 'n'; break;
      case U'ò': case U'ó': case U'ô': case U'õ': case U'ö': out += 'o'; break;
      case U'Ò': case U'Ó': case U'Ô': case U'Õ': case U'Ö': out += 'O'; break;
      case U'ù': case U'ú': case U'û': case U'ü': out += 'u'; break;
      case U'Ù': case U'Ú': case U'Û': case U'Ü': out += 'U'; break;
      case U'ý': case U'ÿ': out += 'y'; break;
      case U'œ': out += "oe"; break;
      case U'Œ': out += "OE"; break;
      case U'æ': out += "ae"; break;
      case U'Æ': out += "AE"; break;
      default: append_utf8(out, cp);
    }
  }
  return out;
}

}  // namespace deft
