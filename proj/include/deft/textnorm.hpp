#pragma once

// Text normalization for recipe text: punctuation removal with clitic
// splitting, abbreviation expansion, digits to French words, and frequent
// n-gram agglutination ("il y a" -> "il_y_a").

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "deft/common.hpp"
#include "deft/corpus.hpp"

namespace deft {

using TokenStream = std::vector<std::string>;
using Ngram = std::vector<std::string>;

// Atoms for French cardinals. Composition rules (et-un, soixante-dix,
// quatre-vingts, plural cents) follow the 1990 hyphenation convention so that
// every number below 1000 is a single token.
inline std::map<int, std::string> french_number_words() {
  return {{0, "zéro"},     {1, "un"},        {2, "deux"},      {3, "trois"},     {4, "quatre"},
          {5, "cinq"},     {6, "six"},       {7, "sept"},      {8, "huit"},      {9, "neuf"},
          {10, "dix"},     {11, "onze"},     {12, "douze"},    {13, "treize"},   {14, "quatorze"},
          {15, "quinze"},  {16, "seize"},    {20, "vingt"},    {30, "trente"},   {40, "quarante"},
          {50, "cinquante"}, {60, "soixante"}, {100, "cent"}};
}

struct NormConfig {
  std::map<std::string, std::string> abbrev_table{{"th", "thermostat"}, {"kg", "kilogramme"}};
  bool number_conversion = true;
  bool agglutinate = false;
  int agglutination_min_count = 10;
  int agglutination_max_n = 3;
  std::map<int, std::string> language_digits = french_number_words();

  void validate() const {
    for (const auto& [k, v] : abbrev_table) {
      if (k.empty() || k != to_lower_utf8(k) ||
          k.find_first_of(" \t\r\n") != std::string::npos)
        throw Error(ErrorCode::Config, "textnorm",
                    "abbreviation keys must be lowercase and whitespace-free: '" + k + "'");
    }
    if (agglutination_min_count < 2)
      throw Error(ErrorCode::Config, "textnorm", "agglutination_min_count must be >= 2");
    if (agglutination_max_n < 2 || agglutination_max_n > 4)
      throw Error(ErrorCode::Config, "textnorm", "agglutination_max_n must lie in [2,4]");
    for (int n : {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 20, 30, 40, 50, 60, 100})
      if (!language_digits.count(n))
        throw Error(ErrorCode::Config, "textnorm",
                    "number word table lacks an entry for " + std::to_string(n));
  }
};

// One `short<TAB>long` pair per line; blank lines and '#' comments skipped.
inline std::map<std::string, std::string> parse_abbreviations(const std::vector<std::string>& lines) {
  std::map<std::string, std::string> table;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2 || cols[0].empty() || trim(cols[1]).empty())
      throw Error(ErrorCode::Config, "textnorm",
                  "abbreviation line " + std::to_string(i + 1) + " is not short<TAB>long");
    table[cols[0]] = trim(cols[1]);
  }
  return table;
}

inline std::map<std::string, std::string> load_abbreviations(const std::string& path) {
  return parse_abbreviations(read_lines(path, "textnorm"));
}

namespace detail {

inline bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == 0x2019 || cp == 0x02BC; }

inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// Letters and digits; non-ASCII code points count as word characters except
// for typographic punctuation and spacing.
inline bool is_word_cp(char32_t cp) {
  if (cp < 0x80) return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || is_ascii_digit(cp);
  switch (cp) {
    case 0x00A0: case 0x00AB: case 0x00BB: case 0x00B0: case 0x00B7: case 0x00BF: case 0x00A1:
    case 0x2013: case 0x2014: case 0x2018: case 0x201C: case 0x201D: case 0x2026: case 0x202F:
    case 0x2009: case 0x2022: case 0xFFFD:
      return false;
    default:
      return true;
  }
}

inline std::string number_words(int n, const std::map<int, std::string>& d) {
  if (n < 17) return d.at(n);
  if (n < 20) return d.at(10) + "-" + d.at(n - 10);
  if (n < 70) {
    const int tens = n / 10 * 10, unit = n % 10;
    if (unit == 0) return d.at(tens);
    if (unit == 1) return d.at(tens) + "-et-" + d.at(1);
    return d.at(tens) + "-" + d.at(unit);
  }
  if (n < 80) {
    const int rest = n - 60;
    if (rest == 11) return d.at(60) + "-et-" + d.at(11);
    return d.at(60) + "-" + number_words(rest, d);
  }
  if (n < 100) {
    const std::string base = d.at(4) + "-" + d.at(20);
    if (n == 80) return base + "s";
    return base + "-" + number_words(n - 80, d);
  }
  const int hundreds = n / 100, rest = n % 100;
  std::string head = hundreds == 1 ? d.at(100) : d.at(hundreds) + "-" + d.at(100);
  if (rest == 0) return hundreds > 1 ? head + "s" : head;
  return head + "-" + number_words(rest, d);
}

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Appends the word form of a digit token, or the token itself when it is out
// of range (integer part > 999 or more than three decimals).
inline void convert_number(const std::string& tok, const std::map<int, std::string>& d,
                           TokenStream& out) {
  const auto comma = tok.find(',');
  const std::string int_part = tok.substr(0, comma);
  const std::string frac = comma == std::string::npos ? "" : tok.substr(comma + 1);
  const bool ok_int = all_digits(int_part) && int_part.size() <= 9 && std::stoi(int_part) <= 999;
  const bool ok_frac = comma == std::string::npos || (all_digits(frac) && frac.size() <= 3);
  if (!ok_int || !ok_frac) {
    out.push_back(tok);
    return;
  }
  out.push_back(number_words(std::stoi(int_part), d));
  if (comma == std::string::npos) return;
  out.push_back("virgule");
  std::size_t lead = 0;
  while (lead + 1 < frac.size() && frac[lead] == '0') {
    out.push_back(d.at(0));
    ++lead;
  }
  out.push_back(number_words(std::stoi(frac.substr(lead)), d));
}

inline bool is_number_token(const std::string& tok) {
  const auto comma = tok.find(',');
  if (comma == std::string::npos) return all_digits(tok);
  return all_digits(tok.substr(0, comma)) && all_digits(tok.substr(comma + 1));
}

}  // namespace detail

// Step 1: lowercase, drop punctuation, isolate words, split elided clitics
// ("l'oignon" -> "l'", "oignon"). Hyphens between word characters and
// commas between digits stay inside the token.
inline TokenStream tokenize(std::string_view text) {
  std::u32string cps = decode_utf8(text);
  for (char32_t& cp : cps) cp = to_lower_cp(cp);
  TokenStream out;
  std::u32string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(encode_utf8(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    const char32_t next = i + 1 < cps.size() ? cps[i + 1] : 0;
    if (detail::is_apostrophe(cp)) {
      if (!cur.empty()) {
        cur += U'\'';
        flush();
      }
    } else if (cp == U'-') {
      if (!cur.empty() && next && detail::is_word_cp(next)) cur += cp;
      else flush();
    } else if (cp == U',') {
      if (!cur.empty() && detail::is_ascii_digit(cur.back()) && detail::is_ascii_digit(next)) cur += cp;
      else flush();
    } else if (detail::is_word_cp(cp)) {
      cur += cp;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

// Steps 1-3.
inline TokenStream normalize_base(std::string_view text, const NormConfig& config) {
  TokenStream out;
  for (const std::string& tok : tokenize(text)) {
    TokenStream expanded;
    if (auto it = config.abbrev_table.find(tok); it != config.abbrev_table.end()) {
      for (auto& part : tokenize(it->second)) expanded.push_back(std::move(part));
    } else {
      expanded.push_back(tok);
    }
    for (auto& t : expanded) {
      if (config.number_conversion && detail::is_number_token(t))
        detail::convert_number(t, config.language_digits, out);
      else
        out.push_back(std::move(t));
    }
  }
  return out;
}

struct AgglutinationModel {
  std::set<Ngram> ngrams;

  bool empty() const { return ngrams.empty(); }

  int max_n() const {
    int m = 0;
    for (const auto& g : ngrams) m = std::max<int>(m, static_cast<int>(g.size()));
    return m;
  }

  // Sorted, newline-delimited, space-joined.
  std::string serialize() const {
    std::vector<std::string> lines;
    for (const auto& g : ngrams) lines.push_back(join(g, " "));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
  }

  static AgglutinationModel parse(const std::vector<std::string>& lines) {
    AgglutinationModel m;
    for (const auto& line : lines) {
      if (trim(line).empty()) continue;
      auto parts = split(trim(line), ' ');
      if (parts.size() < 2)
        throw Error(ErrorCode::ModelMismatch, "textnorm", "agglutination entry shorter than 2 words");
      m.ngrams.insert(parts);
    }
    return m;
  }
};

// Step 4: greedy longest-match-first merge, left to right.
inline TokenStream agglutinate(const TokenStream& tokens, const AgglutinationModel& model) {
  if (model.empty()) return tokens;
  const int max_n = model.max_n();
  TokenStream out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool merged = false;
    for (int n = std::min<int>(max_n, static_cast<int>(tokens.size() - i)); n >= 2; --n) {
      Ngram window(tokens.begin() + i, tokens.begin() + i + n);
      if (model.ngrams.count(window)) {
        out.push_back(join(window, "_"));
        i += n;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(tokens[i++]);
  }
  return out;
}

inline TokenStream normalize(std::string_view text, const NormConfig& config,
                             const AgglutinationModel* model = nullptr) {
  TokenStream base = normalize_base(text, config);
  if (config.agglutinate && model) return agglutinate(base, *model);
  return base;
}

// Counts every n-gram with 2 <= n <= max_n over the step 1-3 streams of all
// titles and bodies (n-grams never straddle the title/body boundary). An
// n-gram is kept when its count reaches min_count and strictly exceeds the
// count of every longer kept-candidate that contains it, so "il y" is dropped
// when it only ever occurs inside "il y a".
inline AgglutinationModel fit_agglutinator(const Corpus& corpus, const NormConfig& config) {
  if (corpus.recipes.empty()) throw Error(ErrorCode::Data, "textnorm", "empty corpus");
  config.validate();
  const int max_n = config.agglutination_max_n;
  std::map<Ngram, int> counts;
  auto count_stream = [&](const TokenStream& s) {
    for (std::size_t i = 0; i < s.size(); ++i)
      for (int n = 2; n <= max_n && i + n <= s.size(); ++n)
        ++counts[Ngram(s.begin() + i, s.begin() + i + n)];
  };
  for (const auto& r : corpus.recipes) {
    count_stream(normalize_base(r.title, config));
    count_stream(normalize_base(r.body, config));
  }
  std::map<Ngram, int> candidates;
  for (const auto& [g, c] : counts)
    if (c >= config.agglutination_min_count) candidates.emplace(g, c);

  std::map<Ngram, int> max_super;
  for (const auto& [g, c] : candidates) {
    const int len = static_cast<int>(g.size());
    for (int n = 2; n < len; ++n)
      for (int i = 0; i + n <= len; ++i) {
        Ngram sub(g.begin() + i, g.begin() + i + n);
        auto& m = max_super[sub];
        m = std::max(m, c);
      }
  }
  AgglutinationModel model;
  for (const auto& [g, c] : candidates) {
    auto it = max_super.find(g);
    if (it == max_super.end() || c > it->second) model.ngrams.insert(g);
  }
  return model;
}

// All contiguous n-grams, 1 <= n <= max_n, space-joined, with multiplicity.
inline std::vector<std::string> ngrams(const TokenStream& stream, int max_n) {
  std::vector<std::string> out;
  for (int n = 1; n <= max_n; ++n)
    for (std::size_t i = 0; i + n <= stream.size(); ++i) {
      std::string g = stream[i];
      for (int k = 1; k < n; ++k) g += " " + stream[i + k];
      out.push_back(std::move(g));
    }
  return out;
}

// Config plus fitted model; what every vectorizer calls.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(NormConfig config, AgglutinationModel model)
      : config_(std::move(config)), model_(std::move(model)) {}

  TokenStream operator()(std::string_view text) const { return normalize(text, config_, &model_); }

  const NormConfig& config() const { return config_; }
  const AgglutinationModel& model() const { return model_; }

 private:
  NormConfig config_;
  AgglutinationModel model_;
};

}  // namespace deft
