#include "dhde/kansei.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "dhde/error.hpp"
#include "dhde/stats.hpp"
#include "dhde/text.hpp"

namespace dhde::kansei {

std::string to_string(Category c) {
  switch (c) {
    case Category::Atmosphere: return "Atmosphere";
    case Category::Density: return "Density";
    case Category::Commerce: return "Commerce";
    case Category::Experience: return "Experience";
    case Category::Decline: return "Decline";
  }
  return "?";
}

Category parse_category(const std::string& s) {
  for (Category c : {Category::Atmosphere, Category::Density, Category::Commerce, Category::Experience,
                     Category::Decline}) {
    if (to_string(c) == s) return c;
  }
  throw DataError("unknown lexicon category '" + s + "'");
}

Lexicon::Lexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (auto& e : entries_) {
    e.keyword = text::trim(text::nfkc(e.keyword));
    if (e.keyword.empty()) throw DataError("lexicon keyword must not be empty");
    if (!seen.insert(e.keyword).second) throw DataError("duplicate lexicon keyword '" + e.keyword + "'");
  }
}

Lexicon Lexicon::embedded() {
  using C = Category;
  return Lexicon({
      {"静か", "shizuka", C::Atmosphere, "Quiet / Silent"},
      {"寂し", "sabishi", C::Atmosphere, "Lonely / Desolate"},
      {"さびし", "sabishi", C::Atmosphere, "Lonely (hiragana)"},
      {"さみし", "samishi", C::Atmosphere, "Lonely (phonetic variant)"},
      {"人が少な", "hito ga suku-na", C::Density, "Few people around"},
      {"人がいな", "hito ga i-na", C::Density, "Nobody around"},
      {"活気", "kakki", C::Atmosphere, "Vitality (absence of)"},
      {"賑わ", "nigiwai", C::Atmosphere, "Lively (absence of)"},
      {"にぎわ", "nigiwai", C::Atmosphere, "Lively (hiragana)"},
      {"閑散", "kansan", C::Atmosphere, "Deserted / Sparse"},
      {"寂れ", "sabie", C::Decline, "Run-down"},
      {"さびれ", "sabie", C::Decline, "Run-down (hiragana)"},
      {"閉まっ", "shimatte", C::Commerce, "Closed facilities"},
      {"店がな", "mise ga na", C::Commerce, "No shops present"},
      {"営業し", "eigyō shi", C::Commerce, "Operating (negative constructions)"},
      {"何もな", "nani mo na", C::Experience, "Nothing to do"},
      {"つまらな", "tsumarana", C::Experience, "Boring / Dull"},
      {"退屈", "taikutsu", C::Experience, "Boredom"},
      {"物足りな", "monotari-na", C::Experience, "Unsatisfying"},
      {"盛り上が", "moriagari", C::Atmosphere, "Excitement (absence of)"},
      {"人通り", "hitodori", C::Density, "Foot traffic"},
  });
}

Lexicon Lexicon::load_tsv(std::istream& in) {
  std::vector<LexiconEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line) || line.front() == '#') continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (entries.empty() && text::trim(f[0]) == "keyword") continue;
    if (f.size() < 3) throw RowError(lineno, "lexicon line needs keyword, romanization and category");
    entries.push_back({f[0], text::trim(f[1]), parse_category(text::trim(f[2])), f.size() > 3 ? text::trim(f[3]) : ""});
  }
  return Lexicon(std::move(entries));
}

std::string preprocess_text(std::string_view reason, std::string_view inconvenience, std::string_view freetext) {
  std::string out;
  for (std::string_view field : {reason, inconvenience, freetext}) {
    const std::string norm = text::trim(text::nfkc(field));
    if (norm.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += norm;
  }
  return text::trim(out);
}

std::string preprocess_text(const ingest::SurveyResponse& r) {
  return preprocess_text(r.reason, r.inconvenience, r.freetext);
}

std::vector<std::string> match_lexicon(std::string_view text, const Lexicon& lexicon) {
  std::vector<std::string> hits;
  if (text.empty()) return hits;
  for (const auto& e : lexicon.entries()) {
    // UTF-8 is self-synchronizing, so a byte match is a code-point match.
    if (text.find(e.keyword) != std::string_view::npos) hits.push_back(e.keyword);
  }
  return hits;
}

ChiSquare chi_square_2x2(double a, double b, double c, double d, bool continuity_correction) {
  const double n = a + b + c + d;
  const double rows[2] = {a + b, c + d};
  const double cols[2] = {a + c, b + d};
  if (rows[0] == 0 || rows[1] == 0 || cols[0] == 0 || cols[1] == 0) return {0.0, 1.0};
  const double obs[2][2] = {{a, b}, {c, d}};
  double stat = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / n;
      double dev = std::fabs(obs[i][j] - expected);
      if (continuity_correction) dev = std::max(0.0, dev - 0.5);
      stat += dev * dev / expected;
    }
  }
  return {stat, stats::chi2_sf(stat, 1.0)};
}

PrevalenceReport prevalence_analysis(const std::vector<ingest::SurveyResponse>& responses, const Lexicon& lexicon,
                                     const std::set<int>& low, const std::set<int>& high) {
  PrevalenceReport rep;
  std::vector<std::size_t> kw_low(lexicon.size(), 0), kw_high(lexicon.size(), 0);
  for (const auto& r : responses) {
    if (!r.satisfaction) continue;
    const bool is_low = low.contains(*r.satisfaction);
    const bool is_high = high.contains(*r.satisfaction);
    if (!is_low && !is_high) continue;
    GroupStats& g = is_low ? rep.low : rep.high;
    auto& kw = is_low ? kw_low : kw_high;
    ++g.n;
    const auto hits = match_lexicon(preprocess_text(r), lexicon);
    if (!hits.empty()) ++g.hits;
    for (const auto& h : hits) {
      for (std::size_t i = 0; i < lexicon.size(); ++i) {
        if (lexicon.entries()[i].keyword == h) ++kw[i];
      }
    }
  }
  if (rep.low.n == 0 || rep.high.n == 0) throw DataError("prevalence_analysis: both satisfaction groups must be non-empty");
  rep.low.rate = static_cast<double>(rep.low.hits) / static_cast<double>(rep.low.n);
  rep.high.rate = static_cast<double>(rep.high.hits) / static_cast<double>(rep.high.n);
  if (rep.high.hits == 0) {
    rep.ratio_infinite = true;
    rep.ratio = std::numeric_limits<double>::infinity();
  } else {
    rep.ratio = rep.low.rate / rep.high.rate;
  }
  const auto a = static_cast<double>(rep.low.hits), b = static_cast<double>(rep.low.n - rep.low.hits);
  const auto c = static_cast<double>(rep.high.hits), d = static_cast<double>(rep.high.n - rep.high.hits);
  rep.chi2 = chi_square_2x2(a, b, c, d, false);
  rep.chi2_corrected = chi_square_2x2(a, b, c, d, true);
  for (std::size_t i = 0; i < lexicon.size(); ++i) {
    rep.keyword_hits_low.emplace_back(lexicon.entries()[i].keyword, kw_low[i]);
    rep.keyword_hits_high.emplace_back(lexicon.entries()[i].keyword, kw_high[i]);
  }
  return rep;
}

namespace {

Correlation with_p(double r, std::size_t n) {
  Correlation c{r, 0.0, n};
  if (std::fabs(r) >= 1.0) {
    c.p_value = 0.0;
    return c;
  }
  const double df = static_cast<double>(n) - 2.0;
  c.p_value = stats::t_two_sided_p(r * std::sqrt(df / (1.0 - r * r)), df);
  return c;
}

void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("correlation inputs differ in length");
  if (x.size() < 4) throw NumericalError("correlation needs at least 4 pairs");
}

}  // namespace

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const auto rx = stats::midranks(x);
  const auto ry = stats::midranks(y);
  return with_p(stats::pearson_r(rx, ry), x.size());
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  return with_p(stats::pearson_r(x, y), x.size());
}

}  // namespace dhde::kansei
