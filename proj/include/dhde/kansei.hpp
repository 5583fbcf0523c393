#pragma once

#include <istream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dhde/ingest.hpp"

namespace dhde::kansei {

enum class Category { Atmosphere, Density, Commerce, Experience, Decline };

std::string to_string(Category c);
Category parse_category(const std::string& s);

struct LexiconEntry {
  std::string keyword;  // root form, NFKC
  std::string romanization;
  Category category = Category::Atmosphere;
  std::string gloss;
};

class Lexicon {
public:
  explicit Lexicon(std::vector<LexiconEntry> entries);

  // The 21-entry under-vibrancy lexicon.
  static Lexicon embedded();

  // Tab-separated "keyword, romanization, category, gloss" lines; an optional
  // header row starting with "keyword" and '#' comments are skipped.
  static Lexicon load_tsv(std::istream& in);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

private:
  std::vector<LexiconEntry> entries_;
};

// Normalizes each field (NFKC), drops blank fields, joins reason,
// inconvenience and freetext with single spaces and trims the result.
std::string preprocess_text(const ingest::SurveyResponse& r);
std::string preprocess_text(std::string_view reason, std::string_view inconvenience, std::string_view freetext);

// Keywords that occur as contiguous substrings, in lexicon order.
std::vector<std::string> match_lexicon(std::string_view text, const Lexicon& lexicon);

struct GroupStats {
  std::size_t n = 0;
  std::size_t hits = 0;
  double rate = 0.0;
};

struct ChiSquare {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Pearson chi-square for the 2x2 table [[a, b], [c, d]].
ChiSquare chi_square_2x2(double a, double b, double c, double d, bool continuity_correction);

struct PrevalenceReport {
  GroupStats low, high;
  double ratio = 0.0;
  bool ratio_infinite = false;
  ChiSquare chi2;            // uncorrected (default)
  ChiSquare chi2_corrected;  // Yates
  std::vector<std::pair<std::string, std::size_t>> keyword_hits_low, keyword_hits_high;
};

// A response is a hit when its preprocessed text matches at least one
// keyword. Responses with satisfaction outside both groups are ignored.
PrevalenceReport prevalence_analysis(const std::vector<ingest::SurveyResponse>& responses, const Lexicon& lexicon,
                                     const std::set<int>& low = {1, 2}, const std::set<int>& high = {4, 5});

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// Pearson correlation of mid-ranks; two-sided p from t = r sqrt((n-2)/(1-r^2)).
Correlation spearman(std::span<const double> x, std::span<const double> y);
Correlation pearson(std::span<const double> x, std::span<const double> y);

}  // namespace dhde::kansei
