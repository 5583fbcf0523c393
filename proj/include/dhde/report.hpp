#pragma once

#include <json.hpp>

#include "dhde/adf.hpp"
#include "dhde/economics.hpp"
#include "dhde/forest.hpp"
#include "dhde/ingest.hpp"
#include "dhde/kansei.hpp"
#include "dhde/linmodel.hpp"

namespace dhde::report {

using Json = nlohmann::ordered_json;

// Non-finite doubles become the strings "inf", "-inf" and "nan".
Json number(double v);

Json fit(const linmodel::LinearFit& f, const std::string& model);
Json betas(const std::vector<linmodel::StandardizedBeta>& b);
Json holdout(const linmodel::HoldoutReport& h);
Json adf(const linmodel::AdfResult& r);
Json vif(const std::vector<linmodel::VifEntry>& v);
Json ablation(const linmodel::AblationResult& a);
Json seasonal(const linmodel::SeasonalSensitivity& s, const std::vector<std::string>& columns);
Json spec_summary(const linmodel::LinearFit& f, const std::string& model);
Json cv(const forest::CvResult& r);
Json importance(const forest::ImportanceReport& r);
Json prevalence(const kansei::PrevalenceReport& r);
Json correlation(const kansei::Correlation& c);
Json gap(const economics::GapReport& g, const std::vector<economics::FrictionFlags>& flags);
Json provenance(const economics::ProvenanceNote& n);
Json ccf(const economics::CcfResult& r);
Json ranking(const economics::RankingResult& r);
Json coverage(const ingest::Coverage& c);

}  // namespace dhde::report
