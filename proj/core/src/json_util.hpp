#pragma once

// Internal JSON converters shared by the config loaders; not installed.

#include "crashfreq/model_spec.hpp"
#include "json.hpp"

namespace crashfreq::detail {

inline Term term_from_json(const nlohmann::json& j) {
  Term t;
  if (j.is_string()) {
    t.name = j.get<std::string>();
    return t;
  }
  t.name = j.at("name").get<std::string>();
  if (j.contains("transform")) {
    const std::string tr = j["transform"].get<std::string>();
    if (tr == "identity") t.transform = TermTransform::Identity;
    else if (tr == "log") t.transform = TermTransform::NaturalLog;
    else if (tr == "threshold") t.transform = TermTransform::Threshold;
    else throw std::invalid_argument("unknown term transform: " + tr);
  }
  if (j.contains("threshold")) {
    t.threshold = j["threshold"].get<double>();
    if (!j.contains("transform")) t.transform = TermTransform::Threshold;
  }
  if (t.transform == TermTransform::Threshold && !j.contains("threshold"))
    throw std::invalid_argument("threshold transform needs a 'threshold' value");
  if (j.contains("level")) t.level = j["level"].get<std::string>();
  return t;
}

inline nlohmann::json term_to_json(const Term& t) {
  nlohmann::json j;
  j["name"] = t.name;
  switch (t.transform) {
    case TermTransform::Identity: break;
    case TermTransform::NaturalLog: j["transform"] = "log"; break;
    case TermTransform::Threshold:
      j["transform"] = "threshold";
      j["threshold"] = t.threshold;
      break;
  }
  if (t.level) j["level"] = *t.level;
  return j;
}

inline Formula formula_from_json(const nlohmann::json& j) {
  Formula f;
  f.response = j.value("response", "kabco");
  if (j.contains("terms"))
    for (const auto& t : j["terms"]) f.terms.push_back(term_from_json(t));
  if (j.contains("random_terms"))
    for (const auto& r : j["random_terms"])
      f.random_terms.push_back(r.get<std::string>());
  return f;
}

inline nlohmann::json formula_to_json(const Formula& f) {
  nlohmann::json j;
  j["response"] = f.response;
  j["terms"] = nlohmann::json::array();
  for (const auto& t : f.terms) j["terms"].push_back(term_to_json(t));
  j["random_terms"] = f.random_terms;
  return j;
}

}  // namespace crashfreq::detail
