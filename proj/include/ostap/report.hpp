#pragma once

#include <string>

#include "ostap/analysis.hpp"
#include "ostap/montecarlo.hpp"

namespace ostap {

// Human-readable report with the SIDE CONDITIONS / OST FACT / FINAL FACT
// sections. Byte-stable for a given analysis result.
std::string text_report(const AnalysisResult& r);

// Structured counterpart ("schema": 1) carrying the same content.
std::string json_report(const AnalysisResult& r);

// Same document with a "validation" object appended when `val` is non-null.
std::string json_report(const AnalysisResult& r, const ValidateResult* val);

// Closed form of a solved fact, "num" or "(num) / (den)".
std::string closed_form(const Fact& f);

std::string text_sim_report(const SimReport& rep);
std::string json_sim_report(const SimReport& rep);

std::string text_validation(const ValidateResult& v);

}  // namespace ostap
