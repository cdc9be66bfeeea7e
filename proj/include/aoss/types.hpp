#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "aoss/error.hpp"

namespace aoss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Subdata selection strategies.
enum class Algorithm { kLevss, kAlg1, kAlg2, kRandom };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kLevss: return "levss";
    case Algorithm::kAlg1: return "alg1";
    case Algorithm::kAlg2: return "alg2";
    case Algorithm::kRandom: return "random";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "levss") return Algorithm::kLevss;
  if (s == "alg1") return Algorithm::kAlg1;
  if (s == "alg2") return Algorithm::kAlg2;
  if (s == "random") return Algorithm::kRandom;
  throw ValidationError("unknown algorithm '" + s +
                        "' (expected levss, alg1, alg2 or random)");
}

/// Model search strategies for BIC selection.
enum class SearchMethod { kAllSubset, kForward };

inline std::string to_string(SearchMethod m) {
  return m == SearchMethod::kAllSubset ? "all-subset" : "forward";
}

inline SearchMethod search_from_string(const std::string& s) {
  if (s == "all-subset") return SearchMethod::kAllSubset;
  if (s == "forward") return SearchMethod::kForward;
  throw ValidationError("unknown search method '" + s +
                        "' (expected all-subset or forward)");
}

}  // namespace aoss
