#pragma once

#include <eagl/learners.hpp>
#include <eagl/problems.hpp>

#include <vector>

namespace eagl {

// Largest witness found by the shattering search, with the indices (into
// the instance list) whose every labeling the class realizes.
struct ShatterCertificate {
  int dimension = 0;
  std::vector<int> witness;
};

// Largest subset of the instance list, up to size cap, whose explanation
// keys are pairwise distinct and which the hypothesis class shatters. The
// class realizes a labeling exactly when the labeling is constant on equal
// hypothesis cells (canonical graph key, or edge count), so a witness is
// shattered exactly when its cells are pairwise distinct. Throws
// SearchSpaceTooLarge for more than 30 instances with an uncapped search.
ShatterCertificate explained_vc_dim(const HypothesisClass& h, const std::vector<Graph>& instances,
                                    const std::vector<CanonicalKey>& expl_keys, int cap = 30);

// Same search with the problem's own explainer over its support.
ShatterCertificate explained_vc_dim(const HypothesisClass& h, const ExactProblem& p, int cap = 30);

// Identity explainer: every instance is its own explanation, so only the
// cell structure constrains the witness. This is the standard dimension.
ShatterCertificate standard_vc_dim(const HypothesisClass& h, const std::vector<Graph>& instances,
                                   int cap = 30);

// Sample-size curve d*ln^2(max(d,2))/eps^2 + ln(1/delta)/eps^2 with unit
// constants and natural logs; shape reference for plots, not a calibrated
// prediction.
double sample_complexity_bound(int d, double eps, double delta);

}  // namespace eagl
