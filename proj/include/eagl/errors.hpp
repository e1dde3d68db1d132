#pragma once

#include <stdexcept>
#include <string>

namespace eagl {

// All library failures are typed; callers can catch the base to treat any
// of them as a failed trial.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadGraph : Error { using Error::Error; };
struct SizeCapExceeded : Error { using Error::Error; };
struct NodeCountMismatch : Error { using Error::Error; };
struct InvalidSize : Error { using Error::Error; };
struct InvalidRange : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct BadProblem : Error { using Error::Error; };
struct ExplainerUndefined : Error { using Error::Error; };
struct ConditionViolated : Error { using Error::Error; };

struct MissingExplanation : Error { using Error::Error; };
struct BudgetTooLarge : Error { using Error::Error; };
struct SearchSpaceTooLarge : Error { using Error::Error; };

struct ExplanationNotInGraph : Error { using Error::Error; };
struct NotEnoughAbsentPairs : Error { using Error::Error; };
struct EmptyGraphAfterDrop : Error { using Error::Error; };

}  // namespace eagl
