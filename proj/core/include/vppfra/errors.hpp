#pragma once

#include <stdexcept>
#include <string>

namespace vppfra {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scenario file could not be parsed at all.
struct ParseError : Error {
  using Error::Error;
};

// A scenario type invariant is violated; message names the offending element.
struct ValidationError : Error {
  using Error::Error;
};

// A box constraint has min > max after parameter overrides.
struct InfeasibleStructure : Error {
  using Error::Error;
};

// LP has no feasible point. `family` names the constraint family driving
// the largest irreducible infeasibility.
struct Infeasible : Error {
  std::string family;
  Infeasible(const std::string& msg, std::string fam) : Error(msg), family(std::move(fam)) {}
};

// LP objective is unbounded below along a ray; `family` names the column family.
struct Unbounded : Error {
  std::string family;
  Unbounded(const std::string& msg, std::string fam) : Error(msg), family(std::move(fam)) {}
};

// A learnable parameter occupies a coefficient-matrix cell, which would make
// the stationarity conditions bilinear.
struct HookViolation : Error {
  using Error::Error;
};

struct HorizonMismatch : Error {
  using Error::Error;
};

struct ZeroTruth : Error {
  using Error::Error;
};

struct MissingArtifact : Error {
  using Error::Error;
};

}  // namespace vppfra
