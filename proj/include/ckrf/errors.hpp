#pragma once

#include <stdexcept>
#include <string>

namespace ckrf {

// Validation failure of class/cohomology data: the base class degenerates no
// later than the fiber, so the collapsing model is not defined.
struct ClassDegeneracy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A density that must be a Kahler metric became nonpositive somewhere.
struct PositivityLoss : std::runtime_error {
    PositivityLoss(const std::string& what, int node) : std::runtime_error(what), node(node) {}
    int node;
};

// Log argument <= 0 while assembling the Monge-Ampere right-hand side.
struct NonpositiveArgument : std::runtime_error {
    NonpositiveArgument(const std::string& what, int node) : std::runtime_error(what), node(node) {}
    int node;
};

// Newton iteration exhausted its budget without meeting the residual tolerance.
struct NewtonDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Decay-rate fit preconditions.
struct NonpositiveValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewSamples : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Base ball too small for the mesh in neighborhood diameter queries.
struct UnresolvedRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration file problems (unknown keys, bad values, schema mismatch).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Time step underflowed during automatic halving.
struct StepUnderflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ckrf
