#pragma once

#include <stdexcept>
#include <string>

namespace kotani {

// Numeric failure with no recovery beyond the message (NaN/Inf, lost digits).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A hop matrix D_n is too ill-conditioned for a stable inverse.
struct singular_hop_error : numeric_error {
  singular_hop_error(long long site_, double cond_)
      : numeric_error("hop matrix near singular at site " +
                      std::to_string(site_) +
                      " (cond ~ " + std::to_string(cond_) + ")"),
        site(site_), cond(cond_) {}
  long long site;
  double cond;
};

// An iterative scheme stopped without meeting its residual target.
struct convergence_error : numeric_error {
  convergence_error(const std::string& what_, int depth_, double residual_)
      : numeric_error(what_ + " (depth " + std::to_string(depth_) +
                      ", residual " + std::to_string(residual_) + ")"),
        depth(depth_), residual(residual_) {}
  int depth;
  double residual;
};

// Entry growth left the representable range; callers should switch to a
// log-scaled estimator instead of raw products.
struct scale_error : numeric_error {
  using numeric_error::numeric_error;
};

// Bad model description (parameters, matrix shapes, symmetry).
struct model_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace kotani
