#pragma once

#include <vector>

#include "conical/matrix.hpp"
#include "conical/xray.hpp"

namespace conical {

// Column-subset selection: the anchors of the data cone act as exemplars for
// all columns. Uses the max exterior criterion unless the caller overrides.
inline std::vector<std::size_t> exemplar_select(const DenseMatrix& x, std::size_t r,
                                                RunConfig cfg) {
  cfg.rank = r;
  return run_xray(x, cfg).anchors;
}

}  // namespace conical
