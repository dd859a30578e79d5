#pragma once

#include <string>
#include <vector>

#include "storeplan/instance.hpp"
#include "storeplan/model_core.hpp"

namespace storeplan {

enum class BlockScheme { kHour, kDay, kWeek, kSingle };

BlockScheme ParseBlockScheme(const std::string& name);  // hour | day | week | single
std::string BlockSchemeName(BlockScheme scheme);

struct AdmmConfig {
  double beta = 1.0;
  int max_iters = 20000;
  double eps_primal = 1e-5;
  double eps_dual = 1e-5;
  BlockScheme scheme = BlockScheme::kDay;
  int threads = 1;  // dispatch blocks solved concurrently
  // Residual balancing: beta is doubled when the primal residual exceeds
  // ten times the dual one and halved in the opposite case, during the
  // first adapt_iters iterations only. With it off beta stays fixed.
  bool adaptive_beta = true;
  // Over-relaxation factor in (0, 2); 1 gives the plain updates.
  double relaxation = 1.0;
  int adapt_iters = 1000;
  void Validate() const;
};

// Block layout: one capacity block (z, t, u) and one dispatch block (x, r,
// s) per chunk of hours. With kSingle the whole LP is one block and nothing
// is linked.
struct BlockStructure {
  BlockScheme scheme = BlockScheme::kDay;
  struct Chunk {
    int first_hour = 0;
    int hours = 0;
  };
  std::vector<Chunk> chunks;
  int capacity_links = 0;  // x <= a z rows
  int door_links = 0;      // charge and discharge rows
  int room_links = 0;      // s <= u rows
  int soc_links = 0;       // end-of-chunk state of charge handed to the next chunk
  int num_dispatch_blocks() const { return static_cast<int>(chunks.size()); }
  int num_links() const { return capacity_links + door_links + room_links + soc_links; }
};

// Throws kIndivisibleHorizon when the chunk length does not divide n.
BlockStructure PartitionBlocks(const SystemInstance& instance, BlockScheme scheme);

struct AdmmIteration {
  int iter = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  double seconds = 0.0;        // wall time of the iteration
  double block_seconds = 0.0;  // summed dispatch-block solve time
  double beta = 0.0;           // penalty used in this iteration
};

struct AdmmTrace {
  std::vector<AdmmIteration> iterations;
  bool converged = false;
  // CSV with header iter,primal_residual,dual_residual,objective,seconds,beta.
  std::string ToCsv() const;
};

struct AdmmResult {
  SolveResult result;
  AdmmTrace trace;
  BlockStructure blocks;
  bool converged() const { return trace.converged; }
};

// Sharing-form ADMM over the block structure. Quantities are scaled by the
// largest demand and costs by the largest running cost before iterating, so beta
// and the tolerances are in normalized units. Residuals are Euclidean norms
// divided by the square root of the number of linked scalars. When the
// iteration limit is hit the last iterate is returned with
// trace.converged = false. Throws kNumericalFailure if a block fails.
AdmmResult AdmmSolve(const SystemInstance& instance, const AdmmConfig& config = {});

}  // namespace storeplan
