#pragma once

#include "mbt/common/error.hpp"

namespace mbt::netsim {

/// Simulated compute charges in milliseconds.
struct CostModel {
  double sha_block_ms = 55.0;
  double chame_block_ms = 62.0;
  double colli_block_ms = 27.0;
  double db_write_ms = 11.0;
  // Blocks a worker forms concurrently.
  unsigned worker_cores = 2;

  void validate() const {
    if (sha_block_ms < 0 || chame_block_ms < 0 || colli_block_ms < 0 || db_write_ms < 0) {
      throw Error(ErrorKind::kConfig, "costs must be non-negative");
    }
    if (worker_cores == 0) throw Error(ErrorKind::kConfig, "worker_cores must be at least 1");
  }
};

}  // namespace mbt::netsim
