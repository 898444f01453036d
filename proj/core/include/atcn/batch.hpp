#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace atcn {

/// Padded [B x n] id matrices for one training/evaluation step. Row-major;
/// cells at t >= lengths[b] hold the PAD id and have mask 0.
struct SequenceBatch {
  std::size_t batchSize = 0;
  std::size_t steps = 0;
  std::vector<std::int32_t> inputIds;
  std::vector<std::int32_t> targetIds;
  std::vector<std::uint8_t> mask;
  std::vector<std::size_t> lengths;

  std::size_t positions() const { return batchSize * steps; }
};

}  // namespace atcn
