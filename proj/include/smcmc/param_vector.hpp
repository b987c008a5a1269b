#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smcmc {

// Sampled state of one chain: an ordered list of named real blocks.
// Dimension growth is append-only; sweeps may rewrite values in place
// but never change the block layout.
class ParameterVector {
 public:
  struct Block {
    std::string name;
    std::vector<double> values;
  };

  ParameterVector() = default;

  // Appends a new block; existing blocks are untouched. Duplicate names throw.
  void append_block(std::string name, std::vector<double> values);

  std::size_t dim() const { return dim_; }
  std::size_t block_count() const { return blocks_.size(); }
  const Block& block(std::size_t i) const { return blocks_[i]; }

  bool has_block(std::string_view name) const;
  const std::vector<double>& values(std::string_view name) const;
  std::vector<double>& mutable_values(std::string_view name);
  double component(std::string_view name, std::size_t index) const;

  // Concatenation of all blocks whose name starts with `prefix`, in block order.
  std::vector<double> gather_prefix(std::string_view prefix) const;
  // Writes `vals` back over the same concatenation; sizes must match.
  void scatter_prefix(std::string_view prefix, std::span<const double> vals);

  // All values concatenated in block order.
  std::vector<double> flatten() const;

  // Same block names and sizes, in the same order.
  bool same_structure(const ParameterVector& other) const;
  // First `n_blocks` blocks identical (names, sizes, bitwise values).
  bool prefix_identical(const ParameterVector& other, std::size_t n_blocks) const;

 private:
  std::size_t find(std::string_view name) const;  // index or npos
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<Block> blocks_;
  std::size_t dim_ = 0;
};

}  // namespace smcmc
