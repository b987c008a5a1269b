#include "smcmc/param_vector.hpp"

#include <algorithm>
#include <cstring>

#include "smcmc/errors.hpp"

namespace smcmc {

std::size_t ParameterVector::find(std::string_view name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].name == name) return i;
  return npos;
}

void ParameterVector::append_block(std::string name, std::vector<double> values) {
  if (find(name) != npos)
    throw ContractViolation("duplicate block name: " + name);
  dim_ += values.size();
  blocks_.push_back(Block{std::move(name), std::move(values)});
}

bool ParameterVector::has_block(std::string_view name) const { return find(name) != npos; }

const std::vector<double>& ParameterVector::values(std::string_view name) const {
  const std::size_t i = find(name);
  if (i == npos) throw ContractViolation("no such block: " + std::string(name));
  return blocks_[i].values;
}

std::vector<double>& ParameterVector::mutable_values(std::string_view name) {
  const std::size_t i = find(name);
  if (i == npos) throw ContractViolation("no such block: " + std::string(name));
  return blocks_[i].values;
}

double ParameterVector::component(std::string_view name, std::size_t index) const {
  const auto& v = values(name);
  if (index >= v.size()) throw ContractViolation("component index out of range");
  return v[index];
}

std::vector<double> ParameterVector::gather_prefix(std::string_view prefix) const {
  std::vector<double> out;
  for (const auto& b : blocks_)
    if (b.name.starts_with(prefix)) out.insert(out.end(), b.values.begin(), b.values.end());
  return out;
}

void ParameterVector::scatter_prefix(std::string_view prefix, std::span<const double> vals) {
  std::size_t pos = 0;
  for (auto& b : blocks_) {
    if (!b.name.starts_with(prefix)) continue;
    if (pos + b.values.size() > vals.size())
      throw ContractViolation("scatter_prefix: too few values");
    std::copy_n(vals.begin() + static_cast<std::ptrdiff_t>(pos), b.values.size(),
                b.values.begin());
    pos += b.values.size();
  }
  if (pos != vals.size()) throw ContractViolation("scatter_prefix: size mismatch");
}

std::vector<double> ParameterVector::flatten() const {
  std::vector<double> out;
  out.reserve(dim_);
  for (const auto& b : blocks_) out.insert(out.end(), b.values.begin(), b.values.end());
  return out;
}

bool ParameterVector::same_structure(const ParameterVector& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i].name != other.blocks_[i].name ||
        blocks_[i].values.size() != other.blocks_[i].values.size())
      return false;
  return true;
}

bool ParameterVector::prefix_identical(const ParameterVector& other, std::size_t n_blocks) const {
  if (n_blocks > blocks_.size() || n_blocks > other.blocks_.size()) return false;
  for (std::size_t i = 0; i < n_blocks; ++i) {
    const Block& a = blocks_[i];
    const Block& b = other.blocks_[i];
    if (a.name != b.name || a.values.size() != b.values.size()) return false;
    if (!a.values.empty() &&
        std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

}  // namespace smcmc
