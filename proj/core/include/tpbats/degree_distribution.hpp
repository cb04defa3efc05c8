#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tpbats/random.hpp"

namespace tpbats::bats {

/// Probability law of a batch's degree d in {1, ..., D_max}.
class DegreeDistribution {
 public:
  /// `pmf[d - 1]` is Pr(degree = d). Entries must be non-negative and sum
  /// to 1 within `tolerance`; the table is renormalized exactly afterwards.
  explicit DegreeDistribution(std::vector<double> pmf, double tolerance = 1e-9);

  /// Library default: uniform over [ceil(F/2), F]. Without a precode every
  /// source has to be covered by some batch, which needs large degrees.
  static DegreeDistribution dense(std::size_t file_packets);

  /// Ideal-soliton shape over [1, min(4M, F)], renormalized.
  static DegreeDistribution truncated_soliton(std::size_t batch_size,
                                              std::size_t file_packets);

  /// All mass on one degree.
  static DegreeDistribution fixed(std::size_t degree);

  /// Two whitespace/comma separated columns "degree probability" per line;
  /// '#' starts a comment. The sum is validated within 1e-6.
  static DegreeDistribution parse_table(std::istream& in);
  static DegreeDistribution load_table(const std::filesystem::path& path);

  std::size_t max_degree() const { return pmf_.size(); }
  double probability(std::size_t degree) const;
  const std::vector<double>& pmf() const { return pmf_; }

  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

}  // namespace tpbats::bats
