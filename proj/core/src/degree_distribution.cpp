#include "tpbats/degree_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>

#include "tpbats/errors.hpp"

namespace tpbats::bats {

DegreeDistribution::DegreeDistribution(std::vector<double> pmf, double tolerance)
    : pmf_(std::move(pmf)) {
  if (pmf_.empty()) {
    throw CodecError("DegreeDistribution: empty table");
  }
  for (double p : pmf_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw CodecError("DegreeDistribution: probabilities must be finite and >= 0");
    }
  }
  const double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  if (std::abs(total - 1.0) > tolerance) {
    throw CodecError("DegreeDistribution: probabilities sum to " +
                     std::to_string(total) + ", expected 1");
  }
  for (double& p : pmf_) p /= total;
  while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

DegreeDistribution DegreeDistribution::dense(std::size_t file_packets) {
  if (file_packets == 0) throw CodecError("DegreeDistribution::dense: F = 0");
  const std::size_t lo = (file_packets + 1) / 2;
  std::vector<double> pmf(file_packets, 0.0);
  const double w = 1.0 / static_cast<double>(file_packets - lo + 1);
  for (std::size_t d = std::max<std::size_t>(lo, 1); d <= file_packets; ++d) {
    pmf[d - 1] = w;
  }
  return DegreeDistribution(std::move(pmf));
}

DegreeDistribution DegreeDistribution::truncated_soliton(std::size_t batch_size,
                                                         std::size_t file_packets) {
  const std::size_t dmax = std::min(4 * batch_size, file_packets);
  if (dmax == 0) throw CodecError("DegreeDistribution::truncated_soliton: empty range");
  std::vector<double> pmf(dmax);
  pmf[0] = 1.0 / static_cast<double>(dmax);
  for (std::size_t d = 2; d <= dmax; ++d) {
    pmf[d - 1] = 1.0 / (static_cast<double>(d) * static_cast<double>(d - 1));
  }
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  for (double& p : pmf) p /= total;
  return DegreeDistribution(std::move(pmf));
}

DegreeDistribution DegreeDistribution::fixed(std::size_t degree) {
  if (degree == 0) throw CodecError("DegreeDistribution::fixed: degree 0");
  std::vector<double> pmf(degree, 0.0);
  pmf.back() = 1.0;
  return DegreeDistribution(std::move(pmf));
}

DegreeDistribution DegreeDistribution::parse_table(std::istream& in) {
  std::vector<double> pmf;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first == "degree") continue;  // optional header row
    long degree = 0;
    double prob = 0.0;
    std::istringstream deg_in(first);
    if (!(deg_in >> degree) || !(fields >> prob) || degree < 1) {
      throw CodecError("degree table line " + std::to_string(line_no) +
                       ": expected '<degree >= 1> <probability>'");
    }
    if (pmf.size() < static_cast<std::size_t>(degree)) pmf.resize(degree, 0.0);
    pmf[degree - 1] += prob;
  }
  return DegreeDistribution(std::move(pmf), 1e-6);
}

DegreeDistribution DegreeDistribution::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CodecError("cannot open degree table " + path.string());
  return parse_table(in);
}

double DegreeDistribution::probability(std::size_t degree) const {
  if (degree == 0 || degree > pmf_.size()) return 0.0;
  return pmf_[degree - 1];
}

std::size_t DegreeDistribution::sample(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  // cdf_ is strictly increasing where pmf_ > 0 and ends at 1, so the
  // first entry above u always carries positive mass.
  return static_cast<std::size_t>(it - cdf_.begin()) + 1;
}

}  // namespace tpbats::bats
