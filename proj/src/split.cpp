#include "tileadapt/split.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tileadapt/rng.hpp"

namespace tileadapt {

SplitSpec split_dataset(const std::vector<std::string>& ids, double ratio,
                        std::uint64_t seed) {
  if (ids.empty())
    throw std::invalid_argument("split_dataset: no tile ids");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("split_dataset: ratio must lie in (0,1)");

  std::vector<std::string> shuffled = ids;
  SplitMix64 rng(seed);
  shuffle(shuffled, rng);

  // floor(ratio*N); the epsilon keeps IEEE round-off (e.g. 0.7*10) from
  // dropping an exact product below the integer it equals mathematically.
  const auto n_train = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(ids.size()) + 1e-9));

  SplitSpec split;
  split.ratio = ratio;
  split.seed = seed;
  split.train_ids.assign(shuffled.begin(), shuffled.begin() + n_train);
  split.test_ids.assign(shuffled.begin() + n_train, shuffled.end());
  return split;
}

void save_split(const SplitSpec& split, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["ratio"] = split.ratio;
  j["seed"] = split.seed;
  j["train_ids"] = split.train_ids;
  j["test_ids"] = split.test_ids;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write split: " + path.string());
  out << j.dump(2) << '\n';
}

SplitSpec load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open split: " + path.string());
  nlohmann::json j;
  in >> j;
  SplitSpec split;
  split.ratio = j.value("ratio", 0.8);
  split.seed = j.value("seed", std::uint64_t{0});
  split.train_ids = j.at("train_ids").get<std::vector<std::string>>();
  split.test_ids = j.at("test_ids").get<std::vector<std::string>>();
  return split;
}

}  // namespace tileadapt
