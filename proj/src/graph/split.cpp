#include "ctgn/graph/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "ctgn/errors.hpp"

namespace ctgn {

void SplitSpec::validate() const {
  if (!(train > 0 && val > 0 && test > 0))
    throw DataError("split fractions must be positive");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw DataError("split fractions must sum to 1");
  if (!(unseen_fraction >= 0 && unseen_fraction < 1))
    throw DataError("unseen-node fraction must lie in [0, 1)");
}

ChronoSplit chronological_split(const EventStore& store, const SplitSpec& spec) {
  spec.validate();
  if (store.empty()) throw DataError("cannot split an empty event store");
  const auto n = static_cast<double>(store.size());
  // The epsilon keeps exact products such as 0.85 * 20 from flooring down.
  ChronoSplit s;
  s.total = store.size();
  s.train_end = static_cast<std::size_t>(std::floor(spec.train * n + 1e-9));
  s.val_end = static_cast<std::size_t>(std::floor((spec.train + spec.val) * n + 1e-9));
  if (s.train_size() == 0 || s.val_size() == 0 || s.test_size() == 0)
    throw DataError("split of " + std::to_string(s.total) + " events leaves an empty part (" +
                    std::to_string(s.train_size()) + "/" + std::to_string(s.val_size()) + "/" +
                    std::to_string(s.test_size()) + ")");
  return s;
}

bool InductiveMask::is_unseen(NodeId node) const {
  return std::binary_search(unseen.begin(), unseen.end(), node);
}

InductiveMask mask_unseen_nodes(const EventStore& store, const ChronoSplit& split,
                                double fraction, std::uint64_t seed) {
  if (!(fraction >= 0 && fraction < 1)) throw DataError("unseen-node fraction must lie in [0, 1)");
  InductiveMask mask;
  auto nodes = store.active_nodes();
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(nodes.size()) + 1e-9));
  if (fraction > 0 && count < 1)
    throw DataError("unseen-node fraction selects no node out of " +
                    std::to_string(nodes.size()));
  std::mt19937_64 rng(seed);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  mask.unseen.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(count));
  mask.seen.assign(nodes.begin() + static_cast<std::ptrdiff_t>(count), nodes.end());
  std::sort(mask.unseen.begin(), mask.unseen.end());
  std::sort(mask.seen.begin(), mask.seen.end());

  const auto touches = [&](const Event& e) { return mask.is_unseen(e.src) || mask.is_unseen(e.dst); };
  mask.train = store.slice(0, split.train_end).filter([&](const Event& e) { return !touches(e); });
  if (mask.train.empty()) throw DataError("masking unseen nodes removed every training event");
  for (std::size_t i = split.train_end; i < split.val_end; ++i)
    mask.val_inductive.push_back(touches(store[i]));
  for (std::size_t i = split.val_end; i < split.total; ++i)
    mask.test_inductive.push_back(touches(store[i]));
  return mask;
}

void write_split_manifest(const std::filesystem::path& path, const ChronoSplit& split,
                          const InductiveMask& mask) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "events " << split.total << '\n'
      << "train 0 " << split.train_end << '\n'
      << "val " << split.train_end << ' ' << split.val_end << '\n'
      << "test " << split.val_end << ' ' << split.total << '\n'
      << "train_after_masking " << mask.train.size() << '\n'
      << "unseen " << mask.unseen.size();
  for (NodeId n : mask.unseen) out << ' ' << n;
  out << '\n';
}

}  // namespace ctgn
