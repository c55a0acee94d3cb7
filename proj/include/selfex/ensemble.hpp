#pragma once

#include "selfex/error.hpp"
#include "selfex/thinning.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace selfex {

/// Worker count: `requested` if non-zero, else SELFEX_THREADS, else the
/// hardware concurrency.
unsigned resolve_workers(unsigned requested = 0);

/// Runs body(block_index, begin, end) over fixed blocks of [0, n). Block
/// boundaries depend only on n and block_size, never on the worker count.
/// If any block throws, no new blocks are started and the exception of the
/// lowest failing block is rethrown.
void for_each_block(std::size_t n, std::size_t block_size, unsigned workers,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline constexpr std::size_t kEnsembleBlock = 256;

/// Simulates paths 0..n-1 (path i uses RandomStream(master_seed, i)) and
/// returns fn(path, i) in path order. Paths are discarded after fn runs.
template <typename Fn>
auto map_paths(const ValidatedModel& model, const SimConfig& cfg, std::size_t n_paths,
               std::uint64_t master_seed, Fn&& fn, unsigned workers = 0) {
  using Result = std::decay_t<std::invoke_result_t<Fn&, const Path&, std::size_t>>;
  cfg.validate();
  std::vector<Result> results(n_paths);
  for_each_block(n_paths, kEnsembleBlock, resolve_workers(workers),
                 [&](std::size_t, std::size_t begin, std::size_t end) {
                   for (std::size_t i = begin; i < end; ++i) {
                     RandomStream rng(master_seed, i);
                     try {
                       results[i] = fn(simulate_path(model, cfg, rng), i);
                     } catch (const Error& e) {
                       if (e.path_index()) throw;
                       throw Error(e.code(), e.what(), i);
                     }
                   }
                 });
  return results;
}

/// Per-grid-time ensemble moments of lambda, N, U and Lambda.
struct EnsembleSummary {
  std::size_t n_paths = 0;
  std::vector<double> t;
  std::vector<double> mean_lambda, se_lambda;
  std::vector<double> mean_N, se_N;
  std::vector<double> mean_U, se_U;
  std::vector<double> mean_Lambda, se_Lambda;
};

/// Runs n_paths paths and reduces them block by block in path order, so the
/// summary is bit-identical for any worker count. When `keep` is non-null the
/// full paths are stored there as well.
EnsembleSummary simulate_ensemble(const ValidatedModel& model, const SimConfig& cfg, std::size_t n_paths,
                                  std::uint64_t master_seed, unsigned workers = 0,
                                  std::vector<Path>* keep = nullptr);

nlohmann::json to_json(const EnsembleSummary& summary);

}  // namespace selfex
