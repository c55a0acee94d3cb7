#include "selfex/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace selfex {

namespace {

// Welford accumulator; merged with Chan's pairwise update.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }

  double se() const { return n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
};

struct GridMoments {
  std::vector<Moments> lambda, count, jumps, compensator;

  explicit GridMoments(std::size_t rows) : lambda(rows), count(rows), jumps(rows), compensator(rows) {}

  void push(const Path& p) {
    for (std::size_t r = 0; r < p.grid.size(); ++r) {
      lambda[r].push(p.grid[r].lambda);
      count[r].push(static_cast<double>(p.grid[r].count));
      jumps[r].push(p.grid[r].jumps_sum);
      compensator[r].push(p.grid[r].compensator);
    }
  }

  void merge(const GridMoments& o) {
    for (std::size_t r = 0; r < lambda.size(); ++r) {
      lambda[r].merge(o.lambda[r]);
      count[r].merge(o.count[r]);
      jumps[r].merge(o.jumps[r]);
      compensator[r].merge(o.compensator[r]);
    }
  }
};

}  // namespace

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SELFEX_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void for_each_block(std::size_t n, std::size_t block_size, unsigned workers,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t blocks = (n + block_size - 1) / block_size;
  if (blocks == 0) return;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t failed_block = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        body(b, b * block_size, std::min(n, (b + 1) * block_size));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (b < failed_block) {
          failed_block = b;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), blocks));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

EnsembleSummary simulate_ensemble(const ValidatedModel& model, const SimConfig& cfg, std::size_t n_paths,
                                  std::uint64_t master_seed, unsigned workers, std::vector<Path>* keep) {
  if (n_paths < 1) throw Error(Errc::InvalidSimConfig, "ensemble needs at least one path");
  cfg.validate();
  const std::vector<double> times = cfg.grid_times();
  const std::size_t blocks = (n_paths + kEnsembleBlock - 1) / kEnsembleBlock;
  std::vector<GridMoments> partial(blocks, GridMoments(times.size()));
  if (keep != nullptr) {
    keep->clear();
    keep->resize(n_paths);
  }

  for_each_block(n_paths, kEnsembleBlock, resolve_workers(workers),
                 [&](std::size_t b, std::size_t begin, std::size_t end) {
                   for (std::size_t i = begin; i < end; ++i) {
                     RandomStream rng(master_seed, i);
                     Path path;
                     try {
                       path = simulate_path(model, cfg, rng);
                     } catch (const Error& e) {
                       throw Error(e.code(), e.what(), i);
                     }
                     partial[b].push(path);
                     if (keep != nullptr) (*keep)[i] = std::move(path);
                   }
                 });

  GridMoments total(times.size());
  for (const auto& p : partial) total.merge(p);

  EnsembleSummary s;
  s.n_paths = n_paths;
  s.t = times;
  for (std::size_t r = 0; r < times.size(); ++r) {
    s.mean_lambda.push_back(total.lambda[r].mean);
    s.se_lambda.push_back(total.lambda[r].se());
    s.mean_N.push_back(total.count[r].mean);
    s.se_N.push_back(total.count[r].se());
    s.mean_U.push_back(total.jumps[r].mean);
    s.se_U.push_back(total.jumps[r].se());
    s.mean_Lambda.push_back(total.compensator[r].mean);
    s.se_Lambda.push_back(total.compensator[r].se());
  }
  return s;
}

nlohmann::json to_json(const EnsembleSummary& s) {
  return nlohmann::json{{"n_paths", s.n_paths},       {"t", s.t},
                        {"mean_lambda", s.mean_lambda}, {"se_lambda", s.se_lambda},
                        {"mean_N", s.mean_N},           {"se_N", s.se_N},
                        {"mean_U", s.mean_U},           {"se_U", s.se_U},
                        {"mean_Lambda", s.mean_Lambda}, {"se_Lambda", s.se_Lambda}};
}

}  // namespace selfex
