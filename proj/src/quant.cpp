#include "stocon/quant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "stocon/kernels.hpp"

namespace stocon {

namespace {

void check_invariants(const QuantizerGrid& g, const char* who) {
  const int K = g.K();
  if (K < 1 || g.dim < 1 || g.centers.size() != static_cast<std::size_t>(K) * g.dim)
    throw SolverError(std::string(who) + ": malformed grid");
  double sum = 0.0;
  for (double w : g.weights) {
    if (!(w >= 0.0)) throw SolverError(std::string(who) + ": negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw SolverError(std::string(who) + ": weights not normalized");
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < i; ++j)
      if (kern::sqdist(g.center(i), g.center(j), g.dim) <= 1e-18)
        throw SolverError(std::string(who) + ": centers not distinct");
}

// Cell boundaries for sorted 1-D centers: midpoints between neighbors.
std::vector<double> midpoints(const std::vector<double>& c) {
  std::vector<double> m(c.size() - 1);
  for (std::size_t i = 0; i + 1 < c.size(); ++i) m[i] = 0.5 * (c[i] + c[i + 1]);
  return m;
}

// Index of the nearest sorted center; a point exactly on a midpoint belongs
// to the left cell (lowest-index tie rule).
inline int cell_of(const std::vector<double>& mids, double x) {
  return static_cast<int>(std::lower_bound(mids.begin(), mids.end(), x) - mids.begin());
}

void lloyd_polish_1d(std::vector<double>& centers, const std::vector<double>& samples,
                     int passes) {
  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t S = sorted.size();
  std::vector<double> prefix(S + 1, 0.0);
  for (std::size_t i = 0; i < S; ++i) prefix[i + 1] = prefix[i] + sorted[i];
  for (int pass = 0; pass < passes; ++pass) {
    const std::vector<double> mids = midpoints(centers);
    std::size_t lo = 0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const std::size_t hi =
          k + 1 < centers.size()
              ? static_cast<std::size_t>(
                    std::lower_bound(sorted.begin(), sorted.end(), mids[k]) - sorted.begin())
              : S;
      if (hi > lo) centers[k] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
      lo = hi;
    }
  }
}

void lloyd_polish_nd(std::vector<double>& centers, int dim, int K,
                     const std::vector<double>& samples, int passes) {
  const std::size_t S = samples.size() / dim;
  std::vector<double> acc(static_cast<std::size_t>(K) * dim);
  std::vector<long> count(K);
  for (int pass = 0; pass < passes; ++pass) {
    std::fill(acc.begin(), acc.end(), 0.0);
    std::fill(count.begin(), count.end(), 0L);
    for (std::size_t i = 0; i < S; ++i) {
      const double* s = samples.data() + i * dim;
      double best;
      const std::size_t k = kern::nearest(s, centers.data(), K, dim, &best);
      ++count[k];
      for (int j = 0; j < dim; ++j) acc[k * dim + j] += s[j];
    }
    for (int k = 0; k < K; ++k)
      if (count[k] > 0)
        for (int j = 0; j < dim; ++j)
          centers[static_cast<std::size_t>(k) * dim + j] =
              acc[static_cast<std::size_t>(k) * dim + j] / count[k];
  }
}

}  // namespace

QuantizerGrid clvq(const NoiseSampler& sampler, int dim, int K, const ClvqParams& params,
                   Rng rng) {
  if (K < 1) throw SolverError("clvq: K must be >= 1");
  if (params.iterations < K) throw SolverError("clvq: iterations must be >= K");
  Rng init_rng = rng.stream(rng_tag::kInit);
  Rng comp_rng = rng.stream(101);
  Rng polish_rng = rng.stream(102);
  Rng weight_rng = rng.stream(103);

  QuantizerGrid g;
  g.dim = dim;
  g.centers.resize(static_cast<std::size_t>(K) * dim);
  sampler(init_rng, K, g.centers.data());

  Vec s(dim);
  for (long t = 0; t < params.iterations; ++t) {
    sampler(comp_rng, 1, s.data());
    double best;
    const std::size_t k = kern::nearest(s.data(), g.centers.data(), K, dim, &best);
    const double gamma = params.step_a / (params.step_b + static_cast<double>(t));
    double* c = g.centers.data() + k * dim;
    for (int j = 0; j < dim; ++j) c[j] += gamma * (s[j] - c[j]);
  }
  if (dim == 1) std::sort(g.centers.begin(), g.centers.end());

  if (params.polish_passes > 0 && params.polish_samples > 0) {
    std::vector<double> samples(static_cast<std::size_t>(params.polish_samples) * dim);
    sampler(polish_rng, static_cast<int>(params.polish_samples), samples.data());
    if (dim == 1)
      lloyd_polish_1d(g.centers, samples, params.polish_passes);
    else
      lloyd_polish_nd(g.centers, dim, K, samples, params.polish_passes);
  }

  g.weights = Vec(K, 1.0);
  if (K > 1) {
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < i; ++j)
        if (kern::sqdist(g.center(i), g.center(j), dim) <= 1e-18)
          throw SolverError("distribution support too small");
    g.weights = estimate_weights(g, sampler, params.weight_samples, weight_rng);
  }
  check_invariants(g, "clvq");
  return g;
}

QuantizerGrid clvq(const NoiseSampler& sampler, int dim, int K, long iterations, Rng rng) {
  ClvqParams p;
  p.iterations = iterations;
  return clvq(sampler, dim, K, p, rng);
}

QuantizerGrid gaussian_grid(int dim, int K, const ClvqParams& params, Rng rng) {
  NoiseSampler normal = [dim](Rng& r, int count, double* out) {
    for (int i = 0; i < count * dim; ++i) out[i] = r.normal();
  };
  return clvq(normal, dim, K, params, rng);
}

std::pair<int, const double*> project(const QuantizerGrid& grid, const double* point) {
  double best;
  const std::size_t k = kern::nearest(point, grid.centers.data(), grid.K(), grid.dim, &best);
  return {static_cast<int>(k), grid.center(static_cast<int>(k))};
}

Vec estimate_weights(const QuantizerGrid& grid, const NoiseSampler& sampler, long n_samples,
                     Rng rng) {
  if (n_samples < 100L * grid.K())
    throw SolverError("estimate_weights: need at least 100 samples per center");
  const int K = grid.K();
  std::vector<long> count(K, 0L);
  if (grid.dim == 1 && std::is_sorted(grid.centers.begin(), grid.centers.end())) {
    const std::vector<double> mids = midpoints(grid.centers);
    constexpr long kBlock = 8192;
    std::vector<double> buf(kBlock);
    for (long done = 0; done < n_samples;) {
      const long m = std::min(kBlock, n_samples - done);
      sampler(rng, static_cast<int>(m), buf.data());
      for (long i = 0; i < m; ++i) ++count[cell_of(mids, buf[i])];
      done += m;
    }
  } else {
    constexpr long kBlock = 8192;
    std::vector<double> buf(static_cast<std::size_t>(kBlock) * grid.dim);
    for (long done = 0; done < n_samples;) {
      const long m = std::min(kBlock, n_samples - done);
      sampler(rng, static_cast<int>(m), buf.data());
      for (long i = 0; i < m; ++i) {
        double best;
        ++count[kern::nearest(buf.data() + i * grid.dim, grid.centers.data(), K, grid.dim,
                              &best)];
      }
      done += m;
    }
  }
  Vec w(K);
  for (int k = 0; k < K; ++k) w[k] = static_cast<double>(count[k]) / n_samples;
  return w;
}

double quantized_expectation(const QuantizerGrid& grid,
                             const std::function<double(const double*)>& fn) {
  double s = 0.0;
  for (int k = 0; k < grid.K(); ++k) {
    const double v = fn(grid.center(k));
    if (!std::isfinite(v)) throw SolverError("quantized_expectation: non-finite integrand");
    s += grid.weights[k] * v;
  }
  return s;
}

void save_grid(const QuantizerGrid& grid, const std::string& path) {
  check_invariants(grid, "save_grid");
  std::ofstream f(path);
  if (!f) throw SolverError("cannot write " + path);
  f << "# " << grid.K() << " " << grid.dim << "\n";
  char buf[32];
  for (int k = 0; k < grid.K(); ++k) {
    for (int j = 0; j < grid.dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", grid.center(k)[j]);
      f << buf << " ";
    }
    std::snprintf(buf, sizeof buf, "%.17g", grid.weights[k]);
    f << buf << "\n";
  }
}

QuantizerGrid load_grid(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SolverError("cannot read " + path);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw SolverError(path + ":" + std::to_string(lineno) + ": " + why);
  };
  if (!std::getline(f, line)) {
    lineno = 1;
    fail("parse error: empty file");
  }
  ++lineno;
  int K = 0, dim = 0;
  char hash = 0;
  {
    std::istringstream is(line);
    if (!(is >> hash >> K >> dim) || hash != '#' || K < 1 || dim < 1)
      fail("parse error: expected '# K d' header");
  }
  QuantizerGrid g;
  g.dim = dim;
  g.centers.resize(static_cast<std::size_t>(K) * dim);
  g.weights.resize(K);
  for (int k = 0; k < K; ++k) {
    if (!std::getline(f, line)) fail("parse error: expected " + std::to_string(K) + " rows");
    ++lineno;
    std::istringstream is(line);
    for (int j = 0; j < dim; ++j)
      if (!(is >> g.centers[static_cast<std::size_t>(k) * dim + j]))
        fail("parse error: bad center coordinate");
    if (!(is >> g.weights[k])) fail("parse error: bad weight");
  }
  try {
    check_invariants(g, "load_grid");
  } catch (const SolverError& e) {
    throw SolverError(path + ": " + e.what());
  }
  return g;
}

QuantizerGrid grid_from_points(int dim, std::vector<double> centers, Vec weights) {
  QuantizerGrid g;
  g.dim = dim;
  g.centers = std::move(centers);
  g.weights = std::move(weights);
  check_invariants(g, "grid_from_points");
  return g;
}

}  // namespace stocon
