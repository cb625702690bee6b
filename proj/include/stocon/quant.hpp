#pragma once

#include <functional>
#include <string>
#include <utility>

#include "stocon/mdp.hpp"
#include "stocon/rng.hpp"

namespace stocon {

struct QuantizerGrid {
  int dim = 1;
  std::vector<double> centers;  // K x dim, row-major
  Vec weights;                  // Voronoi cell masses, sum 1

  int K() const { return static_cast<int>(weights.size()); }
  const double* center(int l) const { return centers.data() + static_cast<std::size_t>(l) * dim; }
};

using NoiseSampler = std::function<void(Rng&, int count, double* out)>;

struct ClvqParams {
  long iterations = 200000;  // competitive stage steps, step size a/(b+t)
  double step_a = 1.0;
  double step_b = 100.0;
  int polish_passes = 100;  // Lloyd passes over a frozen sample set
  long polish_samples = 300000;
  long weight_samples = 1000000;
};

// Competitive stage seeded from the first K draws, then Lloyd polish, then a
// frozen weight-estimation pass. 1-D grids come out sorted ascending.
QuantizerGrid clvq(const NoiseSampler& sampler, int dim, int K, const ClvqParams& params,
                   Rng rng);
QuantizerGrid clvq(const NoiseSampler& sampler, int dim, int K, long iterations, Rng rng);

// Optimal-ish grid for N(0, I_dim).
QuantizerGrid gaussian_grid(int dim, int K, const ClvqParams& params, Rng rng);

// Nearest center in Euclidean norm; ties break to the lowest index.
std::pair<int, const double*> project(const QuantizerGrid& grid, const double* point);

Vec estimate_weights(const QuantizerGrid& grid, const NoiseSampler& sampler, long n_samples,
                     Rng rng);

double quantized_expectation(const QuantizerGrid& grid,
                             const std::function<double(const double*)>& fn);

// One center per row: "# K d" header, then K lines of d coordinates plus the
// weight, full double precision.
void save_grid(const QuantizerGrid& grid, const std::string& path);
QuantizerGrid load_grid(const std::string& path);

// Explicit grid for tests and fixed discrete noises; validates invariants.
QuantizerGrid grid_from_points(int dim, std::vector<double> centers, Vec weights);

}  // namespace stocon
