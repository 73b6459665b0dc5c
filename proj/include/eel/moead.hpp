#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eel/core.hpp"
#include "eel/genotype.hpp"
#include "eel/objectives.hpp"

namespace eel {

/// What the decomposition search needs from an objective evaluator.
/// `evaluate` computes per-individual objectives; `refresh` recomputes
/// population-coupled objectives and snapshots the population; and
/// `score_candidate` fills coupled objectives of an outside candidate against
/// the latest snapshot. Uncoupled problems implement the latter two as no-ops.
template <class P>
concept BiObjectiveProblem = requires(P& p, const P& cp, const Genotype& g, std::uint64_t seed,
                                      std::span<EvaluatedIndividual> pop, EvaluatedIndividual& ind) {
  { cp.dimension() } -> std::convertible_to<std::size_t>;
  { cp.evaluate(g, seed) } -> std::same_as<EvaluatedIndividual>;
  p.refresh(pop);
  cp.score_candidate(ind);
};

using Weight = std::array<double, 2>;
using ReferencePoint = std::array<double, 2>;
using ParetoFront = std::vector<EvaluatedIndividual>;

struct Subproblem {
  Weight weight{};
  std::vector<std::size_t> neighbors;  // T nearest weights, nearest first, self included
};

/// One record per generation, also used for the trace file.
struct GenerationRecord {
  std::size_t generation = 0;
  std::size_t evaluations = 0;
  std::vector<Objectives> raw;            // population after the generation
  std::vector<ReferencePoint> reference;  // z* at generation start, then after every child
  NormalizationFactors factors_used;      // factors for this generation's normalization
  NormalizationFactors factors_next;      // factors after the generation
  std::size_t replacements = 0;
  double max_replacement_delta = -std::numeric_limits<double>::infinity();  // new - old cost, <= 0
};

struct MoeadConfig {
  std::size_t population_size = 30;
  std::size_t neighborhood_size = 4;
  std::size_t max_fes = 25000;
  std::uint64_t run_seed = 0;
  std::vector<double> mutation_sigma;  // per dimension; empty -> range / 20 = 0.05
  std::function<void(const GenerationRecord&)> on_generation;

  void validate() const {
    if (population_size < 2) throw ConfigError("population size must be >= 2");
    if (neighborhood_size < 2 || neighborhood_size > population_size) throw ConfigError("neighborhood size must lie in [2, M]");
    if (max_fes < population_size) throw ConfigError("max_fes must be >= population size");
  }
};

struct MoeadResult {
  ParetoFront front;
  std::vector<EvaluatedIndividual> population;
  std::size_t evaluations = 0;
  std::size_t generations = 0;
};

/// Evenly spaced weights ((i-1)/(M-1), 1-(i-1)/(M-1)) and T-nearest neighborhoods,
/// ties broken by lower index.
inline std::vector<Subproblem> init_weights(std::size_t M, std::size_t T) {
  if (M < 2) throw std::invalid_argument("init_weights: M must be >= 2");
  if (T < 1 || T > M) throw std::invalid_argument("init_weights: T must lie in [1, M]");
  std::vector<Subproblem> subs(M);
  for (std::size_t i = 0; i < M; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(M - 1);
    subs[i].weight = {a, 1.0 - a};
  }
  // Euclidean distance between weights i and j is sqrt(2) |i - j| / (M - 1);
  // ranking by |i - j| keeps symmetric ties exact.
  std::vector<std::size_t> order(M);
  std::vector<std::size_t> dist(M);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) dist[j] = i > j ? i - j : j - i;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    subs[i].neighbors.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(T));
  }
  return subs;
}

/// DE step x_i + 0.5 (x_k - x_l), with Gaussian mutation on a fair coin flip.
/// `force_mutation` pins the coin (for testing the two branches).
inline Genotype reproduce(const Genotype& xi, const Genotype& xk, const Genotype& xl, std::span<const double> sigma,
                          Rng& rng, std::optional<bool> force_mutation = std::nullopt) {
  const std::size_t n = xi.values.size();
  if (xk.values.size() != n || xl.values.size() != n || sigma.size() != n) {
    throw std::invalid_argument("reproduce: dimension mismatch");
  }
  Genotype child;
  child.values.resize(n);
  for (std::size_t d = 0; d < n; ++d) child.values[d] = xi.values[d] + 0.5 * (xk.values[d] - xl.values[d]);
  std::bernoulli_distribution coin(0.5);
  const bool mutate = force_mutation ? *force_mutation : coin(rng);
  if (mutate) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t d = 0; d < n; ++d) child.values[d] += sigma[d] * gauss(rng);
  }
  return repair(std::move(child));
}

/// Weighted Chebyshev distance to the reference point.
inline double scalarized_cost(const Objectives& f, const Weight& lambda, const ReferencePoint& z_star) {
  return std::max(lambda[0] * std::abs(f[0] - z_star[0]), lambda[1] * std::abs(f[1] - z_star[1]));
}

/// a dominates b: no worse everywhere, strictly better somewhere (minimization).
inline bool dominates(const Objectives& a, const Objectives& b) {
  return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

/// Members not dominated by any other, in input order. Exact duplicates are all kept.
template <class T, class Proj>
std::vector<T> nondominated_filter(std::span<const T> items, Proj objectives_of) {
  std::vector<T> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < items.size() && !dominated; ++j) {
      dominated = j != i && dominates(objectives_of(items[j]), objectives_of(items[i]));
    }
    if (!dominated) out.push_back(items[i]);
  }
  return out;
}

inline ParetoFront nondominated_filter(std::span<const EvaluatedIndividual> population) {
  return nondominated_filter(population, [](const EvaluatedIndividual& e) -> const Objectives& { return e.f; });
}

/// Write one trace row per subproblem: generation, FEs, index, raw f1/f2,
/// reference point at generation end, factors after the generation.
inline void write_trace_header(std::ostream& os) {
  os << "generation,fes,subproblem,f1,f2,z1_star,z2_star,z1_tilde,z2_tilde\n";
}

inline void write_trace_rows(std::ostream& os, const GenerationRecord& rec) {
  const auto& z = rec.reference.back();
  for (std::size_t i = 0; i < rec.raw.size(); ++i) {
    os << rec.generation << ',' << rec.evaluations << ',' << i << ',' << rec.raw[i][0] << ',' << rec.raw[i][1] << ','
       << z[0] << ',' << z[1] << ',' << rec.factors_next.z_tilde[0] << ',' << rec.factors_next.z_tilde[1] << '\n';
  }
}

/// Decomposition-based bi-objective search with adaptive normalization.
///
/// Initialization evaluates M random genotypes. Each generation then
/// refreshes coupled objectives, renormalizes the population with the current
/// factors and resets z* to the normalized minimum; for every subproblem it
/// breeds a child from two distinct neighbors, evaluates it, replaces every
/// neighbor whose Chebyshev cost is not better than the child's (ties
/// replace), and lowers z*. Factors are updated after each generation. The
/// search stops once FEs >= max_fes, checked between generations.
template <BiObjectiveProblem Problem>
MoeadResult run(const MoeadConfig& config, Problem& problem) {
  config.validate();
  const std::size_t M = config.population_size;
  const std::size_t T = config.neighborhood_size;
  const std::size_t D = problem.dimension();
  std::vector<double> sigma = config.mutation_sigma;
  if (sigma.empty()) sigma.assign(D, 1.0 / 20.0);
  if (sigma.size() != D) throw ConfigError("mutation sigma length does not match genotype dimension");

  Rng rng(derive_seed(config.run_seed, "moead/rng"));
  std::size_t fes = 0;
  auto evaluate = [&](const Genotype& g, std::size_t subproblem) {
    try {
      return problem.evaluate(g, derive_seed(config.run_seed, "learner", fes));
    } catch (const std::exception& e) {
      throw std::runtime_error("subproblem " + std::to_string(subproblem) + ": " + e.what());
    }
  };

  std::vector<EvaluatedIndividual> pop;
  pop.reserve(M);
  for (std::size_t i = 0; i < M; ++i) {
    Genotype g = random_genotype(D, rng);
    pop.push_back(evaluate(g, i));
    ++fes;
  }
  problem.refresh(std::span<EvaluatedIndividual>(pop));

  const std::vector<Subproblem> subs = init_weights(M, T);
  NormalizationFactors factors = update_factors(std::span<const EvaluatedIndividual>(pop));

  std::size_t generation = 0;
  std::vector<Objectives> norm(M);
  std::uniform_int_distribution<std::size_t> pick(0, T - 1);
  while (fes < config.max_fes) {
    ++generation;
    problem.refresh(std::span<EvaluatedIndividual>(pop));
    ReferencePoint z{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < M; ++i) {
      norm[i] = normalize(pop[i].f, factors);
      z[0] = std::min(z[0], norm[i][0]);
      z[1] = std::min(z[1], norm[i][1]);
    }

    GenerationRecord rec;
    rec.generation = generation;
    rec.factors_used = factors;
    rec.reference.push_back(z);

    for (std::size_t i = 0; i < M; ++i) {
      const auto& nb = subs[i].neighbors;
      const std::size_t a = pick(rng);
      std::size_t b = pick(rng);
      while (b == a) b = pick(rng);
      Genotype child_g = reproduce(pop[i].genotype, pop[nb[a]].genotype, pop[nb[b]].genotype, sigma, rng);
      EvaluatedIndividual child = evaluate(child_g, i);
      ++fes;
      problem.score_candidate(child);
      const Objectives cn = normalize(child.f, factors);

      for (std::size_t s : nb) {
        const double child_cost = scalarized_cost(cn, subs[s].weight, z);
        const double incumbent_cost = scalarized_cost(norm[s], subs[s].weight, z);
        if (child_cost <= incumbent_cost) {
          pop[s] = child;
          norm[s] = cn;
          ++rec.replacements;
          rec.max_replacement_delta = std::max(rec.max_replacement_delta, child_cost - incumbent_cost);
        }
      }
      z[0] = std::min(z[0], cn[0]);
      z[1] = std::min(z[1], cn[1]);
      rec.reference.push_back(z);
    }

    factors = update_factors(std::span<const EvaluatedIndividual>(pop));
    if (config.on_generation) {
      rec.evaluations = fes;
      rec.factors_next = factors;
      for (const auto& ind : pop) rec.raw.push_back(ind.f);
      config.on_generation(rec);
    }
  }

  // Bring every f2 onto the same population basis before filtering.
  problem.refresh(std::span<EvaluatedIndividual>(pop));
  MoeadResult result;
  result.front = nondominated_filter(std::span<const EvaluatedIndividual>(pop));
  result.population = std::move(pop);
  result.evaluations = fes;
  result.generations = generation;
  return result;
}

}  // namespace eel
