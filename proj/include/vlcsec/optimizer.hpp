#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vlcsec/allocation.hpp"
#include "vlcsec/error.hpp"
#include "vlcsec/rate.hpp"
#include "vlcsec/rng.hpp"

namespace vlcsec {

/// Genetic-algorithm parameters. mutation_prob left unset means the
/// per-bit default 1/N_irs, resolved against the panel at run time.
struct GaConfig {
  int population_size = 50;
  int generations = 30;
  double crossover_prob = 0.8;
  std::optional<double> mutation_prob;
  int tournament_size = 3;
  int elite_count = 2;
  std::uint64_t rng_seed = 1;

  double resolved_mutation_prob(std::size_t n_irs) const {
    if (mutation_prob) return *mutation_prob;
    return n_irs > 0 ? 1.0 / static_cast<double>(n_irs) : 0.0;
  }

  void validate() const {
    if (population_size < 1) throw ConfigError("ga.population_size: must be at least 1");
    if (generations < 0) throw ConfigError("ga.generations: must be nonnegative");
    if (!(crossover_prob >= 0.0) || !(crossover_prob <= 1.0)) {
      throw ConfigError("ga.crossover_prob: must lie in [0, 1]");
    }
    if (mutation_prob && (!(*mutation_prob >= 0.0) || !(*mutation_prob <= 1.0))) {
      throw ConfigError("ga.mutation_prob: must lie in [0, 1]");
    }
    if (tournament_size < 1) throw ConfigError("ga.tournament_size: must be at least 1");
    if (elite_count < 0 || elite_count >= population_size) {
      throw ConfigError("ga.elite_count: must be nonnegative and below the population size");
    }
  }
};

/// Outcome of one optimizer run. fitness_history holds the best fitness
/// seen so far after the initial population (entry 0) and after each
/// generation, so it is non-decreasing and its last entry equals
/// best_fitness. evaluations counts fitness requests, cache hits included.
struct OptimizationResult {
  AllocationVector best_allocation;
  double best_fitness = 0.0;
  std::vector<double> fitness_history;
  std::uint64_t evaluations = 0;
};

/// Everything a fitness call needs: both users' spectral tables at one LED
/// power, plus a cache keyed by allocation pattern (fitness is deterministic
/// and the search revisits duplicates).
class SecrecyContext {
 public:
  SecrecyContext(const ChannelTaps& taps_bob, const ChannelTaps& taps_eve, double led_power_w,
                 const SystemParams& params)
      : power_(led_power_w),
        evaluator_bob_(taps_bob, params),
        evaluator_eve_(taps_eve, params) {
    if (taps_bob.element_count() != taps_eve.element_count()) {
      throw ConfigError("SecrecyContext: users disagree on the IRS element count");
    }
  }

  std::size_t n_irs() const { return evaluator_bob_.element_count(); }
  double led_power_w() const { return power_; }
  const RateEvaluator& bob() const { return evaluator_bob_; }
  const RateEvaluator& eve() const { return evaluator_eve_; }

  /// Secrecy capacity of allocation s: Bob's rate on s minus Eve's rate on
  /// the complement. Memoized.
  double fitness(const AllocationVector& s) const {
    const std::string key = s.to_string();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const double value = rates(s).secrecy;
    memo_.emplace(key, value);
    return value;
  }

  /// Full rate pair for allocation s, computed through the same spectral
  /// tables as fitness.
  RatePair rates(const AllocationVector& s) const {
    RatePair r;
    r.rate_bob = evaluator_bob_.rate(s, power_);
    r.rate_eve = evaluator_eve_.rate(s.complement(), power_);
    r.secrecy = r.rate_bob - r.rate_eve;
    return r;
  }

 private:
  double power_;
  RateEvaluator evaluator_bob_;
  RateEvaluator evaluator_eve_;
  mutable std::unordered_map<std::string, double> memo_;
};

namespace detail {

inline constexpr std::uint64_t kBaselineStream = 0xBA5E11E5ULL;

}  // namespace detail

/// The reproducible random allocation injected into GA populations and
/// reported by baselines(); both draw it from the same derived stream so the
/// GA provably dominates every reported baseline allocation.
inline AllocationVector seeded_random_allocation(std::size_t n_irs, std::uint64_t seed) {
  Rng rng(derive_seed(seed, detail::kBaselineStream));
  return AllocationVector::random(n_irs, rng);
}

/// Genetic search for the secrecy-maximizing allocation: seeded initial
/// population, tournament selection, single-point crossover, per-bit
/// mutation, elitist survivors. Fully deterministic given config.rng_seed.
inline OptimizationResult ga_optimize(const GaConfig& config, const SecrecyContext& context) {
  config.validate();
  const std::size_t n = context.n_irs();
  if (n < 1) throw ConfigError("ga_optimize: requires at least one IRS element");

  const auto pop_size = static_cast<std::size_t>(config.population_size);
  const auto elite_count = static_cast<std::size_t>(config.elite_count);
  const double p_mut = config.resolved_mutation_prob(n);
  Rng rng(config.rng_seed);

  std::vector<AllocationVector> population;
  population.reserve(pop_size);
  population.emplace_back(n, true);
  if (pop_size >= 2) population.emplace_back(n, false);
  if (pop_size >= 3) population.push_back(seeded_random_allocation(n, config.rng_seed));
  while (population.size() < pop_size) population.push_back(AllocationVector::random(n, rng));

  std::vector<double> fitness(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) fitness[i] = context.fitness(population[i]);
  std::uint64_t evaluations = pop_size;

  std::size_t best_index = 0;
  for (std::size_t i = 1; i < pop_size; ++i) {
    if (fitness[i] > fitness[best_index]) best_index = i;
  }
  AllocationVector best = population[best_index];
  double best_fitness = fitness[best_index];
  std::vector<double> history{best_fitness};

  const auto tournament = [&]() {
    std::size_t winner = static_cast<std::size_t>(rng.below(pop_size));
    for (int k = 1; k < config.tournament_size; ++k) {
      const auto challenger = static_cast<std::size_t>(rng.below(pop_size));
      if (fitness[challenger] > fitness[winner]) winner = challenger;
    }
    return winner;
  };
  const auto mutate = [&](AllocationVector& v) {
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(p_mut)) v.flip(i);
    }
  };

  for (int gen = 0; gen < config.generations; ++gen) {
    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

    std::vector<AllocationVector> next;
    std::vector<double> next_fitness;
    next.reserve(pop_size);
    next_fitness.reserve(pop_size);
    for (std::size_t e = 0; e < elite_count; ++e) {
      next.push_back(population[order[e]]);
      next_fitness.push_back(fitness[order[e]]);
    }

    while (next.size() < pop_size) {
      AllocationVector child_a = population[tournament()];
      AllocationVector child_b = population[tournament()];
      if (n >= 2 && rng.bernoulli(config.crossover_prob)) {
        const auto cut = static_cast<std::size_t>(1 + rng.below(n - 1));
        for (std::size_t i = cut; i < n; ++i) {
          const bool a = child_a.test(i);
          child_a.set(i, child_b.test(i));
          child_b.set(i, a);
        }
      }
      mutate(child_a);
      mutate(child_b);
      next.push_back(std::move(child_a));
      next_fitness.push_back(context.fitness(next.back()));
      ++evaluations;
      if (next.size() < pop_size) {
        next.push_back(std::move(child_b));
        next_fitness.push_back(context.fitness(next.back()));
        ++evaluations;
      }
    }

    population = std::move(next);
    fitness = std::move(next_fitness);
    for (std::size_t i = 0; i < pop_size; ++i) {
      if (fitness[i] > best_fitness) {
        best_fitness = fitness[i];
        best = population[i];
      }
    }
    history.push_back(best_fitness);
  }

  return {std::move(best), best_fitness, std::move(history), evaluations};
}

/// Exact maximizer by enumerating all 2^N_irs allocations. Walks the masks
/// in Gray-code order so each step touches a single element row of the
/// spectral tables; exact fitness ties break toward the lowest binary value
/// of the bit vector. Refused above 24 elements.
inline OptimizationResult exhaustive_search(const SecrecyContext& context) {
  const std::size_t n = context.n_irs();
  if (n > 24) {
    throw ConfigError(
        "exhaustive_search: enumeration of 2^" + std::to_string(n) +
        " allocations refused (panel exceeds 24 elements); use the genetic optimizer");
  }
  if (n == 0) {
    AllocationVector empty;
    const double f = context.fitness(empty);
    return {empty, f, {f}, 1};
  }

  const RateEvaluator& bob = context.bob();
  const RateEvaluator& eve = context.eve();
  const double power = context.led_power_w();

  std::vector<std::complex<double>> bob_spec = bob.los_spectrum();
  std::vector<std::complex<double>> eve_spec = eve.full_spectrum();
  AllocationVector current(n);
  AllocationVector best = current;
  double best_value = bob.integrate(bob_spec, power) - eve.integrate(eve_spec, power);

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(k));
    current.flip(bit);
    if (current.test(bit)) {
      bob.add_element(bob_spec, bit);
      eve.subtract_element(eve_spec, bit);
    } else {
      bob.subtract_element(bob_spec, bit);
      eve.add_element(eve_spec, bit);
    }
    const double value = bob.integrate(bob_spec, power) - eve.integrate(eve_spec, power);
    if (value > best_value || (value == best_value && current.less_binary(best))) {
      best_value = value;
      best = current;
    }
  }

  const double exact = context.fitness(best);
  return {std::move(best), exact, {exact}, total};
}

struct BaselineResult {
  std::string label;
  AllocationVector allocation;
  double fitness = 0.0;
};

/// Reference points the optimized allocation is compared against.
///
/// los_only strips both users to their LoS taps; no allocation realizes it
/// (Eve always holds the complement), so its vector is a placeholder and it
/// is reported for comparison only. all_bob, all_eve, and the seeded random
/// vector are real allocations evaluated through fitness.
inline std::vector<BaselineResult> baselines(const SecrecyContext& context,
                                             std::uint64_t seed) {
  const std::size_t n = context.n_irs();
  const double power = context.led_power_w();
  std::vector<BaselineResult> out;
  out.reserve(4);
  out.push_back({"los_only", AllocationVector(n),
                 context.bob().rate_los_only(power) - context.eve().rate_los_only(power)});
  AllocationVector all_bob(n, true);
  out.push_back({"all_bob", all_bob, context.fitness(all_bob)});
  AllocationVector all_eve(n);
  out.push_back({"all_eve", all_eve, context.fitness(all_eve)});
  AllocationVector random = seeded_random_allocation(n, seed);
  out.push_back({"random", random, context.fitness(random)});
  return out;
}

}  // namespace vlcsec
