#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "polarimeter/graph.hpp"

namespace polarimeter {

// Every generator emits bidirected edges of weight 1. Color 0 is "red",
// color 1 is "blue".

ColoredGraph gen_clique(std::size_t n_red, std::size_t n_blue);

/// Cycle 0-1-...-(n-1)-0 colored RBRB...; n even and at least 4.
ColoredGraph gen_alternating_cycle(std::size_t n);

/// Cycle whose first n_red vertices are red and the rest blue.
ColoredGraph gen_half_split_cycle(std::size_t n_red, std::size_t n_blue);

/// Red clique, red half-chain, blue half-chain, blue clique, in index order.
ColoredGraph gen_barbell(std::size_t clique_size, std::size_t path_length);
/// Unbalanced variant with cliques of different sizes.
ColoredGraph gen_barbell(std::size_t red_clique, std::size_t blue_clique, std::size_t path_length);

enum class DisconnectedPolicy { reject_and_resample, take_lwcc, keep };

std::string to_string(DisconnectedPolicy policy);
DisconnectedPolicy parse_disconnected_policy(const std::string& text);

struct GnplOptions {
  DisconnectedPolicy policy = DisconnectedPolicy::reject_and_resample;
  std::size_t retry_budget = 100;
};

/// Erdos-Renyi G(n, p) with labels drawn as a uniform permutation of
/// `color_counts` (which must sum to n).
ColoredGraph gen_gnpl(std::size_t n, double p, const std::vector<std::size_t>& color_counts, std::uint64_t seed,
                      const GnplOptions& options = {});

/// Two-block SBM; block membership is a uniform permutation of n/2 red and
/// n/2 blue labels. The result may be disconnected.
ColoredGraph gen_sbm(std::size_t n, double p_in, double q_out, std::uint64_t seed);

enum class GeneratorKind { clique, alternating_cycle, half_split_cycle, barbell, gnpl, sbm };

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string& text);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::clique;
  std::size_t n = 0;             // alternating_cycle, gnpl, sbm
  std::size_t n_red = 0;         // clique, half_split_cycle, barbell (red clique)
  std::size_t n_blue = 0;        // clique, half_split_cycle, barbell (blue clique)
  std::size_t path_length = 0;   // barbell
  double p = 0.0;                // gnpl edge probability, sbm intra
  double q = 0.0;                // sbm inter
  double red_fraction = 0.5;     // gnpl split
  std::uint64_t seed = 0;
  DisconnectedPolicy policy = DisconnectedPolicy::reject_and_resample;
};

/// Counts for a two-color split of n: red gets round(red_fraction * n).
std::vector<std::size_t> split_counts(std::size_t n, double red_fraction);

ColoredGraph generate(const GeneratorSpec& spec);

/// Same spec with the seed replaced by a member-specific derived seed.
GeneratorSpec with_member_seed(GeneratorSpec spec, std::uint64_t member);

}  // namespace polarimeter
