#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "loopsight/lang.hpp"
#include "loopsight/util.hpp"

// Genetic-algorithm program generator. Individuals are raw source strings
// over the restricted grammar; evolution rewards structural features via an
// integer fitness and archives the best-ever individuals in a Hall of Fame.

namespace loopsight::codegen {

enum class ClassLabel : int {
  Ambiguous = 0,    // reused / coupled loop variables, non-parallelizable
  Independent = 1,  // iteration-independent loops, parallelizable
};

const char* class_name(ClassLabel label);
ClassLabel class_from_name(const std::string& name);

struct Program {
  std::string source;
  ClassLabel label = ClassLabel::Independent;
  int line_count = 0;
};

Program make_program(std::string source, ClassLabel label);
int count_lines(const std::string& source);

struct StructuralCounts {
  int imports = 0;
  int defs = 0;
  int ifs = 0;
  int prints = 0;
  int variables = 0;
  int fors = 0;
  int lines = 0;
};

struct FitnessBreakdown {
  int s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  int s_comp = 0;
  int total = 0;
};

constexpr int kMaxFitness = 8;
constexpr int kMinFitness = -16;

struct GeneratorConfig {
  std::size_t population_size = 10000;
  std::size_t generations = 50;
  double crossover_prob = 0.9;
  double mutation_prob = 0.1;
  std::size_t hof_size = 500;
  ClassLabel label = ClassLabel::Independent;
  std::uint64_t seed = 0;
};

struct GenerationStats {
  std::size_t generation = 0;
  double avg = 0.0;
  double max = 0.0;  // best-ever (Hall of Fame) fitness, monotone
  double min = 0.0;
};

// ---------------------------------------------------------------------------
// Operations

// A random program over the restricted grammar whose loops satisfy the class
// invariant: Independent bodies never read a value written by a previous
// iteration; Ambiguous programs contain at least one accumulator-style loop.
Program synthesize_program(ClassLabel label, util::RngStream& rng);

// Token-level structural counts ('printx' is not a print, keywords inside
// string literals do not count). `variables` = distinct identifiers that
// appear as assignment targets, loop variables included.
StructuralCounts count_features(const Program& p);

FitnessBreakdown score_fitness(const StructuralCounts& c, bool compiles);

// Swap a contiguous block of whole lines between two same-labeled parents.
// Cut points are drawn independently per parent; children keep the label.
std::pair<Program, Program> crossover_lines(const Program& a, const Program& b,
                                            util::RngStream& rng);
// Deterministic splice at explicit boundaries, a[a1..a2) <-> b[b1..b2).
std::pair<Program, Program> crossover_lines_at(const Program& a, const Program& b,
                                               std::size_t a1, std::size_t a2,
                                               std::size_t b1, std::size_t b2);

// One of: rename a variable consistently to a fresh identifier, perturb a
// numeric literal, or insert a print of an existing variable at a top-level
// boundary. Never introduces loop-carried reuse.
Program mutate_program(const Program& p, util::RngStream& rng);

// Fitness-proportional sampling with replacement over shifted weights
// w_i = f_i - min(f) + 1e-6.
std::vector<Program> roulette_select(const std::vector<Program>& pop,
                                     const std::vector<int>& fitnesses, std::size_t k,
                                     util::RngStream& rng);

struct EvolveResult {
  std::vector<Program> hall_of_fame;  // best first
  std::vector<int> hof_fitness;
  std::vector<GenerationStats> curve;
};

EvolveResult evolve(const GeneratorConfig& cfg);

// Hall-of-Fame corpus on disk: <dir>/<class>_<index>.py plus curve.csv.
void write_corpus(const EvolveResult& result, ClassLabel label,
                  const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Loop-carried reuse analysis (class invariant checks)

// True if some loop may read a value written by a previous iteration of the
// same loop. Conservative: conditional definitions do not count as definite,
// subscript stores not indexed by the loop variable taint the whole array.
bool has_possible_loop_reuse(const lang::Block& program);

// True if some loop certainly re-reads a previous-iteration value on every
// pass: an unconditional body-level assignment whose right-hand side reads
// its own target before any earlier definite assignment.
bool has_definite_loop_reuse(const lang::Block& program);

// Class invariant as used for Hall-of-Fame admission. Requires a parseable
// source; returns false otherwise.
bool satisfies_class_invariant(const Program& p);

}  // namespace loopsight::codegen
