#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ammi/bitvector.hpp"
#include "ammi/util.hpp"

namespace ammi::markov {

// Per-position conditional probability tables of an order-o Markov
// distribution over {0,1}^m.
//
// table[i * 2^o + c] = P(z_{i+1} = 1 | preceding o bits encode to c), with
// 0-based position index i. Context integers put the most recent bit in bit
// 0: c = sum_{j=1..o} z_{i+1-j} * 2^{j-1}, and bits at positions before the
// start of the sequence are fixed to 0.
struct MarkovParams {
    int m = 0;
    int order = 0;
    std::vector<double> table;

    // Clamps every entry into [kProbEps, 1 - kProbEps] and validates shape.
    static MarkovParams from_probs(int m, int order, std::vector<double> probs);

    // Uniform random entries in [lo, hi] (clamped), deterministic given rng.
    static MarkovParams random(int m, int order, Rng& rng, double lo = 0.05, double hi = 0.95);

    int contexts() const { return 1 << order; }
    double prob1(int i, int c) const { return table[static_cast<size_t>(i) * contexts() + c]; }
    double factor(int i, int c, int bit) const {
        return bit ? prob1(i, c) : 1.0 - prob1(i, c);
    }

    void validate() const;  // throws std::invalid_argument
};

// Context posteriors pi: row i holds, for each context c, the probability
// that the o bits immediately preceding position i+1 (0-based i) equal c.
struct ForwardTable {
    int m = 0;
    int order = 0;
    std::vector<double> pi;  // m x 2^order

    double at(int i, int c) const { return pi[static_cast<size_t>(i) * (1 << order) + c]; }
};

// Window marginals mu: row i holds, for each length-(o'+1) window ending at
// position i+1, its marginal probability. Window integers also put the most
// recent bit in bit 0: bit k of w is the code bit at position i+1-k.
struct MarginalTable {
    int m = 0;
    int order = 0;  // window order o'
    std::vector<double> mu;  // m x 2^{order+1}

    double at(int i, int w) const {
        return mu[static_cast<size_t>(i) * (2 << order) + w];
    }
};

ForwardTable forward(const MarkovParams& p);

// Exact window marginals at target_order >= p.order.
MarginalTable marginals(const MarkovParams& p, int target_order);

// H(p, q) = -sum_z p(z) log q(z) in nats, O(m * 2^{q.order}). Requires
// q.order >= p.order and equal m.
double cross_entropy(const MarkovParams& p, const MarkovParams& q);

// H(p) = cross_entropy(p, p) in nats, O(m * 2^{p.order}).
double entropy(const MarkovParams& p);

// Most probable code and its log-probability. Ties prefer bit 0, resolved
// position by position; tied contexts compare in ascending integer order.
std::pair<BitVector, double> viterbi(const MarkovParams& p);

BitVector sample(const MarkovParams& p, Rng& rng);
BitVector sample(const MarkovParams& p, uint64_t seed);

// Reindexes p's table at a higher order; extra (older) context bits are
// ignored. lift(p, o') defines the same distribution as p.
MarkovParams lift(const MarkovParams& p, int target_order);

// Debug dump: one line per entry, "<position> <context> <probability>",
// position 1-based, context as integer, probability "%.17g".
std::string dump_table(const MarkovParams& p);

// Brute-force enumeration oracles; these are reference implementations for
// every DP operation above and are only feasible for small m.
namespace brute {

inline constexpr int kMaxBits = 20;

// Probability of one code.
double prob(const MarkovParams& p, const BitVector& z);

// All 2^m code probabilities; code integers use bit k = code bit k.
std::vector<double> all_probs(const MarkovParams& p);

double cross_entropy(const MarkovParams& p, const MarkovParams& q);
double entropy(const MarkovParams& p);
std::pair<BitVector, double> argmax(const MarkovParams& p);

// Entropy of the uniform mixture of the given per-sample distributions:
// sum_z (s_z/N) log(N/s_z) with s_z = sum_l p_l(z).
double mixture_entropy(const std::vector<MarkovParams>& tables);

}  // namespace brute

}  // namespace ammi::markov
