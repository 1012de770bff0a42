#include "ammi/markov.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ammi::markov {

namespace {

void check_same_m(const MarkovParams& p, const MarkovParams& q) {
    if (p.m != q.m) throw std::invalid_argument("cross_entropy: code lengths differ");
    if (q.order < p.order)
        throw std::invalid_argument("cross_entropy: q.order must be >= p.order");
}

}  // namespace

MarkovParams MarkovParams::from_probs(int m, int order, std::vector<double> probs) {
    MarkovParams p;
    p.m = m;
    p.order = order;
    p.table = std::move(probs);
    for (double& v : p.table) {
        if (!std::isfinite(v)) throw std::invalid_argument("MarkovParams: non-finite entry");
        v = clamp_prob(v);
    }
    p.validate();
    return p;
}

MarkovParams MarkovParams::random(int m, int order, Rng& rng, double lo, double hi) {
    std::vector<double> t(static_cast<size_t>(m) << order);
    for (double& v : t) v = uniform_in(rng, lo, hi);
    return from_probs(m, order, std::move(t));
}

void MarkovParams::validate() const {
    if (m <= 0) throw std::invalid_argument("MarkovParams: m must be positive");
    if (order < 0 || order > m) throw std::invalid_argument("MarkovParams: order out of range");
    if (table.size() != (static_cast<size_t>(m) << order))
        throw std::invalid_argument("MarkovParams: table shape must be m x 2^order");
    for (double v : table)
        if (!(v >= kProbEps && v <= 1.0 - kProbEps))
            throw std::invalid_argument("MarkovParams: entry outside clamp interval");
}

ForwardTable forward(const MarkovParams& p) {
    p.validate();
    const int K = p.contexts();
    ForwardTable f;
    f.m = p.m;
    f.order = p.order;
    f.pi.assign(static_cast<size_t>(p.m) * K, 0.0);

    // Base: all out-of-range bits are 0, so the first row is a point mass
    // on the all-zero context.
    f.pi[0] = 1.0;
    if (p.order == 0) {
        for (int i = 1; i < p.m; ++i) f.pi[i] = 1.0;
        return f;
    }
    const int hi = 1 << (p.order - 1);
    for (int i = 1; i < p.m; ++i) {
        const double* prev = &f.pi[static_cast<size_t>(i - 1) * K];
        double* cur = &f.pi[static_cast<size_t>(i) * K];
        for (int c = 0; c < K; ++c) {
            int bit = c & 1;
            int c0 = c >> 1;          // predecessor with oldest bit 0
            int c1 = (c >> 1) | hi;   // predecessor with oldest bit 1
            cur[c] = p.factor(i - 1, c0, bit) * prev[c0] +
                     p.factor(i - 1, c1, bit) * prev[c1];
        }
    }
    return f;
}

MarginalTable marginals(const MarkovParams& p, int target_order) {
    p.validate();
    if (target_order < p.order)
        throw std::invalid_argument("marginals: target order must be >= p.order");
    const int o = p.order;
    const int op = target_order;
    const int W = 2 << op;  // windows per position

    ForwardTable f = forward(p);
    MarginalTable mt;
    mt.m = p.m;
    mt.order = op;
    mt.mu.assign(static_cast<size_t>(p.m) * W, 0.0);

    for (int i = 0; i < p.m; ++i) {
        double* row = &mt.mu[static_cast<size_t>(i) * W];
        // Anchor position of the context posterior for this window.
        const int t = i - op + o;
        for (int w = 0; w < W; ++w) {
            // Window bit k is the code bit at position i-k; bits that fall
            // before the sequence start must be 0.
            bool feasible = true;
            for (int k = i + 1; k <= op; ++k)
                if ((w >> k) & 1) { feasible = false; break; }
            if (!feasible) continue;

            double val = 1.0;
            if (o > 0) {
                int ctx = (w >> (op - o + 1)) & ((1 << o) - 1);
                val = f.at(std::max(t, 0), ctx);
                if (val == 0.0) continue;
            }
            for (int j = std::max(t, 0); j <= i; ++j) {
                int bit = (w >> (i - j)) & 1;
                int ctx = (w >> (i - j + 1)) & ((1 << o) - 1);
                val *= p.factor(j, ctx, bit);
            }
            row[w] = val;
        }
    }
    return mt;
}

double cross_entropy(const MarkovParams& p, const MarkovParams& q) {
    check_same_m(p, q);
    const int op = q.order;
    MarginalTable mt = marginals(p, op);
    const int W = 2 << op;
    double h = 0.0;
    for (int i = 0; i < p.m; ++i) {
        for (int w = 0; w < W; ++w) {
            double mass = mt.at(i, w);
            if (mass == 0.0) continue;
            h -= mass * std::log(q.factor(i, w >> 1, w & 1));
        }
    }
    return h;
}

double entropy(const MarkovParams& p) { return cross_entropy(p, p); }

std::pair<BitVector, double> viterbi(const MarkovParams& p) {
    p.validate();
    const int K = p.contexts();
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    // best[c] = max log-probability of a prefix z_{1..i} whose trailing
    // context encodes to c; back stores (previous context, emitted bit).
    std::vector<double> best(K, kNegInf), next(K);
    std::vector<std::pair<int, int>> back(static_cast<size_t>(p.m) * K, {-1, -1});
    best[0] = 0.0;

    const int mask = K - 1;
    for (int i = 0; i < p.m; ++i) {
        std::fill(next.begin(), next.end(), kNegInf);
        auto* row = &back[static_cast<size_t>(i) * K];
        for (int c = 0; c < K; ++c) {
            if (best[c] == kNegInf) continue;
            for (int bit = 0; bit <= 1; ++bit) {
                int nc = ((c << 1) | bit) & mask;
                double cand = best[c] + std::log(p.factor(i, c, bit));
                // Strict > keeps the first writer on exact ties: smaller
                // predecessor context, then bit 0.
                if (cand > next[nc]) {
                    next[nc] = cand;
                    row[nc] = {c, bit};
                }
            }
        }
        best.swap(next);
    }

    int argc = 0;
    for (int c = 1; c < K; ++c)
        if (best[c] > best[argc]) argc = c;
    double logp = best[argc];

    BitVector z(p.m);
    int c = argc;
    for (int i = p.m - 1; i >= 0; --i) {
        auto [pc, bit] = back[static_cast<size_t>(i) * K + c];
        z.set_bit(i, bit);
        c = pc;
    }
    return {z, logp};
}

BitVector sample(const MarkovParams& p, Rng& rng) {
    p.validate();
    const int mask = p.contexts() - 1;
    BitVector z(p.m);
    int c = 0;
    for (int i = 0; i < p.m; ++i) {
        int bit = uniform01(rng) < p.prob1(i, c) ? 1 : 0;
        z.set_bit(i, bit);
        c = ((c << 1) | bit) & mask;
    }
    return z;
}

BitVector sample(const MarkovParams& p, uint64_t seed) {
    Rng rng(seed);
    return sample(p, rng);
}

MarkovParams lift(const MarkovParams& p, int target_order) {
    if (target_order < p.order)
        throw std::invalid_argument("lift: target order must be >= p.order");
    const int mask = p.contexts() - 1;
    std::vector<double> t(static_cast<size_t>(p.m) << target_order);
    for (int i = 0; i < p.m; ++i)
        for (int c = 0; c < (1 << target_order); ++c)
            t[(static_cast<size_t>(i) << target_order) + c] = p.prob1(i, c & mask);
    return MarkovParams::from_probs(p.m, target_order, std::move(t));
}

std::string dump_table(const MarkovParams& p) {
    std::ostringstream os;
    for (int i = 0; i < p.m; ++i)
        for (int c = 0; c < p.contexts(); ++c)
            os << (i + 1) << ' ' << c << ' ' << fmt_g17(p.prob1(i, c)) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

namespace brute {

namespace {

void check_guard(int m) {
    if (m > kMaxBits)
        throw std::invalid_argument("brute force: m exceeds enumeration guard");
}

// Context integer at 0-based position i of the code integer (bit k = z_{k+1}).
int context_at(uint32_t code, int i, int order) {
    int c = 0;
    for (int j = 1; j <= order; ++j) {
        int pos = i - j;
        if (pos < 0) break;  // out-of-range bits are 0
        c |= static_cast<int>((code >> pos) & 1u) << (j - 1);
    }
    return c;
}

}  // namespace

double prob(const MarkovParams& p, const BitVector& z) {
    if (z.size() != p.m) throw std::invalid_argument("brute::prob: length mismatch");
    double v = 1.0;
    int c = 0;
    const int mask = p.contexts() - 1;
    for (int i = 0; i < p.m; ++i) {
        v *= p.factor(i, c, z.bit(i));
        c = ((c << 1) | z.bit(i)) & mask;
    }
    return v;
}

std::vector<double> all_probs(const MarkovParams& p) {
    p.validate();
    check_guard(p.m);
    // Extend prefix probabilities one position at a time.
    std::vector<double> probs{1.0}, nxt;
    for (int i = 0; i < p.m; ++i) {
        nxt.assign(probs.size() * 2, 0.0);
        for (uint32_t q = 0; q < probs.size(); ++q) {
            int c = context_at(q, i, p.order);
            double base = probs[q];
            nxt[q] = base * p.factor(i, c, 0);
            nxt[q | (uint32_t{1} << i)] = base * p.factor(i, c, 1);
        }
        probs.swap(nxt);
    }
    return probs;
}

double cross_entropy(const MarkovParams& p, const MarkovParams& q) {
    check_same_m(p, q);
    check_guard(p.m);
    std::vector<double> pp = all_probs(p);
    double h = 0.0;
    for (uint32_t z = 0; z < pp.size(); ++z) {
        if (pp[z] == 0.0) continue;
        double logq = 0.0;
        for (int i = 0; i < q.m; ++i)
            logq += std::log(q.factor(i, context_at(z, i, q.order), (z >> i) & 1u));
        h -= pp[z] * logq;
    }
    return h;
}

double entropy(const MarkovParams& p) { return brute::cross_entropy(p, p); }

std::pair<BitVector, double> argmax(const MarkovParams& p) {
    check_guard(p.m);
    std::vector<double> pp = all_probs(p);
    uint32_t best = 0;
    for (uint32_t z = 1; z < pp.size(); ++z)
        if (pp[z] > pp[best]) best = z;
    BitVector z(p.m);
    for (int i = 0; i < p.m; ++i) z.set_bit(i, (best >> i) & 1u);
    return {z, std::log(pp[best])};
}

double mixture_entropy(const std::vector<MarkovParams>& tables) {
    if (tables.empty()) throw std::invalid_argument("mixture_entropy: empty batch");
    const int m = tables[0].m;
    check_guard(m);
    const double n = static_cast<double>(tables.size());
    std::vector<double> s(size_t{1} << m, 0.0);
    for (const auto& t : tables) {
        if (t.m != m) throw std::invalid_argument("mixture_entropy: mixed code lengths");
        std::vector<double> pp = all_probs(t);
        for (size_t z = 0; z < s.size(); ++z) s[z] += pp[z];
    }
    double h = 0.0;
    for (double sz : s)
        if (sz > 0.0) h += (sz / n) * std::log(n / sz);
    return h;
}

}  // namespace brute

}  // namespace ammi::markov
