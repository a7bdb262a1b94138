#pragma once

// Compatibility of a control system with an affine connection: the two
// symmetry conditions linking symmetric-product words and Lie-derivative
// words, plus the reduction of both checks to an S_0 basis.

#include "gradiometer/systems.hpp"

namespace gradiometer {

struct CompatReport {
    bool ok = true;
    double worst_residual = 0.0;
    std::vector<double> witness;
    std::string failing_identity;
    int identities_checked = 0;
    int depth = 0;
};

namespace detail {

// A generated word (X_1,...,X_s, g_j) with its symmetric-product field
//   <X_1 : <X_2 : ... <X_s : g_j> ... >>
// and the paired function L_{X_1} ... L_{X_s} V_j.
struct CompatWord {
    std::vector<int> word;
    int j = 0;
    VectorField field;
    Expression fn;
};

inline std::string word_str(const CompatWord& w) {
    std::string s = "(";
    for (int i : w.word) s += "g" + std::to_string(i) + ":";
    s += "g" + std::to_string(w.j + 1) + ")/V" + std::to_string(w.j + 1);
    return s;
}

// all words with length <= depth, lexicographic in (length, indices)
inline std::vector<CompatWord> enumerate_words(const ControlSystem& S, const Connection& C,
                                               int depth) {
    std::vector<CompatWord> out;
    std::vector<CompatWord> level;
    for (int j = 0; j < S.m(); ++j) {
        CompatWord w{{}, j, S.inputs[j], simplify(S.outputs[j])};
        out.push_back(w);
        level.push_back(std::move(w));
    }
    for (int d = 0; d < depth; ++d) {
        std::vector<CompatWord> next;
        for (int i = 0; i <= S.m(); ++i) {
            for (const auto& w : level) {
                CompatWord nw;
                nw.word = {i};
                nw.word.insert(nw.word.end(), w.word.begin(), w.word.end());
                nw.j = w.j;
                nw.field = symmetric_product(C, S.field(i), w.field);
                nw.fn = lie_derivative(S.field(i), w.fn);
                next.push_back(nw);
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        level = std::move(next);
    }
    return out;
}

inline void record_identity(CompatReport& rep, const Expression& lhs, const Expression& rhs,
                            const Chart& chart, double tol, int samples, std::uint64_t seed,
                            const std::string& label) {
    ++rep.identities_checked;
    SampleCheck c = equivalent_on_samples(lhs, rhs, chart, tol, samples, seed);
    if (c.max_residual > rep.worst_residual) rep.worst_residual = c.max_residual;
    if (!c.ok && rep.ok) {
        rep.ok = false;
        rep.witness = c.witness;
        rep.failing_identity = label;
    }
}

} // namespace detail

// Condition (a): L_{<Xword:g_j>}[L_{Yword} V_k] = L_{<Yword:g_k>}[L_{Xword} V_j]
// for all word pairs with lengths <= depth.
inline CompatReport check_condition_a(const ControlSystem& S, const Connection& C, int depth = 2,
                                      double tol = 1e-8, int samples = 64,
                                      std::uint64_t seed = kDefaultSeed) {
    CompatReport rep;
    rep.depth = depth;
    auto words = detail::enumerate_words(S, C, depth);
    for (std::size_t a = 0; a < words.size(); ++a) {
        for (std::size_t b = a; b < words.size(); ++b) {
            Expression lhs = lie_derivative(words[a].field, words[b].fn);
            Expression rhs = lie_derivative(words[b].field, words[a].fn);
            detail::record_identity(rep, lhs, rhs, S.chart, tol, samples, seed,
                                    "(a) " + detail::word_str(words[a]) + " vs " +
                                        detail::word_str(words[b]));
        }
    }
    return rep;
}

// Condition (b): L_{<A:B>}[F_C] = L_{C}[L_{A}[F_B]] over generated triples
// with word lengths <= depth, the outer symmetric product taken of two
// generated fields.
inline CompatReport check_condition_b(const ControlSystem& S, const Connection& C, int depth = 1,
                                      double tol = 1e-8, int samples = 64,
                                      std::uint64_t seed = kDefaultSeed) {
    CompatReport rep;
    rep.depth = depth;
    auto words = detail::enumerate_words(S, C, depth);
    for (std::size_t a = 0; a < words.size(); ++a) {
        for (std::size_t b = a; b < words.size(); ++b) {
            VectorField outer = symmetric_product(C, words[a].field, words[b].field);
            Expression inner = lie_derivative(words[a].field, words[b].fn);
            for (std::size_t c = 0; c < words.size(); ++c) {
                Expression lhs = lie_derivative(outer, words[c].fn);
                Expression rhs = lie_derivative(words[c].field, inner);
                detail::record_identity(rep, lhs, rhs, S.chart, tol, samples, seed,
                                        "(b) <" + detail::word_str(words[a]) + ":" +
                                            detail::word_str(words[b]) + "> vs " +
                                            detail::word_str(words[c]));
            }
        }
    }
    return rep;
}

struct BasisCompatReport {
    CompatReport condition_a;
    CompatReport condition_b;
    bool s0_full_rank = false;
    bool ok = false;
    std::string error;
    // hypotheses of the basis reduction, recorded rather than proved
    bool assumed_weak_external_equivalence = true;
};

// Runs (a) and (b) only over an extracted S_0 basis {R_1..R_n} and the
// paired functions {V_{R_1}..V_{R_n}}. Requires the S_0 distribution to be
// full rank on the sample set.
inline BasisCompatReport check_compatibility_on_basis(const ControlSystem& S, const Connection& C,
                                                      int depth = 3, double tol = 1e-8,
                                                      int samples = 64,
                                                      std::uint64_t seed = kDefaultSeed) {
    BasisCompatReport rep;
    S0Family s0 = s0_closure(S, C, depth, samples, seed);
    rep.s0_full_rank = s0.full_rank;
    if (!s0.full_rank) {
        rep.error = "S_0 not full rank at sample points (depth " + std::to_string(depth) + ")";
        return rep;
    }
    std::vector<const S0Member*> basis;
    for (int idx : s0.basis) basis.push_back(&s0.members[idx]);

    rep.condition_a.depth = depth;
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i; j < basis.size(); ++j) {
            Expression lhs = lie_derivative(basis[i]->field, basis[j]->paired_fn);
            Expression rhs = lie_derivative(basis[j]->field, basis[i]->paired_fn);
            detail::record_identity(rep.condition_a, lhs, rhs, S.chart, tol, samples, seed,
                                    "(a) basis R" + std::to_string(i) + " vs R" +
                                        std::to_string(j));
        }

    rep.condition_b.depth = depth;
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i; j < basis.size(); ++j) {
            VectorField outer = symmetric_product(C, basis[i]->field, basis[j]->field);
            Expression inner = lie_derivative(basis[i]->field, basis[j]->paired_fn);
            for (std::size_t k = 0; k < basis.size(); ++k) {
                Expression lhs = lie_derivative(outer, basis[k]->paired_fn);
                Expression rhs = lie_derivative(basis[k]->field, inner);
                detail::record_identity(rep.condition_b, lhs, rhs, S.chart, tol, samples, seed,
                                        "(b) basis <R" + std::to_string(i) + ":R" +
                                            std::to_string(j) + "> vs R" + std::to_string(k));
            }
        }

    rep.ok = rep.condition_a.ok && rep.condition_b.ok;
    return rep;
}

} // namespace gradiometer
