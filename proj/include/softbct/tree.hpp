#pragma once

#include <cstdint>
#include <vector>

namespace softbct {

/// Perfect M-ary rooted tree with breadth-first integer node ids.
///
/// The root is node 0. The m-th child of node s is s*M + 1 + m (m in
/// [0, M)), the parent of s > 0 is (s-1)/M. Nodes at the deepest level
/// are always leaves of every subtree; everything above can split.
class TreeShape {
public:
    TreeShape(int branching, int max_depth);

    int branching() const { return branching_; }
    int max_depth() const { return max_depth_; }
    int node_count() const { return node_count_; }

    /// Nodes above the deepest level, i.e. [0, inner_count()).
    int inner_count() const { return inner_count_; }
    /// Nodes of the deepest level, i.e. [inner_count(), node_count()).
    int deepest_count() const { return node_count_ - inner_count_; }

    int parent(int s) const { return (s - 1) / branching_; }
    int child(int s, int m) const { return s * branching_ + 1 + m; }
    /// Position of s among its parent's children, in [0, M).
    int child_index(int s) const { return (s - 1) % branching_; }

    int depth(int s) const { return depth_[s]; }
    bool is_deepest(int s) const { return s >= inner_count_; }
    bool is_inner(int s) const { return s < inner_count_; }

    int level_begin(int d) const { return level_begin_[d]; }
    int level_end(int d) const { return level_begin_[d + 1]; }

private:
    int branching_;
    int max_depth_;
    int node_count_;
    int inner_count_;
    std::vector<int> depth_;
    std::vector<int> level_begin_;
};

/// Prior over regular subtrees: p(T) = prod_{s in I_T} g_s * prod_{s in L_T} (1 - g_s).
/// Split probabilities at the deepest level are forced to zero.
class TreePrior {
public:
    TreePrior(const TreeShape& shape, std::vector<double> split_prob);

    static TreePrior constant(const TreeShape& shape, double g);
    /// g_s = base^{-depth(s)}, clamped to [0, 1].
    static TreePrior depth_power(const TreeShape& shape, double base);
    /// g_s = value[depth(s)].
    static TreePrior per_depth(const TreeShape& shape, const std::vector<double>& by_depth);

    const std::vector<double>& g() const { return g_; }
    double g(int s) const { return g_[s]; }

private:
    std::vector<double> g_;
};

/// Posterior over regular subtrees in the same product form as the prior,
/// together with the log-domain recursion values that produced it.
struct TreePosterior {
    std::vector<double> g_prime;    // in [0,1]; 0 at the deepest level
    std::vector<double> log_phi;
    std::vector<double> log_gamma;  // per-node evidence, as supplied
};

/// A regular subtree given by its split nodes and leaf nodes.
struct Subtree {
    std::vector<int> inner;
    std::vector<int> leaves;
};

/// Enumerates every regular subtree rooted at node 0. Intended as a test
/// oracle; throws std::invalid_argument when the count exceeds max_count.
std::vector<Subtree> enumerate_subtrees(const TreeShape& shape,
                                        std::uint64_t max_count = 100000);

/// Number of regular subtrees, saturating at UINT64_MAX on overflow.
std::uint64_t count_subtrees(const TreeShape& shape);

/// log prod_{s in I_T} g[s] + log prod_{s in L_T} (1 - g[s]). Works for the
/// prior g and for the posterior g'. Returns -inf for zero-probability trees.
double subtree_log_prob(const Subtree& tree, const std::vector<double>& g);

/// Bottom-up phi/g' recursion, all products in natural-log domain.
/// Requires finite log_gamma at every node.
TreePosterior update_tree_posterior(const TreeShape& shape, const TreePrior& prior,
                                    const std::vector<double>& log_gamma);

/// E_{q(T)}[ I{ s is a leaf of T } ] = (1 - g'_s) * prod_{ancestors a of s} g'_a.
double node_leaf_marginal(const TreeShape& shape, const TreePosterior& post, int s);

/// All node-leaf marginals in one top-down pass.
std::vector<double> all_leaf_marginals(const TreeShape& shape, const TreePosterior& post);

/// argmax_T q(T) over regular subtrees; ties are broken toward the leaf
/// (smaller tree) at every node.
Subtree map_tree(const TreeShape& shape, const TreePosterior& post);

}  // namespace softbct
