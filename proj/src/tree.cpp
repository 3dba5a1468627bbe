#include "softbct/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "softbct/common.hpp"

namespace softbct {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxNodes = 1 << 26;
}  // namespace

TreeShape::TreeShape(int branching, int max_depth)
    : branching_(branching), max_depth_(max_depth) {
    if (branching < 2) throw std::invalid_argument("TreeShape: branching factor must be >= 2");
    if (max_depth < 0) throw std::invalid_argument("TreeShape: max depth must be >= 0");

    // node count = (M^{D+1} - 1) / (M - 1), guarded against overflow
    std::int64_t count = 0;
    std::int64_t level = 1;
    level_begin_.push_back(0);
    for (int d = 0; d <= max_depth; ++d) {
        count += level;
        if (count > kMaxNodes)
            throw std::invalid_argument("TreeShape: tree has too many nodes");
        level_begin_.push_back(static_cast<int>(count));
        level *= branching;
    }
    node_count_ = static_cast<int>(count);
    inner_count_ = level_begin_[max_depth];

    depth_.resize(node_count_);
    for (int d = 0; d <= max_depth; ++d)
        for (int s = level_begin_[d]; s < level_begin_[d + 1]; ++s) depth_[s] = d;
}

TreePrior::TreePrior(const TreeShape& shape, std::vector<double> split_prob)
    : g_(std::move(split_prob)) {
    if (static_cast<int>(g_.size()) != shape.node_count())
        throw std::invalid_argument("TreePrior: wrong number of split probabilities");
    for (double v : g_)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("TreePrior: split probabilities must lie in [0,1]");
    for (int s = shape.inner_count(); s < shape.node_count(); ++s) g_[s] = 0.0;
}

TreePrior TreePrior::constant(const TreeShape& shape, double g) {
    return TreePrior(shape, std::vector<double>(shape.node_count(), g));
}

TreePrior TreePrior::depth_power(const TreeShape& shape, double base) {
    if (!(base > 0.0)) throw std::invalid_argument("TreePrior: base must be positive");
    std::vector<double> g(shape.node_count());
    for (int s = 0; s < shape.node_count(); ++s)
        g[s] = std::min(1.0, std::pow(base, -static_cast<double>(shape.depth(s))));
    return TreePrior(shape, std::move(g));
}

TreePrior TreePrior::per_depth(const TreeShape& shape, const std::vector<double>& by_depth) {
    if (static_cast<int>(by_depth.size()) < shape.max_depth() + 1)
        throw std::invalid_argument("TreePrior: need one split probability per depth");
    std::vector<double> g(shape.node_count());
    for (int s = 0; s < shape.node_count(); ++s) g[s] = by_depth[shape.depth(s)];
    return TreePrior(shape, std::move(g));
}

std::uint64_t count_subtrees(const TreeShape& shape) {
    // c(0) = 1, c(d) = 1 + c(d-1)^M, saturating
    const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t c = 1;
    for (int d = 1; d <= shape.max_depth(); ++d) {
        std::uint64_t p = 1;
        for (int m = 0; m < shape.branching(); ++m) {
            if (c != 0 && p > cap / c) return cap;
            p *= c;
        }
        if (p == cap) return cap;
        c = p + 1;
    }
    return c;
}

namespace {

// Every regular subtree hanging off node s, built bottom-up.
std::vector<Subtree> enumerate_at(const TreeShape& shape, int s) {
    std::vector<Subtree> out;
    out.push_back(Subtree{{}, {s}});  // s kept as a leaf
    if (shape.is_deepest(s)) return out;

    const int M = shape.branching();
    std::vector<std::vector<Subtree>> per_child(M);
    for (int m = 0; m < M; ++m) per_child[m] = enumerate_at(shape, shape.child(s, m));

    // odometer over the cartesian product of child subtrees
    std::vector<std::size_t> idx(M, 0);
    while (true) {
        Subtree t;
        t.inner.push_back(s);
        for (int m = 0; m < M; ++m) {
            const Subtree& c = per_child[m][idx[m]];
            t.inner.insert(t.inner.end(), c.inner.begin(), c.inner.end());
            t.leaves.insert(t.leaves.end(), c.leaves.begin(), c.leaves.end());
        }
        std::sort(t.inner.begin(), t.inner.end());
        std::sort(t.leaves.begin(), t.leaves.end());
        out.push_back(std::move(t));

        int m = 0;
        while (m < M && ++idx[m] == per_child[m].size()) idx[m++] = 0;
        if (m == M) break;
    }
    return out;
}

}  // namespace

std::vector<Subtree> enumerate_subtrees(const TreeShape& shape, std::uint64_t max_count) {
    if (count_subtrees(shape) > max_count)
        throw std::invalid_argument("enumerate_subtrees: subtree count exceeds cap of " +
                                    std::to_string(max_count));
    return enumerate_at(shape, 0);
}

double subtree_log_prob(const Subtree& tree, const std::vector<double>& g) {
    double lp = 0.0;
    for (int s : tree.inner) {
        if (g[s] == 0.0) return kNegInf;
        lp += std::log(g[s]);
    }
    for (int s : tree.leaves) {
        if (g[s] == 1.0) return kNegInf;
        lp += std::log1p(-g[s]);
    }
    return lp;
}

TreePosterior update_tree_posterior(const TreeShape& shape, const TreePrior& prior,
                                    const std::vector<double>& log_gamma) {
    if (static_cast<int>(log_gamma.size()) != shape.node_count())
        throw std::invalid_argument("update_tree_posterior: log_gamma size mismatch");

    TreePosterior post;
    post.log_gamma = log_gamma;
    post.log_phi.assign(shape.node_count(), 0.0);
    post.g_prime.assign(shape.node_count(), 0.0);

    for (int s = shape.node_count() - 1; s >= 0; --s) {
        if (!std::isfinite(log_gamma[s]))
            throw NumericError("update_tree_posterior: non-finite log gamma at node " +
                               std::to_string(s));
        if (shape.is_deepest(s)) {
            post.log_phi[s] = log_gamma[s];
            continue;
        }
        double children = 0.0;
        for (int m = 0; m < shape.branching(); ++m)
            children += post.log_phi[shape.child(s, m)];

        const double g = prior.g(s);
        const double log_split = (g == 0.0) ? kNegInf : std::log(g) + children;
        const double log_stay = (g == 1.0) ? kNegInf : std::log1p(-g) + log_gamma[s];
        const double log_phi = log_sum_exp(log_stay, log_split);
        if (!std::isfinite(log_phi))
            throw NumericError("update_tree_posterior: non-finite phi at node " +
                               std::to_string(s));
        post.log_phi[s] = log_phi;
        post.g_prime[s] = (g == 0.0) ? 0.0 : std::min(1.0, std::exp(log_split - log_phi));
    }
    return post;
}

double node_leaf_marginal(const TreeShape& shape, const TreePosterior& post, int s) {
    double p = 1.0 - post.g_prime[s];
    for (int a = s; a != 0;) {
        a = shape.parent(a);
        p *= post.g_prime[a];
    }
    return p;
}

std::vector<double> all_leaf_marginals(const TreeShape& shape, const TreePosterior& post) {
    std::vector<double> anc(shape.node_count(), 1.0);
    std::vector<double> marg(shape.node_count());
    for (int s = 0; s < shape.node_count(); ++s) {
        marg[s] = anc[s] * (1.0 - post.g_prime[s]);
        if (shape.is_inner(s))
            for (int m = 0; m < shape.branching(); ++m)
                anc[shape.child(s, m)] = anc[s] * post.g_prime[s];
    }
    return marg;
}

Subtree map_tree(const TreeShape& shape, const TreePosterior& post) {
    const int n = shape.node_count();
    std::vector<double> best(n);
    std::vector<char> split(n, 0);

    for (int s = n - 1; s >= 0; --s) {
        const double gp = post.g_prime[s];
        const double leaf_val = (gp == 1.0) ? kNegInf : std::log1p(-gp);
        if (shape.is_deepest(s)) {
            best[s] = leaf_val;  // g' = 0 here, so this is 0
            continue;
        }
        double split_val = (gp == 0.0) ? kNegInf : std::log(gp);
        for (int m = 0; m < shape.branching(); ++m)
            split_val += best[shape.child(s, m)];
        // tie goes to the leaf: keep the smaller tree
        if (split_val > leaf_val) {
            best[s] = split_val;
            split[s] = 1;
        } else {
            best[s] = leaf_val;
        }
    }

    Subtree t;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int s = stack.back();
        stack.pop_back();
        if (split[s]) {
            t.inner.push_back(s);
            for (int m = shape.branching() - 1; m >= 0; --m)
                stack.push_back(shape.child(s, m));
        } else {
            t.leaves.push_back(s);
        }
    }
    std::sort(t.inner.begin(), t.inner.end());
    std::sort(t.leaves.begin(), t.leaves.end());
    return t;
}

}  // namespace softbct
