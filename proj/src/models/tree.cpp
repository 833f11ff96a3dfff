#include "sagopt/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sagopt/error.hpp"

namespace sagopt {

namespace {

double soft_threshold(double g, double a)
{
    if (g > a) {
        return g - a;
    }
    if (g < -a) {
        return g + a;
    }
    return 0.0;
}

struct Scorer {
    double half_l1;
    double l2;

    [[nodiscard]] double score(double g, double h) const
    {
        const double t = soft_threshold(g, half_l1);
        const double den = h + l2;
        return den > 0.0 ? t * t / den : 0.0;
    }
    [[nodiscard]] double leaf(double g, double h) const
    {
        const double den = h + l2;
        return den > 0.0 ? -soft_threshold(g, half_l1) / den : 0.0;
    }
};

// Split point strictly below `hi` and at least `lo`, so x <= t sends lo left
// and hi right even when the midpoint rounds up.
double midpoint(double lo, double hi)
{
    double m = 0.5 * lo + 0.5 * hi;
    if (!(m < hi) || m < lo) {
        m = lo;
    }
    return m;
}

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    double g2 = 0.0;
    std::size_t n = 0;
};

struct Task {
    std::size_t node;
    std::size_t begin;
    std::size_t end;
    std::size_t depth;
};

struct Candidate {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
};

std::vector<std::size_t> candidate_features(std::size_t d, std::size_t max_features, Rng* rng)
{
    std::vector<std::size_t> feats(d);
    std::iota(feats.begin(), feats.end(), std::size_t{0});
    if (max_features == 0 || max_features >= d || rng == nullptr) {
        return feats;
    }
    for (std::size_t i = 0; i < max_features; ++i) {
        const std::size_t j = i + uniform_index(*rng, d - i);
        std::swap(feats[i], feats[j]);
    }
    feats.resize(max_features);
    std::sort(feats.begin(), feats.end());
    return feats;
}

// Gains within rounding of the incumbent count as ties and keep the earlier
// (lower feature, lower threshold) candidate, so partitions that are equal in
// exact arithmetic resolve the same way whatever the summation order.
bool improves(double gain, const Candidate& best)
{
    return best.feature < 0 ? gain > best.gain : gain > best.gain + 1e-12 * std::abs(best.gain);
}

bool accept_split(const Candidate& best, const NodeStats& s, const TreeParams& p)
{
    if (best.feature < 0) {
        return false;
    }
    const double tol = 1e-12 * s.g2;
    return 0.5 * best.gain - p.gamma > tol;
}

// Weakest-link pruning on stored node statistics. Risk of a node is its
// squared-error sum divided by the root sample count.
void prune_tree(std::vector<TreeNode>& nodes, const std::vector<NodeStats>& stats, const Scorer& scorer,
                double ccp_alpha)
{
    const double total = static_cast<double>(stats[0].n);
    const auto risk = [&](std::size_t i) {
        return std::max(0.0, stats[i].g2 - scorer.score(stats[i].g, stats[i].h)) / total;
    };
    const std::size_t count = nodes.size();
    std::vector<double> subtree_risk(count);
    std::vector<std::size_t> leaves(count);
    while (true) {
        // Children always have larger ids than parents, so a reverse sweep is bottom-up.
        for (std::size_t i = count; i-- > 0;) {
            if (nodes[i].is_leaf()) {
                subtree_risk[i] = risk(i);
                leaves[i] = 1;
            } else {
                const auto l = static_cast<std::size_t>(nodes[i].left);
                const auto r = static_cast<std::size_t>(nodes[i].right);
                subtree_risk[i] = subtree_risk[l] + subtree_risk[r];
                leaves[i] = leaves[l] + leaves[r];
            }
        }
        double weakest = std::numeric_limits<double>::infinity();
        std::size_t at = count;
        std::vector<bool> reachable(count, false);
        reachable[0] = true;
        for (std::size_t i = 0; i < count; ++i) {
            if (!reachable[i] || nodes[i].is_leaf()) {
                continue;
            }
            reachable[static_cast<std::size_t>(nodes[i].left)] = true;
            reachable[static_cast<std::size_t>(nodes[i].right)] = true;
            const double alpha = (risk(i) - subtree_risk[i]) / static_cast<double>(leaves[i] - 1);
            if (alpha < weakest) {
                weakest = alpha;
                at = i;
            }
        }
        if (at == count || weakest > ccp_alpha) {
            return;
        }
        nodes[at].feature = -1;
        nodes[at].threshold = 0.0;
        nodes[at].left = nodes[at].right = -1;
        nodes[at].value = scorer.leaf(stats[at].g, stats[at].h);
    }
}

// Drops unreachable nodes, renumbering in preorder.
std::vector<TreeNode> compact(const std::vector<TreeNode>& nodes)
{
    std::vector<TreeNode> out;
    std::vector<std::pair<std::size_t, int>> stack{{0, -1}}; // (old id, parent slot to patch)
    while (!stack.empty()) {
        const auto [old, parent] = stack.back();
        stack.pop_back();
        const int id = static_cast<int>(out.size());
        out.push_back(nodes[old]);
        if (parent >= 0) {
            auto& p = out[static_cast<std::size_t>(parent / 2)];
            (parent % 2 == 0 ? p.left : p.right) = id;
        }
        if (!nodes[old].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes[old].right), id * 2 + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes[old].left), id * 2);
        }
    }
    return out;
}

class ExactGrower {
public:
    ExactGrower(const PresortedColumns& x, std::span<const std::uint32_t> slots, std::span<const double> grad,
                std::span<const double> hess, const TreeParams& params, Rng* rng)
        : x_(x), slots_(slots), grad_(grad), hess_(hess), params_(params), rng_(rng),
          scorer_{0.5 * params.l1, params.l2}, m_(slots.size()), mark_(slots.size()), buffer_(slots.size()),
          leaf_of_slot_(slots.size(), 0)
    {
        if (grad.size() != m_ || hess.size() != m_) {
            throw DimensionError("gradient/hessian length must match the slot count");
        }
        if (m_ == 0) {
            throw InvalidArgument("cannot grow a tree on zero samples");
        }
        // Slots of each row, then every feature's slot order follows its row presort.
        const std::size_t n = x.rows();
        std::vector<std::uint32_t> offset(n + 1, 0);
        for (const auto r : slots) {
            if (r >= n) {
                throw InvalidArgument("slot refers to a row outside the matrix");
            }
            ++offset[r + 1];
        }
        for (std::size_t r = 0; r < n; ++r) {
            offset[r + 1] += offset[r];
        }
        std::vector<std::uint32_t> by_row(m_);
        std::vector<std::uint32_t> fill(offset.begin(), offset.end() - 1);
        for (std::uint32_t s = 0; s < m_; ++s) {
            by_row[fill[slots[s]]++] = s;
        }
        order_.assign(x.cols(), {});
        for (std::size_t f = 0; f < x.cols(); ++f) {
            auto& ord = order_[f];
            ord.reserve(m_);
            for (const auto r : x.order(f)) {
                for (auto k = offset[r]; k < offset[r + 1]; ++k) {
                    ord.push_back(by_row[k]);
                }
            }
        }
    }

    TreeFit run()
    {
        std::vector<Task> stack{{0, 0, m_, 0}};
        nodes_.emplace_back();
        stats_.emplace_back();
        while (!stack.empty()) {
            const Task t = stack.back();
            stack.pop_back();
            process(t, stack);
        }
        if (params_.ccp_alpha > 0.0) {
            prune_tree(nodes_, stats_, scorer_, params_.ccp_alpha);
            Tree pruned(compact(nodes_));
            std::vector<double> row(x_.cols());
            for (std::size_t s = 0; s < m_; ++s) {
                for (std::size_t f = 0; f < x_.cols(); ++f) {
                    row[f] = x_.value(f, slots_[s]);
                }
                leaf_of_slot_[s] = static_cast<std::uint32_t>(pruned.leaf_index(row));
            }
            return {std::move(pruned), std::move(leaf_of_slot_)};
        }
        return {Tree(std::move(nodes_)), std::move(leaf_of_slot_)};
    }

private:
    double value(std::size_t f, std::uint32_t slot) const { return x_.value(f, slots_[slot]); }

    void process(const Task& t, std::vector<Task>& stack)
    {
        NodeStats s;
        const auto& base = order_.empty() ? identity() : order_[0];
        for (std::size_t i = t.begin; i < t.end; ++i) {
            const auto slot = base[i];
            s.g += grad_[slot];
            s.h += hess_[slot];
            s.g2 += grad_[slot] * grad_[slot];
        }
        s.n = t.end - t.begin;
        stats_[t.node] = s;
        nodes_[t.node].samples = s.n;
        nodes_[t.node].value = scorer_.leaf(s.g, s.h);

        Candidate best;
        if (t.depth < params_.max_depth && s.n >= 2 * params_.min_samples_leaf && x_.cols() > 0) {
            best = search(t, s);
        }
        if (!accept_split(best, s, params_)) {
            for (std::size_t i = t.begin; i < t.end; ++i) {
                leaf_of_slot_[base[i]] = static_cast<std::uint32_t>(t.node);
            }
            return;
        }

        const auto fb = static_cast<std::size_t>(best.feature);
        std::size_t n_left = 0;
        for (std::size_t i = t.begin; i < t.end; ++i) {
            const auto slot = order_[fb][i];
            mark_[slot] = value(fb, slot) <= best.threshold ? 1 : 0;
            n_left += mark_[slot];
        }
        for (auto& ord : order_) {
            std::size_t l = t.begin;
            std::size_t r = 0;
            for (std::size_t i = t.begin; i < t.end; ++i) {
                const auto slot = ord[i];
                if (mark_[slot] != 0) {
                    ord[l++] = slot;
                } else {
                    buffer_[r++] = slot;
                }
            }
            std::copy_n(buffer_.begin(), r, ord.begin() + static_cast<std::ptrdiff_t>(l));
        }

        const std::size_t left = nodes_.size();
        nodes_.emplace_back();
        nodes_.emplace_back();
        stats_.resize(nodes_.size());
        auto& node = nodes_[t.node];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = static_cast<int>(left);
        node.right = static_cast<int>(left + 1);
        const std::size_t mid = t.begin + n_left;
        stack.push_back({left + 1, mid, t.end, t.depth + 1});
        stack.push_back({left, t.begin, mid, t.depth + 1});
    }

    Candidate search(const Task& t, const NodeStats& s)
    {
        const double parent = scorer_.score(s.g, s.h);
        const std::size_t msl = params_.min_samples_leaf;
        Candidate best;
        for (const auto f : candidate_features(x_.cols(), params_.max_features, rng_)) {
            const auto& ord = order_[f];
            if (params_.random_thresholds) {
                const double lo = value(f, ord[t.begin]);
                const double hi = value(f, ord[t.end - 1]);
                if (!(lo < hi)) {
                    continue;
                }
                double thr = lo + uniform01(*rng_) * (hi - lo);
                if (!(thr < hi)) {
                    thr = lo;
                }
                double gl = 0.0;
                double hl = 0.0;
                std::size_t nl = 0;
                for (std::size_t i = t.begin; i < t.end && value(f, ord[i]) <= thr; ++i) {
                    gl += grad_[ord[i]];
                    hl += hess_[ord[i]];
                    ++nl;
                }
                if (nl < msl || s.n - nl < msl) {
                    continue;
                }
                const double gain = scorer_.score(gl, hl) + scorer_.score(s.g - gl, s.h - hl) - parent;
                if (improves(gain, best)) {
                    best = {gain, static_cast<int>(f), thr};
                }
                continue;
            }
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t i = t.begin; i + 1 < t.end; ++i) {
                const auto slot = ord[i];
                gl += grad_[slot];
                hl += hess_[slot];
                const std::size_t nl = i + 1 - t.begin;
                const double v = value(f, slot);
                const double next = value(f, ord[i + 1]);
                if (!(v < next) || nl < msl) {
                    continue;
                }
                if (s.n - nl < msl) {
                    break;
                }
                const double gain = scorer_.score(gl, hl) + scorer_.score(s.g - gl, s.h - hl) - parent;
                if (improves(gain, best)) {
                    best = {gain, static_cast<int>(f), midpoint(v, next)};
                }
            }
        }
        return best;
    }

    const std::vector<std::uint32_t>& identity()
    {
        if (identity_.size() != m_) {
            identity_.resize(m_);
            std::iota(identity_.begin(), identity_.end(), 0U);
        }
        return identity_;
    }

    const PresortedColumns& x_;
    std::span<const std::uint32_t> slots_;
    std::span<const double> grad_;
    std::span<const double> hess_;
    const TreeParams& params_;
    Rng* rng_;
    Scorer scorer_;
    std::size_t m_;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<std::uint8_t> mark_;
    std::vector<std::uint32_t> buffer_;
    std::vector<std::uint32_t> leaf_of_slot_;
    std::vector<std::uint32_t> identity_;
    std::vector<TreeNode> nodes_;
    std::vector<NodeStats> stats_;
};

} // namespace

Tree::Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.empty()) {
        throw InvalidArgument("a tree needs at least one node");
    }
    const auto count = static_cast<int>(nodes_.size());
    for (int i = 0; i < count; ++i) {
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= count || n.right >= count)) {
            throw InvalidArgument("tree node has an invalid child index");
        }
        if (n.is_leaf() && !std::isfinite(n.value)) {
            throw InvalidArgument("tree leaf value is not finite");
        }
    }
}

std::size_t Tree::leaf_index(std::span<const double> x) const
{
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return i;
}

std::size_t Tree::depth() const
{
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

std::size_t Tree::leaf_count() const
{
    // Unreachable nodes never exist: every builder emits compact trees.
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

PresortedColumns::PresortedColumns(const Matrix& x) : rows_(x.rows())
{
    values_.resize(x.cols());
    order_.resize(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        values_[f] = x.column(f);
        auto& ord = order_[f];
        ord.resize(rows_);
        std::iota(ord.begin(), ord.end(), 0U);
        const auto& v = values_[f];
        std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
            return v[a] < v[b] || (v[a] == v[b] && a < b);
        });
    }
}

TreeFit grow_tree(const PresortedColumns& x, std::span<const std::uint32_t> slots, std::span<const double> grad,
                  std::span<const double> hess, const TreeParams& params, Rng* rng)
{
    if ((params.max_features != 0 && params.max_features < x.cols()) || params.random_thresholds) {
        if (rng == nullptr) {
            throw InvalidArgument("randomized tree growth needs a random stream");
        }
    }
    return ExactGrower(x, slots, grad, hess, params, rng).run();
}

Tree grow_regression_tree(const PresortedColumns& x, std::span<const double> y, const TreeParams& params, Rng* rng)
{
    if (y.size() != x.rows()) {
        throw DimensionError("target length must match the row count");
    }
    std::vector<std::uint32_t> slots(y.size());
    std::iota(slots.begin(), slots.end(), 0U);
    std::vector<double> grad(y.size());
    std::transform(y.begin(), y.end(), grad.begin(), [](double v) { return -v; });
    const std::vector<double> hess(y.size(), 1.0);
    TreeParams p = params;
    p.l1 = p.l2 = p.gamma = 0.0;
    return grow_tree(x, slots, grad, hess, p, rng).tree;
}

BinnedColumns::BinnedColumns(const Matrix& x, std::size_t n_bins) : rows_(x.rows())
{
    if (n_bins == 0) {
        throw InvalidArgument("bin count must be at least 1");
    }
    const std::size_t d = x.cols();
    cuts_.resize(d);
    bins_.resize(d);
    values_.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
        values_[f] = x.column(f);
        std::vector<double> sorted = values_[f];
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> distinct = sorted;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        auto& cuts = cuts_[f];
        if (distinct.size() <= n_bins) {
            cuts.assign(distinct.begin() + (distinct.empty() ? 0 : 1), distinct.end());
        } else {
            // A cut c sends values >= c to the next bin; quantile cuts are deduplicated.
            for (std::size_t b = 1; b < n_bins; ++b) {
                const double c = sorted[b * rows_ / n_bins];
                if (c > sorted.front() && (cuts.empty() || c > cuts.back())) {
                    cuts.push_back(c);
                }
            }
        }
        auto& bins = bins_[f];
        bins.resize(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            bins[r] = static_cast<std::uint32_t>(bin_of(f, values_[f][r]));
        }
    }
}

std::size_t BinnedColumns::bin_of(std::size_t feature, double v) const
{
    const auto& cuts = cuts_[feature];
    return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
}

TreeFit grow_histogram_tree(const BinnedColumns& x, std::span<const double> grad, std::span<const double> hess,
                            const TreeParams& params)
{
    const std::size_t n = x.rows();
    if (grad.size() != n || hess.size() != n) {
        throw DimensionError("gradient/hessian length must match the row count");
    }
    if (n == 0) {
        throw InvalidArgument("cannot grow a tree on zero samples");
    }
    const Scorer scorer{0.5 * params.l1, params.l2};
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0U);
    std::vector<std::uint32_t> buffer(n);
    std::vector<std::uint32_t> leaf_of_row(n, 0);
    std::vector<TreeNode> nodes(1);
    std::vector<Task> stack{{0, 0, n, 0}};

    struct Bin {
        std::size_t n = 0;
        double g = 0.0;
        double h = 0.0;
        double lo = 0.0;
        double hi = 0.0;
    };
    std::vector<Bin> hist;

    while (!stack.empty()) {
        const Task t = stack.back();
        stack.pop_back();
        NodeStats s;
        for (std::size_t i = t.begin; i < t.end; ++i) {
            const auto r = rows[i];
            s.g += grad[r];
            s.h += hess[r];
            s.g2 += grad[r] * grad[r];
        }
        s.n = t.end - t.begin;
        nodes[t.node].samples = s.n;
        nodes[t.node].value = scorer.leaf(s.g, s.h);

        Candidate best;
        if (t.depth < params.max_depth && s.n >= 2 * params.min_samples_leaf) {
            const double parent = scorer.score(s.g, s.h);
            for (std::size_t f = 0; f < x.cols(); ++f) {
                hist.assign(x.bin_count(f), Bin{});
                for (std::size_t i = t.begin; i < t.end; ++i) {
                    const auto r = rows[i];
                    auto& b = hist[x.bin(f, r)];
                    const double v = x.value(f, r);
                    if (b.n == 0) {
                        b.lo = b.hi = v;
                    } else {
                        b.lo = std::min(b.lo, v);
                        b.hi = std::max(b.hi, v);
                    }
                    ++b.n;
                    b.g += grad[r];
                    b.h += hess[r];
                }
                double gl = 0.0;
                double hl = 0.0;
                std::size_t nl = 0;
                const Bin* prev = nullptr;
                for (const auto& b : hist) {
                    if (b.n == 0) {
                        continue;
                    }
                    if (prev != nullptr && nl >= params.min_samples_leaf && s.n - nl >= params.min_samples_leaf) {
                        const double gain = scorer.score(gl, hl) + scorer.score(s.g - gl, s.h - hl) - parent;
                        if (improves(gain, best)) {
                            best = {gain, static_cast<int>(f), midpoint(prev->hi, b.lo)};
                        }
                    }
                    gl += b.g;
                    hl += b.h;
                    nl += b.n;
                    prev = &b;
                }
            }
        }
        if (!accept_split(best, s, params)) {
            for (std::size_t i = t.begin; i < t.end; ++i) {
                leaf_of_row[rows[i]] = static_cast<std::uint32_t>(t.node);
            }
            continue;
        }
        const auto fb = static_cast<std::size_t>(best.feature);
        std::size_t l = t.begin;
        std::size_t r = 0;
        for (std::size_t i = t.begin; i < t.end; ++i) {
            const auto row = rows[i];
            if (x.value(fb, row) <= best.threshold) {
                rows[l++] = row;
            } else {
                buffer[r++] = row;
            }
        }
        std::copy_n(buffer.begin(), r, rows.begin() + static_cast<std::ptrdiff_t>(l));
        const std::size_t left = nodes.size();
        nodes.emplace_back();
        nodes.emplace_back();
        auto& node = nodes[t.node];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = static_cast<int>(left);
        node.right = static_cast<int>(left + 1);
        stack.push_back({left + 1, l, t.end, t.depth + 1});
        stack.push_back({left, t.begin, l, t.depth + 1});
    }
    return {Tree(std::move(nodes)), std::move(leaf_of_row)};
}

} // namespace sagopt
