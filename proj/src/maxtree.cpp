#include "hfseg/maxtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace hfseg {

namespace {

int quantize(double v) {
    return static_cast<int>(std::clamp(std::lround(v), 0L, 255L));
}

int32_t uf_find(std::vector<int32_t>& zpar, int32_t p) {
    int32_t root = p;
    while (zpar[root] != root) root = zpar[root];
    while (zpar[p] != root) {
        const int32_t next = zpar[p];
        zpar[p] = root;
        p = next;
    }
    return root;
}

} // namespace

PixelOrder sort_pixels(const BScan& img) {
    const size_t n = img.size();
    std::vector<int32_t> bucket_count(257, 0);
    std::vector<int> key(n);
    for (size_t i = 0; i < n; ++i) {
        key[i] = quantize(img.data[i]);
        ++bucket_count[key[i] + 1];
    }
    for (int k = 0; k < 256; ++k) bucket_count[k + 1] += bucket_count[k];
    PixelOrder order;
    order.order.resize(n);
    for (size_t i = 0; i < n; ++i) order.order[bucket_count[key[i]]++] = static_cast<int32_t>(i);
    return order;
}

std::vector<int32_t> ComponentTree::canonical_nodes() const {
    std::vector<int32_t> nodes;
    for (size_t p = 0; p < n_pixels(); ++p)
        if (is_canonical(static_cast<int32_t>(p))) nodes.push_back(static_cast<int32_t>(p));
    return nodes;
}

ComponentTree build_component_tree(const BScan& img) {
    if (img.width <= 0 || img.height <= 0)
        throw ParameterError("build_component_tree: empty image");
    const int w = img.width, h = img.height;
    const size_t n = img.size();

    ComponentTree tree;
    tree.width = w;
    tree.height = h;
    tree.level.resize(n);
    for (size_t i = 0; i < n; ++i) tree.level[i] = quantize(img.data[i]);

    // brightest-first processing order, stable within a level
    const PixelOrder ascending = sort_pixels(img);
    std::vector<int32_t> order(n);
    {
        // reverse bucket-by-bucket so equal levels keep ascending pixel index
        size_t out = 0;
        size_t i = n;
        while (i > 0) {
            size_t j = i;
            const int lev = tree.level[ascending.order[i - 1]];
            while (j > 0 && tree.level[ascending.order[j - 1]] == lev) --j;
            for (size_t t = j; t < i; ++t) order[out++] = ascending.order[t];
            i = j;
        }
    }

    tree.parent.assign(n, -1);
    std::vector<int32_t> zpar(n, -1);
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (size_t oi = 0; oi < n; ++oi) {
        const int32_t p = order[oi];
        tree.parent[p] = p;
        zpar[p] = p;
        const int r = p / w, c = p % w;
        for (int k = 0; k < 4; ++k) {
            const int rr = r + dr[k], cc = c + dc[k];
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            const int32_t q = static_cast<int32_t>(rr) * w + cc;
            if (tree.parent[q] < 0) continue; // not processed yet
            const int32_t root = uf_find(zpar, q);
            if (root != p) {
                tree.parent[root] = p;
                zpar[root] = p;
            }
        }
    }
    tree.root = order[n - 1];

    // canonicalization: every parent pointer targets the canonical pixel of
    // the parent node (root-to-leaf sweep)
    for (size_t oi = n; oi > 0; --oi) {
        const int32_t p = order[oi - 1];
        const int32_t q = tree.parent[p];
        if (tree.level[tree.parent[q]] == tree.level[q]) tree.parent[p] = tree.parent[q];
    }

    // per-node accumulators
    tree.area.assign(n, 0);
    tree.sum_row.assign(n, 0.0);
    tree.sum_col.assign(n, 0.0);
    tree.sum_rr.assign(n, 0.0);
    tree.sum_rc.assign(n, 0.0);
    tree.sum_cc.assign(n, 0.0);
    tree.min_pixel.assign(n, -1);
    for (size_t i = 0; i < n; ++i) {
        const int32_t p = static_cast<int32_t>(i);
        const int32_t node = tree.is_canonical(p) ? p : tree.parent[p];
        const double r = p / w, c = p % w;
        ++tree.area[node];
        tree.sum_row[node] += r;
        tree.sum_col[node] += c;
        tree.sum_rr[node] += r * r;
        tree.sum_rc[node] += r * c;
        tree.sum_cc[node] += c * c;
        if (tree.min_pixel[node] < 0 || p < tree.min_pixel[node]) tree.min_pixel[node] = p;
    }
    // accumulate children into parents, brightest nodes first
    for (size_t oi = 0; oi < n; ++oi) {
        const int32_t p = order[oi];
        if (!tree.is_canonical(p) || p == tree.root) continue;
        const int32_t q = tree.parent[p];
        tree.area[q] += tree.area[p];
        tree.sum_row[q] += tree.sum_row[p];
        tree.sum_col[q] += tree.sum_col[p];
        tree.sum_rr[q] += tree.sum_rr[p];
        tree.sum_rc[q] += tree.sum_rc[p];
        tree.sum_cc[q] += tree.sum_cc[p];
        if (tree.min_pixel[p] < tree.min_pixel[q]) tree.min_pixel[q] = tree.min_pixel[p];
    }
    return tree;
}

RegionMoments region_moments(const ComponentTree& tree, int32_t node) {
    const double a = static_cast<double>(tree.area[node]);
    RegionMoments m;
    const double mr = tree.sum_row[node] / a;
    const double mc = tree.sum_col[node] / a;
    m.centroid = {mr, mc};
    m.second_moment = {tree.sum_rr[node] / a - mr * mr, tree.sum_rc[node] / a - mr * mc,
                       tree.sum_rc[node] / a - mr * mc, tree.sum_cc[node] / a - mc * mc};
    return m;
}

namespace {

struct ChildIndex {
    // largest-area child per canonical node (ties to the smaller region
    // minimum pixel index), plus full child lists on demand
    std::vector<int32_t> best_child;

    explicit ChildIndex(const ComponentTree& tree) : best_child(tree.n_pixels(), -1) {
        for (size_t i = 0; i < tree.n_pixels(); ++i) {
            const int32_t p = static_cast<int32_t>(i);
            if (!tree.is_canonical(p) || p == tree.root) continue;
            const int32_t q = tree.parent[p];
            int32_t& best = best_child[q];
            if (best < 0 || tree.area[p] > tree.area[best] ||
                (tree.area[p] == tree.area[best] && tree.min_pixel[p] < tree.min_pixel[best]))
                best = p;
        }
    }
};

} // namespace

std::vector<double> stability(const ComponentTree& tree, double delta) {
    if (delta <= 0) throw ParameterError("stability: delta must be > 0");
    const ChildIndex children(tree);
    std::vector<double> psi(tree.n_pixels(), 0.0);
    for (size_t i = 0; i < tree.n_pixels(); ++i) {
        const int32_t node = static_cast<int32_t>(i);
        if (!tree.is_canonical(node)) continue;
        const int g = tree.level[node];
        // first ancestor at level <= g - delta; the root stands in otherwise
        int32_t up = node;
        while (up != tree.root && tree.level[up] > g - delta) up = tree.parent[up];
        const double area_minus = static_cast<double>(tree.area[up]);
        // largest-area child chain down to level >= g + delta
        double area_plus = static_cast<double>(tree.area[node]);
        int32_t down = children.best_child[node];
        while (down >= 0) {
            if (tree.level[down] >= g + delta) {
                area_plus = static_cast<double>(tree.area[down]);
                break;
            }
            down = children.best_child[down];
        }
        psi[node] = std::max(0.0, (area_minus - area_plus) / static_cast<double>(tree.area[node]));
    }
    return psi;
}

std::vector<ExtremalRegion> extract_mser(const ComponentTree& tree, double delta, double g_min,
                                         double max_variation) {
    const std::vector<double> psi = stability(tree, delta);

    // smallest child Psi per node to test strict local minimality
    std::vector<double> min_child_psi(tree.n_pixels(), std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < tree.n_pixels(); ++i) {
        const int32_t p = static_cast<int32_t>(i);
        if (!tree.is_canonical(p) || p == tree.root) continue;
        const int32_t q = tree.parent[p];
        min_child_psi[q] = std::min(min_child_psi[q], psi[p]);
    }

    std::vector<ExtremalRegion> regions;
    for (size_t i = 0; i < tree.n_pixels(); ++i) {
        const int32_t node = static_cast<int32_t>(i);
        if (!tree.is_canonical(node) || node == tree.root) continue;
        if (tree.level[node] < g_min) continue;
        if (psi[node] > max_variation) continue;
        // the root is a boundary convention, not a region: it never competes
        const double parent_psi = tree.parent[node] == tree.root
                                      ? std::numeric_limits<double>::infinity()
                                      : psi[tree.parent[node]];
        if (psi[node] > parent_psi) continue;           // plateaus keep the brighter node
        if (psi[node] >= min_child_psi[node]) continue; // strictly below every child
        ExtremalRegion region;
        region.node = node;
        region.level = tree.level[node];
        region.area = tree.area[node];
        region.stability = psi[node];
        const RegionMoments m = region_moments(tree, node);
        region.centroid = m.centroid;
        region.second_moment = m.second_moment;
        regions.push_back(region);
    }
    return regions;
}

std::vector<ExtremalRegion> dedup_regions(std::vector<ExtremalRegion> regions,
                                          const ComponentTree& tree, double delta,
                                          double similarity_tol, double max_variation) {
    std::vector<uint8_t> alive_flag(tree.n_pixels(), 0);
    std::vector<size_t> region_of(tree.n_pixels(), 0);
    std::vector<ExtremalRegion> kept;
    std::vector<size_t> order(regions.size());
    std::iota(order.begin(), order.end(), 0);
    // ancestors register before their descendants query them
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (regions[a].level != regions[b].level) return regions[a].level < regions[b].level;
        return regions[a].node < regions[b].node;
    });

    std::vector<uint8_t> dropped(regions.size(), 0);
    for (size_t i = 0; i < regions.size(); ++i) {
        if (regions[i].stability > max_variation) dropped[i] = 1;
    }
    for (size_t oi = 0; oi < order.size(); ++oi) {
        const size_t ri = order[oi];
        if (dropped[ri]) continue;
        const ExtremalRegion& r = regions[ri];
        // nearest alive selected ancestor
        int32_t p = r.node;
        while (!dropped[ri]) {
            if (p == tree.root) break;
            p = tree.parent[p];
            if (!alive_flag[p]) {
                if (p == tree.root) break;
                continue;
            }
            const size_t si = region_of[p];
            const ExtremalRegion& s = regions[si];
            const bool in_window = r.level - s.level <= delta;
            const bool similar =
                std::abs(double(r.area) - double(s.area)) / double(s.area) <= similarity_tol;
            if (in_window && similar) {
                if (r.stability > s.stability) {
                    dropped[ri] = 1;
                } else {
                    dropped[si] = 1;
                    alive_flag[s.node] = 0;
                    continue; // keep scanning upward for the next ancestor
                }
            }
            break;
        }
        if (!dropped[ri]) {
            alive_flag[r.node] = 1;
            region_of[r.node] = ri;
        }
    }
    for (size_t i = 0; i < regions.size(); ++i)
        if (!dropped[i]) kept.push_back(regions[i]);
    std::sort(kept.begin(), kept.end(),
              [](const ExtremalRegion& a, const ExtremalRegion& b) { return a.node < b.node; });
    return kept;
}

Mask regions_to_mask(const std::vector<ExtremalRegion>& regions, const ComponentTree& tree,
                     int width, int height) {
    if (width != tree.width || height != tree.height)
        throw ConsistencyError("regions_to_mask: region pixels out of the mask bounds");
    std::vector<uint8_t> selected(tree.n_pixels(), 0);
    for (const auto& r : regions) {
        if (r.node < 0 || static_cast<size_t>(r.node) >= tree.n_pixels())
            throw ConsistencyError("regions_to_mask: region node outside tree");
        selected[r.node] = 1;
    }
    // inside(n) = selected(n) or inside(parent); parents have lower levels,
    // so sweep canonical nodes dimmest first
    const PixelOrder ascending = [&] {
        BScan levels(tree.width, tree.height);
        for (size_t i = 0; i < tree.n_pixels(); ++i) levels.data[i] = tree.level[i];
        return sort_pixels(levels);
    }();
    std::vector<uint8_t> inside(tree.n_pixels(), 0);
    for (const int32_t p : ascending.order) {
        if (!tree.is_canonical(p)) continue;
        inside[p] = selected[p] || (p != tree.root && inside[tree.parent[p]]);
    }
    Mask mask(width, height);
    for (size_t i = 0; i < tree.n_pixels(); ++i) {
        const int32_t p = static_cast<int32_t>(i);
        const int32_t node = tree.is_canonical(p) ? p : tree.parent[p];
        mask.bits[i] = inside[node];
    }
    return mask;
}

std::string dump_tree_csv(const ComponentTree& tree, double delta) {
    const std::vector<double> psi = stability(tree, delta);
    std::string out = "node,parent,level,area,psi,mu_row,mu_col\n";
    char line[160];
    for (size_t i = 0; i < tree.n_pixels(); ++i) {
        const int32_t p = static_cast<int32_t>(i);
        if (!tree.is_canonical(p)) continue;
        const RegionMoments m = region_moments(tree, p);
        std::snprintf(line, sizeof line, "%d,%d,%d,%lld,%.9g,%.9g,%.9g\n", p, tree.parent[p],
                      tree.level[p], static_cast<long long>(tree.area[p]), psi[p], m.centroid[0],
                      m.centroid[1]);
        out += line;
    }
    return out;
}

} // namespace hfseg
