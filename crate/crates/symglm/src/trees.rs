//! Rooted trees up to order 5 with the classical symmetry and density
//! coefficients, plus the root-subtree decompositions that drive B-series
//! composition.
//!
//! Trees are kept in a global table sorted by (order, canonical encoding).
//! The canonical sort puts the order-3 pair as `[t^2]` then `[[t]]`, and the
//! order-4 block as `[t^3]`, `[t[t]]`, `[[t^2]]`, `[[[t]]]`, matching the
//! usual column order of order-condition tables.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Largest tree order the table carries. Order 4 is verified exactly and
/// order 5 supplies the leading defect, so nothing bigger is needed.
pub const MAX_ORDER: usize = 5;

/// Index into the global tree table. The empty tree is not in the table;
/// series store its coefficient separately.
pub type TreeId = usize;

/// Canonical structure of one rooted tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    /// Children as table indices, sorted by canonical key (ascending).
    pub children: Vec<TreeId>,
    /// Number of vertices.
    pub order: usize,
    /// Symmetry coefficient sigma(t).
    pub sigma: i128,
    /// Density gamma(t).
    pub gamma: i128,
    /// Root valency (= number of children; leaves contribute too).
    pub valency: usize,
    /// Printable name such as `[t[t]]`.
    pub name: String,
    /// Decomposition over rooted subtrees: for every vertex subset that
    /// contains the root and is closed under taking parents, the pair
    /// (canonical id of the subtree, ids of the hanging components).
    /// The full subset appears as `(self, [])`; the empty subset is not
    /// listed and must be handled by the caller.
    pub root_subsets: Vec<(TreeId, Vec<TreeId>)>,
}

/// Table of all trees with `order <= MAX_ORDER`, plus lookup helpers.
pub struct TreeTable {
    pub trees: Vec<Tree>,
    /// First table index of each order (1-based; `order_start[1] == 0`).
    order_start: Vec<usize>,
}

impl TreeTable {
    /// Ids of all trees with the given order.
    pub fn of_order(&self, order: usize) -> std::ops::Range<TreeId> {
        assert!((1..=MAX_ORDER).contains(&order));
        let lo = self.order_start[order];
        let hi = if order == MAX_ORDER {
            self.trees.len()
        } else {
            self.order_start[order + 1]
        };
        lo..hi
    }

    /// Ids of all trees with order at most `max`.
    pub fn up_to_order(&self, max: usize) -> std::ops::Range<TreeId> {
        assert!((1..=MAX_ORDER).contains(&max));
        let hi = if max == MAX_ORDER {
            self.trees.len()
        } else {
            self.order_start[max + 1]
        };
        0..hi
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// The single-vertex tree.
    pub fn tau(&self) -> TreeId {
        0
    }
}

/// Shared tree table, built once.
pub fn tree_table() -> &'static TreeTable {
    static TABLE: OnceLock<TreeTable> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

/// Enumerate all canonical trees with order at most `max_order`.
/// Returns ids in table order. `max_order` beyond the verified range
/// is rejected.
pub fn enumerate_trees(max_order: usize) -> Result<Vec<TreeId>, String> {
    if max_order == 0 {
        return Err("max_order must be at least 1".into());
    }
    if max_order > MAX_ORDER {
        return Err(format!(
            "trees are only tabulated up to order {MAX_ORDER}, requested {max_order}"
        ));
    }
    Ok(tree_table().up_to_order(max_order).collect())
}

// Canonical sort key: order first, then the sorted child keys
// lexicographically. Leaves (more tau children) sort before chains.
#[derive(Clone, PartialEq, Eq)]
struct Key {
    order: usize,
    children: Vec<Key>,
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order
            .cmp(&other.order)
            .then_with(|| self.children.cmp(&other.children))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn build_table() -> TreeTable {
    // Stage 1: enumerate canonical trees order by order as child multisets.
    struct Raw {
        children: Vec<usize>,
        key: Key,
    }
    let mut raw: Vec<Raw> = vec![Raw {
        children: vec![],
        key: Key {
            order: 1,
            children: vec![],
        },
    }];
    let mut order_start = vec![0usize, 0usize];

    for order in 2..=MAX_ORDER {
        order_start.push(raw.len());
        let mut found: Vec<Raw> = Vec::new();
        // Child multisets drawn from already-built trees, non-decreasing ids
        // to avoid permuted duplicates; ids are sorted by key already.
        fn extend(
            raw: &[Raw],
            remaining: usize,
            min_id: usize,
            current: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if remaining == 0 {
                out.push(current.clone());
                return;
            }
            for id in min_id..raw.len() {
                let ord = raw[id].key.order;
                if ord > remaining {
                    break;
                }
                current.push(id);
                extend(raw, remaining - ord, id, current, out);
                current.pop();
            }
        }
        let mut multisets = Vec::new();
        extend(&raw, order - 1, 0, &mut Vec::new(), &mut multisets);
        for children in multisets {
            let key = Key {
                order,
                children: children.iter().map(|&c| raw[c].key.clone()).collect(),
            };
            found.push(Raw { children, key });
        }
        found.sort_by(|a, b| a.key.cmp(&b.key));
        found.dedup_by(|a, b| a.key == b.key);
        raw.extend(found);
    }

    // Stage 2: fill in sigma, gamma, names.
    let mut trees: Vec<Tree> = Vec::with_capacity(raw.len());
    for r in &raw {
        let order = r.key.order;
        // sigma = prod over distinct children of
        // (multiplicity)! * sigma(child)^multiplicity.
        let mut sigma: i128 = 1;
        let mut i = 0;
        while i < r.children.len() {
            let mut j = i;
            while j < r.children.len() && r.children[j] == r.children[i] {
                j += 1;
            }
            let mult = (j - i) as i128;
            let mut fact = 1i128;
            for k in 2..=mult {
                fact *= k;
            }
            sigma *= fact * trees[r.children[i]].sigma.pow(mult as u32);
            i = j;
        }
        let gamma = order as i128
            * r.children
                .iter()
                .map(|&c| trees[c].gamma)
                .product::<i128>();
        let name = if r.children.is_empty() {
            "t".to_string()
        } else {
            let mut s = String::from("[");
            let mut i = 0;
            while i < r.children.len() {
                let mut j = i;
                while j < r.children.len() && r.children[j] == r.children[i] {
                    j += 1;
                }
                let mult = j - i;
                s.push_str(&trees[r.children[i]].name);
                if mult > 1 {
                    s.push_str(&format!("^{mult}"));
                }
                i = j;
            }
            s.push(']');
            s
        };
        trees.push(Tree {
            children: r.children.clone(),
            order,
            sigma,
            gamma,
            valency: r.children.len(),
            name,
            root_subsets: vec![],
        });
    }

    // Stage 3: root-subset decompositions on a labelled representative.
    let key_to_id: HashMap<String, TreeId> = trees
        .iter()
        .enumerate()
        .map(|(i, t)| (t.name.clone(), i))
        .collect();
    for id in 0..trees.len() {
        let subsets = root_subsets(id, &trees, &key_to_id);
        trees[id].root_subsets = subsets;
    }

    TreeTable { trees, order_start }
}

/// Labelled form of tree `id`: parent index per vertex, vertex 0 = root.
fn labelled(id: TreeId, trees: &[Tree]) -> Vec<usize> {
    fn add(id: TreeId, parent: usize, trees: &[Tree], parents: &mut Vec<usize>) {
        let me = parents.len();
        parents.push(parent);
        for &c in &trees[id].children {
            add(c, me, trees, parents);
        }
    }
    let mut parents = Vec::new();
    add(id, usize::MAX, trees, &mut parents);
    parents
}

/// Canonical id of the subtree of the labelled tree rooted at `v`,
/// restricted to vertices in `mask`.
fn shape_of(
    v: usize,
    parents: &[usize],
    mask: u32,
    trees: &[Tree],
    key_to_id: &HashMap<String, TreeId>,
) -> TreeId {
    let child_ids: Vec<TreeId> = (0..parents.len())
        .filter(|&w| parents[w] == v && mask & (1 << w) != 0)
        .map(|w| shape_of(w, parents, mask, trees, key_to_id))
        .collect();
    let mut sorted = child_ids;
    sorted.sort();
    // Reconstruct the canonical name to look the shape up.
    let name = if sorted.is_empty() {
        "t".to_string()
    } else {
        let mut s = String::from("[");
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            s.push_str(&trees[sorted[i]].name);
            if j - i > 1 {
                s.push_str(&format!("^{}", j - i));
            }
            i = j;
        }
        s.push(']');
        s
    };
    key_to_id[&name]
}

fn root_subsets(
    id: TreeId,
    trees: &[Tree],
    key_to_id: &HashMap<String, TreeId>,
) -> Vec<(TreeId, Vec<TreeId>)> {
    let parents = labelled(id, trees);
    let n = parents.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask & 1 == 0 {
            continue; // must contain the root
        }
        // Closed under parents: every included non-root vertex has its
        // parent included.
        let ok = (1..n).all(|v| mask & (1 << v) == 0 || mask & (1 << parents[v]) != 0);
        if !ok {
            continue;
        }
        let sub = shape_of(0, &parents, mask, trees, key_to_id);
        // Components hang off excluded vertices whose parent is included;
        // each is the full descendant subtree (all-ones mask).
        let comps: Vec<TreeId> = (1..n)
            .filter(|&v| mask & (1 << v) == 0 && mask & (1 << parents[v]) != 0)
            .map(|v| shape_of(v, &parents, !0u32, trees, key_to_id))
            .collect();
        out.push((sub, comps));
    }
    out
}
