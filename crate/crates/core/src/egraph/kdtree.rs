use serde::Serialize;

use super::{dist_sq, PointCloud};
use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug)]
struct Node {
    point: usize,
    axis: usize,
    split: f64,
    left: Option<usize>,
    right: Option<usize>,
}

/// Median-split kd-tree with cycling axes. Points whose coordinate equals
/// the split value go to the right subtree, so every left-subtree point is
/// strictly below its parent's split.
#[derive(Clone, Debug)]
pub struct KdTree<'a> {
    cloud: &'a PointCloud,
    nodes: Vec<Node>,
    root: Option<usize>,
}

/// Work done by one range query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub visited_nodes: u64,
    pub distance_evaluations: u64,
}

impl<'a> KdTree<'a> {
    pub fn build(cloud: &'a PointCloud) -> Self {
        let mut tree = KdTree {
            cloud,
            nodes: Vec::with_capacity(cloud.len()),
            root: None,
        };
        let mut order: Vec<usize> = (0..cloud.len()).collect();
        // (range start, range end, depth, parent slot to patch)
        let mut work = vec![(0usize, order.len(), 0usize, None::<(usize, bool)>)];
        while let Some((lo, hi, depth, parent)) = work.pop() {
            if lo == hi {
                continue;
            }
            let axis = depth % cloud.dim();
            let slice = &mut order[lo..hi];
            slice.sort_unstable_by(|&a, &b| {
                cloud.point(a)[axis]
                    .total_cmp(&cloud.point(b)[axis])
                    .then(a.cmp(&b))
            });
            let coord = |k: usize| cloud.point(slice[k])[axis];
            let mut m = slice.len() / 2;
            while m > 0 && coord(m - 1) == coord(m) {
                m -= 1;
            }
            let id = tree.nodes.len();
            tree.nodes.push(Node {
                point: slice[m],
                axis,
                split: coord(m),
                left: None,
                right: None,
            });
            match parent {
                None => tree.root = Some(id),
                Some((p, true)) => tree.nodes[p].left = Some(id),
                Some((p, false)) => tree.nodes[p].right = Some(id),
            }
            work.push((lo + m + 1, hi, depth + 1, Some((id, false))));
            work.push((lo, lo + m, depth + 1, Some((id, true))));
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of levels; 0 for an empty tree.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack: Vec<(usize, usize)> = self.root.map(|r| (r, 1)).into_iter().collect();
        while let Some((id, d)) = stack.pop() {
            best = best.max(d);
            let node = &self.nodes[id];
            stack.extend(node.left.map(|c| (c, d + 1)));
            stack.extend(node.right.map(|c| (c, d + 1)));
        }
        best
    }

    /// Point indices in symmetric order.
    pub fn in_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = Vec::new();
        let mut cur = self.root;
        while cur.is_some() || !stack.is_empty() {
            while let Some(id) = cur {
                stack.push(id);
                cur = self.nodes[id].left;
            }
            let id = stack.pop().expect("stack non-empty");
            out.push(self.nodes[id].point);
            cur = self.nodes[id].right;
        }
        out
    }

    /// Indices of all points at distance strictly below `radius` from
    /// `center`, in ascending order.
    pub fn range_query(&self, center: &[f64], radius: f64) -> Result<(Vec<usize>, QueryStats)> {
        if center.len() != self.cloud.dim() {
            return Err(domain(format!(
                "query has {} coordinates, cloud has {}",
                center.len(),
                self.cloud.dim()
            )));
        }
        if !(radius > 0.0) {
            return Err(domain(format!("radius {radius} must be positive")));
        }
        let r_sq = radius * radius;
        let mut stats = QueryStats::default();
        let mut hits = Vec::new();
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(id) = stack.pop() {
            let node = self.nodes[id];
            stats.visited_nodes += 1;
            stats.distance_evaluations += 1;
            if dist_sq(center, self.cloud.point(node.point)) < r_sq {
                hits.push(node.point);
            }
            let diff = center[node.axis] - node.split;
            // the far side can only hold hits if the slab gap is below the radius
            let far_reachable = diff * diff < r_sq;
            let (near, far) = if diff < 0.0 {
                (node.left, node.right)
            } else {
                (node.right, node.left)
            };
            stack.extend(near);
            if far_reachable {
                stack.extend(far);
            }
        }
        hits.sort_unstable();
        Ok((hits, stats))
    }
}
