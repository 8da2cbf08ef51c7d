//! Finite truncations of the Cayley tree of order `k`.
//!
//! The tree of order `k` is the cycle-free graph in which every vertex has
//! exactly `k + 1` neighbors. A truncation keeps the ball of radius `depth`
//! around a distinguished root. In the rooted orientation the root carries
//! `k + 1` children and every other interior vertex carries `k`, so that the
//! successor set `S(x)` is well defined at every vertex.
//!
//! Vertices are indexed breadth-first, generation by generation, children in
//! creation order. This indexing is part of the stable interface: spheres and
//! balls are contiguous index ranges, and configuration enumeration order
//! downstream is defined in terms of it.

use crate::error::{GibbsError, Result};

/// Vertex handle: the breadth-first index into the truncation.
pub type VertexId = usize;

/// Default cap on the number of vertices a truncation may hold.
pub const DEFAULT_MAX_VERTICES: u128 = 10_000_000;

/// A rooted truncation of the Cayley tree of order `k`.
#[derive(Debug, Clone)]
pub struct CayleyTree {
    k: usize,
    depth: usize,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    generation: Vec<usize>,
    /// `sphere_start[n]` is the first index of the sphere `W_n`;
    /// `sphere_start[depth + 1]` is the total vertex count.
    sphere_start: Vec<usize>,
}

impl CayleyTree {
    /// Build the truncation of the order-`k` tree at the given depth.
    pub fn build(k: usize, depth: usize) -> Result<Self> {
        Self::build_with_limit(k, depth, DEFAULT_MAX_VERTICES)
    }

    /// Build with an explicit cap on the vertex count.
    pub fn build_with_limit(k: usize, depth: usize, max_vertices: u128) -> Result<Self> {
        if k == 0 {
            return Err(GibbsError::InvalidParameter(
                "tree order k must be at least 1".into(),
            ));
        }
        let total = ball_count(k, depth)
            .filter(|&t| t <= max_vertices)
            .ok_or_else(|| GibbsError::Capacity {
                what: format!("Cayley tree of order {k} to depth {depth}"),
                needed: ball_count(k, depth).unwrap_or(u128::MAX),
                limit: max_vertices,
            })?;
        let total = total as usize;

        let mut parent = vec![None; total];
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); total];
        let mut generation = vec![0usize; total];
        let mut sphere_start = Vec::with_capacity(depth + 2);

        sphere_start.push(0);
        let mut next = 1usize;
        for n in 0..depth {
            sphere_start.push(next);
            let (start, end) = (sphere_start[n], sphere_start[n + 1]);
            for (offset, child_list) in children[start..end].iter_mut().enumerate() {
                let v = start + offset;
                let fanout = if v == 0 { k + 1 } else { k };
                for _ in 0..fanout {
                    parent[next] = Some(v);
                    generation[next] = n + 1;
                    child_list.push(next);
                    next += 1;
                }
            }
        }
        sphere_start.push(next);
        debug_assert_eq!(next, total);

        Ok(CayleyTree {
            k,
            depth,
            parent,
            children,
            generation,
            sphere_start,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Total number of vertices, `|V_depth|`.
    pub fn vertex_count(&self) -> usize {
        self.sphere_start[self.depth + 1]
    }

    pub fn contains(&self, x: VertexId) -> bool {
        x < self.vertex_count()
    }

    fn check_vertex(&self, x: VertexId) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(GibbsError::UnknownVertex(x))
        }
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n <= self.depth {
            Ok(())
        } else {
            Err(GibbsError::SphereOutOfRange {
                n,
                depth: self.depth,
            })
        }
    }

    /// Index range of the sphere `W_n`. Spheres are contiguous by construction.
    pub fn sphere_range(&self, n: usize) -> Result<std::ops::Range<VertexId>> {
        self.check_level(n)?;
        Ok(self.sphere_start[n]..self.sphere_start[n + 1])
    }

    /// Vertices at distance exactly `n` from the root, in index order.
    pub fn sphere(&self, n: usize) -> Result<Vec<VertexId>> {
        Ok(self.sphere_range(n)?.collect())
    }

    /// Vertices at distance at most `n` from the root, in index order.
    pub fn ball(&self, n: usize) -> Result<Vec<VertexId>> {
        self.check_level(n)?;
        Ok((0..self.sphere_start[n + 1]).collect())
    }

    /// `|V_n|`.
    pub fn ball_size(&self, n: usize) -> Result<usize> {
        self.check_level(n)?;
        Ok(self.sphere_start[n + 1])
    }

    /// `|W_n|`.
    pub fn sphere_size(&self, n: usize) -> Result<usize> {
        Ok(self.sphere_range(n)?.len())
    }

    /// Direct successors `S(x)`: the children of `x` away from the root.
    pub fn successors(&self, x: VertexId) -> Result<&[VertexId]> {
        self.check_vertex(x)?;
        Ok(&self.children[x])
    }

    /// Parent of `x`, `None` at the root.
    pub fn parent(&self, x: VertexId) -> Result<Option<VertexId>> {
        self.check_vertex(x)?;
        Ok(self.parent[x])
    }

    pub fn generation(&self, x: VertexId) -> Result<usize> {
        self.check_vertex(x)?;
        Ok(self.generation[x])
    }

    /// Edge count of the unique path between `x` and `y`.
    pub fn distance(&self, x: VertexId, y: VertexId) -> Result<usize> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        let (mut a, mut b) = (x, y);
        let mut steps = 0usize;
        while self.generation[a] > self.generation[b] {
            a = self.parent[a].expect("non-root vertex has a parent");
            steps += 1;
        }
        while self.generation[b] > self.generation[a] {
            b = self.parent[b].expect("non-root vertex has a parent");
            steps += 1;
        }
        while a != b {
            a = self.parent[a].expect("non-root vertex has a parent");
            b = self.parent[b].expect("non-root vertex has a parent");
            steps += 2;
        }
        Ok(steps)
    }

    /// All edges as `(parent, child)` pairs, in child index order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (1..self.vertex_count()).map(|v| (self.parent[v].expect("non-root"), v))
    }

    /// Edges with both endpoints inside the ball `V_n`.
    pub fn interior_edges(&self, n: usize) -> Result<Vec<(VertexId, VertexId)>> {
        let size = self.ball_size(n)?;
        Ok((1..size)
            .map(|v| (self.parent[v].expect("non-root"), v))
            .collect())
    }

    /// Edges crossing the cut between `W_n` and `W_{n+1}`, as `(inner, outer)`.
    pub fn cut_edges(&self, n: usize) -> Result<Vec<(VertexId, VertexId)>> {
        self.check_level(n + 1)?;
        Ok(self
            .sphere_range(n + 1)?
            .map(|v| (self.parent[v].expect("non-root"), v))
            .collect())
    }
}

/// `|V_depth|` for the order-`k` truncation, `None` on overflow.
fn ball_count(k: usize, depth: usize) -> Option<u128> {
    let k = k as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = 1;
    for n in 1..=depth as u128 {
        sphere = if n == 1 {
            k.checked_add(1)?
        } else {
            sphere.checked_mul(k)?
        };
        total = total.checked_add(sphere)?;
    }
    Some(total)
}
