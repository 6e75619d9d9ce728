//! Triangulations of the space-time square Q = (0,1) x (0,1).
//!
//! Coordinates are (x, t). Meshes are conforming (no hanging nodes) and
//! immutable: refinement produces a new [`Mesh`] that records, per element,
//! the index of its parent in the previous mesh. [`MeshHierarchy`] stacks
//! such meshes so coarser levels stay addressable, which the control
//! discretization needs (piecewise constants on the next-coarser mesh).
//!
//! Uniform refinement is red refinement (four congruent children per
//! element); adaptive refinement is newest-vertex bisection with conforming
//! closure. Elements are stored counterclockwise with the convention that
//! the refinement edge is (v0, v1) and the peak vertex is v2; red children
//! are rotated so their longest edge takes that role.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Node coordinates as [x, t].
pub type Point = [f64; 2];

/// Boundary-side bitmasks for node tags.
pub const TAG_LEFT: u8 = 1; // x = 0
pub const TAG_RIGHT: u8 = 2; // x = 1
pub const TAG_BOTTOM: u8 = 4; // t = 0
pub const TAG_TOP: u8 = 8; // t = 1

/// Tolerance for detecting boundary nodes from coordinates.
pub const GEOM_TOL: f64 = 1e-12;

/// Conforming triangulation of the closed unit square.
#[derive(Clone, Debug)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<[usize; 3]>,
    boundary_tags: Vec<u8>,
    parent: Vec<usize>,
    level: usize,
}

impl Mesh {
    /// Builds a level-0 mesh from raw arrays, validating orientation,
    /// conformity, and boundary placement.
    pub fn from_raw(nodes: Vec<Point>, elements: Vec<[usize; 3]>) -> Result<Mesh> {
        let parent = (0..elements.len()).collect();
        let boundary_tags = compute_tags(&nodes);
        let mesh = Mesh {
            nodes,
            elements,
            boundary_tags,
            parent,
            level: 0,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn element(&self, k: usize) -> [usize; 3] {
        self.elements[k]
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    /// Bitmask of `TAG_*` sides the node lies on (0 for interior nodes).
    pub fn tags(&self, node: usize) -> u8 {
        self.boundary_tags[node]
    }

    /// Index of the element's parent in the previous-level mesh (itself at
    /// level 0).
    pub fn parent(&self, element: usize) -> usize {
        self.parent[element]
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Vertex coordinates of element `k`.
    pub fn corners(&self, k: usize) -> [Point; 3] {
        let [a, b, c] = self.elements[k];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn element_area(&self, k: usize) -> f64 {
        let [p, q, r] = self.corners(k);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    }

    /// Longest edge of element `k`.
    pub fn element_diameter(&self, k: usize) -> f64 {
        let [p, q, r] = self.corners(k);
        dist(p, q).max(dist(q, r)).max(dist(r, p))
    }

    fn validate(&self) -> Result<()> {
        for (k, &[a, b, c]) in self.elements.iter().enumerate() {
            let n = self.nodes.len();
            if a >= n || b >= n || c >= n {
                return Err(Error::MeshMismatch(format!(
                    "element {k} references a node out of range"
                )));
            }
            if a == b || b == c || c == a {
                return Err(Error::MeshMismatch(format!("element {k} repeats a vertex")));
            }
            let area = self.element_area(k);
            if area.abs() <= GEOM_TOL {
                return Err(Error::DegenerateElement { area });
            }
            if area < 0.0 {
                return Err(Error::MeshMismatch(format!(
                    "element {k} is clockwise (signed area {area:e})"
                )));
            }
        }
        // Conformity: an edge belongs to at most two elements, and an edge
        // used once must lie on the boundary of the square.
        let mut count: HashMap<(usize, usize), u32> = HashMap::new();
        for &[a, b, c] in &self.elements {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                *count.entry(edge_key(u, v)).or_insert(0) += 1;
            }
        }
        for (&(u, v), &n) in &count {
            if n > 2 {
                return Err(Error::MeshMismatch(format!(
                    "edge ({u},{v}) shared by {n} elements"
                )));
            }
            if n == 1 && self.boundary_tags[u] & self.boundary_tags[v] == 0 {
                return Err(Error::MeshMismatch(format!(
                    "edge ({u},{v}) is open but not on the boundary (hanging node?)"
                )));
            }
        }
        Ok(())
    }

    /// Writes the plain-text format: `nodes <N> elements <M>` header, then
    /// one `x t` line per node and one `i j k` line per element.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "nodes {} elements {}",
            self.nodes.len(),
            self.elements.len()
        );
        for p in &self.nodes {
            let _ = writeln!(out, "{:.16e} {:.16e}", p[0], p[1]);
        }
        for &[a, b, c] in &self.elements {
            let _ = writeln!(out, "{a} {b} {c}");
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Reads the plain-text format written by [`Mesh::write_text`].
    pub fn read_text(path: &Path) -> Result<Mesh> {
        let ctx = || path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse {
            context: ctx(),
            message: "empty file".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (n, m) = match fields.as_slice() {
            ["nodes", n, "elements", m] => {
                let parse = |s: &str| {
                    s.parse::<usize>().map_err(|e| Error::Parse {
                        context: ctx(),
                        message: format!("bad count {s:?}: {e}"),
                    })
                };
                (parse(n)?, parse(m)?)
            }
            _ => {
                return Err(Error::Parse {
                    context: ctx(),
                    message: format!("bad header {header:?}"),
                })
            }
        };
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse {
                context: ctx(),
                message: "missing node line".into(),
            })?;
            let mut it = line.split_whitespace().map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    context: ctx(),
                    message: format!("bad coordinate {s:?}: {e}"),
                })
            });
            match (it.next(), it.next(), it.next()) {
                (Some(x), Some(t), None) => nodes.push([x?, t?]),
                _ => {
                    return Err(Error::Parse {
                        context: ctx(),
                        message: format!("bad node line {line:?}"),
                    })
                }
            }
        }
        let mut elements = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| Error::Parse {
                context: ctx(),
                message: "missing element line".into(),
            })?;
            let mut it = line.split_whitespace().map(|s| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    context: ctx(),
                    message: format!("bad index {s:?}: {e}"),
                })
            });
            match (it.next(), it.next(), it.next(), it.next()) {
                (Some(a), Some(b), Some(c), None) => elements.push([a?, b?, c?]),
                _ => {
                    return Err(Error::Parse {
                        context: ctx(),
                        message: format!("bad element line {line:?}"),
                    })
                }
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse {
                context: ctx(),
                message: "trailing data after element list".into(),
            });
        }
        Mesh::from_raw(nodes, elements)
    }
}

/// Criss-cross mesh: an n x n grid of squares, each split into four
/// triangles by its center node. All elements are right isoceles with the
/// hypotenuse on the cell side, so the refinement-edge convention holds at
/// level 0.
pub fn make_initial_mesh(cells_per_side: usize) -> Mesh {
    assert!(cells_per_side >= 1, "cells_per_side must be positive");
    let c = cells_per_side;
    let s = 1.0 / c as f64;
    let grid = |i: usize, j: usize| j * (c + 1) + i;
    let mut nodes: Vec<Point> = Vec::with_capacity((c + 1) * (c + 1) + c * c);
    for j in 0..=c {
        for i in 0..=c {
            nodes.push([i as f64 * s, j as f64 * s]);
        }
    }
    let center_base = nodes.len();
    for j in 0..c {
        for i in 0..c {
            nodes.push([(i as f64 + 0.5) * s, (j as f64 + 0.5) * s]);
        }
    }
    let mut elements = Vec::with_capacity(4 * c * c);
    for j in 0..c {
        for i in 0..c {
            let sw = grid(i, j);
            let se = grid(i + 1, j);
            let nw = grid(i, j + 1);
            let ne = grid(i + 1, j + 1);
            let m = center_base + j * c + i;
            elements.push([sw, se, m]);
            elements.push([se, ne, m]);
            elements.push([ne, nw, m]);
            elements.push([nw, sw, m]);
        }
    }
    let boundary_tags = compute_tags(&nodes);
    let parent = (0..elements.len()).collect();
    Mesh {
        nodes,
        elements,
        boundary_tags,
        parent,
        level: 0,
    }
}

/// Red refinement: every element is split into four congruent children via
/// its edge midpoints. Children are rotated so the longest edge is the
/// refinement edge.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let mut nodes = mesh.nodes.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut elements = Vec::with_capacity(4 * mesh.num_elements());
    let mut parent = Vec::with_capacity(4 * mesh.num_elements());
    for (k, &[a, b, c]) in mesh.elements.iter().enumerate() {
        let mut mid = |u: usize, v: usize, nodes: &mut Vec<Point>| {
            *midpoints.entry(edge_key(u, v)).or_insert_with(|| {
                let p = midpoint(nodes[u], nodes[v]);
                nodes.push(p);
                nodes.len() - 1
            })
        };
        let mab = mid(a, b, &mut nodes);
        let mbc = mid(b, c, &mut nodes);
        let mca = mid(c, a, &mut nodes);
        for child in [[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mab, mbc, mca]] {
            elements.push(canonicalize(child, &nodes));
            parent.push(k);
        }
    }
    let boundary_tags = compute_tags(&nodes);
    Mesh {
        nodes,
        elements,
        boundary_tags,
        parent,
        level: mesh.level + 1,
    }
}

/// Newest-vertex bisection of the marked elements plus conforming closure.
///
/// The set of edges to split starts with the refinement edges of the marked
/// elements and grows until every element with a split edge also splits its
/// refinement edge; bisection then yields a conforming mesh in one pass
/// (two, three, or four children per affected element).
pub fn refine_marked(mesh: &Mesh, marked: &[usize]) -> Result<Mesh> {
    if marked.is_empty() {
        return Err(Error::EmptyMarkedSet);
    }
    for &k in marked {
        if k >= mesh.num_elements() {
            return Err(Error::MeshMismatch(format!(
                "marked element {k} out of range ({} elements)",
                mesh.num_elements()
            )));
        }
    }
    let mut split: HashSet<(usize, usize)> = HashSet::new();
    for &k in marked {
        let [a, b, _] = mesh.elements[k];
        split.insert(edge_key(a, b));
    }
    // Closure: an element any of whose edges splits must split its
    // refinement edge. Only original edges ever enter the set, so the loop
    // reaches a fixpoint.
    loop {
        let mut changed = false;
        for &[a, b, c] in &mesh.elements {
            let e0 = edge_key(a, b);
            if !split.contains(&e0)
                && (split.contains(&edge_key(b, c)) || split.contains(&edge_key(c, a)))
            {
                split.insert(e0);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Assign midpoint node indices in sorted edge order for determinism.
    let mut nodes = mesh.nodes.clone();
    let mut split_edges: Vec<(usize, usize)> = split.iter().copied().collect();
    split_edges.sort_unstable();
    let mut midpoint_of: HashMap<(usize, usize), usize> = HashMap::new();
    for &(u, v) in &split_edges {
        let p = midpoint(nodes[u], nodes[v]);
        nodes.push(p);
        midpoint_of.insert((u, v), nodes.len() - 1);
    }

    let mut elements = Vec::new();
    let mut parent = Vec::new();
    let mut emit = |tri: [usize; 3], k: usize, elements: &mut Vec<[usize; 3]>| {
        elements.push(tri);
        parent.push(k);
    };
    for (k, &[a, b, c]) in mesh.elements.iter().enumerate() {
        match midpoint_of.get(&edge_key(a, b)) {
            None => emit([a, b, c], k, &mut elements),
            Some(&m) => {
                // Children keep an original edge as refinement edge and the
                // new vertex as peak; bisect again if that edge splits too.
                for child in [[c, a, m], [b, c, m]] {
                    let [u, v, w] = child;
                    match midpoint_of.get(&edge_key(u, v)) {
                        None => emit(child, k, &mut elements),
                        Some(&m2) => {
                            emit([w, u, m2], k, &mut elements);
                            emit([v, w, m2], k, &mut elements);
                        }
                    }
                }
            }
        }
    }
    let boundary_tags = compute_tags(&nodes);
    Ok(Mesh {
        nodes,
        elements,
        boundary_tags,
        parent,
        level: mesh.level + 1,
    })
}

/// (h_max, h_min): extremes of the element diameter (longest edge).
pub fn mesh_size(mesh: &Mesh) -> (f64, f64) {
    let mut h_max = 0.0f64;
    let mut h_min = f64::INFINITY;
    for k in 0..mesh.num_elements() {
        let h = mesh.element_diameter(k);
        h_max = h_max.max(h);
        h_min = h_min.min(h);
    }
    (h_max, h_min)
}

/// Ordered stack of meshes related by refinement.
#[derive(Clone, Debug)]
pub struct MeshHierarchy {
    meshes: Vec<Mesh>,
}

impl MeshHierarchy {
    pub fn new(initial: Mesh) -> Self {
        MeshHierarchy {
            meshes: vec![initial],
        }
    }

    pub fn num_levels(&self) -> usize {
        self.meshes.len()
    }

    pub fn mesh(&self, level: usize) -> &Mesh {
        &self.meshes[level]
    }

    pub fn finest(&self) -> &Mesh {
        self.meshes.last().expect("hierarchy is never empty")
    }

    pub fn finest_level(&self) -> usize {
        self.meshes.len() - 1
    }

    /// Appends the red refinement of the finest mesh.
    pub fn refine_uniformly(&mut self) {
        self.meshes.push(refine_uniform(self.finest()));
    }

    /// Appends the newest-vertex bisection of the finest mesh.
    pub fn refine_marked(&mut self, marked: &[usize]) -> Result<()> {
        let refined = refine_marked(self.finest(), marked)?;
        self.meshes.push(refined);
        Ok(())
    }

    /// Fine elements of `level` grouped by parent element at `level - 1`.
    pub fn children_of_level(&self, level: usize) -> Vec<Vec<usize>> {
        assert!(level >= 1, "level 0 has no parent mesh");
        let fine = &self.meshes[level];
        let mut children = vec![Vec::new(); self.meshes[level - 1].num_elements()];
        for k in 0..fine.num_elements() {
            children[fine.parent(k)].push(k);
        }
        children
    }
}

fn compute_tags(nodes: &[Point]) -> Vec<u8> {
    nodes
        .iter()
        .map(|&[x, t]| {
            let mut tag = 0;
            if x.abs() <= GEOM_TOL {
                tag |= TAG_LEFT;
            }
            if (x - 1.0).abs() <= GEOM_TOL {
                tag |= TAG_RIGHT;
            }
            if t.abs() <= GEOM_TOL {
                tag |= TAG_BOTTOM;
            }
            if (t - 1.0).abs() <= GEOM_TOL {
                tag |= TAG_TOP;
            }
            tag
        })
        .collect()
}

fn edge_key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn midpoint(p: Point, q: Point) -> Point {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

fn dist(p: Point, q: Point) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Rotates the vertex triple so the longest edge becomes (v0, v1); ties go
/// to the earliest edge in (v0v1, v1v2, v2v0) order. Rotation preserves
/// orientation.
fn canonicalize(tri: [usize; 3], nodes: &[Point]) -> [usize; 3] {
    let [a, b, c] = tri;
    let l0 = dist(nodes[a], nodes[b]);
    let l1 = dist(nodes[b], nodes[c]);
    let l2 = dist(nodes[c], nodes[a]);
    if l1 > l0 && l1 >= l2 {
        [b, c, a]
    } else if l2 > l0 && l2 > l1 {
        [c, a, b]
    } else {
        [a, b, c]
    }
}
