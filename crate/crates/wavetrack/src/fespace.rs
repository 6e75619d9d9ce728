//! Degree-of-freedom maps for the P1 spaces and the piecewise-constant
//! control space.
//!
//! Essential boundary conditions are imposed by elimination: a constrained
//! node never receives an unknown. The trial space X vanishes on x = 0,
//! x = 1, and t = 0; the test space Y vanishes on x = 0, x = 1, and t = 1.
//! A node carrying any essential tag of the space is excluded, so corner
//! nodes are constrained in both spaces.

use crate::mesh::{Mesh, MeshHierarchy, TAG_BOTTOM, TAG_LEFT, TAG_RIGHT, TAG_TOP};
use crate::{Error, Result};

/// Which essential conditions a P1 space carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    /// Zero on x ∈ {0,1} and on t = 0 (state/trial space).
    TrialX,
    /// Zero on x ∈ {0,1} and on t = 1 (adjoint/test space).
    TestY,
    /// All nodes carry unknowns.
    Free,
}

impl SpaceKind {
    fn essential_tags(self) -> u8 {
        match self {
            SpaceKind::TrialX => TAG_LEFT | TAG_RIGHT | TAG_BOTTOM,
            SpaceKind::TestY => TAG_LEFT | TAG_RIGHT | TAG_TOP,
            SpaceKind::Free => 0,
        }
    }
}

/// Bijection between unconstrained mesh nodes and unknown indices 0..M-1.
#[derive(Clone, Debug)]
pub struct DofMap {
    kind: SpaceKind,
    node_to_dof: Vec<Option<usize>>,
    dof_to_node: Vec<usize>,
}

impl DofMap {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Number of unknowns M.
    pub fn num_dofs(&self) -> usize {
        self.dof_to_node.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.node_to_dof.len()
    }

    /// Unknown index of a node, or None if the node is constrained.
    pub fn dof_of(&self, node: usize) -> Option<usize> {
        self.node_to_dof[node]
    }

    /// Mesh node carrying unknown `dof`.
    pub fn node_of(&self, dof: usize) -> usize {
        self.dof_to_node[dof]
    }

    /// Expands a coefficient vector to per-node values, constrained nodes
    /// filled with zero.
    pub fn scatter_to_nodes(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.num_dofs() {
            return Err(Error::DimensionMismatch {
                expected: self.num_dofs(),
                got: coeffs.len(),
            });
        }
        let mut nodal = vec![0.0; self.node_to_dof.len()];
        for (dof, &node) in self.dof_to_node.iter().enumerate() {
            nodal[node] = coeffs[dof];
        }
        Ok(nodal)
    }
}

/// Builds the DoF map of `kind` on `mesh`, numbering unconstrained nodes in
/// node order.
pub fn build_dofmap(mesh: &Mesh, kind: SpaceKind) -> DofMap {
    let essential = kind.essential_tags();
    let mut node_to_dof = Vec::with_capacity(mesh.num_nodes());
    let mut dof_to_node = Vec::new();
    for node in 0..mesh.num_nodes() {
        if mesh.tags(node) & essential == 0 {
            node_to_dof.push(Some(dof_to_node.len()));
            dof_to_node.push(node);
        } else {
            node_to_dof.push(None);
        }
    }
    DofMap {
        kind,
        node_to_dof,
        dof_to_node,
    }
}

/// Piecewise-constant control space on the mesh one level below the fine
/// state/test mesh (h = H/2).
#[derive(Clone, Debug)]
pub struct ControlSpace {
    coarse_level: usize,
    num_controls: usize,
}

impl ControlSpace {
    /// Hierarchy level the controls live on.
    pub fn coarse_level(&self) -> usize {
        self.coarse_level
    }

    /// One control unknown per coarse element: N_H.
    pub fn num_controls(&self) -> usize {
        self.num_controls
    }
}

/// Control space on level `fine_level - 1` of the hierarchy.
pub fn build_control_space(hierarchy: &MeshHierarchy, fine_level: usize) -> Result<ControlSpace> {
    if fine_level == 0 {
        return Err(Error::NoCoarserMesh);
    }
    if fine_level >= hierarchy.num_levels() {
        return Err(Error::MeshMismatch(format!(
            "fine level {fine_level} not in hierarchy of {} levels",
            hierarchy.num_levels()
        )));
    }
    let coarse_level = fine_level - 1;
    Ok(ControlSpace {
        coarse_level,
        num_controls: hierarchy.mesh(coarse_level).num_elements(),
    })
}
